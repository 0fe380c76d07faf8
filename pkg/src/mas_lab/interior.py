"""Interior (cavity) circular problem: a line current inside a hole in an infinitely permeable medium.

Only traditional fundamental solutions ``ln(R_l / d_ref)`` are used, since
``ln(R / rho)`` is singular at the origin of the cavity. The Neumann data
carries the extra ``-1 / (2 pi rho_cyl)`` term that makes it self-consistent.
Auxiliary sources sit outside the cavity at ``(rho_aux, 2 pi l / N)``.
"""

import math
import warnings
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import spectral
from .common import (
    CRITICAL,
    PHYSICAL,
    LogValue,
    MasSolution,
    aliased_cosine_series,
    alternation_score,
    as_currents,
    checked_exp,
    classify_regime,
    mas_spectrum_log10,
    one_minus_pow,
    polar_grid,
    spectrum_from_log10,
)
from .exceptions import ConvergenceWarning, DomainError
from .exterior import TWO_PI, _require_odd, oscillating_part, smooth_part
from .kernels import periodic_trapezoid

# fixed probe grid for the constancy checks
PROBE_RHO_RATIOS = tuple(round(0.1 * k, 1) for k in range(1, 10))
PROBE_PHI_DEG = (0.0, 60.0, 120.0, 180.0)

SOLVERS = ("dft_exact", "circulant", "dense_solve", "least_squares")


@dataclass(frozen=True)
class InteriorCircularProblem:
    rho_cyl: float
    rho_fil: float
    rho_aux: float
    N: int
    d_ref: float = 1.0

    def __post_init__(self):
        if not (0 < self.rho_fil < self.rho_cyl < self.rho_aux):
            raise DomainError(
                "interior problem needs 0 < rho_fil < rho_cyl < rho_aux, got "
                f"rho_fil={self.rho_fil}, rho_cyl={self.rho_cyl}, rho_aux={self.rho_aux}"
            )
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"N must be an integer >= 3, got {self.N}")
        if self.d_ref <= 0:
            raise DomainError("d_ref must be positive")
        object.__setattr__(self, "N", int(self.N))

    @property
    def rho_cri(self):
        return self.rho_cyl**2 / self.rho_fil

    @property
    def t(self):
        """rho_aux / rho_cri"""
        return self.rho_aux / self.rho_cri

    @property
    def A(self):
        """rho_fil / rho_cyl"""
        return self.rho_fil / self.rho_cyl

    @property
    def Q(self):
        """rho_cyl / rho_aux"""
        return self.rho_cyl / self.rho_aux

    @property
    def theoretical_only(self):
        # rho_aux = d_ref removes the divergent constant, but only by accident of units
        return math.isclose(self.rho_aux, self.d_ref, rel_tol=1e-12)

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


def regime(p):
    return classify_regime(p.t)


# ---------------------------------------------------------------- assembly


def _row_entries(p, dphi):
    q = p.rho_aux / p.rho_cyl
    c = np.cos(dphi)
    return (1.0 - q * c) / (1.0 + q * q - 2.0 * q * c)


def _rhs_entries(p, phi):
    s = p.A
    c = np.cos(phi)
    return 1.0 - (1.0 - s * c) / (1.0 + s * s - 2.0 * s * c)


def neumann_data(p, phi):
    """``-dA_inc/d rho - 1 / (2 pi rho_cyl)`` on the cavity wall, per unit source current."""
    rc, rf = p.rho_cyl, p.rho_fil
    c = np.cos(phi)
    return ((rc - rf * c) / (rc * rc + rf * rf - 2.0 * rc * rf * c) - 1.0 / rc) / TWO_PI


def assemble_system_interior(p):
    """First row and rhs of the normalised circulant system.

    Row ``p`` reads ``sum_l B'_{l-p} I_l = D_p + 1``, i.e. ``-2 pi rho_cyl``
    times the Neumann data, on the folded index so the row is exactly even.
    """
    k = np.arange(p.N)
    ang = TWO_PI * np.minimum(k, p.N - k) / p.N
    return _row_entries(p, ang), _rhs_entries(p, ang)


def assemble_rectangular_interior(p, M):
    if M < p.N:
        raise DomainError(f"need M >= N, got M={M}, N={p.N}")
    phi_c = TWO_PI * np.arange(M) / M
    phi_s = TWO_PI * np.arange(p.N) / p.N
    return _row_entries(p, phi_s[None, :] - phi_c[:, None]), _rhs_entries(p, phi_c)


# ---------------------------------------------------------- exact spectra


def matrix_spectrum_exact_interior(p):
    """Closed-form DFT of the first row: ``-(s^(N-k) + s^k) / (2 (1 - s^N))``, ``s = rho_cyl / rho_aux``."""
    n, s = p.N, p.Q
    m = np.arange(n)
    k = np.minimum(m, n - m)
    den = one_minus_pow(s, n)
    out = -0.5 * (s ** (n - k) + s**k) / den
    out[0] = -(s**n) / den
    return out


def condition_number_exact_interior(p):
    b = np.abs(matrix_spectrum_exact_interior(p))
    return float(b.max() / b.min())


def condition_number_asymptotic_interior(p):
    """Large-N condition number ``(1/2)(rho_aux/rho_cyl)**(N-1)`` as ``(value, log10)``."""
    lg = math.log10(0.5) + (p.N - 1) * math.log10(p.rho_aux / p.rho_cyl)
    return LogValue(lg).value, lg


def spectrum_exact_interior_log10(p):
    return mas_spectrum_log10(p.N, p.A, p.Q, p.N * math.log(p.t))


def spectrum_exact_interior(p):
    """Exact ``I^(m) / I``; OverflowError past 1e300 (use the log10 form)."""
    return spectrum_from_log10(spectrum_exact_interior_log10(p))


def spectrum_asymptotic_interior(p):
    """Large-N spectrum ``t**|m| / N`` on ``|m| <= (N-1)/2``, folded to ``0..N-1``."""
    m = np.arange(p.N)
    k = np.minimum(m, p.N - m)
    out = np.exp(k * math.log(p.t)) / p.N
    out[0] = checked_exp(p.N * math.log(p.t), "mean term") / p.N
    return out


# ---------------------------------------------------------------- currents


def currents_interior(p, solver="dft_exact", M=None, dense_method="auto"):
    if solver == "dft_exact":
        spec = spectrum_exact_interior(p)
        return MasSolution(spectral.idft(spec), spec, "dft_exact")
    if solver == "circulant":
        row, rhs = assemble_system_interior(p)
        res = spectral.solve_circulant(row, rhs)
        return MasSolution(res.x, res.spectrum.real, "circulant", residual=res.residual)
    if solver == "dense_solve":
        row, rhs = assemble_system_interior(p)
        res = spectral.solve_dense(spectral.circulant_matrix(row), rhs, method=dense_method)
        return MasSolution(res.x, spectral.dft(res.x).real, "dense_solve", residual=res.residual, method=res.method)
    if solver == "least_squares":
        matrix, rhs = assemble_rectangular_interior(p, p.N if M is None else M)
        res = spectral.solve_least_squares(matrix, rhs)
        return MasSolution(
            res.x, spectral.dft(res.x).real, "least_squares", residual=res.residual, method=res.method,
            extra={"M": matrix.shape[0], "rank_deficient": res.rank_deficient},
        )
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def mean_term_interior(p):
    return checked_exp(p.N * math.log(p.t), "mean term") / p.N


def currents_asymptotic_interior(p):
    """Large-N currents with ``t = rho_aux / rho_cri`` (odd N only)."""
    _require_odd(p.N)
    kind = regime(p).kind
    if kind == PHYSICAL:
        return smooth_part(p.t, p.N)
    if kind == CRITICAL:
        out = np.zeros(p.N)
        out[0] = 1.0
        return out
    return mean_term_interior(p) + oscillating_part(p.t, p.N)


# -------------------------------------------------------------- potentials


def potential_incident_interior(p, rho, phi):
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    r2 = rho * rho + p.rho_fil**2 - 2.0 * rho * p.rho_fil * np.cos(phi)
    if np.any(r2 <= 0.0):
        raise DomainError("observation point coincides with the line current")
    return -0.5 * np.log(r2 / p.d_ref**2) / TWO_PI


def potential_exact_interior(p, rho, phi, A0=0.0):
    """Exact scattered potential up to the arbitrary constant ``A0``.

    Defined for ``rho < rho_cri``; only ``rho <= rho_cyl`` is physical.
    """
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    if np.any(rho < 0) or np.any(rho >= p.rho_cri):
        raise DomainError("exact interior potential needs 0 <= rho < rho_cri")
    rc = p.rho_cri
    d2 = rho * rho + rc * rc - 2.0 * rho * rc * np.cos(phi)
    return A0 - 0.5 * np.log(d2 / (rc * rc)) / TWO_PI


def potential_mas_interior(p, sol, rho, phi):
    """Direct sum ``-(1/2 pi) sum_l I_l ln(R_l / d_ref)``; N comes from the current vector."""
    cur = as_currents(sol)
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    if np.any(rho >= p.rho_aux):
        raise DomainError("MAS interior potential needs rho < rho_aux")
    ang = TWO_PI * np.arange(cur.size) / cur.size
    x = (rho * np.cos(phi))[..., None]
    y = (rho * np.sin(phi))[..., None]
    r2 = (x - p.rho_aux * np.cos(ang)) ** 2 + (y - p.rho_aux * np.sin(ang)) ** 2
    return -(0.5 * np.log(r2 / p.d_ref**2) @ cur) / TWO_PI


def potential_mas_spectral_interior(p, sol, rho, phi, tol=1e-15):
    """Constant divergent term plus the series in ``(rho / rho_aux)**m``."""
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    if np.any(rho >= p.rho_aux):
        raise DomainError("spectral MAS potential needs rho < rho_aux")
    if np.max(rho) / p.rho_aux > 0.99:
        warnings.warn("rho / rho_aux > 0.99: series converges slowly", ConvergenceWarning, stacklevel=2)
    spec = np.real(np.asarray(getattr(sol, "spectrum", sol)))
    series, _ = aliased_cosine_series(spec, rho / p.rho_aux, phi, tol=tol)
    const = -spec.size * spec[0] * math.log(p.rho_aux / p.d_ref) / TWO_PI
    return const + series / TWO_PI


def divergent_part_log10(p):
    """``-(1/2 pi) N I^(0) ln(rho_aux / d_ref)`` as a LogValue (exact ``I^(0)``)."""
    ln_ratio = math.log(p.rho_aux / p.d_ref)
    if ln_ratio == 0.0:
        return LogValue(-math.inf, 0)
    lg = spectrum_exact_interior_log10(p)[0] + math.log10(p.N) + math.log10(abs(ln_ratio) / TWO_PI)
    return LogValue(float(lg), -1 if ln_ratio > 0 else 1)


def divergent_part(p):
    """Observation-independent constant of the MAS potential; ``inf`` past 1e300."""
    lv = divergent_part_log10(p)
    return 0.0 if lv.sign == 0 else lv.value


# ------------------------------------------------------ boundary checks


def self_consistency_residual_interior(p, nodes=4096):
    """Trapezoid value of the loop integral of the Neumann data times ``rho_cyl`` (should vanish)."""
    return periodic_trapezoid(lambda phi: neumann_data(p, phi) * p.rho_cyl, nodes)


def probe_points_interior(p):
    return polar_grid(np.array(PROBE_RHO_RATIOS) * p.rho_cyl, PROBE_PHI_DEG)


def _gradient_fd(f, x, y, h):
    def at(dx, dy):
        xx, yy = x + dx, y + dy
        return f(np.hypot(xx, yy), np.arctan2(yy, xx))

    gx = (at(h, 0.0) - at(-h, 0.0)) / (2.0 * h)
    gy = (at(0.0, h) - at(0.0, -h)) / (2.0 * h)
    return gx, gy


@dataclass
class HFieldReport:
    N1: int
    N2: int
    max_grad_diff: float  # max |grad A(N1) - grad A(N2)| over the probe grid
    grad_scale: float  # max |grad A(N1)| over the probe grid
    offset_mean: float  # mean of A(N1) - A(N2)
    offset_std: float
    divergent_diff: float  # divergent_part(N1) - divergent_part(N2)

    @property
    def relative_grad_diff(self):
        return self.max_grad_diff / self.grad_scale

    def to_dict(self):
        d = asdict(self)
        d["relative_grad_diff"] = self.relative_grad_diff
        return d


def h_field_consistency(p, N1, N2, h=None):
    """Compare two discretisations on the fixed probe grid.

    Gradients come from central differences of the direct-sum MAS potential
    with step ``h`` (default ``1e-4 rho_cyl``); the potential offset statistics
    show whether the two differ by a constant.
    """
    h = 1e-4 * p.rho_cyl if h is None else h
    p1, p2 = p.with_(N=N1), p.with_(N=N2)
    s1, s2 = currents_interior(p1), currents_interior(p2)
    r, ph = probe_points_interior(p)
    x, y = r * np.cos(ph), r * np.sin(ph)
    g1 = _gradient_fd(lambda rr, pp: potential_mas_interior(p1, s1, rr, pp), x, y, h)
    g2 = _gradient_fd(lambda rr, pp: potential_mas_interior(p2, s2, rr, pp), x, y, h)
    diff = np.hypot(g1[0] - g2[0], g1[1] - g2[1])
    offset = potential_mas_interior(p1, s1, r, ph) - potential_mas_interior(p2, s2, r, ph)
    return HFieldReport(
        N1=int(N1),
        N2=int(N2),
        max_grad_diff=float(diff.max()),
        grad_scale=float(np.hypot(*g1).max()),
        offset_mean=float(offset.mean()),
        offset_std=float(offset.std()),
        divergent_diff=float(divergent_part(p1) - divergent_part(p2)),
    )


def convergence_error_interior(p, sol=None):
    """Max over the probe grid of ``|A_mas - A_exact(A0=0)|`` and the exact scale."""
    sol = currents_interior(p) if sol is None else sol
    r, ph = probe_points_interior(p)
    exact = potential_exact_interior(p, r, ph)
    return float(np.abs(potential_mas_interior(p, sol, r, ph) - exact).max()), float(np.abs(exact).max())


@dataclass
class InteriorDiagnostics:
    regime: str
    t: float
    N: int
    provenance: str
    current_mean: float
    current_max: float
    mean_term: float
    alternation_score: float
    kappa_computed: float
    kappa_asymptotic: float
    kappa_asymptotic_log10: float
    divergent_part: float
    divergent_part_log10: dict
    theoretical_only: bool

    def to_dict(self):
        return asdict(self)


def diagnostics_interior(sol, p):
    cur = as_currents(sol)
    reg = regime(p)
    try:
        mterm = mean_term_interior(p)
    except OverflowError:
        mterm = math.inf
    row, _ = assemble_system_interior(p)
    kappa_a, kappa_lg = condition_number_asymptotic_interior(p)
    return InteriorDiagnostics(
        regime=reg.kind,
        t=reg.t,
        N=p.N,
        provenance=getattr(sol, "provenance", "array"),
        current_mean=float(cur.mean()),
        current_max=float(np.abs(cur).max()),
        mean_term=mterm,
        alternation_score=alternation_score(cur, mterm),
        kappa_computed=spectral.condition_number_circulant(row),
        kappa_asymptotic=kappa_a,
        kappa_asymptotic_log10=kappa_lg,
        divergent_part=divergent_part(p),
        divergent_part_log10=divergent_part_log10(p).to_dict(),
        theoretical_only=p.theoretical_only,
    )


__all__ = [
    "InteriorCircularProblem",
    "PROBE_RHO_RATIOS",
    "PROBE_PHI_DEG",
    "regime",
    "neumann_data",
    "assemble_system_interior",
    "assemble_rectangular_interior",
    "matrix_spectrum_exact_interior",
    "condition_number_exact_interior",
    "condition_number_asymptotic_interior",
    "spectrum_exact_interior",
    "spectrum_exact_interior_log10",
    "spectrum_asymptotic_interior",
    "currents_interior",
    "mean_term_interior",
    "currents_asymptotic_interior",
    "potential_incident_interior",
    "potential_exact_interior",
    "potential_mas_interior",
    "potential_mas_spectral_interior",
    "divergent_part",
    "divergent_part_log10",
    "self_consistency_residual_interior",
    "probe_points_interior",
    "HFieldReport",
    "h_field_consistency",
    "convergence_error_interior",
    "InteriorDiagnostics",
    "diagnostics_interior",
]
