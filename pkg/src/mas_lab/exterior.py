"""Exterior circular problem: an infinitely permeable cylinder lit by a line current.

Lengths are in units of ``d_ref``, currents are normalised by the source
current I and potentials by ``mu0 I``. Two families of fundamental solutions
are supported:

* ``"bounded"``: ``ln(R_l / rho)``, vanishing at infinity for every N;
* ``"traditional"``: ``ln(R_l / d_ref)``.

The auxiliary sources sit at ``(rho_aux, 2 pi l / N)`` and the Neumann
condition is collocated at ``(rho_cyl, 2 pi p / N)``.
"""

import math
import warnings
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from . import spectral
from .common import (
    CRITICAL,
    PHYSICAL,
    UNPHYSICAL,
    LogValue,
    MasSolution,
    aliased_cosine_series,
    alternation_score,
    as_currents,
    checked_exp,
    classify_regime,
    mas_spectrum_log10,
    one_minus_pow,
    spectrum_from_log10,
)
from .exceptions import ConvergenceWarning, DomainError
from .kernels import periodic_trapezoid

SCHEMES = ("bounded", "traditional")
TWO_PI = 2.0 * math.pi

# probe set for convergence checks: rho / rho_cyl and phi in degrees
PROBE_RHO_RATIOS = (1.0, 1.5, 2.0, 3.0)
PROBE_PHI_DEG = (0.0, 45.0, 90.0, 180.0)


@dataclass(frozen=True)
class ExteriorCircularProblem:
    rho_cyl: float
    rho_fil: float
    rho_aux: float
    N: int
    scheme: str = "bounded"
    d_ref: float = 1.0

    def __post_init__(self):
        if not (0 < self.rho_aux < self.rho_cyl < self.rho_fil):
            raise DomainError(
                "exterior problem needs 0 < rho_aux < rho_cyl < rho_fil, got "
                f"rho_aux={self.rho_aux}, rho_cyl={self.rho_cyl}, rho_fil={self.rho_fil}"
            )
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"N must be an integer >= 3, got {self.N}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.d_ref <= 0:
            raise DomainError("d_ref must be positive")
        object.__setattr__(self, "N", int(self.N))

    @property
    def rho_cri(self):
        return self.rho_cyl**2 / self.rho_fil

    @property
    def t(self):
        return self.rho_cri / self.rho_aux

    @property
    def q(self):
        """rho_aux / rho_cyl"""
        return self.rho_aux / self.rho_cyl

    @property
    def a(self):
        """rho_cyl / rho_fil"""
        return self.rho_cyl / self.rho_fil

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


def regime(p):
    return classify_regime(p.t)


# ---------------------------------------------------------------- assembly


def _row_entries(p, dphi):
    q = p.q
    c = np.cos(dphi)
    b = (1.0 - q * c) / (1.0 + q * q - 2.0 * q * c) - 1.0
    return b + 1.0 if p.scheme == "traditional" else b


def _rhs_entries(p, phi):
    s = p.rho_fil / p.rho_cyl
    c = np.cos(phi)
    return -(1.0 - s * c) / (1.0 + s * s - 2.0 * s * c)


def _even_angles(n):
    k = np.arange(n)
    return TWO_PI * np.minimum(k, n - k) / n


def assemble_system(p):
    """First row ``B_p`` (or ``B_p + 1``) and right-hand side ``D_p / I``.

    Both are built on the folded index ``min(p, N - p)`` so they are exactly
    even sequences and the circulant matrix is exactly symmetric.
    """
    ang = _even_angles(p.N)
    return _row_entries(p, ang), _rhs_entries(p, ang)


def assemble_rectangular(p, M):
    """``M x N`` collocation matrix and rhs for M points ``2 pi k / M`` on the cylinder."""
    if M < p.N:
        raise DomainError(f"need M >= N, got M={M}, N={p.N}")
    phi_c = TWO_PI * np.arange(M) / M
    phi_s = TWO_PI * np.arange(p.N) / p.N
    matrix = _row_entries(p, phi_s[None, :] - phi_c[:, None])
    return matrix, _rhs_entries(p, phi_c)


# ---------------------------------------------------------- exact spectra


def matrix_spectrum_exact(p):
    """Closed-form DFT of the first row (``B^(m)`` or ``B'^(m)``)."""
    n, q = p.N, p.q
    m = np.arange(n)
    k = np.minimum(m, n - m)
    den = one_minus_pow(q, n)
    out = 0.5 * (q ** (n - k) + q**k) / den
    out[0] = q**n / den
    if p.scheme == "traditional":
        out[0] = 1.0 / den
    return out


def rhs_spectrum_exact(p):
    """Closed-form DFT of ``D_p / I``."""
    n, a = p.N, p.a
    m = np.arange(n)
    k = np.minimum(m, n - m)
    den = one_minus_pow(a, n)
    out = 0.5 * (a ** (n - k) + a**k) / den
    out[0] = a**n / den
    return out


def spectrum_exact_log10(p):
    """log10 of the exact ``I^(m) / I`` (all entries are positive)."""
    base = p.t if p.scheme == "bounded" else p.a
    return mas_spectrum_log10(p.N, p.a, p.q, p.N * math.log(base))


def spectrum_exact(p):
    """Exact DFT ``I^(m) / I`` of the MAS currents; OverflowError past 1e300."""
    return spectrum_from_log10(spectrum_exact_log10(p))


# ---------------------------------------------------------------- currents

SOLVERS = ("dft_exact", "circulant", "dense_solve", "least_squares")


def currents(p, solver="dft_exact", M=None, dense_method="auto"):
    """MAS currents ``I_l / I`` by the requested route.

    ``dft_exact`` inverts the closed-form spectrum; ``circulant`` runs the DFT
    solve on the assembled system; ``dense_solve`` factorises the assembled
    matrix; ``least_squares`` enforces the condition at ``M >= N`` points.
    """
    if solver == "dft_exact":
        spec = spectrum_exact(p)
        return MasSolution(spectral.idft(spec), spec, "dft_exact")
    if solver == "circulant":
        row, rhs = assemble_system(p)
        res = spectral.solve_circulant(row, rhs)
        return MasSolution(res.x, res.spectrum.real, "circulant", residual=res.residual)
    if solver == "dense_solve":
        row, rhs = assemble_system(p)
        res = spectral.solve_dense(spectral.circulant_matrix(row), rhs, method=dense_method)
        return MasSolution(res.x, spectral.dft(res.x).real, "dense_solve", residual=res.residual, method=res.method)
    if solver == "least_squares":
        matrix, rhs = assemble_rectangular(p, p.N if M is None else M)
        res = spectral.solve_least_squares(matrix, rhs)
        return MasSolution(
            res.x, spectral.dft(res.x).real, "least_squares", residual=res.residual, method=res.method,
            extra={"M": matrix.shape[0], "rank_deficient": res.rank_deficient},
        )
    raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def mean_term(p):
    """Mean ``I^(0)`` predicted for large N: ``t**N / N`` (bounded) or ``a**N / N``."""
    base = p.t if p.scheme == "bounded" else p.a
    return checked_exp(p.N * math.log(base), "mean term") / p.N


def _require_odd(n):
    if n % 2 == 0:
        raise NotImplementedError("closed-form asymptotics are implemented for odd N only")


def oscillating_part(t, n):
    """Alternating term ``(2/N) (-1)^l t^((N+1)/2) (t-1) cos(pi l/N) / (t^2 - 2t cos(2 pi l/N) + 1)``."""
    ell = np.arange(n)
    amp = checked_exp((n + 1) / 2 * math.log(t), "oscillation amplitude") if t > 0 else 0.0
    den = t * t - 2.0 * t * np.cos(TWO_PI * ell / n) + 1.0
    sign = np.where(ell % 2 == 0, 1.0, -1.0)
    return 2.0 / n * sign * amp * (t - 1.0) * np.cos(math.pi * ell / n) / den


def smooth_part(t, n):
    """Non-alternating term ``(2/N)(-t^2 + t cos(2 pi l/N)) / (t^2 - 2t cos(2 pi l/N) + 1)``."""
    c = np.cos(TWO_PI * np.arange(n) / n)
    return 2.0 / n * (-t * t + t * c) / (t * t - 2.0 * t * c + 1.0)


def asymptotic_sum(t, n, mean):
    """``mean + (2/N) sum_{m=1}^{(N-1)/2} t^m cos(2 pi m l / N)`` summed term by term.

    Independent of the closed forms; handy as an oracle and at ``t = 1``.
    """
    _require_odd(n)
    ell = np.arange(n)
    ms = np.arange(1, (n - 1) // 2 + 1)
    terms = np.exp(ms * math.log(t))[None, :] * np.cos(TWO_PI * np.outer(ell, ms) / n)
    return mean + 2.0 / n * terms.sum(axis=1)


def currents_asymptotic_full(p):
    """Closed-form large-N currents before any case simplification."""
    _require_odd(p.N)
    if classify_regime(p.t).kind == CRITICAL:
        return asymptotic_sum(1.0, p.N, mean_term(p))
    return mean_term(p) + oscillating_part(p.t, p.N) + smooth_part(p.t, p.N)


def currents_asymptotic(p):
    """Regime-specific large-N currents (odd N only).

    physical: smooth part only; unphysical: mean plus alternating part (mean
    dropped for the traditional scheme); critical: a single unit current at
    ``l = 0`` (bounded) or ``(1, -1/N, ..., -1/N)`` (traditional).
    """
    _require_odd(p.N)
    kind = regime(p).kind
    n = p.N
    if kind == PHYSICAL:
        return smooth_part(p.t, n)
    if kind == CRITICAL:
        out = np.zeros(n) if p.scheme == "bounded" else np.full(n, -1.0 / n)
        out[0] = 1.0
        return out
    osc = oscillating_part(p.t, n)
    return osc + mean_term(p) if p.scheme == "bounded" else osc


# -------------------------------------------------------------- potentials


def _check_source(dist, what):
    if np.any(dist == 0.0):
        raise DomainError(f"observation point coincides with {what}")


def potential_incident(p, rho, phi):
    """``A_inc / (mu0 I) = -ln(R_fil / d_ref) / (2 pi)``."""
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    r2 = rho * rho + p.rho_fil**2 - 2.0 * rho * p.rho_fil * np.cos(phi)
    r2 = np.maximum(r2, 0.0)
    _check_source(r2, "the line current")
    return -0.5 * np.log(r2 / p.d_ref**2) / TWO_PI


def potential_exact(p, rho, phi):
    """Exact scattered potential (two images: at the origin and at ``(rho_cri, 0)``).

    Valid for ``rho >= rho_cyl``; between ``rho_cri`` and ``rho_cyl`` it is the
    analytic continuation.
    """
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    if np.any(rho <= p.rho_cri):
        raise DomainError("exact exterior potential needs rho > rho_cri")
    rc = p.rho_cri
    d2 = rho * rho + rc * rc - 2.0 * rho * rc * np.cos(phi)
    return -0.5 * np.log(d2 / (rho * rho)) / TWO_PI


def potential_exact_total(p, rho, phi):
    return potential_incident(p, rho, phi) + potential_exact(p, rho, phi)


def source_positions(p, n=None):
    n = p.N if n is None else n
    ang = TWO_PI * np.arange(n) / n
    return p.rho_aux * np.cos(ang), p.rho_aux * np.sin(ang)


def potential_mas_direct(p, sol, rho, phi):
    """MAS scattered potential as a direct sum over the auxiliary sources.

    ``sol`` may be a :class:`MasSolution` or a bare current vector; the number
    of sources is taken from its length.
    """
    cur = as_currents(sol)
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    sx, sy = source_positions(p, cur.size)
    x = (rho * np.cos(phi))[..., None]
    y = (rho * np.sin(phi))[..., None]
    r2 = (x - sx) ** 2 + (y - sy) ** 2
    _check_source(r2, "an auxiliary source")
    if p.scheme == "bounded":
        logs = 0.5 * np.log(r2 / (rho * rho)[..., None])
    else:
        logs = 0.5 * np.log(r2 / p.d_ref**2)
    return -(logs @ cur) / TWO_PI


def potential_mas_spectral(p, sol, rho, phi, tol=1e-15):
    """MAS scattered potential from the N-periodic spectrum (Laurent series in ``rho_aux / rho``).

    ``I^(0)`` never enters the bounded scheme; the traditional scheme adds the
    ``-N I^(0) ln(rho / d_ref) / (2 pi)`` term.
    """
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    if np.any(rho <= p.rho_aux):
        raise DomainError("spectral MAS potential needs rho > rho_aux")
    if np.min(rho) / p.rho_aux < 1.01:
        warnings.warn("rho / rho_aux < 1.01: series converges slowly", ConvergenceWarning, stacklevel=2)
    spec = np.real(np.asarray(getattr(sol, "spectrum", sol)))
    series, _ = aliased_cosine_series(spec, p.rho_aux / rho, phi, tol=tol)
    out = series / TWO_PI
    if p.scheme == "traditional":
        out = out - spec.size * spec[0] * np.log(rho / p.d_ref) / TWO_PI
    return out


def potential_mas_total(p, sol, rho, phi):
    return potential_incident(p, rho, phi) + potential_mas_direct(p, sol, rho, phi)


def probe_points(p):
    """Fixed probe set used by the convergence checks."""
    r, ph = np.meshgrid(np.array(PROBE_RHO_RATIOS) * p.rho_cyl, np.deg2rad(PROBE_PHI_DEG), indexing="ij")
    return r.ravel(), ph.ravel()


def convergence_error(p, sol=None):
    """Max over the probe set of ``|A_mas,tot - A_exact,tot|`` and the exact scale."""
    sol = currents(p) if sol is None else sol
    r, ph = probe_points(p)
    exact = potential_exact_total(p, r, ph)
    err = np.abs(potential_mas_total(p, sol, r, ph) - exact)
    return float(err.max()), float(np.abs(exact).max())


# ------------------------------------------------------ boundary checks


def neumann_residual(p, sol, M=None):
    """``(A x - b)`` at M collocation points, rebuilt from the field itself.

    Evaluates ``-2 pi rho_cyl d(A_mas + A_inc)/d rho`` at ``(rho_cyl, 2 pi k/M)``
    from the analytic radial derivative of each fundamental solution, which
    is the normalised form of the system residual.
    """
    cur = as_currents(sol)
    M = cur.size if M is None else M
    phi_c = TWO_PI * np.arange(M) / M
    sx, sy = source_positions(p, cur.size)
    x = p.rho_cyl * np.cos(phi_c)
    y = p.rho_cyl * np.sin(phi_c)
    dx = x[:, None] - sx
    dy = y[:, None] - sy
    # rho_cyl * d/d rho ln R = (r . (r - s)) / R^2
    g = (x[:, None] * dx + y[:, None] * dy) / (dx * dx + dy * dy)
    if p.scheme == "bounded":
        g = g - 1.0
    fx = x - p.rho_fil
    inc = (x * fx + y * y) / (fx * fx + y * y)
    return g @ cur + inc


def self_consistency_residual(p, nodes=4096):
    """Trapezoid value of the loop integral of ``-dA_inc/d rho`` over the cylinder (should vanish)."""
    rc, rf = p.rho_cyl, p.rho_fil

    def integrand(phi):
        return (rc - rf * np.cos(phi)) * rc / (rc * rc + rf * rf - 2.0 * rc * rf * np.cos(phi)) / TWO_PI

    return periodic_trapezoid(integrand, nodes)


# ------------------------------------------------------- conditioning


def condition_number_asymptotic(p):
    """Large-N condition number: ``(1/2)(rho_cyl/rho_aux)**(N-1)`` or ``(rho_cyl/rho_aux)**(N/2)``.

    Returns ``(value, log10)``; ``value`` is ``inf`` past 1e300.
    """
    base = math.log10(p.rho_cyl / p.rho_aux)
    if p.scheme == "bounded":
        lg = math.log10(0.5) + (p.N - 1) * base
    else:
        lg = p.N / 2 * base
    return LogValue(lg).value, lg


def condition_number_exact(p):
    """Condition number from the closed-form matrix spectrum."""
    b = np.abs(matrix_spectrum_exact(p))
    return float(b.max() / b.min())


def condition_number_computed(p):
    """Condition number of the assembled matrix via its numerical DFT."""
    row, _ = assemble_system(p)
    return spectral.condition_number_circulant(row)


# ---------------------------------------------------------- diagnostics


@dataclass
class DiagnosticsReport:
    regime: str
    t: float
    N: int
    scheme: str
    provenance: str
    current_mean: float
    current_max: float
    mean_term: float
    alternation_score: float
    kappa_computed: float
    kappa_asymptotic: float
    kappa_asymptotic_log10: float
    central_current: Optional[float] = None
    divergent_part: Optional[float] = None

    def to_dict(self):
        return asdict(self)


def diagnostics(sol, p):
    """Regime, oscillation metrics and condition numbers for one solution."""
    cur = as_currents(sol)
    reg = regime(p)
    kappa_a, kappa_lg = condition_number_asymptotic(p)
    try:
        mterm = mean_term(p)
    except OverflowError:
        mterm = math.inf
    return DiagnosticsReport(
        regime=reg.kind,
        t=reg.t,
        N=p.N,
        scheme=p.scheme,
        provenance=getattr(sol, "provenance", "array"),
        current_mean=float(cur.mean()),
        current_max=float(np.abs(cur).max()),
        mean_term=mterm,
        alternation_score=alternation_score(cur, mterm),
        kappa_computed=condition_number_computed(p),
        kappa_asymptotic=kappa_a,
        kappa_asymptotic_log10=kappa_lg,
        # I_N = -sum I_l sits at the origin; derived, never solved for
        central_current=float(-cur.sum()) if p.scheme == "bounded" else None,
    )


# ------------------------------------------------------ insensitivity


@dataclass
class PerturbationReport:
    noise_rel: float
    seed: int
    solver: str
    current_change: float
    potential_change: dict  # rho/rho_cyl -> max |dA| / max |A_sc(rho_cyl, .)|
    potential_change_abs: dict  # rho/rho_cyl -> max |dA|
    reference_scale: float

    def to_dict(self):
        d = asdict(self)
        d["potential_change"] = {str(k): v for k, v in self.potential_change.items()}
        d["potential_change_abs"] = {str(k): v for k, v in self.potential_change_abs.items()}
        return d


def perturbation_experiment(p, noise_rel, seed=0, radii=(1.25, 2.0, 4.0), n_phi=72, solver="circulant"):
    """Re-solve with uniformly perturbed boundary data and compare currents and potentials.

    Each rhs entry is multiplied by ``1 + noise_rel * U(-1, 1)``. The current
    change is ``max|dI| / max|I|``. Potential changes on the circles
    ``rho = r * rho_cyl`` are reported in absolute terms and relative to the
    largest unperturbed scattered potential on the cylinder, a common scale
    so the numbers are comparable between circles.
    """
    if noise_rel < 0:
        raise ValueError("noise_rel must be non-negative")
    rng = np.random.default_rng(seed)
    row, rhs = assemble_system(p)
    noisy = rhs * (1.0 + noise_rel * rng.uniform(-1.0, 1.0, rhs.size))

    def solve(b):
        if solver == "circulant":
            return spectral.solve_circulant(row, b).x
        if solver == "dense_solve":
            return spectral.solve_dense(spectral.circulant_matrix(row), b).x
        raise ValueError(f"unsupported solver {solver!r}")

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        base = solve(rhs)
        pert = base if noise_rel == 0 else solve(noisy)

    phi = TWO_PI * np.arange(n_phi) / n_phi
    scale = float(np.abs(potential_mas_direct(p, base, p.rho_cyl, phi)).max())
    rel, absolute = {}, {}
    for r in radii:
        a0 = potential_mas_direct(p, base, r * p.rho_cyl, phi)
        a1 = potential_mas_direct(p, pert, r * p.rho_cyl, phi)
        absolute[float(r)] = float(np.abs(a1 - a0).max())
        rel[float(r)] = absolute[float(r)] / scale
    return PerturbationReport(
        noise_rel=float(noise_rel),
        seed=int(seed),
        solver=solver,
        current_change=float(np.abs(pert - base).max() / np.abs(base).max()),
        potential_change=rel,
        potential_change_abs=absolute,
        reference_scale=scale,
    )


__all__ = [
    "ExteriorCircularProblem",
    "SCHEMES",
    "SOLVERS",
    "regime",
    "assemble_system",
    "assemble_rectangular",
    "matrix_spectrum_exact",
    "rhs_spectrum_exact",
    "spectrum_exact",
    "spectrum_exact_log10",
    "currents",
    "mean_term",
    "currents_asymptotic",
    "currents_asymptotic_full",
    "asymptotic_sum",
    "potential_incident",
    "potential_exact",
    "potential_exact_total",
    "potential_mas_direct",
    "potential_mas_spectral",
    "potential_mas_total",
    "probe_points",
    "convergence_error",
    "neumann_residual",
    "self_consistency_residual",
    "condition_number_asymptotic",
    "condition_number_exact",
    "condition_number_computed",
    "DiagnosticsReport",
    "diagnostics",
    "PerturbationReport",
    "perturbation_experiment",
]
