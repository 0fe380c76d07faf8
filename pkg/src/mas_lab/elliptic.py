"""Exterior problem for an infinitely permeable elliptic cylinder.

The ellipse ``x^2/a^2 + y^2/b^2 = 1`` is the coordinate curve ``xi = xi0`` of
elliptic coordinates with half focal distance ``c = sqrt(a^2 - b^2)``. The
auxiliary sources lie on the confocal ellipse ``xi = xi_aux`` at uniformly
spaced ``eta``; collocation points are uniform in ``eta`` on the boundary.
The system is dense, so it is solved by LU (M = N) or least squares (M > N).
"""

import math
from dataclasses import asdict, dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from . import spectral
from .common import MasSolution, as_currents
from .exceptions import DomainError
from .kernels import eval_J_closed, eval_J_quadrature, periodic_trapezoid

TWO_PI = 2.0 * math.pi
SCHEMES = ("bounded", "traditional")
# points this far inside the boundary (in xi) are still treated as on it
XI_TOL = 1e-12


@dataclass(frozen=True)
class EllipticProblem:
    a: float
    b: float
    rho_fil: float
    a_aux: float
    N: int
    M: Optional[int] = None
    scheme: str = "traditional"
    d_ref: float = 1.0

    def __post_init__(self):
        if not (0 < self.b < self.a < self.rho_fil):
            raise DomainError(f"elliptic problem needs 0 < b < a < rho_fil, got b={self.b}, a={self.a}, rho_fil={self.rho_fil}")
        c = math.sqrt(self.a**2 - self.b**2)
        if not (c < self.a_aux < self.a):
            raise DomainError(f"auxiliary ellipse needs c < a_aux < a, got c={c:.6g}, a_aux={self.a_aux}, a={self.a}")
        if int(self.N) != self.N or self.N < 3:
            raise DomainError(f"N must be an integer >= 3, got {self.N}")
        M = self.N if self.M is None else self.M
        if int(M) != M or M < self.N:
            raise DomainError(f"need M >= N, got M={M}, N={self.N}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.d_ref <= 0:
            raise DomainError("d_ref must be positive")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "M", int(M))

    @property
    def c(self):
        return math.sqrt(self.a**2 - self.b**2)

    @property
    def b_aux(self):
        return math.sqrt(self.a_aux**2 - self.c**2)

    @property
    def eccentricity(self):
        return math.sqrt(1.0 - (self.b / self.a) ** 2)

    @property
    def xi0(self):
        return math.acosh(self.a / self.c)

    @property
    def xi_aux(self):
        return math.acosh(self.a_aux / self.c)

    @property
    def xi_fil(self):
        return math.acosh(self.rho_fil / self.c)

    @property
    def xi_image(self):
        """``2 xi0 - xi_fil``: where ``w1 = 1`` at ``eta = 0``, the singularity of the continued field."""
        return 2.0 * self.xi0 - self.xi_fil

    @property
    def a_image(self):
        """Semi-major axis of the confocal ellipse through that singularity (nan if it falls on the focal segment)."""
        return self.c * math.cosh(self.xi_image) if self.xi_image >= 0 else math.nan

    def with_(self, **changes):
        return replace(self, **changes)

    def to_dict(self):
        return asdict(self)


class EllipticPoint(NamedTuple):
    xi: float
    eta: float


def elliptic_to_cartesian(pt, c):
    """``x = c cosh(xi) cos(eta)``, ``y = c sinh(xi) sin(eta)``; works on arrays too."""
    if c <= 0:
        raise DomainError("focal parameter c must be positive")
    xi, eta = np.asarray(pt[0], dtype=float), np.asarray(pt[1], dtype=float)
    return c * np.cosh(xi) * np.cos(eta), c * np.sinh(xi) * np.sin(eta)


def cartesian_to_elliptic(x, y, c):
    """Inverse of :func:`elliptic_to_cartesian` with ``xi >= 0`` and ``eta`` in (-pi, pi].

    ``cosh(xi)**2`` is the larger root of ``u**2 - u (1 + r^2/c^2) + x^2/c^2 = 0``.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    s = (c * c + x * x + y * y) / (c * c)
    disc = np.sqrt(np.maximum(s * s - 4.0 * x * x / (c * c), 0.0))
    # sinh(xi)**2 = u - 1; near the focal segment use disc^2 - v^2 = 4 y^2 / c^2 to avoid cancellation
    v = (x * x + y * y - c * c) / (c * c)
    with np.errstate(divide="ignore", invalid="ignore"):
        sh2 = np.where(v >= 0.0, 0.5 * (v + disc), 2.0 * y * y / (c * c) / (disc - v))
    sh = np.sqrt(np.maximum(np.nan_to_num(sh2), 0.0))
    ch = np.sqrt(1.0 + sh * sh)
    xi = np.arcsinh(sh)
    eta = np.arctan2(y * ch, x * sh)
    # on the focal segment (xi = 0) only cos(eta) is defined; pick eta >= 0
    seg = sh == 0.0
    if np.any(seg):
        eta = np.where(seg, np.arccos(np.clip(x / c, -1.0, 1.0)), eta)
    return EllipticPoint(xi, eta)


def polar_to_elliptic(rho, phi, c):
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    return cartesian_to_elliptic(rho * np.cos(phi), rho * np.sin(phi), c)


def boundary_frame(p, eta):
    """Boundary point at ``(xi0, eta)``, outward unit normal and the scale factor ``h_xi``.

    The normal is the normalised gradient of ``x^2/a^2 + y^2/b^2``.
    """
    eta = np.asarray(eta, dtype=float)
    x, y = p.a * np.cos(eta), p.b * np.sin(eta)
    gx, gy = x / p.a**2, y / p.b**2
    g = np.hypot(gx, gy)
    h = p.c * np.sqrt(np.cosh(p.xi0) ** 2 - np.cos(eta) ** 2)
    return (x, y), (gx / g, gy / g), h


def source_positions(p):
    eta = TWO_PI * np.arange(p.N) / p.N
    return p.a_aux * np.cos(eta), p.b_aux * np.sin(eta)


def collocation_eta(p):
    return TWO_PI * np.arange(p.M) / p.M


# ---------------------------------------------------------------- assembly


@dataclass
class DenseSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    eta_colloc: np.ndarray
    eta_source: np.ndarray


def incident_normal_derivative(p, eta):
    """``-2 pi dA_inc/dn`` on the boundary: ``n . (r - r_fil) / R_fil^2``."""
    (x, y), (nx, ny), _ = boundary_frame(p, eta)
    dx, dy = x - p.rho_fil, y
    return (nx * dx + ny * dy) / (dx * dx + dy * dy)


def assemble_elliptic_system(p):
    """Normal-derivative collocation matrix (``2 pi`` times ``-dA/dn`` per unit current) and rhs.

    Entry ``(p, l)`` is ``n . (r_p - r_l) / R^2`` for ``ln(R / d_ref)``; the
    bounded scheme subtracts ``n . r_p / rho_p^2``. The rhs is
    ``-n . (r_p - r_fil) / R_fil^2``.
    """
    eta_c = collocation_eta(p)
    (x, y), (nx, ny), _ = boundary_frame(p, eta_c)
    sx, sy = source_positions(p)
    dx = x[:, None] - sx
    dy = y[:, None] - sy
    r2 = dx * dx + dy * dy
    if np.any(r2 == 0.0):
        raise DomainError("a collocation point coincides with an auxiliary source")
    g = (nx[:, None] * dx + ny[:, None] * dy) / r2
    if p.scheme == "bounded":
        g = g - ((nx * x + ny * y) / (x * x + y * y))[:, None]
    return DenseSystem(g, -incident_normal_derivative(p, eta_c), eta_c, TWO_PI * np.arange(p.N) / p.N)


def solve_elliptic(p, method="auto"):
    """Dense factorisation for ``M == N``, Householder least squares otherwise."""
    sys_ = assemble_elliptic_system(p)
    if p.M == p.N:
        res = spectral.solve_dense(sys_.matrix, sys_.rhs, method=method)
        provenance = "dense_solve"
    else:
        res = spectral.solve_least_squares(sys_.matrix, sys_.rhs)
        provenance = "least_squares"
    return MasSolution(
        res.x, spectral.dft(res.x).real, provenance, residual=res.residual, method=res.method,
        extra={"M": p.M, "rank_deficient": res.rank_deficient},
    )


# -------------------------------------------------------------- potentials


def potential_incident_elliptic(p, rho, phi):
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    r2 = rho * rho + p.rho_fil**2 - 2.0 * rho * p.rho_fil * np.cos(phi)
    if np.any(r2 <= 0.0):
        raise DomainError("observation point coincides with the line current")
    return -0.5 * np.log(r2 / p.d_ref**2) / TWO_PI


def _w(p, xi):
    return np.exp(2.0 * p.xi0 - p.xi_fil - xi), np.exp(-p.xi_fil - xi)


def _outside(p, pt):
    if np.any(pt.xi < p.xi0 - XI_TOL):
        raise DomainError("exact elliptic potential needs the observation point on or outside the ellipse")


def potential_exact_elliptic(p, rho, phi):
    """Closed-form scattered potential ``-(1/4 pi) ln[(1 - 2 w1 cos eta + w1^2) / (1 - 2 w2 cos eta + w2^2)]``."""
    pt = polar_to_elliptic(rho, phi, p.c)
    _outside(p, pt)
    w1, w2 = _w(p, pt.xi)
    ce = np.cos(pt.eta)
    return -np.log((1.0 - 2.0 * w1 * ce + w1 * w1) / (1.0 - 2.0 * w2 * ce + w2 * w2)) / (2.0 * TWO_PI)


def potential_exact_total_elliptic(p, rho, phi):
    return potential_incident_elliptic(p, rho, phi) + potential_exact_elliptic(p, rho, phi)


def coefficient_closed(p, m):
    """``C_m = (exp(-m xi_fil) - exp(m (2 xi0 - xi_fil))) / m``."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    return (math.exp(-m * p.xi_fil) - math.exp(m * (2.0 * p.xi0 - p.xi_fil))) / m


def coefficient_via_J(p, m, route="closed", nodes=4096):
    """``C_m = exp(m xi0) / (m pi) (b/a) J(m, rho_fil/a, b/a)`` with J from the closed form or quadrature."""
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    x, y = p.rho_fil / p.a, p.b / p.a
    if route == "closed":
        j = eval_J_closed(m, x, y)
    elif route == "quadrature":
        j = eval_J_quadrature(m, x, y, nodes=nodes)
    else:
        raise ValueError(f"unknown route {route!r}")
    return math.exp(m * p.xi0) / (m * math.pi) * y * j


def potential_series_elliptic(p, rho, phi, tol=1e-14, max_terms=10_000):
    """Separated-variables series ``-(1/2 pi) sum_m C_m exp(-m xi) cos(m eta)``.

    Stops at the first term below ``tol`` in magnitude or after ``max_terms``.
    Returns ``(value, terms_used)`` for scalar input.
    """
    pt = polar_to_elliptic(rho, phi, p.c)
    _outside(p, pt)
    xi, eta = float(pt.xi), float(pt.eta)
    total, m = 0.0, 0
    w1, w2 = _w(p, xi)
    for m in range(1, max_terms + 1):
        term = (w2**m - w1**m) / m * math.cos(m * eta)
        total += term
        if abs(w1**m / m) < tol:
            break
    return -total / TWO_PI, m


def potential_mas_elliptic(p, sol, rho, phi):
    """Direct sum over the auxiliary sources (``ln(R/d_ref)`` or ``ln(R/rho)``)."""
    cur = as_currents(sol)
    if cur.size != p.N:
        raise ValueError(f"expected {p.N} currents, got {cur.size}")
    rho, phi = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(phi, dtype=float))
    sx, sy = source_positions(p)
    x = (rho * np.cos(phi))[..., None]
    y = (rho * np.sin(phi))[..., None]
    r2 = (x - sx) ** 2 + (y - sy) ** 2
    if np.any(r2 <= (1e-12 * p.a) ** 2):
        raise DomainError("observation point coincides with an auxiliary source")
    if p.scheme == "bounded":
        logs = 0.5 * np.log(r2 / (rho * rho)[..., None])
    else:
        logs = 0.5 * np.log(r2 / p.d_ref**2)
    return -(logs @ cur) / TWO_PI


def potential_mas_total_elliptic(p, sol, rho, phi):
    return potential_incident_elliptic(p, rho, phi) + potential_mas_elliptic(p, sol, rho, phi)


def self_consistency_residual_elliptic(p, nodes=4096):
    """Net flux ``(1/2 pi) \\oint -2 pi dA_inc/dn ds`` over the ellipse, by trapezoid in ``eta``."""

    def f(eta):
        _, _, h = boundary_frame(p, eta)
        return incident_normal_derivative(p, eta) * h / TWO_PI

    return periodic_trapezoid(f, nodes)


def relative_error_along(p, sol, phi, rho_over_b):
    """Max relative error of the total MAS potential along a ray ``rho = s b``."""
    rho = np.asarray(rho_over_b, dtype=float) * p.b
    exact = potential_exact_total_elliptic(p, rho, phi)
    mas = potential_mas_total_elliptic(p, sol, rho, phi)
    return float(np.max(np.abs(mas - exact)) / np.max(np.abs(exact)))


# ---------------------------------------------------------- diagnostics


def zigzag_fraction(currents):
    """Fraction of ``l`` where consecutive differences change sign (cyclically)."""
    d = np.diff(np.asarray(currents, dtype=float), append=currents[0])
    return float(np.mean(d * np.roll(d, -1) < 0))


@dataclass
class EllipticDiagnostics:
    N: int
    M: int
    scheme: str
    provenance: str
    current_mean: float
    current_max: float
    argmax_current: int
    zigzag_fraction: float
    oscillating: bool
    kappa_computed: float
    xi_image: float
    a_image: float
    b_aux: float

    def to_dict(self):
        return asdict(self)


# zigzag fraction above which the currents are reported as oscillating
OSCILLATION_THRESHOLD = 0.5


def diagnostics_elliptic(sol, p):
    """Empirical oscillation diagnostics; there is no closed-form regime test here."""
    cur = as_currents(sol)
    z = zigzag_fraction(cur)
    return EllipticDiagnostics(
        N=p.N,
        M=p.M,
        scheme=p.scheme,
        provenance=getattr(sol, "provenance", "array"),
        current_mean=float(cur.mean()),
        current_max=float(np.abs(cur).max()),
        argmax_current=int(np.argmax(np.abs(cur))),
        zigzag_fraction=z,
        oscillating=z > OSCILLATION_THRESHOLD,
        kappa_computed=spectral.condition_number_dense(assemble_elliptic_system(p).matrix),
        xi_image=p.xi_image,
        a_image=p.a_image,
        b_aux=p.b_aux,
    )


__all__ = [
    "EllipticProblem",
    "EllipticPoint",
    "elliptic_to_cartesian",
    "cartesian_to_elliptic",
    "polar_to_elliptic",
    "boundary_frame",
    "source_positions",
    "DenseSystem",
    "incident_normal_derivative",
    "assemble_elliptic_system",
    "solve_elliptic",
    "potential_incident_elliptic",
    "potential_exact_elliptic",
    "potential_exact_total_elliptic",
    "coefficient_closed",
    "coefficient_via_J",
    "potential_series_elliptic",
    "potential_mas_elliptic",
    "potential_mas_total_elliptic",
    "self_consistency_residual_elliptic",
    "relative_error_along",
    "zigzag_fraction",
    "EllipticDiagnostics",
    "diagnostics_elliptic",
]
