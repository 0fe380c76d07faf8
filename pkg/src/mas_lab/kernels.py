"""Closed-form special integrals, Poisson-kernel integrals and Fourier identities.

Every closed form here has a brute-force counterpart (periodic trapezoid
quadrature or a direct evaluation of the summed function) so the two can be
checked against each other.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceWarning, DomainError

__all__ = [
    "J_GRID_M",
    "J_GRID_X",
    "J_GRID_Y",
    "QuadratureResult",
    "J_integrand",
    "eval_J_closed",
    "eval_J_quadrature",
    "periodic_trapezoid",
    "adaptive_periodic_trapezoid",
    "poisson_kernel_integral",
    "poisson_kernel_quadrature",
    "log_kernel_series",
    "log_kernel_exact",
]

# reference grid on which the closed form of J is checked against quadrature
J_GRID_M = tuple(range(13))
J_GRID_X = (1.1, 1.5, 2.0, 3.0, 5.0)
J_GRID_Y = (0.1, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    nodes: int
    converged: bool
    last_change: float


def _check_J_domain(m, x, y):
    if int(m) != m or m < 0:
        raise DomainError(f"m must be a non-negative integer, got {m!r}")
    if not (0 < y <= 1 < x):
        raise DomainError(f"J(m, x, y) requires 0 < y <= 1 < x, got x={x!r}, y={y!r}")


def J_integrand(theta, m, x, y):
    """Integrand of J(m, x, y) on (-pi, pi]."""
    c = np.cos(theta)
    den = y * y + (1.0 - y * y) * c * c - 2.0 * x * c + x * x
    return (1.0 - x * c) * np.cos(m * theta) / den


def eval_J_closed(m, x, y):
    """Closed form of J(m, x, y), valid for ``0 < y <= 1 < x`` and integer ``m >= 0``.

    Written as ``pi/y * (r1**m - r2**m)`` with both ratios below one, so large
    ``m`` underflows gracefully instead of overflowing.
    """
    _check_J_domain(m, x, y)
    m = int(m)
    if m == 0:
        return 0.0
    s = x + math.sqrt(x * x + y * y - 1.0)
    r1 = (1.0 - y) / s
    r2 = (1.0 + y) / s
    return math.pi * (r1**m - r2**m) / y


def periodic_trapezoid(f, nodes):
    """Trapezoid rule for a 2*pi-periodic ``f`` on a uniform grid over (-pi, pi]."""
    nodes = int(nodes)
    if nodes < 1:
        raise ValueError("nodes must be positive")
    theta = -np.pi + 2.0 * np.pi * np.arange(nodes) / nodes
    return float(2.0 * np.pi * np.mean(f(theta)))


def adaptive_periodic_trapezoid(f, tol=1e-12, start=64, max_nodes=2**20):
    """Double the node count until successive trapezoid sums agree to ``tol``.

    The last sum is returned even when the cap is hit; ``converged`` tells the
    caller whether to trust it.
    """
    n = int(start)
    prev = periodic_trapezoid(f, n)
    change = math.inf
    while n < max_nodes:
        n *= 2
        cur = periodic_trapezoid(f, n)
        change = abs(cur - prev)
        prev = cur
        if change <= tol:
            return QuadratureResult(cur, n, True, change)
    return QuadratureResult(prev, n, False, change)


def eval_J_quadrature(m, x, y, nodes=4096, tol=None):
    """J(m, x, y) by periodic trapezoid quadrature of its defining integral.

    With ``nodes=None`` the node count is chosen adaptively (see
    :func:`adaptive_periodic_trapezoid`). When ``tol`` is given together with a
    fixed ``nodes``, the sum is repeated with twice the nodes and a
    :class:`ConvergenceWarning` is issued if the two differ by more than ``tol``.
    """
    _check_J_domain(m, x, y)
    f = lambda th: J_integrand(th, m, x, y)  # noqa: E731
    if nodes is None:
        res = adaptive_periodic_trapezoid(f, tol=1e-12 if tol is None else tol)
        if not res.converged:
            warnings.warn(
                f"J quadrature did not converge: change {res.last_change:.3e} at {res.nodes} nodes",
                ConvergenceWarning,
                stacklevel=2,
            )
        return res.value
    if nodes < 64:
        raise DomainError("quadrature of J needs at least 64 nodes")
    value = periodic_trapezoid(f, nodes)
    if tol is not None:
        change = abs(periodic_trapezoid(f, 2 * nodes) - value)
        if change > tol:
            warnings.warn(
                f"J quadrature not converged at {nodes} nodes (doubling changes it by {change:.3e})",
                ConvergenceWarning,
                stacklevel=2,
            )
    return value


def poisson_kernel_integral(m, x):
    r"""Integral of ``(1 - x cos t) cos(m t) / (x**2 - 2 x cos t + 1)`` over a period.

    ==========  =============  ==============
    case        ``x > 1``      ``0 <= x < 1``
    ==========  =============  ==============
    ``m = 0``   0              2*pi
    ``m >= 1``  -pi * x**-m    pi * x**m
    ==========  =============  ==============

    ``x = 1`` is rejected: the integrand is not integrable there.
    """
    if int(m) != m or m < 0:
        raise DomainError(f"m must be a non-negative integer, got {m!r}")
    if x < 0 or x == 1:
        raise DomainError(f"poisson_kernel_integral needs x >= 0 and x != 1, got {x!r}")
    m = int(m)
    if m == 0:
        return 0.0 if x > 1 else 2.0 * math.pi
    if x > 1:
        return -math.pi * x ** (-m)
    return math.pi * x**m


def poisson_kernel_quadrature(m, x, nodes=4096):
    """Trapezoid-rule counterpart of :func:`poisson_kernel_integral`."""
    if x < 0 or x == 1:
        raise DomainError(f"poisson_kernel_quadrature needs x >= 0 and x != 1, got {x!r}")

    def f(th):
        c = np.cos(th)
        return (1.0 - x * c) * np.cos(m * th) / (x * x - 2.0 * x * c + 1.0)

    return periodic_trapezoid(f, nodes)


def log_kernel_series(rho1, rho2, rho3, theta, terms):
    """Partial Fourier sum for ``ln(|r1 - r2| / rho3)``, ``|r1| = rho1 < rho2 = |r2|``.

    Returns ``ln(rho2/rho3) - sum_{n=1}^{terms} (rho1/rho2)**n cos(n theta) / n``,
    i.e. the two-sided series with conjugate terms paired.
    """
    if not (0 <= rho1 < rho2):
        raise DomainError(f"log_kernel_series needs 0 <= rho1 < rho2, got {rho1!r}, {rho2!r}")
    if rho3 <= 0:
        raise DomainError("rho3 must be positive")
    if terms < 1:
        raise ValueError("terms must be >= 1")
    n = np.arange(1, int(terms) + 1)
    r = rho1 / rho2
    tail = np.sum(r**n * np.cos(n * theta) / n)
    return float(math.log(rho2 / rho3) - tail)


def log_kernel_exact(rho1, rho2, rho3, theta):
    """``ln(sqrt(rho1**2 + rho2**2 - 2 rho1 rho2 cos theta) / rho3)`` evaluated directly."""
    d2 = rho1 * rho1 + rho2 * rho2 - 2.0 * rho1 * rho2 * math.cos(theta)
    return 0.5 * math.log(d2) - math.log(rho3)
