"""Types and small numerical helpers shared by the problem modules."""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

CRITICAL_TOL = 1e-12
# values whose magnitude would exceed this are reported in log10 form
OVERFLOW_LOG10 = 300.0

PHYSICAL = "physical"
CRITICAL = "critical"
UNPHYSICAL = "unphysical"


class Regime(NamedTuple):
    kind: str
    t: float


def classify_regime(t):
    if abs(t - 1.0) <= CRITICAL_TOL:
        return Regime(CRITICAL, float(t))
    return Regime(PHYSICAL if t < 1.0 else UNPHYSICAL, float(t))


class LogValue(NamedTuple):
    """A signed quantity stored as ``sign * 10**log10``."""

    log10: float
    sign: int = 1

    @property
    def value(self):
        if self.log10 > OVERFLOW_LOG10:
            return self.sign * math.inf
        return self.sign * 10.0**self.log10

    def to_dict(self):
        return {"log10": self.log10, "sign": self.sign}

    @classmethod
    def from_float(cls, x):
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log10(abs(x)), 1 if x > 0 else -1)


def checked_exp(log_value, what="value"):
    """``exp(log_value)``, raising OverflowError past the 1e300 reporting limit."""
    if log_value / math.log(10.0) > OVERFLOW_LOG10:
        raise OverflowError(f"{what} exceeds 1e300 (log10 = {log_value / math.log(10.0):.2f})")
    return math.exp(log_value)


def one_minus_pow(base, n):
    """``1 - base**n`` for ``0 <= base < 1`` without cancellation."""
    if base == 0:
        return 1.0
    return -math.expm1(n * math.log(base))


@dataclass
class MasSolution:
    """Auxiliary currents normalised by the source current, with their DFT."""

    currents: np.ndarray
    spectrum: np.ndarray
    provenance: str
    residual: Optional[float] = None
    method: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.currents.size

    @property
    def mean(self):
        return float(np.mean(self.currents))


def as_currents(sol):
    """Accept a MasSolution or a bare current vector."""
    return np.asarray(getattr(sol, "currents", sol), dtype=float)


def alternation_score(currents, mean_term):
    """Fraction of neighbouring pairs in the window ``[N/8, 3N/8]`` that straddle ``mean_term``.

    Pairs ``(l, l+1)`` with ``ceil(N/8) <= l <= floor(3N/8)`` are counted; a pair
    alternates when ``(I_l - mean)(I_{l+1} - mean) < 0``.
    """
    c = np.asarray(currents, dtype=float)
    n = c.size
    lo = math.ceil(n / 8)
    hi = math.floor(3 * n / 8)
    idx = np.arange(lo, hi + 1)
    if idx.size == 0:
        return float("nan")
    dev = c - mean_term
    prod = dev[idx] * dev[(idx + 1) % n]
    return float(np.mean(prod < 0))


def polar_grid(rhos, phis_deg):
    """Flattened (rho, phi) arrays for the outer product of radii and angles in degrees."""
    r, p = np.meshgrid(np.asarray(rhos, dtype=float), np.deg2rad(np.asarray(phis_deg, dtype=float)), indexing="ij")
    return r.ravel(), p.ravel()


def aliased_cosine_series(spectrum, ratio, phi, tol=1e-16, max_terms=1_000_000):
    """Sum ``sum_{m>=1} N s[m mod N] / m * ratio**m * cos(m phi)``.

    ``spectrum`` is the length-N DFT ``s`` extended N-periodically in ``m``.
    Terms are added until the geometric tail bound drops below ``tol``. Returns
    ``(value, terms_used)``; ``ratio`` must be below one everywhere.
    """
    s = np.real(np.asarray(spectrum))
    n = s.size
    ratio, phi = np.broadcast_arrays(np.asarray(ratio, dtype=float), np.asarray(phi, dtype=float))
    r_max = float(np.max(ratio)) if ratio.size else 0.0
    if r_max >= 1.0:
        raise ValueError("cosine series diverges: ratio >= 1")
    scale = n * float(np.max(np.abs(s)))
    if scale == 0.0 or r_max == 0.0:
        return np.zeros(ratio.shape), 0
    # bound on the tail after m terms: scale * r**(m+1) / ((m+1)(1-r))
    m = 1
    log_r = math.log(r_max)
    while m < max_terms:
        if math.log(scale) + (m + 1) * log_r - math.log((m + 1) * (1.0 - r_max)) < math.log(tol):
            break
        m = min(max_terms, max(m + 1, int(m * 1.5)))
    terms = m
    out = np.zeros(ratio.shape)
    flat_r = ratio.ravel()
    flat_p = phi.ravel()
    acc = np.zeros(flat_r.size)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(flat_r)
    chunk = 2048
    for start in range(1, terms + 1, chunk):
        ms = np.arange(start, min(terms, start + chunk - 1) + 1)
        coef = n * s[ms % n] / ms
        powers = np.exp(np.outer(log_ratio, ms))
        acc += np.sum(powers * np.cos(np.outer(flat_p, ms)) * coef, axis=1)
    out[...] = acc.reshape(ratio.shape)
    return out, terms


def mas_spectrum_log10(n, src, aux, zero_log):
    """log10 of the closed-form circulant solution spectrum shared by the circular problems.

    For ``1 <= m <= N-1`` with ``k = min(m, N-m)``::

        I^(m) = (1/N) (src/aux)**k (1 + src**(N-2k)) / (1 + aux**(N-2k))
                * (1 - aux**N) / (1 - src**N)

    which is the symmetric form of ``(src^(N-m) + src^m) / (aux^(N-m) + aux^m)``.
    The ``m = 0`` entry is ``(1/N) exp(zero_log) (1 - aux**N) / (1 - src**N)``.
    Both ratios must lie in (0, 1).
    """
    ls, la = math.log(src), math.log(aux)
    common = math.log(one_minus_pow(aux, n)) - math.log(one_minus_pow(src, n)) - math.log(n)
    m = np.arange(n)
    k = np.minimum(m, n - m)
    ln = k * (ls - la) + np.log1p(np.exp((n - 2 * k) * ls)) - np.log1p(np.exp((n - 2 * k) * la)) + common
    ln[0] = zero_log + common
    return ln / math.log(10.0)


def spectrum_from_log10(lg):
    if lg.max() > OVERFLOW_LOG10:
        raise OverflowError(f"spectrum reaches 10**{lg.max():.1f}; use the log10 form for this configuration")
    return 10.0**lg
