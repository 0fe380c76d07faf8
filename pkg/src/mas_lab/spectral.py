"""DFT conventions, circulant solves, dense and least-squares solvers, conditioning.

The forward transform carries the 1/N factor::

    alpha^(m) = (1/N) sum_p alpha_p exp(-2j pi m p / N)
    alpha_p   = sum_m alpha^(m) exp(+2j pi m p / N)

With that convention the solution of the symmetric circulant system
``sum_l row[(l - p) % N] x_l = b_p`` has spectrum ``b^(m) / (N row^(m))``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .exceptions import (
    IllConditionedWarning,
    ImaginaryResidueWarning,
    RankDeficiencyWarning,
    SingularSystemError,
)

__all__ = [
    "dft",
    "idft",
    "circulant_matrix",
    "is_even_sequence",
    "CirculantSolution",
    "SolveResult",
    "solve_circulant",
    "solve_dense",
    "solve_least_squares",
    "condition_number_circulant",
    "condition_number_dense",
]

# solve_circulant flags anything worse than this
KAPPA_WARN = 1e15
PIVOT_TOL = 1e-300
RANK_TOL = 1e-13


def dft(values):
    """Forward DFT with the 1/N normalisation (backed by numpy's FFT)."""
    v = np.asarray(values)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("dft expects a non-empty 1-D sequence")
    return np.fft.fft(v) / v.size


def idft(spectrum, real=True, tol=1e-10):
    """Inverse of :func:`dft`.

    With ``real=True`` the imaginary part is dropped; if it exceeds ``tol``
    relative to the largest output entry an :class:`ImaginaryResidueWarning`
    is issued first.
    """
    s = np.asarray(spectrum)
    if s.ndim != 1 or s.size < 1:
        raise ValueError("idft expects a non-empty 1-D sequence")
    out = np.fft.ifft(s) * s.size
    if not real:
        return out
    scale = np.max(np.abs(out))
    residue = np.max(np.abs(out.imag))
    if scale > 0 and residue > tol * scale:
        warnings.warn(
            f"inverse DFT has imaginary residue {residue:.3e} (relative {residue / scale:.3e})",
            ImaginaryResidueWarning,
            stacklevel=2,
        )
    return out.real.copy()


def circulant_matrix(first_row):
    """Dense matrix with entries ``A[p, l] = first_row[(l - p) % N]``."""
    row = np.asarray(first_row)
    n = row.size
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def is_even_sequence(values, rtol=1e-12):
    """True when ``values[p] == values[N - p]`` up to ``rtol`` of the largest entry."""
    v = np.asarray(values)
    mirrored = v[(-np.arange(v.size)) % v.size]
    scale = np.max(np.abs(v)) if v.size else 0.0
    return bool(np.all(np.abs(v - mirrored) <= rtol * scale))


@dataclass
class CirculantSolution:
    x: np.ndarray
    spectrum: np.ndarray
    eigenvalues: np.ndarray  # N * row^(m)
    residual: float  # max-norm of A x - b
    condition: float


@dataclass
class SolveResult:
    x: np.ndarray
    residual: float  # 2-norm of A x - b
    method: str
    rank_deficient: bool = False


def solve_circulant(first_row, rhs):
    """Solve the symmetric circulant system through its DFT diagonalisation.

    Raises :class:`SingularSystemError` when an eigenvalue ``N row^(m)`` is
    exactly zero and warns (:class:`IllConditionedWarning`) when the condition
    number exceeds 1e15.
    """
    row = np.asarray(first_row, dtype=float)
    b = np.asarray(rhs, dtype=float)
    n = row.size
    if b.size != n:
        raise ValueError(f"first_row has length {n} but rhs has length {b.size}")
    if not is_even_sequence(row):
        raise ValueError("solve_circulant needs an even first row (row[p] == row[N-p])")
    eig = n * dft(row)
    mags = np.abs(eig)
    if mags.min() == 0.0:
        raise SingularSystemError("circulant matrix has a zero eigenvalue")
    kappa = float(mags.max() / mags.min())
    if kappa > KAPPA_WARN:
        warnings.warn(f"circulant system condition number {kappa:.3e}", IllConditionedWarning, stacklevel=2)
    spectrum = dft(b) / eig
    x = idft(spectrum)
    residual = float(np.max(np.abs(circulant_matrix(row) @ x - b)))
    return CirculantSolution(x=x, spectrum=spectrum, eigenvalues=eig, residual=residual, condition=kappa)


def _cholesky_candidate(a):
    return a.shape[0] == a.shape[1] and np.array_equal(a, a.T) and np.all(np.diag(a) > 0)


def solve_dense(matrix, rhs, method="auto"):
    """Solve a square system by a direct factorisation.

    ``method="lu"`` is LU with partial pivoting. ``method="auto"`` follows the
    usual dense-solver dispatch: an exactly symmetric matrix with a positive
    diagonal is first tried with Cholesky, and anything else (or a failed
    Cholesky) goes to LU. ``method="cholesky"`` insists on Cholesky.
    """
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"solve_dense needs a square matrix, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise ValueError("rhs length does not match the matrix")
    if method not in ("auto", "lu", "cholesky"):
        raise ValueError(f"unknown method {method!r}")

    if method in ("auto", "cholesky") and (method == "cholesky" or _cholesky_candidate(a)):
        try:
            c = sla.cho_factor(a, lower=False, check_finite=True)
            x = sla.cho_solve(c, b)
            return SolveResult(x=x, residual=float(np.linalg.norm(a @ x - b)), method="cholesky")
        except np.linalg.LinAlgError:
            if method == "cholesky":
                raise
    with warnings.catch_warnings():
        # a zero pivot is reported below as SingularSystemError
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=True)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise SingularSystemError("zero pivot in LU factorisation")
    x = sla.lu_solve((lu, piv), b)
    return SolveResult(x=x, residual=float(np.linalg.norm(a @ x - b)), method="lu")


def solve_least_squares(matrix, rhs):
    """Minimise ``||A x - b||_2`` for a tall (M >= N) matrix via Householder QR.

    A :class:`RankDeficiencyWarning` is issued when a diagonal entry of R is
    below 1e-13 times the largest one; the triangular solve still proceeds.
    """
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(rhs, dtype=float)
    if a.ndim != 2 or a.shape[0] < a.shape[1]:
        raise ValueError(f"least squares needs M >= N, got shape {a.shape}")
    if b.shape != (a.shape[0],):
        raise ValueError("rhs length does not match the matrix")
    q, r = sla.qr(a, mode="economic")
    d = np.abs(np.diag(r))
    deficient = bool(d.min() < RANK_TOL * d.max())
    if deficient:
        warnings.warn(
            f"least-squares matrix is numerically rank deficient (|R_ii| ratio {d.min() / d.max():.2e})",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    x = sla.solve_triangular(r, q.T @ b)
    return SolveResult(x=x, residual=float(np.linalg.norm(a @ x - b)), method="qr", rank_deficient=deficient)


def condition_number_circulant(first_row):
    """2-norm condition number of a symmetric circulant matrix from its eigenvalues."""
    row = np.asarray(first_row, dtype=float)
    mags = np.abs(row.size * dft(row))
    if mags.min() == 0.0:
        return np.inf
    return float(mags.max() / mags.min())


def condition_number_dense(matrix):
    """Ratio of extreme singular values (SVD based)."""
    s = np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])
