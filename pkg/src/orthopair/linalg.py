"""Dense complex linear algebra kernel.

All operators in this package are plain numpy arrays of dtype complex128
(row-major, finite entries).  This module provides the handful of primitives
everything else is built on: products, traces, adjoints, spectral norms,
and -- most importantly -- numerical rank and nullspace decisions with
explicit, caller-controlled tolerances.  Rank decisions use a *relative*
threshold (tol times the largest singular value) and always report the
singular-value gap at the cut, so callers can detect ill-conditioned
decisions instead of silently trusting them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "as_matrix",
    "mul",
    "trace",
    "adjoint",
    "spectral_norm",
    "RankReport",
    "numerical_rank",
    "nullspace",
    "rank1_projector",
]


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex128 array and check every entry is finite."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {m.ndim}")
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ValueError("matrix has non-finite entries")
    return m


def mul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def trace(a) -> complex:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"trace of non-square matrix {a.shape}")
    return complex(np.trace(a))


def adjoint(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(a).conj().T


def spectral_norm(a) -> float:
    """Largest singular value; conjugation-invariant residual norm."""
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class RankReport:
    """Outcome of a numerical rank decision.

    ``rank`` counts singular values exceeding ``tolerance_used`` (an absolute
    threshold, already scaled by the largest singular value).  ``gap_ratio``
    is sigma_rank / sigma_{rank+1}; a small ratio means the decision is
    fragile and the caller should not trust the count.
    """

    singular_values: np.ndarray
    rank: int
    tolerance_used: float
    gap_ratio: float = field(default=np.inf)


def _svdvals(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ArithmeticError(f"SVD failed to converge on {a.shape} matrix") from exc


def rank_from_singular_values(s: np.ndarray, tol: float) -> RankReport:
    """Apply the relative-threshold rank rule to a descending spectrum."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    s = np.asarray(s, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return RankReport(s, 0, 0.0, np.inf)
    thresh = tol * s[0]
    rank = int(np.sum(s > thresh))
    if rank == 0:
        gap = np.inf
    elif rank < s.size:
        below = s[rank]
        gap = s[rank - 1] / below if below > 0 else np.inf
    else:
        # no singular value below the cut; compare against the threshold itself
        gap = s[-1] / thresh
    return RankReport(s, rank, thresh, float(gap))


def numerical_rank(a, tol: float, precision: str = "double") -> RankReport:
    """Rank of ``a`` with threshold ``tol * sigma_max``; reports the spectrum.

    ``precision="extended"`` recomputes the singular values with >= 30
    significant digits of software arithmetic (see :mod:`orthopair.xprec`),
    so double-precision rank decisions can be re-checked independently.
    """
    a = as_matrix(a)
    if precision == "extended":
        from . import xprec

        s = xprec.mp_singular_values(a)
    elif precision == "double":
        s = _svdvals(a)
    else:
        raise ValueError(f"unknown precision {precision!r}")
    return rank_from_singular_values(s, tol)


def nullspace(a, tol: float, precision: str = "double") -> list[np.ndarray]:
    """Orthonormal basis of the numerical kernel of ``a``.

    Each returned vector w satisfies ||a w|| <= 10 * tol * ||a||.
    """
    a = as_matrix(a)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if precision == "extended":
        from . import xprec

        return xprec.mp_nullspace(a, tol)
    try:
        _, s, vh = np.linalg.svd(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ArithmeticError(f"SVD failed to converge on {a.shape} matrix") from exc
    report = rank_from_singular_values(s, tol)
    n = a.shape[1]
    return [vh[i].conj() for i in range(report.rank, n)]


def rank1_projector(v) -> np.ndarray:
    """Projector v v^dag / (v^dag v) onto the line spanned by v.

    Idempotent and of unit trace up to rounding (<= 1e-13), invariant under
    rescaling of v, and Hermitian *exactly*: the outer product is
    symmetrised, which is a bitwise-exact operation on conjugate pairs.
    """
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    nrm2 = np.vdot(v, v).real
    if nrm2 == 0.0 or not np.isfinite(nrm2):
        raise ValueError("cannot project onto the zero vector")
    p = np.outer(v, v.conj()) / nrm2
    return (p + p.conj().T) / 2.0
