"""Zariski tangent computations at representation points.

The relation systems of :mod:`orthopair.relations` are polynomial (hence
complex-analytic) maps in the generator-matrix entries.  Their analytic
Jacobians are assembled term by term: the derivative of a word with respect
to one generator is the sum over its occurrences of prefix (x) suffix^T in
row-major vec convention.

Real-versus-complex bookkeeping: kernels are computed over the reals on the
expanded Jacobian [[Re J, -Im J], [Im J, Re J]] and halved, with a parity
assertion.  This is mathematically equal to the complex nullity (the real
expansion duplicates every singular value) but keeps one code path for the
genuinely real computation on dephased phases, and makes conjugate-linear
mistakes impossible to hide.

Dimension decisions are never taken on faith: the rank cut must exhibit a
singular-value gap ratio of at least GAP_RATIO_REQUIRED, otherwise the
computation refuses with :class:`IndeterminateDimension` carrying the full
spectrum.

The moduli tangent dimension at a point with scalar stabiliser is the
(complex) nullity of the relation Jacobian minus the dimension of the
conjugation-orbit tangent, span{([xi, m_1], ..., [xi, m_k])}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import HadamardPoint, PairConfiguration
from .linalg import as_matrix
from .relations import (
    AlgebraRepPoint,
    Relation,
    commutator_operator,
    evaluate_relations,
    evaluate_word,
    pair_relation_terms,
)

__all__ = [
    "GAP_RATIO_REQUIRED",
    "IndeterminateDimension",
    "JacobianSystem",
    "TangentReport",
    "rep_jacobian",
    "relation_residual_vector",
    "orbit_tangent_dim",
    "moduli_tangent_report",
    "moduli_tangent_dim",
    "a6_moduli_tangent_report",
    "a6_moduli_tangent_dim",
    "x33_moduli_tangent_report",
    "x33_moduli_tangent_dim",
    "phase_constraints",
    "defect_report",
    "dephased_defect",
    "FiberRankReport",
    "fiber_rank_check",
]

GAP_RATIO_REQUIRED = 1e3
RESIDUAL_GATE = 1e-8


class IndeterminateDimension(ArithmeticError):
    """Raised when a rank cut has no decisive singular-value gap."""

    def __init__(self, message: str, singular_values: np.ndarray, gap_ratio: float):
        super().__init__(message)
        self.singular_values = singular_values
        self.gap_ratio = gap_ratio


def _nullity(singular_values: np.ndarray, columns: int, tol: float,
             what: str) -> tuple[int, float]:
    """Nullity with the gap rule; raises IndeterminateDimension when fragile."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return columns, np.inf
    thresh = tol * s[0]
    rank = int(np.sum(s > thresh))
    if rank == 0:
        gap = np.inf
    elif rank < s.size:
        gap = s[rank - 1] / s[rank] if s[rank] > 0 else np.inf
    else:
        gap = s[-1] / thresh
    if gap < GAP_RATIO_REQUIRED:
        raise IndeterminateDimension(
            f"{what}: singular-value gap ratio {gap:.2e} below {GAP_RATIO_REQUIRED:.0e}; "
            "dimension is numerically undecided",
            s, float(gap),
        )
    return columns - rank, float(gap)


# ---------------------------------------------------------------------------
# Relation Jacobians.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobianSystem:
    """Real Jacobian of a relation system at a base point.

    ``variable_count`` counts real coordinates (two per complex matrix
    entry), ``equation_count`` real rows.  ``jacobian`` is the real
    expansion of the unscaled analytic complex Jacobian, which is kept in
    ``complex_jacobian`` for kernel extraction.
    """

    variable_count: int
    equation_count: int
    jacobian: np.ndarray
    complex_jacobian: np.ndarray
    base_point: object
    relation_names: tuple[str, ...]
    base_residual: float


def relation_residual_vector(mats, relations: list[Relation]) -> np.ndarray:
    """Stacked complex residual vector of all relations (row-major blocks)."""
    mats = [as_matrix(m) for m in mats]
    d = mats[0].shape[0]
    out = []
    for _, terms in relations:
        acc = np.zeros((d, d), dtype=np.complex128)
        for coeff, word in terms:
            acc += coeff * evaluate_word(mats, word, d)
        out.append(acc.ravel())
    return np.concatenate(out)


def _complex_jacobian(mats, relations: list[Relation]) -> np.ndarray:
    mats = [as_matrix(m) for m in mats]
    d = mats[0].shape[0]
    nv = len(mats)
    J = np.zeros((len(relations) * d * d, nv * d * d), dtype=np.complex128)
    for ri, (_, terms) in enumerate(relations):
        rows = slice(ri * d * d, (ri + 1) * d * d)
        for coeff, word in terms:
            for pos, v in enumerate(word):
                pre = evaluate_word(mats, word[:pos], d)
                suf = evaluate_word(mats, word[pos + 1:], d)
                J[rows, v * d * d:(v + 1) * d * d] += coeff * np.kron(pre, suf.T)
    return J


def _real_expand(J: np.ndarray) -> np.ndarray:
    A, B = J.real, J.imag
    return np.block([[A, -B], [B, A]])


def _point_terms(point) -> tuple[list[np.ndarray], list[Relation]]:
    if isinstance(point, PairConfiguration):
        return point.matrices(), pair_relation_terms(point.n)
    if isinstance(point, AlgebraRepPoint):
        return list(point.matrices), point.relation_terms()
    raise TypeError(f"cannot build a relation Jacobian for {type(point).__name__}")


def rep_jacobian(point) -> JacobianSystem:
    """Analytic Jacobian of the point's relation system.

    Refuses points whose relation residual exceeds the gate: tangent
    analysis at non-solutions is meaningless.
    """
    mats, terms = _point_terms(point)
    residual, _ = evaluate_relations(mats, terms)
    if residual > RESIDUAL_GATE:
        raise ValueError(f"relation residual {residual:.3e} exceeds {RESIDUAL_GATE:.1e}; not a representation point")
    Jc = _complex_jacobian(mats, terms)
    Jr = _real_expand(Jc)
    return JacobianSystem(
        variable_count=Jr.shape[1],
        equation_count=Jr.shape[0],
        jacobian=Jr,
        complex_jacobian=Jc,
        base_point=point,
        relation_names=tuple(name for name, _ in terms),
        base_residual=residual,
    )


def _variable_scales(mats) -> np.ndarray:
    """Per-variable column scaling (unit spectral norm); preserves nullity."""
    scales = []
    for m in mats:
        nrm = float(np.linalg.norm(m, 2))
        scales.append(nrm if nrm > 0 else 1.0)
    return np.array(scales)


def _scaled_singular_values(Jc: np.ndarray, mats) -> np.ndarray:
    d = mats[0].shape[0]
    col_scale = np.repeat(_variable_scales(mats), d * d)
    Jr = _real_expand(Jc * col_scale[None, :])
    return np.linalg.svd(Jr, compute_uv=False)


def orbit_tangent_dim(point, tol: float = 1e-10) -> int:
    """Dimension of the conjugation-orbit tangent at the point.

    Equals d^2 minus the commutant dimension; computed directly as the rank
    of the stacked commutator map xi -> ([xi, m] for all generators m).
    """
    mats = point.matrices() if isinstance(point, PairConfiguration) else \
        list(point.matrices) if isinstance(point, AlgebraRepPoint) else [as_matrix(m) for m in point]
    K = commutator_operator(mats)
    s = np.linalg.svd(K, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class TangentReport:
    """Moduli tangent dimension with the evidence behind the decision."""

    nullity: int
    orbit_dim: int
    moduli_dim: int
    gap_ratio: float
    singular_values: np.ndarray
    base_residual: float

    def to_json_dict(self) -> dict:
        return {
            "nullity": self.nullity,
            "orbit_dim": self.orbit_dim,
            "moduli_dim": self.moduli_dim,
            "gap_ratio": self.gap_ratio,
            "singular_values": [float(x) for x in self.singular_values],
        }


def _moduli_report(point, tol: float, what: str) -> TangentReport:
    mats, terms = _point_terms(point)
    residual, _ = evaluate_relations(mats, terms)
    if residual > RESIDUAL_GATE:
        raise ValueError(f"relation residual {residual:.3e} exceeds {RESIDUAL_GATE:.1e}")
    Jc = _complex_jacobian(mats, terms)
    s = _scaled_singular_values(Jc, mats)
    real_nullity, gap = _nullity(s, 2 * Jc.shape[1], tol, what)
    if real_nullity % 2 != 0:
        raise IndeterminateDimension(
            f"{what}: real kernel dimension {real_nullity} is odd, which contradicts "
            "complex-analyticity of the relations", s, gap)
    nullity = real_nullity // 2
    orbit = orbit_tangent_dim(point, tol)
    return TangentReport(nullity, orbit, nullity - orbit, gap, s, residual)


def moduli_tangent_report(c: PairConfiguration, tol: float = 1e-10) -> TangentReport:
    """Moduli tangent dimension of a full pair configuration."""
    return _moduli_report(c, tol, "pair moduli tangent")


def moduli_tangent_dim(c: PairConfiguration, tol: float = 1e-10) -> int:
    return moduli_tangent_report(c, tol).moduli_dim


def a6_moduli_tangent_report(point: AlgebraRepPoint, tol: float = 1e-10) -> TangentReport:
    """Moduli tangent dimension of a sandwich-algebra point (P, q_1..q_6).

    The point must be irreducible (scalar commutant); reducible points have
    non-unique orbit bookkeeping and are refused.
    """
    if point.algebra != "sandwich":
        raise ValueError("expected a sandwich-algebra point")
    from .relations import commutant_dimension

    if commutant_dimension(point.matrices) != 1:
        raise ValueError("point is reducible; moduli tangent undefined here")
    return _moduli_report(point, tol, "sandwich moduli tangent")


def a6_moduli_tangent_dim(point: AlgebraRepPoint, tol: float = 1e-10) -> int:
    return a6_moduli_tangent_report(point, tol).moduli_dim


def x33_moduli_tangent_report(point: AlgebraRepPoint, tol: float = 1e-10) -> TangentReport:
    """Moduli tangent dimension of a bipartite 3+3 graph point in dimension 6.

    No sum constraints are imposed; the rank-1 conditions are checked via
    the traces of the generators.
    """
    if point.algebra != "graph" or len(point.matrices) != 6:
        raise ValueError("expected a graph point on the 3+3 complete bipartite graph")
    for m in point.matrices:
        if abs(np.trace(m) - 1.0) > RESIDUAL_GATE:
            raise ValueError("graph point generators must be rank-1 idempotents")
    return _moduli_report(point, tol, "bipartite 3+3 moduli tangent")


def x33_moduli_tangent_dim(point: AlgebraRepPoint, tol: float = 1e-10) -> int:
    return x33_moduli_tangent_report(point, tol).moduli_dim


# ---------------------------------------------------------------------------
# Dephased Hadamard defect.
# ---------------------------------------------------------------------------


def phase_constraints(h: HadamardPoint) -> tuple[np.ndarray, np.ndarray]:
    """Unitarity constraints and their real Jacobian in phase coordinates.

    The reconstructed matrix has all entry moduli pinned to 1/sqrt(n), so
    the diagonal Gram conditions hold identically; the constraints are the
    off-diagonal Gram entries G_jk (j < k), split into real and imaginary
    parts.  Returns (c, J) with c of length n(n-1) and J of shape
    (n(n-1), (n-1)^2); dG_jk / dphi_ab = i conj(U_aj) U_ak (delta_kb - delta_jb).
    """
    u = h.reconstruct()
    n = h.n
    nf = (n - 1) ** 2
    gram = u.conj().T @ u
    cvals = []
    rows = []
    for j in range(n):
        for k in range(j + 1, n):
            row = np.zeros(nf, dtype=np.complex128)
            for a in range(1, n):
                v = 1j * np.conj(u[a, j]) * u[a, k]
                row[(a - 1) * (n - 1) + (k - 1)] += v
                if j >= 1:
                    row[(a - 1) * (n - 1) + (j - 1)] -= v
            cvals.append(gram[j, k])
            rows.append(row)
    cvec = np.array(cvals)
    Jc = np.array(rows)
    return np.concatenate([cvec.real, cvec.imag]), np.vstack([Jc.real, Jc.imag])


@dataclass(frozen=True)
class DefectReport:
    defect: int
    gap_ratio: float
    singular_values: np.ndarray
    unitarity_residual: float

    def to_json_dict(self) -> dict:
        return {
            "nullity": self.defect,
            "orbit_dim": 0,
            "moduli_dim": self.defect,
            "gap_ratio": self.gap_ratio,
            "singular_values": [float(x) for x in self.singular_values],
        }


def defect_report(h: HadamardPoint, tol: float = 1e-10) -> DefectReport:
    res = h.unitarity_residual()
    if res > RESIDUAL_GATE:
        raise ValueError(f"unitarity residual {res:.3e} exceeds {RESIDUAL_GATE:.1e}")
    _, J = phase_constraints(h)
    s = np.linalg.svd(J, compute_uv=False)
    nullity, gap = _nullity(s, J.shape[1], tol, "dephased defect")
    return DefectReport(nullity, gap, s, res)


def dephased_defect(h: HadamardPoint, tol: float = 1e-10) -> int:
    """Real nullity of the unitarity Jacobian in dephased phase coordinates.

    This is the dimension of the local family of complex Hadamard matrices
    through the point, with all gauge freedom already removed by dephasing.
    """
    return defect_report(h, tol).defect


# ---------------------------------------------------------------------------
# Rank of the invariant map on the moduli tangent (fiber dimension check).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiberRankReport:
    rank: int
    singular_values: np.ndarray
    moduli_dim: int
    degenerate_u3: bool


def fiber_rank_check(point: AlgebraRepPoint, tol: float = 1e-10) -> FiberRankReport:
    """Rank of d(u1, u2, u3) on the kernel of the 3+3 graph relation Jacobian.

    The u's are conjugation-invariant, so orbit directions contribute
    nothing and the rank equals the rank on the moduli tangent; generically
    it is 3, making the fibers of the invariant map curves.  Points where
    two factors of u3 vanish simultaneously can drop rank and are flagged
    (``degenerate_u3``) rather than asserted against.

    Kernel vectors are needed here, so this is the one place the complex
    SVD is used directly; its nullity agrees with the real-expansion count
    used by the dimension reports.
    """
    from .invariants import u_invariants_directional

    if point.algebra != "graph" or len(point.matrices) != 6:
        raise ValueError("fiber rank is computed on 3+3 graph restriction points")
    mats, terms = _point_terms(point)
    residual, _ = evaluate_relations(mats, terms)
    if residual > RESIDUAL_GATE:
        raise ValueError(f"relation residual {residual:.3e} exceeds {RESIDUAL_GATE:.1e}")
    Jc = _complex_jacobian(mats, terms)
    _, s, vh = np.linalg.svd(Jc)
    nullity, _ = _nullity(s, Jc.shape[1], tol, "graph relation kernel")
    d = mats[0].shape[0]
    P = mats[0] + mats[1] + mats[2]
    qs = mats[3:]
    columns = []
    for kv in range(nullity):
        vec = vh[-1 - kv].conj()
        dm = [vec[i * d * d:(i + 1) * d * d].reshape(d, d) for i in range(6)]
        dP = dm[0] + dm[1] + dm[2]
        columns.append(u_invariants_directional(P, qs, dP, dm[3:]))
    D = np.array(columns).T
    sd = np.linalg.svd(D, compute_uv=False)
    rtol = max(tol, 1e-8)
    if sd.size == 0 or sd[0] < 1e-12:
        rank = 0
    else:
        rank = int(np.sum(sd > rtol * sd[0]))
        if 0 < rank < sd.size and sd[rank] > 0 and sd[rank - 1] / sd[rank] < GAP_RATIO_REQUIRED:
            raise IndeterminateDimension(
                "invariant differential rank: gap ratio below threshold",
                sd, float(sd[rank - 1] / sd[rank]))
    factors = []
    for (i, j) in ((0, 1), (1, 2), (2, 0)):
        t = np.trace(P @ qs[i] @ P @ qs[j])
        factors.append(abs(36.0 * t - 1.0))
    degenerate = sum(1 for f in factors if f < 1e-6) >= 2
    orbit = orbit_tangent_dim(mats, tol)
    return FiberRankReport(rank, sd, nullity - orbit, degenerate)
