"""Predictor-corrector tracing of the four-dimensional Hadamard family.

Working coordinates are the dephased phases: 25 real unknowns at n = 6,
with all gauge freedom (basis phases and simultaneous conjugation) removed
exactly, so the kernel of the unitarity Jacobian *is* the family tangent
and no orbit subtraction is needed.

The corrector is Gauss-Newton with a truncated pseudo-inverse: on the
family the Jacobian is rank-deficient by exactly the four tangent
directions, so singular values below 1e-10 of the largest are dropped and
the step is the minimal-norm one, i.e. orthogonal to the family.  That
makes predictor steps of size h land back on the manifold a distance ~h
from where they started.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import HadamardPoint, from_hadamard
from .invariants import InvariantVector, u_invariants
from .tangent import dephased_defect, phase_constraints

__all__ = [
    "PathState",
    "CorrectorResult",
    "tangent_frame",
    "newton_correct",
    "PathResult",
    "trace_path",
    "FamilySample",
    "sample_family",
    "canonical_reduce",
    "family_jsonl_records",
]

FAMILY_DIM = 4
PINV_CUTOFF = 1e-10
DEFAULT_STEP_SCALE = 5e-3


def _phases_vector(h: HadamardPoint) -> np.ndarray:
    return h.phases.ravel().copy()


def _point_from_vector(n: int, x: np.ndarray) -> HadamardPoint:
    return HadamardPoint(n, x.reshape(n - 1, n - 1))


def _phase_distance(a: HadamardPoint, b: HadamardPoint) -> float:
    d = a.phases - b.phases
    d = np.mod(d + np.pi, 2 * np.pi) - np.pi
    return float(np.linalg.norm(d))


def tangent_frame(h: HadamardPoint, tol: float = 1e-10,
                  prev: np.ndarray | None = None) -> np.ndarray:
    """Orthonormal basis of the family tangent at an on-manifold point.

    Returns a ((n-1)^2, 4) array of kernel vectors of the unitarity
    Jacobian.  When ``prev`` is given the basis is rotated (orthogonal
    Procrustes) to match it as closely as possible, which keeps frames
    continuous along a path.  Points whose defect is not 4 are off the
    family or singular and are refused.
    """
    defect = dephased_defect(h, tol)
    if defect != FAMILY_DIM:
        raise ValueError(f"dephased defect is {defect}, not {FAMILY_DIM}; no 4-frame here")
    _, J = phase_constraints(h)
    _, s, vt = np.linalg.svd(J)
    V = vt[-FAMILY_DIM:].T
    if prev is not None:
        if prev.shape != V.shape:
            raise ValueError("previous frame has wrong shape")
        u, _, w = np.linalg.svd(V.T @ prev)
        V = V @ (u @ w)
    return V


@dataclass(frozen=True)
class CorrectorResult:
    point: HadamardPoint
    residual: float
    iterations: int
    converged: bool


def newton_correct(h: HadamardPoint, tol: float = 1e-12,
                   max_iter: int = 20) -> CorrectorResult:
    """Project an approximate point back onto the Hadamard variety.

    Gauss-Newton on the unitarity constraints; declares divergence when the
    residual fails to decrease three times in a row and then returns the
    best iterate flagged as failed, never a silently bad point.  Quadratic
    convergence is only guaranteed for starting residuals below ~0.1;
    grossly off-manifold starts are refused outright.
    """
    if h.unitarity_residual() > 0.5:
        raise ValueError("starting residual above 0.5; far outside any corrector basin")
    n = h.n
    x = _phases_vector(h)
    best_x, best_r = x.copy(), np.inf
    last = np.inf
    worse = 0
    for it in range(max_iter):
        c, J = phase_constraints(_point_from_vector(n, x))
        r = float(np.linalg.norm(c))
        if r < best_r:
            best_x, best_r = x.copy(), r
        if r <= tol:
            return CorrectorResult(_point_from_vector(n, x), r, it, True)
        if r >= last:
            worse += 1
            if worse >= 3:
                return CorrectorResult(_point_from_vector(n, best_x), best_r, it, False)
        else:
            worse = 0
        last = r
        step, *_ = np.linalg.lstsq(J, -c, rcond=PINV_CUTOFF)
        x = x + step
    c, _ = phase_constraints(_point_from_vector(n, x))
    r = float(np.linalg.norm(c))
    if r < best_r:
        best_x, best_r = x, r
    return CorrectorResult(_point_from_vector(n, best_x), best_r, max_iter, best_r <= tol)


@dataclass
class PathState:
    """Mutable state of one predictor-corrector walk."""

    current: HadamardPoint
    tangent_frame: np.ndarray
    step_size: float
    last_residual: float
    step_index: int = 0


@dataclass(frozen=True)
class PathResult:
    points: list[HadamardPoint]
    residuals: list[float]
    completed_steps: int
    requested_steps: int
    status: str  # "ok" or a truncation reason
    invariant_step_bound: float = 0.0  # empirical max |u(k+1) - u(k)| / h
    final_frame: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def trace_path(start: HadamardPoint, direction, steps: int, h: float,
               corrector_tol: float = 1e-12, path_tol: float = 1e-10,
               initial_frame: np.ndarray | None = None) -> PathResult:
    """Walk the family from ``start`` along a fixed frame direction.

    ``direction`` is a unit vector in 4-frame coordinates; at every step the
    predictor moves h along the framed direction and the corrector projects
    back.  The step is halved on corrector failure, at most five times,
    after which the path is truncated and returned with a status.  Every
    emitted point has unitarity residual below ``path_tol`` and consecutive
    points are at least h/2 apart in (torus) phase norm.

    The frame at ``start`` is a fresh kernel basis unless ``initial_frame``
    is given (e.g. the ``final_frame`` of a previous path, which makes a
    reversed-direction walk retrace the same curve).
    """
    direction = np.asarray(direction, dtype=float)
    if direction.shape != (FAMILY_DIM,):
        raise ValueError(f"direction must have {FAMILY_DIM} components")
    nrm = np.linalg.norm(direction)
    if nrm == 0:
        raise ValueError("direction must be nonzero")
    direction = direction / nrm
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    state = PathState(start, tangent_frame(start, prev=initial_frame), h,
                      start.unitarity_residual())
    points = [start]
    residuals = [state.last_residual]
    status = "ok"
    for k in range(steps):
        step_h = state.step_size
        advanced = False
        for _ in range(6):  # initial try plus five halvings
            pred = _phases_vector(state.current) + step_h * (state.tangent_frame @ direction)
            try:
                result = newton_correct(_point_from_vector(start.n, pred), corrector_tol)
            except ValueError:
                step_h /= 2.0
                continue
            if result.converged and result.residual <= path_tol:
                moved = _phase_distance(result.point, state.current)
                if moved >= step_h / 2.0:
                    advanced = True
                    break
            step_h /= 2.0
        if not advanced:
            status = f"corrector failed at step {k} after 5 halvings"
            break
        try:
            state.tangent_frame = tangent_frame(result.point, prev=state.tangent_frame)
        except ValueError as exc:
            status = f"family frame lost at step {k}: {exc}"
            break
        state.current = result.point
        state.last_residual = result.residual
        state.step_index = k + 1
        points.append(result.point)
        residuals.append(result.residual)
    bound = 0.0
    if len(points) > 1:
        us = [_restriction_invariants(p).as_array() for p in points]
        bound = max(float(np.max(np.abs(b - a))) for a, b in zip(us, us[1:])) / h
    return PathResult(points, residuals, len(points) - 1, steps, status, bound,
                      state.tangent_frame)


@dataclass(frozen=True)
class FamilySample:
    """Random-walk sample of the family with per-point invariants."""

    points: list[HadamardPoint]
    invariants: list[InvariantVector]
    seed: int
    metadata: dict = field(default_factory=dict)


def _restriction_invariants(h: HadamardPoint) -> InvariantVector:
    c = from_hadamard(h)
    P = c.p[0] + c.p[1] + c.p[2]
    return u_invariants(P, c.q[0], c.q[1], c.q[2])


def sample_family(start: HadamardPoint, count: int, seed: int,
                  step_scale: float = DEFAULT_STEP_SCALE,
                  corrector_tol: float = 1e-12) -> FamilySample:
    """Gaussian random walk in the 4-frame with correction after each step.

    Deterministic given the seed.  Corrector failures shrink the step for
    that move and are counted in the metadata; points that still fail are
    skipped, so the sample may come back shorter than requested (the first
    point is the start itself).  The recorded list is deduplicated under the
    canonical form of :func:`canonical_reduce`.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    points = [start]
    invariants = [_restriction_invariants(start)]
    seen_keys = {_canonical_phases(start, full=False)[0]}
    frame = tangent_frame(start)
    current = start
    failures = 0
    duplicates = 0
    moves_left = 10 * count  # hard cap; persistent failures shorten the sample
    while len(points) < count and moves_left > 0:
        moves_left -= 1
        scale = step_scale
        moved = None
        for _ in range(6):
            step = frame @ (scale * rng.standard_normal(FAMILY_DIM))
            pred = _phases_vector(current) + step
            try:
                result = newton_correct(_point_from_vector(start.n, pred), corrector_tol)
            except ValueError:
                scale /= 2.0
                failures += 1
                continue
            if result.converged:
                moved = result.point
                break
            scale /= 2.0
            failures += 1
        if moved is None:
            failures += 1
            continue
        try:
            frame = tangent_frame(moved, prev=frame)
        except ValueError:
            failures += 1  # singular point of the family: do not move there
            continue
        current = moved
        key = _canonical_phases(moved, full=False)[0]
        if key in seen_keys:
            duplicates += 1
            continue
        seen_keys.add(key)
        points.append(moved)
        invariants.append(_restriction_invariants(moved))
    meta = {
        "step_scale": step_scale,
        "corrector_tol": corrector_tol,
        "corrector_retries": failures,
        "duplicates_skipped": duplicates,
        "max_residual": max(p.unitarity_residual() for p in points),
    }
    return FamilySample(points, invariants, seed, meta)


# ---------------------------------------------------------------------------
# Canonical representatives under the obvious equivalences.
# ---------------------------------------------------------------------------


def _dephase_matrix(u: np.ndarray) -> np.ndarray:
    col = u[0, :] / np.abs(u[0, :])
    u = u / col[None, :]
    row = u[:, 0] / np.abs(u[:, 0])
    return u / row[:, None]


def _canonical_phases(h: HadamardPoint, full: bool) -> tuple[tuple, np.ndarray]:
    """Heuristic canonical form under row/column permutation and dephasing.

    Returns (key, phases): the lexicographically minimal rounded phase
    matrix over the searched permutations, and the unrounded phases that
    realise it.  The default searches permutations that keep the pinned
    first row and column (phase-block columns permuted freely, rows then
    sorted, which is the exact minimum over that subgroup).  ``full``
    additionally minimises over the choice of pinned row/column, i.e. the
    whole permutation orbit.  Equivalence classes are never merged wrongly
    either way, but the default may keep more than one representative of a
    class whose members differ by a first-row/column move.
    """
    from itertools import permutations

    n = h.n
    u0 = h.reconstruct()
    pivots = [(0, 0)]
    if full:
        pivots = [(r, c) for r in range(n) for c in range(n)]
    best_key = None
    best_ph = None
    for (r, c) in pivots:
        row_order = [r] + [i for i in range(n) if i != r]
        col_order = [c] + [j for j in range(n) if j != c]
        u = _dephase_matrix(u0[np.ix_(row_order, col_order)])
        ph = np.angle(u[1:, 1:])
        rounded = np.round(ph / 1e-6).astype(np.int64)
        for cperm in permutations(range(n - 1)):
            cand = rounded[:, cperm]
            rperm = sorted(range(n - 1), key=lambda i: tuple(cand[i]))
            key = tuple(tuple(cand[i]) for i in rperm)
            if best_key is None or key < best_key:
                best_key = key
                best_ph = ph[np.ix_(rperm, cperm)]
    return best_key, best_ph


def canonical_reduce(points: list[HadamardPoint], full: bool = False) -> list[HadamardPoint]:
    """Deduplicate a list of points up to dephased permutation equivalence.

    Each point is replaced by the representative realising its canonical
    key (rounding at 1e-6 is used for comparison only; the representative
    keeps unrounded phases); later points with an already-seen key are
    dropped.  Idempotent for points away from rounding-tie boundaries.
    """
    seen = set()
    out = []
    for h in points:
        key, ph = _canonical_phases(h, full)
        if key not in seen:
            seen.add(key)
            out.append(HadamardPoint(h.n, ph))
    return out


def family_jsonl_records(points, residuals=None, path_id: int = 0):
    """One JSON record per point: phases, residual, invariants, step, path."""
    for k, h in enumerate(points):
        res = residuals[k] if residuals is not None else h.unitarity_residual()
        inv = _restriction_invariants(h)
        yield {
            "phases": [[float(x) for x in row] for row in h.phases],
            "residual": float(res),
            "invariants": {
                "u1": inv.u1, "u2": inv.u2, "u3": inv.u3,
                "imag_residue": inv.imag_residue,
            },
            "step": k,
            "path": path_id,
        }


def write_family_jsonl(path, points, residuals=None, path_id: int = 0,
                       append: bool = False) -> None:
    """Dump points as JSONL; ``append`` accumulates several paths in one file."""
    with open(path, "a" if append else "w") as fh:
        for rec in family_jsonl_records(points, residuals, path_id):
            fh.write(json.dumps(rec) + "\n")
