"""Projector configurations, the standard pair, and Hadamard gauge fixing.

A *configuration* is a pair of maximal systems of rank-1 projectors in
dimension n, pairwise algebraically unbiased: Tr(p_i q_j) = 1/n for all
(i, j).  Hermitian configurations are the same thing as pairs of mutually
unbiased bases, and the transition matrix between the two bases is then a
complex Hadamard matrix in the *unitary* normalisation used throughout this
package: a unitary whose entries all have modulus 1/sqrt(n).  (Catalogues
that use entries of modulus 1 differ by the factor sqrt(n).)

Gauge fixing follows the dephased convention: first row and first column of
the transition matrix real positive, so the free parameters are the
(n-1) x (n-1) phases of the remaining block and the discrete-Fourier matrix
is a fixed point of the gauge.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .linalg import adjoint, as_matrix, rank1_projector, spectral_norm

__all__ = [
    "ProjectorSystem",
    "PairConfiguration",
    "HadamardPoint",
    "fourier_matrix",
    "fourier_phases",
    "standard_pair",
    "pair_from_matrices",
    "unbiasedness_residual",
    "from_hadamard",
    "to_hadamard",
    "is_complex_hadamard",
    "save_pair",
    "load_pair",
    "save_hadamard",
    "load_hadamard",
    "encode_matrix",
    "decode_matrix",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ProjectorSystem:
    """n rank-1 projectors, pairwise orthogonal, summing to the identity."""

    n: int
    projectors: tuple[np.ndarray, ...]

    def residual(self) -> float:
        """Worst violation of idempotency, orthogonality and sum-to-identity."""
        worst = 0.0
        for i, p in enumerate(self.projectors):
            worst = max(worst, spectral_norm(p @ p - p))
            worst = max(worst, abs(np.trace(p) - 1.0))
            for j, q in enumerate(self.projectors):
                if i != j:
                    worst = max(worst, spectral_norm(p @ q))
        worst = max(worst, spectral_norm(sum(self.projectors) - np.eye(self.n)))
        return worst

    def validate(self, tol: float = DEFAULT_TOL) -> None:
        r = self.residual()
        if r > tol:
            raise ValueError(f"projector system violates its invariants: residual {r:.3e} > {tol:.1e}")


def _system(mats) -> ProjectorSystem:
    mats = tuple(as_matrix(m) for m in mats)
    n = mats[0].shape[0]
    for m in mats:
        if m.shape != (n, n):
            raise ValueError("all projectors must be square of equal size")
    if len(mats) != n:
        raise ValueError(f"expected {n} projectors, got {len(mats)}")
    return ProjectorSystem(n, mats)


@dataclass(frozen=True)
class PairConfiguration:
    """Two projector systems with all cross traces equal to 1/n."""

    n: int
    p_system: ProjectorSystem
    q_system: ProjectorSystem
    residual: float

    @property
    def p(self) -> tuple[np.ndarray, ...]:
        return self.p_system.projectors

    @property
    def q(self) -> tuple[np.ndarray, ...]:
        return self.q_system.projectors

    def matrices(self) -> list[np.ndarray]:
        return list(self.p) + list(self.q)


def pair_from_matrices(ps, qs) -> PairConfiguration:
    p_sys = _system(ps)
    q_sys = _system(qs)
    if p_sys.n != q_sys.n:
        raise ValueError("systems have different dimensions")
    cfg = PairConfiguration(p_sys.n, p_sys, q_sys, 0.0)
    return PairConfiguration(p_sys.n, p_sys, q_sys, unbiasedness_residual(cfg))


def unbiasedness_residual(c: PairConfiguration) -> float:
    """Worst violation over all defining relations of the configuration:
    idempotency, in-system orthogonality, sum-to-identity, and
    |Tr(p_i q_j) - 1/n| over all cross pairs."""
    if c.p_system.n != c.q_system.n:
        raise ValueError("systems have different dimensions")
    n = c.n
    worst = max(c.p_system.residual(), c.q_system.residual())
    for p in c.p:
        for q in c.q:
            worst = max(worst, abs(np.trace(p @ q) - 1.0 / n))
    return worst


# ---------------------------------------------------------------------------
# The standard pair.
# ---------------------------------------------------------------------------


def fourier_matrix(n: int) -> np.ndarray:
    """Unitary discrete-Fourier matrix, entries eps^{(i-1)(j-1)} / sqrt(n).

    eps is fixed to exp(2 pi i / n); any other primitive root gives a
    column-permuted, hence equivalent, matrix.
    """
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return np.exp(2j * np.pi * i * j / n) / np.sqrt(n)


def _swap34_columns(a: np.ndarray) -> np.ndarray:
    n = a.shape[1]
    order = [0, 1, 3, 2] + list(range(4, n))
    return a[:, order]


def standard_pair(n: int, swap34: bool = False) -> PairConfiguration:
    """Coordinate projectors against discrete-Fourier column projectors.

    With ``swap34`` the third and fourth Fourier columns are exchanged
    before building the second system; permuting projectors preserves every
    defining relation, so this is an equally valid base point (and the one
    whose tangent behaviour is certified at n = 6).
    """
    if n < 2:
        raise ValueError("standard pair needs n >= 2")
    if swap34 and n < 4:
        raise ValueError("swap34 needs n >= 4")
    a = fourier_matrix(n)
    if swap34:
        a = _swap34_columns(a)
    ps = []
    for i in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, i] = 1.0
        ps.append(e)
    qs = [rank1_projector(a[:, j]) for j in range(n)]
    return pair_from_matrices(ps, qs)


# ---------------------------------------------------------------------------
# Dephased Hadamard coordinates.
# ---------------------------------------------------------------------------


def _wrap_angles(ph: np.ndarray) -> np.ndarray:
    out = np.mod(np.asarray(ph, dtype=float) + np.pi, 2 * np.pi) - np.pi
    out[out == -np.pi] = np.pi
    return out


@dataclass(frozen=True)
class HadamardPoint:
    """Dephased phase coordinates of an n x n complex Hadamard matrix.

    ``phases[i, j]`` is the angle of entry (i+1, j+1) of the reconstructed
    matrix; the first row and column are pinned to 1/sqrt(n).  All angles
    are stored wrapped to (-pi, pi].
    """

    n: int
    phases: np.ndarray

    def __post_init__(self):
        ph = _wrap_angles(self.phases)
        if ph.shape != (self.n - 1, self.n - 1):
            raise ValueError(f"phase matrix must be {(self.n - 1, self.n - 1)}, got {ph.shape}")
        object.__setattr__(self, "phases", ph)

    def reconstruct(self) -> np.ndarray:
        u = np.ones((self.n, self.n), dtype=np.complex128)
        u[1:, 1:] = np.exp(1j * self.phases)
        return u / np.sqrt(self.n)

    def unitarity_residual(self) -> float:
        u = self.reconstruct()
        return float(spectral_norm(u.conj().T @ u - np.eye(self.n)))


def fourier_phases(n: int, swap34: bool = False) -> HadamardPoint:
    """HadamardPoint of the (optionally column-swapped) Fourier matrix."""
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    ang = 2 * np.pi * i * j / n
    if swap34:
        if n < 4:
            raise ValueError("swap34 needs n >= 4")
        ang = _swap34_columns(ang)
    return HadamardPoint(n, ang[1:, 1:])


def is_complex_hadamard(u, tol: float) -> tuple[bool, float]:
    """True iff u is unitary and all entry moduli equal 1/sqrt(n), within tol.

    Returns (verdict, residual) with residual the worst of the two defects.
    """
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False, np.inf
    n = u.shape[0]
    unit = spectral_norm(u.conj().T @ u - np.eye(n))
    flat = float(np.max(np.abs(np.abs(u) - 1.0 / np.sqrt(n))))
    residual = max(unit, flat)
    return residual <= tol, residual


def from_hadamard(h: HadamardPoint, tol: float = 1e-8) -> PairConfiguration:
    """Configuration with p = coordinate projectors, q = column projectors.

    The reconstruction pins every entry modulus to exactly 1/sqrt(n), so the
    only source of error is unitarity of the phase matrix; the resulting
    projectors are Hermitian by construction.
    """
    res = h.unitarity_residual()
    if res > tol:
        raise ValueError(f"phases do not reconstruct to a unitary: residual {res:.3e} > {tol:.1e}")
    u = h.reconstruct()
    n = h.n
    ps = []
    for i in range(n):
        e = np.zeros((n, n), dtype=np.complex128)
        e[i, i] = 1.0
        ps.append(e)
    qs = [rank1_projector(u[:, j]) for j in range(n)]
    return pair_from_matrices(ps, qs)


def _unit_eigenvector(p: np.ndarray) -> np.ndarray:
    """Unit vector spanning the range of a (numerically) rank-1 projector."""
    # the dominant left singular vector is the range direction
    uu, s, _ = np.linalg.svd(p)
    return uu[:, 0]


def to_hadamard(c: PairConfiguration, tol: float = 1e-8) -> HadamardPoint:
    """Gauge-fix a Hermitian configuration to dephased phase coordinates.

    The p-system is diagonalised to coordinate projectors; eigenvectors are
    ordered by maximal overlap with the coordinate axes (ties and collisions
    fall back to index order) so the gauge fix is deterministic.  The
    q-eigenvector matrix read in that basis is then dephased: first row and
    first column made real positive.  Simultaneously conjugated inputs give
    the same output up to row/column permutations.
    """
    n = c.n
    for m in c.matrices():
        if spectral_norm(m - adjoint(m)) > tol:
            raise ValueError("configuration is not Hermitian (not a fixed point of the adjoint involution)")
    vs = [_unit_eigenvector(p) for p in c.p]
    axis = [int(np.argmax(np.abs(v))) for v in vs]
    order = sorted(range(n), key=lambda i: (axis[i], i))
    vmat = np.stack([vs[i] for i in order], axis=1)
    ws = [_unit_eigenvector(q) for q in c.q]
    u = vmat.conj().T @ np.stack(ws, axis=1)

    # entry moduli certify unbiasedness of the transition matrix
    dev = float(np.max(np.abs(np.abs(u) - 1.0 / np.sqrt(n))))
    if dev > max(10 * tol, 1e-7):
        raise ValueError(f"transition matrix is not unbiased: modulus deviation {dev:.3e}")
    col_phase = u[0, :] / np.abs(u[0, :])
    u = u / col_phase[None, :]
    row_phase = u[:, 0] / np.abs(u[:, 0])
    u = u / row_phase[:, None]
    return HadamardPoint(n, np.angle(u[1:, 1:]))


# ---------------------------------------------------------------------------
# File formats.
# ---------------------------------------------------------------------------


def encode_matrix(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def decode_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)


def save_pair(path, c: PairConfiguration, fmt: str = "projectors") -> None:
    """Write a pair file.  ``bases`` stores two basis matrices (columns are
    the basis vectors, Hermitian configurations only); ``projectors`` stores
    all 2n projector matrices and is faithful for any configuration."""
    if fmt == "projectors":
        doc = {
            "n": c.n,
            "format": "projectors",
            "p": [encode_matrix(m) for m in c.p],
            "q": [encode_matrix(m) for m in c.q],
        }
    elif fmt == "bases":
        e_basis = np.stack([_unit_eigenvector(p) for p in c.p], axis=1)
        f_basis = np.stack([_unit_eigenvector(q) for q in c.q], axis=1)
        doc = {
            "n": c.n,
            "format": "bases",
            "e_basis": encode_matrix(e_basis),
            "f_basis": encode_matrix(f_basis),
        }
    else:
        raise ValueError(f"unknown pair format {fmt!r}")
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_pair(path) -> PairConfiguration:
    with open(path) as fh:
        doc = json.load(fh)
    fmt = doc.get("format", "projectors")
    if fmt == "projectors":
        ps = [decode_matrix(m) for m in doc["p"]]
        qs = [decode_matrix(m) for m in doc["q"]]
    elif fmt == "bases":
        e_basis = decode_matrix(doc["e_basis"])
        f_basis = decode_matrix(doc["f_basis"])
        ps = [rank1_projector(e_basis[:, i]) for i in range(e_basis.shape[1])]
        qs = [rank1_projector(f_basis[:, i]) for i in range(f_basis.shape[1])]
    else:
        raise ValueError(f"unknown pair format {fmt!r}")
    return pair_from_matrices(ps, qs)


def save_hadamard(path, h: HadamardPoint) -> None:
    with open(path, "w") as fh:
        json.dump({"n": h.n, "phases": [[float(x) for x in row] for row in h.phases]}, fh)


def load_hadamard(path) -> HadamardPoint:
    with open(path) as fh:
        doc = json.load(fh)
    return HadamardPoint(int(doc["n"]), np.array(doc["phases"], dtype=float))
