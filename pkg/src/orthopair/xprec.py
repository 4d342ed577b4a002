"""Extended-precision re-checks (software arithmetic, >= 30 significant digits).

Mirrors the handful of operations the double-precision oracles rely on --
products, traces, residual norms, singular values -- on mpmath matrices, so
that any reported number can be recomputed with the same interfaces at
higher precision and compared.  Heavy tangent computations are deliberately
out of scope here; the values they produce are integers guarded by gap
ratios, not continuous quantities.
"""

from __future__ import annotations

import mpmath as mp
import numpy as np

__all__ = [
    "DIGITS",
    "to_mp",
    "mp_mul",
    "mp_trace",
    "mp_adjoint",
    "mp_rank1_projector",
    "mp_singular_values",
    "mp_nullspace",
    "mp_spectral_norm",
    "fourier_mp",
    "pair_residual_mp",
    "u_invariants_mp",
    "identity_gap_mp",
]

DIGITS = 34


class _precision:
    def __enter__(self):
        self._saved = mp.mp.dps
        mp.mp.dps = DIGITS

    def __exit__(self, *exc):
        mp.mp.dps = self._saved


def to_mp(a) -> mp.matrix:
    a = np.asarray(a, dtype=complex)
    with _precision():
        m = mp.matrix(a.shape[0], a.shape[1])
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                m[i, j] = mp.mpc(a[i, j].real, a[i, j].imag)
        return m


def mp_mul(a: mp.matrix, b: mp.matrix) -> mp.matrix:
    with _precision():
        return a * b


def mp_trace(a: mp.matrix) -> mp.mpc:
    with _precision():
        return sum(a[i, i] for i in range(a.rows))


def mp_adjoint(a: mp.matrix) -> mp.matrix:
    with _precision():
        return a.transpose_conj()


def mp_rank1_projector(v) -> mp.matrix:
    with _precision():
        col = mp.matrix([[mp.mpc(complex(x).real, complex(x).imag)] for x in v])
        nrm2 = sum((col[i, 0].conjugate() * col[i, 0]).real for i in range(col.rows))
        return (col * col.transpose_conj()) / nrm2


def mp_singular_values(a) -> np.ndarray:
    """Descending singular values computed at DIGITS digits, as float64."""
    with _precision():
        m = a if isinstance(a, mp.matrix) else to_mp(a)
        s = mp.svd_c(m, compute_uv=False)
        vals = sorted((float(s[i]) for i in range(s.rows)), reverse=True)
    return np.array(vals)


def mp_nullspace(a, tol: float) -> list[np.ndarray]:
    with _precision():
        m = a if isinstance(a, mp.matrix) else to_mp(a)
        # full matrices: wide inputs need all n right singular vectors
        u, s, v = mp.svd_c(m, full_matrices=True, compute_uv=True)
        smax = max(float(s[i]) for i in range(s.rows)) if s.rows else 0.0
        out = []
        ncols = m.cols
        for i in range(ncols):
            sval = float(s[i]) if i < s.rows else 0.0
            if smax == 0.0 or sval <= tol * smax:
                vec = np.array([complex(v[i, j]) for j in range(ncols)]).conj()
                out.append(vec)
    return out


def mp_spectral_norm(a) -> float:
    s = mp_singular_values(a)
    return float(s[0]) if s.size else 0.0


# ---------------------------------------------------------------------------
# High-level oracle re-checks.
# ---------------------------------------------------------------------------


def fourier_mp(n: int, swap34: bool = False) -> mp.matrix:
    with _precision():
        a = mp.matrix(n, n)
        root = mp.sqrt(mp.mpf(n))
        for i in range(n):
            for j in range(n):
                a[i, j] = mp.expjpi(mp.mpf(2 * i * j) / n) / root
        if swap34:
            for i in range(n):
                a[i, 2], a[i, 3] = a[i, 3], a[i, 2]
        return a


def _standard_systems_mp(n: int, swap34: bool):
    with _precision():
        a = fourier_mp(n, swap34)
        ps = []
        for i in range(n):
            e = mp.zeros(n, n)
            e[i, i] = mp.mpf(1)
            ps.append(e)
        qs = []
        for j in range(n):
            col = mp.matrix([[a[i, j]] for i in range(n)])
            qs.append(col * col.transpose_conj())
        return ps, qs


def pair_residual_mp(n: int, swap34: bool = False) -> float:
    """Extended-precision worst relation residual of the standard pair."""
    with _precision():
        ps, qs = _standard_systems_mp(n, swap34)
        eye = mp.eye(n)
        worst = mp.mpf(0)

        def norm(m):
            s = mp.svd_c(m, compute_uv=False)
            return max(s[i] for i in range(s.rows))

        for sys in (ps, qs):
            for i, p in enumerate(sys):
                worst = max(worst, norm(p * p - p))
                for j, q in enumerate(sys):
                    if i != j:
                        worst = max(worst, norm(p * q))
            worst = max(worst, norm(sum(sys[1:], sys[0]) - eye))
        inv_n = mp.mpf(1) / n
        for p in ps:
            for q in qs:
                worst = max(worst, abs(mp_trace(p * q) - inv_n))
        return float(worst)


def u_invariants_mp(n: int, swap34: bool, p_subset, q_subset) -> tuple[float, float, float]:
    """(u1, u2, u3) of the standard pair at DIGITS digits (1-based subsets)."""
    with _precision():
        ps, qs = _standard_systems_mp(n, swap34)
        P = sum((ps[i - 1] for i in list(p_subset)[1:]), ps[list(p_subset)[0] - 1])
        q1, q2, q3 = (qs[j - 1] for j in q_subset)
        t12 = mp_trace(P * q1 * P * q2)
        t13 = mp_trace(P * q1 * P * q3)
        t23 = mp_trace(P * q2 * P * q3)
        u1 = 36 * (t12 + t13 + t23)
        u2 = 216 * (mp_trace(P * q1 * P * q2 * P * q3) + mp_trace(P * q1 * P * q3 * P * q2))
        u3 = (36 * t12 - 1) * (36 * t23 - 1) * (36 * t13 - 1)
        return float(u1.real), float(u2.real), float(u3.real)


def identity_gap_mp(n: int, swap34: bool, p_subset, q_subset) -> float:
    """Extended-precision gap of the ordered-pair trace identity."""
    with _precision():
        ps, qs = _standard_systems_mp(n, swap34)
        p = [ps[i - 1] for i in p_subset]
        q = [qs[j - 1] for j in q_subset]
        P = p[0] + p[1] + p[2]
        Q = q[0] + q[1] + q[2]
        lhs = mp.mpc(1)
        rhs = mp.mpc(1)
        for i in range(3):
            for j in range(3):
                if i != j:
                    lhs *= 36 * mp_trace(P * q[i] * P * q[j]) - 1
                    rhs *= 36 * mp_trace(Q * p[i] * Q * p[j]) - 1
        return float(abs(lhs - rhs))


# ---------------------------------------------------------------------------
# Generic re-checks on matrices loaded at double precision.
# ---------------------------------------------------------------------------


def _norm2(m: mp.matrix) -> mp.mpf:
    s = mp.svd_c(m, compute_uv=False)
    return max(s[i] for i in range(s.rows))


def pair_residual_categories_mp(ps, qs) -> dict:
    """Same residual categories as the double-precision verifier, in mp."""
    with _precision():
        mp_ps = [to_mp(m) for m in ps]
        mp_qs = [to_mp(m) for m in qs]
        n = mp_ps[0].rows
        eye = mp.eye(n)
        cats = {}
        for tag, system in (("p", mp_ps), ("q", mp_qs)):
            cats[f"{tag}_idempotency"] = float(max(_norm2(m * m - m) for m in system))
            cats[f"{tag}_unit_trace"] = float(max(abs(mp_trace(m) - 1) for m in system))
            orth = mp.mpf(0)
            for i, a in enumerate(system):
                for j, b in enumerate(system):
                    if i != j:
                        orth = max(orth, _norm2(a * b))
            cats[f"{tag}_orthogonality"] = float(orth)
            cats[f"{tag}_sum_to_identity"] = float(_norm2(sum(system[1:], system[0]) - eye))
        inv_n = mp.mpf(1) / n
        cats["unbiasedness"] = float(max(
            abs(mp_trace(p * q) - inv_n) for p in mp_ps for q in mp_qs))
        return cats


def u_invariants_mp_matrices(P, q_triple) -> tuple[float, float, float, float]:
    """(u1, u2, u3, imag residue) recomputed in mp from double inputs."""
    with _precision():
        Pm = to_mp(P)
        q1, q2, q3 = (to_mp(q) for q in q_triple)
        t12 = mp_trace(Pm * q1 * Pm * q2)
        t13 = mp_trace(Pm * q1 * Pm * q3)
        t23 = mp_trace(Pm * q2 * Pm * q3)
        u1 = 36 * (t12 + t13 + t23)
        u2 = 216 * (mp_trace(Pm * q1 * Pm * q2 * Pm * q3) + mp_trace(Pm * q1 * Pm * q3 * Pm * q2))
        u3 = (36 * t12 - 1) * (36 * t23 - 1) * (36 * t13 - 1)
        residue = max(abs(u1.imag), abs(u2.imag), abs(u3.imag))
        return float(u1.real), float(u2.real), float(u3.real), float(residue)


def z_functions_mp_matrices(P, qs) -> tuple[float, float]:
    with _precision():
        Pm = to_mp(P)
        q = [to_mp(m) for m in qs]
        z1 = mp_trace(Pm * q[0] * Pm * q[1])
        z2 = mp_trace(Pm * q[4] * Pm * q[5])
        return float(z1.real), float(z2.real)


def identity_sides_mp_matrices(p_triple, q_triple) -> tuple[float, float, float]:
    with _precision():
        p = [to_mp(m) for m in p_triple]
        q = [to_mp(m) for m in q_triple]
        P = p[0] + p[1] + p[2]
        Q = q[0] + q[1] + q[2]
        lhs = mp.mpc(1)
        rhs = mp.mpc(1)
        for i in range(3):
            for j in range(3):
                if i != j:
                    lhs *= 36 * mp_trace(P * q[i] * P * q[j]) - 1
                    rhs *= 36 * mp_trace(Q * p[i] * Q * p[j]) - 1
        return float(lhs.real), float(rhs.real), float(abs(lhs - rhs))
