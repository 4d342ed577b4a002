import numpy as np
import pytest

from orthopair.linalg import (
    adjoint,
    mul,
    nullspace,
    numerical_rank,
    rank1_projector,
    spectral_norm,
    trace,
)


def elementary(n, i):
    e = np.zeros((n, n), dtype=complex)
    e[i, i] = 1.0
    return e


def test_mul_identity_and_zero():
    rng = np.random.default_rng(0)
    m = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    assert np.allclose(mul(np.eye(6), m), m)
    assert np.allclose(mul(m, np.zeros((6, 6))), 0.0)


def test_mul_orthogonal_idempotents():
    assert np.allclose(mul(elementary(6, 0), elementary(6, 1)), 0.0)


def test_mul_dimension_mismatch():
    with pytest.raises(ValueError):
        mul(np.eye(3), np.eye(4))


def test_mul_rejects_nonfinite():
    bad = np.array([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        mul(bad, np.eye(2))


def test_trace_basics():
    assert trace(np.eye(6)) == 6
    v = np.arange(1, 7, dtype=complex)
    assert abs(trace(rank1_projector(v)) - 1.0) < 1e-13
    with pytest.raises(ValueError):
        trace(np.ones((2, 3)))


def test_trace_cyclicity():
    rng = np.random.default_rng(1)
    for _ in range(50):
        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        bound = 1e-12 * spectral_norm(a) * spectral_norm(b)
        assert abs(trace(a @ b) - trace(b @ a)) <= bound
    # conformable rectangular case
    a = rng.standard_normal((4, 7)) + 1j * rng.standard_normal((4, 7))
    b = rng.standard_normal((7, 4)) + 1j * rng.standard_normal((7, 4))
    bound = 1e-12 * spectral_norm(a) * spectral_norm(b)
    assert abs(trace(a @ b) - trace(b @ a)) <= bound


def test_adjoint():
    assert np.array_equal(adjoint(np.eye(4)), np.eye(4))
    rng = np.random.default_rng(2)
    m = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    assert np.array_equal(adjoint(adjoint(m)), m)
    assert np.allclose(adjoint(1j * np.eye(3)), -1j * np.eye(3))


def test_numerical_rank_identity_zero_outer():
    assert numerical_rank(np.eye(6), 1e-10).rank == 6
    assert numerical_rank(np.zeros((4, 4)), 1e-10).rank == 0
    rng = np.random.default_rng(3)
    v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    v /= np.linalg.norm(v)
    report = numerical_rank(np.outer(v, v.conj()), 1e-10)
    assert report.rank == 1
    assert report.gap_ratio > 1e3


def test_numerical_rank_singular_values_sorted():
    rng = np.random.default_rng(4)
    m = rng.standard_normal((8, 5))
    s = numerical_rank(m, 1e-12).singular_values
    assert np.all(np.diff(s) <= 0)
    with pytest.raises(ValueError):
        numerical_rank(m, -1.0)


def test_nullspace_basics():
    assert nullspace(np.eye(6), 1e-10) == []
    vecs = nullspace(np.zeros((3, 3)), 1e-10)
    assert len(vecs) == 3
    gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
    assert np.allclose(gram, np.eye(3), atol=1e-12)
    row = np.array([[1.0, 1.0]]) / np.sqrt(2)
    (w,) = nullspace(row, 1e-10)
    target = np.array([1.0, -1.0]) / np.sqrt(2)
    assert min(np.linalg.norm(w - target), np.linalg.norm(w + target)) < 1e-12


def test_nullspace_residual_bound_and_rank_sum():
    rng = np.random.default_rng(5)
    tol = 1e-10
    for _ in range(20):
        rows, cols = rng.integers(3, 9, size=2)
        r = int(rng.integers(0, min(rows, cols) + 1))
        a = (rng.standard_normal((rows, r)) + 1j * rng.standard_normal((rows, r))) @ \
            (rng.standard_normal((r, cols)) + 1j * rng.standard_normal((r, cols))) if r else \
            np.zeros((rows, cols), dtype=complex)
        vecs = nullspace(a, tol)
        report = numerical_rank(a, tol)
        assert report.rank + len(vecs) == cols
        norm_a = spectral_norm(a)
        for w in vecs:
            assert np.linalg.norm(a @ w) <= 10 * tol * max(norm_a, 1.0)


def test_rank1_projector_examples():
    e1 = np.zeros(6)
    e1[0] = 1.0
    assert np.allclose(rank1_projector(e1), elementary(6, 0))
    v = np.array([1, 2j, -1, 0.5, 0, 3])
    assert np.allclose(rank1_projector(v), rank1_projector(2 * v))
    ones = np.ones(6)
    assert np.allclose(rank1_projector(ones), np.full((6, 6), 1.0 / 6.0))
    with pytest.raises(ValueError):
        rank1_projector(np.zeros(4))


def test_rank1_projector_property_sweep():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        p = rank1_projector(v)
        assert spectral_norm(p @ p - p) <= 1e-13
        assert spectral_norm(p - adjoint(p)) <= 1e-13
        assert abs(np.trace(p) - 1.0) <= 1e-13


def test_extended_precision_rank_matches_double():
    rng = np.random.default_rng(7)
    v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    m = np.outer(v, v.conj()) + 1e-3 * np.eye(5)
    rd = numerical_rank(m, 1e-10)
    rx = numerical_rank(m, 1e-10, precision="extended")
    assert rd.rank == rx.rank == 5
    assert np.allclose(rd.singular_values, rx.singular_values, rtol=1e-12)
    vecs = nullspace(np.zeros((2, 2)), 1e-10, precision="extended")
    assert len(vecs) == 2
    # wide matrix: kernel vector of a single row
    (w,) = nullspace(np.array([[1.0, 1.0]]) / np.sqrt(2), 1e-10, precision="extended")
    target = np.array([1.0, -1.0]) / np.sqrt(2)
    assert min(np.linalg.norm(w - target), np.linalg.norm(w + target)) < 1e-12
