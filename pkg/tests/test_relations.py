import numpy as np
import pytest

from conftest import random_unitary
from orthopair import exact
from orthopair.config import pair_from_matrices, standard_pair
from orthopair.invariants import sigma
from orthopair.relations import (
    LooplessGraph,
    a3_residual,
    an_residual,
    bkn_residual,
    bnn_residual,
    commutant_dimension,
    commutator_operator,
    complete_bipartite,
    graph_restriction,
    restrict,
    tl_residual,
    two_idempotent_residual,
)


def coordinate_projectors(n):
    out = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        out.append(e)
    return out


def test_graph_constructor_rejects_loops_and_bad_edges():
    with pytest.raises(ValueError):
        LooplessGraph.from_edges(3, [(0, 0)])
    with pytest.raises(ValueError):
        LooplessGraph.from_edges(3, [(0, 5)])
    g = complete_bipartite(3, 3)
    assert g.vertex_count == 6
    assert len(g.edges) == 9
    assert g.has_edge(0, 3) and not g.has_edge(0, 1)


def test_graph_file_format(tmp_path):
    import json

    from orthopair.relations import graph_from_dict, load_graph

    g = graph_from_dict({"vertices": 4, "edges": [[0, 1], [2, 3], [1, 0]]})
    assert g.vertex_count == 4 and len(g.edges) == 2
    assert graph_from_dict({"bipartite": [3, 6]}) == complete_bipartite(3, 6)
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"bipartite": [2, 2]}))
    assert load_graph(path) == complete_bipartite(2, 2)


def test_tl_residual_standard_pair(base_pair):
    g = complete_bipartite(6, 6)
    assert tl_residual(g, 1.0 / 6.0, base_pair.matrices()) <= 1e-13


def test_tl_residual_zero_representation():
    g = complete_bipartite(2, 2)
    zeros = [np.zeros((4, 4))] * 4
    assert tl_residual(g, 0.5, zeros) == 0.0


def test_tl_residual_on_x33_restriction(base_pair):
    point = graph_restriction(base_pair, [1, 2, 3], [1, 2, 3])
    assert point.residual() <= 1e-13
    g = complete_bipartite(3, 3)
    assert tl_residual(g, 1.0 / 6.0, list(point.matrices)) <= 1e-13


def test_tl_residual_conjugation_invariance(base_pair):
    rng = np.random.default_rng(14)
    g = complete_bipartite(6, 6)
    base = tl_residual(g, 1.0 / 6.0, base_pair.matrices())
    w = random_unitary(rng, 6)
    mats = [w @ m @ w.conj().T for m in base_pair.matrices()]
    assert abs(tl_residual(g, 1.0 / 6.0, mats) - base) <= 1e-12


def test_tl_residual_graph_automorphism_invariance(base_pair):
    # exchanging the two rows of the bipartite graph together with the matrices
    point = graph_restriction(base_pair, [1, 2, 3], [1, 2, 3])
    g = complete_bipartite(3, 3)
    mats = list(point.matrices)
    swapped = mats[3:] + mats[:3]
    assert abs(tl_residual(g, 1.0 / 6.0, mats) - tl_residual(g, 1.0 / 6.0, swapped)) <= 1e-14


def test_tl_residual_vertex_count_mismatch():
    g = complete_bipartite(2, 2)
    with pytest.raises(ValueError):
        tl_residual(g, 0.5, [np.eye(2)] * 3)


def test_bnn_residual(base_pair, standard6):
    assert bnn_residual(standard6) <= 1e-13
    assert bnn_residual(base_pair) <= 1e-13
    qs = list(standard6.q)
    qs[0] = 2.0 * qs[0]
    scaled = pair_from_matrices(list(standard6.p), qs)
    assert bnn_residual(scaled) >= 1.0 - 1.0 / 6.0


def test_bnn_residual_on_family_sample(family_sample):
    from orthopair.config import from_hadamard

    for h in family_sample.points[:10]:
        c = from_hadamard(h)
        assert bnn_residual(c) <= 1e-10
        assert c.residual <= 1e-10  # Newton corrector convergence certifies this


def test_restriction_residual_bounded_by_full_residual(family_sample):
    # every vertex-subset restriction inherits the configuration's residual
    from orthopair.config import from_hadamard

    c = from_hadamard(family_sample.points[5])
    tau = bnn_residual(c)
    for p_sub, q_sub in [((1, 2), (1, 2, 3, 4)), ((1, 2, 3), (1, 2, 3)), ((4, 6), (2, 5))]:
        point = graph_restriction(c, p_sub, q_sub)
        assert point.residual() <= tau + 1e-15


def test_an_residual_examples(standard6):
    P = standard6.p[0] + standard6.p[1] + standard6.p[2]
    assert an_residual(P, list(standard6.q), 0.5) <= 1e-13
    qs = coordinate_projectors(6)
    assert an_residual(np.eye(6), qs, 1.0) == 0.0
    assert an_residual(np.zeros((6, 6)), qs, 0.0) == 0.0


def test_bkn_residual(base_pair):
    # three p's against the full q row: the one-sided quotient holds exactly
    # on restrictions of a valid configuration
    assert bkn_residual(base_pair.p[:3], base_pair.q, 6) <= 1e-13
    # dropping a q breaks the row sum
    with pytest.raises(ValueError):
        bkn_residual(base_pair.p[:3], base_pair.q[:5], 6)


def test_two_idempotent_residual(base_pair):
    P = sum(base_pair.p[i] for i in range(3))
    Q = sum(base_pair.q[j] for j in range(3))
    assert two_idempotent_residual(P, Q) <= 1e-13
    # the partial sums land on the rank-3, Tr PQ = 3/2 locus
    assert abs(np.trace(P @ Q) - 1.5) <= 1e-13
    assert two_idempotent_residual(0.5 * P, Q) >= 0.2


def test_a3_residual_ignores_sum(standard6):
    P = standard6.p[0] + standard6.p[1] + standard6.p[2]
    triple = list(standard6.q[:3])
    # the sum of three rank-1 q's is far from the identity, yet the
    # three-generator relations hold exactly
    assert an_residual(P, triple, 0.5) > 0.4
    assert a3_residual(P, triple) <= 1e-13


def test_restrict(base_pair):
    point = restrict(base_pair, [1, 2, 3])
    assert point.residual() <= 1e-13
    P = point.matrices[0]
    assert abs(np.trace(P) - 3.0) <= 1e-13
    full = restrict(base_pair, range(1, 7))
    assert np.allclose(full.matrices[0], np.eye(6), atol=1e-14)
    with pytest.raises(ValueError):
        restrict(base_pair, [])
    with pytest.raises(ValueError):
        restrict(base_pair, [0, 1])


def test_restrict_complement_is_sigma(base_pair):
    P123 = restrict(base_pair, [1, 2, 3]).matrices[0]
    P456 = restrict(base_pair, [4, 5, 6]).matrices[0]
    assert np.max(np.abs(sigma(P123) - P456)) <= 1e-14
    # sigma keeps the sandwich relations (partial sums are complementary)
    assert an_residual(sigma(P123), list(base_pair.q), 0.5) <= 1e-13


def test_commutant_dimension_examples(standard6):
    assert commutant_dimension(standard6.matrices()) == 1
    assert commutant_dimension([np.eye(6)]) == 36
    e11, e22 = coordinate_projectors(2)
    assert commutant_dimension([e11, e22]) == 2


def test_commutant_dimension_reducible_pair(standard6):
    # p-system against itself commutes with every diagonal matrix
    mats = list(standard6.p) + list(standard6.p)
    assert commutant_dimension(mats) == 6


def test_orbit_rank_exact_oracle_n3():
    """Exact-rank cross-check of the commutator span over Q(eps)."""
    c3 = standard_pair(3)
    K = commutator_operator(c3.matrices())
    s = np.linalg.svd(K, compute_uv=False)
    float_rank = int(np.sum(s > 1e-10 * s[0]))

    # the same matrix over Q(eps): entries of the n = 3 projectors are
    # (1/3) eps^(2k) since eps^2 is a primitive cube root
    def q6_entry(z):
        # round a float entry of K to the exact lattice (1/3) Z[eps]
        target = 3.0 * z
        for a in range(-9, 10):
            for b in range(-9, 10):
                cand = exact.Q6(a, b)
                if abs(cand.to_complex() - target) < 1e-9:
                    return exact.Q6(a, b) * exact.Q6(1, 0) / 3
        raise AssertionError(f"entry {z} not on the expected lattice")

    rows = [[q6_entry(K[i, j]) for j in range(K.shape[1])] for i in range(K.shape[0])]
    assert exact.exact_rank(rows) == float_rank == 8
