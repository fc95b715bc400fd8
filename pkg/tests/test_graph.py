import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zyqite import graph as gm
from zyqite.graph import Convention, WeightedGraph

CS = Convention.COMPUTER_SCIENCE
PH = Convention.PHYSICS


def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def cycle4():
    return WeightedGraph.from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)])


def enumerate_optimum(graph, convention):
    """Loop over bit tuples with cut_cost; independent of the vectorized path."""
    best, arg = math.inf, []
    for bits in itertools.product((0, 1), repeat=graph.n_vertices):
        c = gm.cut_cost(graph, list(bits), convention)
        if c < best - 1e-12:
            best, arg = c, [gm.bits_to_index(bits)]
        elif abs(c - best) <= 1e-12:
            arg.append(gm.bits_to_index(bits))
    return best, sorted(arg)


class TestGenerators:
    def test_three_regular_n4_is_k4(self):
        g = gm.gen_three_regular(4, 123)
        assert [(u, v) for u, v, _ in g.edges] == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

    def test_three_regular_deterministic(self):
        assert gm.gen_three_regular(8, 7) == gm.gen_three_regular(8, 7)

    def test_three_regular_degrees(self):
        g = gm.gen_three_regular(16, 3)
        deg = g.degrees()
        assert np.bincount(deg).tolist() == [0, 0, 0, 16]
        assert set(g.weights()) == {1.0}

    @pytest.mark.parametrize("n", [3, 2, 5, 0])
    def test_three_regular_rejects(self, n):
        with pytest.raises(ValueError, match="even n >= 4"):
            gm.gen_three_regular(n, 1)

    def test_nws_p0_is_ring_lattice(self):
        g = gm.gen_nws(8, seed=99, k=4, p=0.0)
        pairs = {(u, v) for u, v, _ in g.edges}
        ring = {tuple(sorted((i, (i + d) % 8))) for i in range(8) for d in (1, 2)}
        assert pairs == ring
        assert g.n_edges == 16

    def test_nws_keeps_ring(self):
        g = gm.gen_nws(16, seed=11)
        assert g.n_edges >= 32
        pairs = {(u, v) for u, v, _ in g.edges}
        assert all(tuple(sorted((i, (i + d) % 16))) in pairs for i in range(16) for d in (1, 2))

    @pytest.mark.parametrize("seed", range(5))
    def test_nws_weights_in_half_open_unit(self, seed):
        w = gm.gen_nws(12, seed).weights()
        assert np.all(w > 0) and np.all(w <= 1)

    def test_nws_rejects_small_n(self):
        with pytest.raises(ValueError):
            gm.gen_nws(4, 1)

    def test_nws_deterministic(self):
        assert gm.gen_nws(14, 5) == gm.gen_nws(14, 5)

    def test_sk_small(self):
        g = gm.gen_sk(2, 8)
        assert g.n_edges == 1 and g.edges[0][2] in (1.0, -1.0)

    def test_sk_complete(self):
        g = gm.gen_sk(16, 5)
        assert g.n_edges == 120
        assert set(g.weights()) <= {1.0, -1.0}

    def test_sk_mean_weight(self):
        means = [gm.gen_sk(16, s).weights().mean() for s in range(1000)]
        assert abs(np.mean(means)) < 0.05

    def test_sk_rejects(self):
        with pytest.raises(ValueError):
            gm.gen_sk(1, 0)

    def test_generate_dispatch(self):
        assert gm.generate("sk", 6, 3) == gm.gen_sk(6, 3)
        assert gm.generate(gm.Ensemble.NWS, 10, 3) == gm.gen_nws(10, 3)


class TestValidation:
    def test_self_loop(self):
        with pytest.raises(ValueError):
            WeightedGraph(3, ((1, 1, 1.0),))

    def test_duplicate(self):
        with pytest.raises(ValueError):
            WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)])

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            WeightedGraph.from_edges(3, [(0, 3, 1.0)])


class TestCosts:
    def test_triangle_physics_aligned(self):
        assert gm.cut_cost(triangle(), [0, 0, 0], PH) == 3.0

    def test_triangle_cs_one_flip(self):
        assert gm.cut_cost(triangle(), [0, 0, 1], CS) == -2.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            gm.cut_cost(triangle(), [0, 1], CS)

    def test_triangle_optimum(self):
        c, opt = gm.brute_force_optimum(triangle(), CS)
        assert c == -2.0 and len(opt) == 6

    def test_cycle_optimum(self):
        c, opt = gm.brute_force_optimum(cycle4(), CS)
        assert c == -4.0
        assert opt == [0b0101, 0b1010]

    @pytest.mark.parametrize("ensemble,n", [("three_regular", 8), ("nws", 9), ("sk", 7),
                                            ("three_regular", 10), ("nws", 12), ("sk", 12)])
    @pytest.mark.parametrize("convention", [CS, PH])
    def test_brute_force_matches_enumeration(self, ensemble, n, convention):
        g = gm.generate(ensemble, n, 17)
        c, opt = gm.brute_force_optimum(g, convention)
        c2, opt2 = enumerate_optimum(g, convention)
        assert c == pytest.approx(c2, abs=1e-12)
        assert opt == opt2
        assert len(opt) % 2 == 0

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32), z=st.integers(0, 2**10 - 1))
    def test_flip_symmetry(self, seed, z):
        g = gm.gen_nws(10, seed)
        for conv in (CS, PH):
            assert gm.cut_cost(g, z, conv) == pytest.approx(gm.cut_cost(g, z ^ 0x3FF, conv))

    def test_profile(self):
        assert gm.vertex_profile(triangle()).tolist() == [2, 2, 2]
        sk3 = WeightedGraph.from_edges(3, [(0, 1, 1.0), (0, 2, -1.0), (1, 2, 1.0)], gm.Ensemble.SK)
        assert gm.vertex_profile(sk3).tolist() == [2, 2, 2]
        assert np.all(gm.vertex_profile(gm.gen_three_regular(12, 4)) == 3)

    def test_enumeration_guard(self):
        g = WeightedGraph.from_edges(31, [(0, 1, 1.0)])
        with pytest.raises(ValueError, match="enumeration"):
            gm.brute_force_optimum(g, CS)


def test_graph_file_roundtrip(tmp_path):
    g = gm.gen_nws(12, 42)
    path = tmp_path / "g.txt"
    gm.write_graph(g, path)
    text = path.read_text().splitlines()
    assert text[0] == "n 12 nws 42"
    assert gm.read_graph(path) == g


def test_graph_file_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("vertices 3\n")
    with pytest.raises(ValueError):
        gm.read_graph(path)
