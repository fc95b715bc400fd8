import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zyqite import graph as gm, hamiltonian as hm
from zyqite.graph import Convention, WeightedGraph
from zyqite.statevector import StateVector, basis_state, plus_state

CS = Convention.COMPUTER_SCIENCE
PH = Convention.PHYSICS


def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def diag_h(diagonal):
    diagonal = np.asarray(diagonal, dtype=float)
    n = int(math.log2(diagonal.size))
    c = float(diagonal.min())
    return hm.CostHamiltonian(n, (), CS, 0.0, diagonal, c, list(np.flatnonzero(diagonal == c)))


def random_state(n, rng):
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, v / np.linalg.norm(v))


def test_triangle_diagonals():
    assert hm.build(triangle(), PH).diagonal.tolist() == [3, -1, -1, -1, -1, -1, -1, 3]
    h = hm.build(triangle(), CS)
    assert h.diagonal.tolist() == [0, -2, -2, -2, -2, -2, -2, 0]
    assert h.constant_offset == -1.5


def test_empty_graph():
    h = hm.build(WeightedGraph.from_edges(3, []), CS)
    assert not h.diagonal.any()


@pytest.mark.parametrize("ensemble,n,conv", [("sk", 8, PH), ("nws", 9, CS), ("three_regular", 10, CS)])
def test_diagonal_matches_cut_cost(ensemble, n, conv):
    g = gm.generate(ensemble, n, 3)
    h = hm.build(g, conv)
    rng = np.random.default_rng(0)
    for z in rng.integers(0, 1 << n, 40):
        assert h.diagonal[z] == pytest.approx(gm.cut_cost(g, int(z), conv))
    assert h.c_opt == h.diagonal.min()
    assert h.optimal_set == list(np.flatnonzero(h.diagonal <= h.c_opt + 1e-12))
    full = (1 << n) - 1
    assert np.allclose(h.diagonal, h.diagonal[full ^ np.arange(1 << n)])


def test_energy_examples():
    g = gm.gen_sk(6, 2)
    h = hm.build(g, PH)
    assert hm.energy(plus_state(6), h) == pytest.approx(0, abs=1e-12)
    assert hm.energy(basis_state(6, 13), h) == h.diagonal[13]
    hc = hm.build(g, CS)
    assert hm.energy(plus_state(6), hc) == pytest.approx(hc.diagonal.mean())


def test_energy_dimension_mismatch():
    with pytest.raises(ValueError):
        hm.energy(plus_state(3), hm.build(gm.gen_sk(4, 0), PH))


def test_variance():
    h = hm.build(WeightedGraph.from_edges(2, [(0, 1, 1.0)]), PH)
    assert hm.variance(basis_state(2, 1), h) == 0
    assert hm.variance(plus_state(2), h) == pytest.approx(1.0)
    rng = np.random.default_rng(1)
    hs = hm.build(gm.gen_sk(5, 1), PH)
    for _ in range(20):
        assert hm.variance(random_state(5, rng), hs) >= 0


def test_sigma0_matches_physics_analytic():
    g = gm.gen_nws(10, 6)
    h = hm.build(g, PH)
    assert h.sigma_0 == pytest.approx(math.sqrt(np.sum(g.weights() ** 2)))


def test_approximation_ratio():
    h = hm.build(triangle(), CS)
    assert hm.approximation_ratio(h.c_opt, h) == 1
    assert hm.approximation_ratio(hm.energy(plus_state(3), h), h) == pytest.approx(0.75)
    assert hm.approximation_ratio(0.0, h) == 0
    with pytest.raises(hm.DegenerateInstance):
        hm.approximation_ratio(1.0, hm.build(WeightedGraph.from_edges(2, []), CS))


class TestSigmoid:
    def test_midpoint(self):
        h = diag_h([0.0, 1.0, 2.0, 3.0])
        f = hm.sigmoid_transform(h, hm.SpectralStats(1.0, 0.5, 2.0))
        assert f[1] == 0.5

    def test_unit_argument(self):
        # sigma_0 (c - E) / (4 sigma^2) = 2 * 2 / (4 * 1) = 1 at c = 3
        h = diag_h([0.0, 1.0, 2.0, 3.0])
        f = hm.sigmoid_transform(h, hm.SpectralStats(1.0, 1.0, 2.0))
        assert f[3] == pytest.approx(1 / (1 + math.exp(-1)))
        assert f[3] == pytest.approx(0.73106, abs=1e-5)

    def test_floor(self):
        h = diag_h([0.0, 1.0])
        with pytest.raises(hm.ConvergedSpectrum):
            hm.sigmoid_transform(h, hm.SpectralStats(0.0, 1e-10, 1.0))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2**32), e=st.floats(-20, 5), sig=st.floats(0.05, 10))
    def test_argmin_and_monotone(self, seed, e, sig):
        h = hm.build(gm.gen_nws(8, seed), CS)
        f = hm.sigmoid_transform(h, hm.SpectralStats(e, sig, h.sigma_0))
        # far tails may underflow to exactly 0, so ties are allowed
        assert f[h.optimal_set].max() == f.min()
        order = np.argsort(h.diagonal, kind="stable")
        d, fs = h.diagonal[order], f[order]
        strict = np.diff(d) > 1e-12
        assert np.all(np.diff(fs)[strict] >= 0)
        assert np.all((f >= 0) & (f <= 1))


class TestExactIte:
    def test_constant_diagonal(self):
        s = plus_state(2)
        out = hm.exact_imaginary_time_step(s, diag_h([1.0] * 4), 0.7)
        assert np.allclose(out.amplitudes, s.amplitudes)

    def test_one_qubit(self):
        out = hm.exact_imaginary_time_step(plus_state(1), diag_h([0.0, -1.0]), math.log(2))
        assert np.allclose(out.amplitudes, np.array([1, 2]) / math.sqrt(5))

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            hm.exact_imaginary_time_step(plus_state(1), diag_h([0.0, 1.0]), 0.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_monotone_and_projects(self, seed):
        h = hm.build(gm.gen_sk(7, seed), PH)
        s = plus_state(7)
        energies, ars = [], []
        for _ in range(100):
            s = hm.exact_imaginary_time_step(s, h, 0.1)
            energies.append(hm.energy(s, h))
            ars.append(hm.approximation_ratio(energies[-1], h))
        assert np.all(np.diff(energies) <= 1e-12)
        assert np.all(np.diff(ars) >= -1e-12)
        far = hm.exact_imaginary_time_state(plus_state(7), h, 60.0)
        assert far.probabilities[h.optimal_set].sum() == pytest.approx(1.0, abs=1e-9)

    def test_step_composes(self):
        h = hm.build(gm.gen_sk(5, 9), PH)
        s = plus_state(5)
        for _ in range(4):
            s = hm.exact_imaginary_time_step(s, h, 0.25)
        assert np.allclose(s.amplitudes, hm.exact_imaginary_time_state(plus_state(5), h, 1.0).amplitudes)
