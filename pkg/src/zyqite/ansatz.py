"""Fully connected ZY ansatz with rho-ranked gate ordering and epsilon pruning.

Vertices are ranked by ``rho`` (summed absolute incident weight), descending,
ties broken by ascending vertex id. Gates act on pairs of ranks in
lexicographic order (0,1), (0,2), ..., (n-2,n-1); the first pair acts first
on ``|+>^n``. Rank ``a`` lives on qubit ``vertex_rank[a]``, so states stay in
the graph's own vertex labelling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph, vertex_profile
from .statevector import StateVector, expand_symmetric, rotate_symmetric


@dataclass
class Ansatz:
    n_qubits: int
    pair_order: list[tuple[int, int]]
    vertex_rank: np.ndarray
    theta: np.ndarray
    epsilon: float = 0.0

    @property
    def n_params(self) -> int:
        return len(self.pair_order)

    @property
    def qubit_pairs(self) -> list[tuple[int, int]]:
        """Gate targets ``(Z qubit, Y qubit)`` in application order."""
        vr = self.vertex_rank
        return [(int(vr[a]), int(vr[b])) for a, b in self.pair_order]

    @property
    def active(self) -> np.ndarray:
        if self.epsilon > 0:
            return np.abs(self.theta) >= self.epsilon
        return np.ones(self.n_params, dtype=bool)

    def effective_theta(self) -> np.ndarray:
        """Angles as applied: pruned gates count as angle 0."""
        return np.where(self.active, self.theta, 0.0)

    def copy(self) -> "Ansatz":
        return Ansatz(self.n_qubits, list(self.pair_order), self.vertex_rank.copy(),
                      self.theta.copy(), self.epsilon)


def rank_vertices(graph: WeightedGraph, descending: bool = True) -> np.ndarray:
    rho = vertex_profile(graph)
    key = -rho if descending else rho
    # lexsort sorts by the last key first; vertex id breaks ties
    return np.lexsort((np.arange(graph.n_vertices), key))


def build(graph: WeightedGraph, epsilon: float = 0.0, descending: bool = True) -> Ansatz:
    n = graph.n_vertices
    if n < 2:
        raise ValueError("ansatz needs at least two qubits")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    return Ansatz(n, pairs, rank_vertices(graph, descending), np.zeros(len(pairs)), float(epsilon))


def prepare_half(ansatz: Ansatz, theta: np.ndarray | None = None) -> np.ndarray:
    """First half of the (flip-symmetric) ansatz amplitudes; see :func:`rotate_symmetric`."""
    if theta is None:
        theta = ansatz.effective_theta()
    n = ansatz.n_qubits
    half = np.full(1 << (n - 1), 2.0 ** (-n / 2))
    for (r, q), t in zip(ansatz.qubit_pairs, theta):
        if t != 0.0:
            rotate_symmetric(half, r, q, n, math.cos(t), math.sin(t))
    return half


def prepare_amplitudes(ansatz: Ansatz, theta: np.ndarray | None = None) -> np.ndarray:
    """Real amplitudes of the ansatz state; ``theta`` overrides the effective angles."""
    return expand_symmetric(prepare_half(ansatz, theta))


def prepare(ansatz: Ansatz) -> StateVector:
    if not np.all(np.isfinite(ansatz.theta)):
        raise ValueError("non-finite ansatz parameters")
    return StateVector(ansatz.n_qubits, prepare_amplitudes(ansatz))


def active_gate_count(ansatz: Ansatz) -> int:
    return int(ansatz.active.sum())


def qaoa_layer_equivalent(count: int, graph: WeightedGraph) -> float:
    """Gate count expressed in QAOA layers (one two-qubit rotation per edge)."""
    if graph.n_edges == 0:
        raise ValueError("graph has no edges")
    return count / graph.n_edges

