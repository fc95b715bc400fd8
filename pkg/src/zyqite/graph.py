"""Weighted MAXCUT instances: generators, cut costs and the brute-force oracle.

Bitstrings are integers in little-endian order: bit ``k`` of the index is the
value of vertex ``k``. Assignments passed to :func:`cut_cost` may also be
given as a sequence of 0/1 values indexed by vertex.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

MAX_ENUMERATION_VERTICES = 30
TIE_TOLERANCE = 1e-12


class Ensemble(str, enum.Enum):
    THREE_REGULAR = "three_regular"
    NWS = "nws"
    SK = "sk"
    CUSTOM = "custom"


class Convention(str, enum.Enum):
    """Sign convention of the cost function.

    PHYSICS: ``C(z) = sum w_ij z_i z_j`` with spins ``z = 1 - 2*bit``.
    COMPUTER_SCIENCE: ``C(z) = -sum w_ij [bit_i != bit_j]``, the energy of
    ``H = -sum w_ij (1 - Z_i Z_j) / 2``.
    """

    PHYSICS = "physics"
    COMPUTER_SCIENCE = "cs"


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class WeightedGraph:
    n_vertices: int
    edges: tuple[tuple[int, int, float], ...]
    ensemble: Ensemble = Ensemble.CUSTOM
    seed: int = 0

    def __post_init__(self):
        if self.n_vertices < 1:
            raise GraphError(f"n_vertices must be positive, got {self.n_vertices}")
        seen = set()
        for u, v, _ in self.edges:
            if not (0 <= u < v < self.n_vertices):
                raise GraphError(f"edge ({u}, {v}) must satisfy 0 <= u < v < {self.n_vertices}")
            if (u, v) in seen:
                raise GraphError(f"duplicate edge ({u}, {v})")
            seen.add((u, v))

    @classmethod
    def from_edges(cls, n_vertices: int, edges: Iterable[tuple[int, int, float]],
                   ensemble: Ensemble = Ensemble.CUSTOM, seed: int = 0) -> "WeightedGraph":
        """Build a graph from edges in any orientation; edges are sorted."""
        norm = sorted((min(u, v), max(u, v), float(w)) for u, v, w in edges)
        return cls(n_vertices, tuple(norm), Ensemble(ensemble), int(seed))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)


def gen_three_regular(n: int, seed: int) -> WeightedGraph:
    """Random simple 3-regular graph with unit weights.

    Topology comes from networkx's pairing-model sampler (``random_regular_graph``)
    driven by ``random.Random(seed)``.
    """
    if n < 4 or n % 2:
        raise GraphError(f"3-regular graphs need an even n >= 4, got {n}")
    g = nx.random_regular_graph(3, n, seed=random.Random(seed))
    return WeightedGraph.from_edges(n, ((u, v, 1.0) for u, v in g.edges()),
                                    Ensemble.THREE_REGULAR, seed)


def gen_nws(n: int, seed: int, k: int = 4, p: float = 0.5) -> WeightedGraph:
    """Newman-Watts-Strogatz small-world graph with weights uniform on (0, 1].

    Ring lattice of ``k`` nearest neighbours plus, for every ring edge (u, v),
    a shortcut (u, w) to a uniformly random w with probability ``p``.
    Topology uses ``random.Random(seed)``; weights use ``numpy`` PCG64 seeded
    with ``seed`` and are drawn in sorted edge order.
    """
    if n <= k:
        raise GraphError(f"NWS needs n > k, got n={n}, k={k}")
    if k % 2:
        raise GraphError(f"NWS needs an even k, got {k}")
    g = nx.newman_watts_strogatz_graph(n, k, p, seed=random.Random(seed))
    pairs = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    rng = np.random.default_rng(seed)
    # 1 - U[0, 1) lies in (0, 1]
    w = 1.0 - rng.random(len(pairs))
    return WeightedGraph.from_edges(n, ((u, v, wi) for (u, v), wi in zip(pairs, w)),
                                    Ensemble.NWS, seed)


def gen_sk(n: int, seed: int) -> WeightedGraph:
    """Sherrington-Kirkpatrick instance: complete graph with +-1 weights."""
    if n < 2:
        raise GraphError(f"SK needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    signs = rng.integers(0, 2, size=len(pairs)) * 2.0 - 1.0
    return WeightedGraph.from_edges(n, ((u, v, s) for (u, v), s in zip(pairs, signs)),
                                    Ensemble.SK, seed)


def gen_complete_uniform(n: int, seed: int) -> WeightedGraph:
    """Complete graph with weights uniform on (0, 1]."""
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    w = 1.0 - rng.random(len(pairs))
    return WeightedGraph.from_edges(n, ((u, v, wi) for (u, v), wi in zip(pairs, w)),
                                    Ensemble.CUSTOM, seed)


def generate(ensemble: Ensemble | str, n: int, seed: int) -> WeightedGraph:
    ensemble = Ensemble(ensemble)
    if ensemble is Ensemble.THREE_REGULAR:
        return gen_three_regular(n, seed)
    if ensemble is Ensemble.NWS:
        return gen_nws(n, seed)
    if ensemble is Ensemble.SK:
        return gen_sk(n, seed)
    return gen_complete_uniform(n, seed)


def _bits(assignment, n: int) -> np.ndarray:
    if isinstance(assignment, (int, np.integer)):
        return (int(assignment) >> np.arange(n)) & 1
    bits = np.asarray(assignment, dtype=int)
    if bits.shape != (n,):
        raise GraphError(f"assignment has length {bits.size}, graph has {n} vertices")
    return bits


def index_to_bits(z: int, n: int) -> np.ndarray:
    return (int(z) >> np.arange(n)) & 1


def bits_to_index(bits: Sequence[int]) -> int:
    return int(sum(int(b) << k for k, b in enumerate(bits)))


def cut_cost(graph: WeightedGraph, assignment, convention: Convention) -> float:
    """Cost of one assignment (integer index or per-vertex bit sequence)."""
    bits = _bits(assignment, graph.n_vertices)
    total = 0.0
    for u, v, w in graph.edges:
        differ = bits[u] != bits[v]
        if convention is Convention.PHYSICS:
            total += -w if differ else w
        else:
            total += -w if differ else 0.0
    return total


def all_costs(graph: WeightedGraph, convention: Convention) -> np.ndarray:
    """Vector of ``cut_cost`` over all ``2**n`` indices."""
    n = graph.n_vertices
    if n > MAX_ENUMERATION_VERTICES:
        raise GraphError(f"enumeration limited to {MAX_ENUMERATION_VERTICES} vertices, got {n}")
    idx = np.arange(1 << n, dtype=np.int64)
    costs = np.zeros(1 << n)
    for u, v, w in graph.edges:
        differ = ((idx >> u) ^ (idx >> v)) & 1
        if convention is Convention.PHYSICS:
            costs += w * (1.0 - 2.0 * differ)
        else:
            costs -= w * differ
    return costs


def brute_force_optimum(graph: WeightedGraph, convention: Convention) -> tuple[float, list[int]]:
    """Minimum cost and every minimizing index (ties within 1e-12)."""
    costs = all_costs(graph, convention)
    c_opt = float(costs.min())
    optimal = np.flatnonzero(costs <= c_opt + TIE_TOLERANCE)
    return c_opt, [int(z) for z in optimal]


def vertex_profile(graph: WeightedGraph) -> np.ndarray:
    """``rho[j]``: summed absolute weight of edges incident to vertex j."""
    rho = np.zeros(graph.n_vertices)
    for u, v, w in graph.edges:
        rho[u] += abs(w)
        rho[v] += abs(w)
    return rho


def write_graph(graph: WeightedGraph, path: str | Path) -> None:
    lines = [f"n {graph.n_vertices} {graph.ensemble.value} {graph.seed}"]
    lines += [f"{u} {v} {w:.17g}" for u, v, w in graph.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_graph(path: str | Path) -> WeightedGraph:
    lines = Path(path).read_text().split("\n")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "n":
        raise GraphError(f"{path}: malformed header {lines[0]!r}")
    edges = []
    for line in lines[1:]:
        if not line.strip():
            continue
        u, v, w = line.split()
        edges.append((int(u), int(v), float(w)))
    return WeightedGraph.from_edges(int(head[1]), edges, Ensemble(head[2]), int(head[3]))
