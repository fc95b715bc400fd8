"""Post-processing: relaxed rounding, entropy traces, volume-law fits, batch statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .ansatz import Ansatz, prepare_amplitudes
from .graph import Convention, WeightedGraph, bits_to_index, cut_cost
from .hamiltonian import CostHamiltonian
from .statevector import StateVector, entanglement_entropy, zz_correlations
from .trajectory import Phase, Trajectory

CONVERGED_AR = 1.0 - 1e-9


@dataclass(frozen=True)
class EntropyFit:
    a: float
    b: float
    stderr_a: float
    stderr_b: float


@dataclass
class BatchSummary:
    instances: int
    mean_ar_error: np.ndarray
    stderr_ar_error: np.ndarray
    success_fraction: float
    mean_iterations: float
    mean_max_layers: float
    max_max_layers: float


def correlation_matrix(state: StateVector) -> np.ndarray:
    """``chi[i, j] = (delta_ij - 1) <Z_i Z_j>``."""
    chi = -zz_correlations(state)
    np.fill_diagonal(chi, 0.0)
    return 0.5 * (chi + chi.T)


def rounding_candidates(state: StateVector) -> list[int]:
    """Sign-rounded eigenvectors of chi and their complements, as bit indices.

    Spin +1 maps to bit 0; ``sign(0)`` is taken as +1.
    """
    chi = correlation_matrix(state)
    try:
        _, vecs = np.linalg.eigh(chi)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError("correlation matrix diagonalization failed") from exc
    full = (1 << state.n_qubits) - 1
    out = []
    for v in vecs.T:
        z = bits_to_index((v < 0).astype(int))
        out += [z, full ^ z]
    return out


def relaxed_round(state: StateVector, graph: WeightedGraph,
                  convention: Convention) -> tuple[int, float]:
    """Best rounded candidate (bit index) and its cost."""
    best = min(rounding_candidates(state), key=lambda z: (cut_cost(graph, z, convention), z))
    return best, cut_cost(graph, best, convention)


def rounded_approximation_ratio(state: StateVector, graph: WeightedGraph,
                                h: CostHamiltonian) -> float:
    """Approximation ratio of the best rounded candidate alone."""
    costs = h.diagonal[rounding_candidates(state)]
    return float(costs.min()) / h.c_opt


def reported_ar(ar_raw: float, ar_rounded: float) -> float:
    """AR after rounding post-processing: rounding is kept only when it helps."""
    return max(ar_raw, ar_rounded)


def entropy_trace(traj: Trajectory, ansatz: Ansatz, partition: Sequence[int] | int) -> np.ndarray:
    """Bipartition entropy at every flow iterate up to first fidelity >= 1/2.

    ``partition`` is either the qubit subset or a seed for
    :func:`zyqite.varit.random_bipartition`.
    """
    from .varit import random_bipartition

    if isinstance(partition, (int, np.integer)):
        partition = random_bipartition(ansatz.n_qubits, int(partition))
    work = ansatz.copy()
    values = []
    for rec, theta in zip(traj.records, traj.thetas):
        if rec.phase is not Phase.FLOW:
            break
        work.theta = np.asarray(theta, dtype=float)
        psi = prepare_amplitudes(work)
        values.append(entanglement_entropy(StateVector(work.n_qubits, psi), partition))
        if rec.optimal_norm >= 0.5:
            break
    return np.array(values)


def truncated_entropy(traj: Trajectory) -> np.ndarray:
    """Recorded entropy column cut at the same fidelity-1/2 point as :func:`entropy_trace`."""
    values = []
    for rec in traj.records:
        if rec.phase is not Phase.FLOW:
            break
        values.append(rec.entropy)
        if rec.optimal_norm >= 0.5:
            break
    return np.array(values)


def rises_then_falls(values: Sequence[float], tol: float = 1e-3) -> bool:
    """Interior maximum exceeding both endpoints by more than ``tol``."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return False
    k = int(np.argmax(v))
    return 0 < k < v.size - 1 and v[k] - v[0] > tol and v[k] - v[-1] > tol


def volume_law_fit(points: Sequence[tuple[float, float]]) -> EntropyFit:
    """Ordinary least squares ``S = a N + b`` with standard errors."""
    if len(points) < 3:
        raise ValueError("volume-law fit needs at least three sizes")
    pts = sorted((float(n), float(s)) for n, s in points)
    x, y = np.array(pts).T
    res = sps.linregress(x, y)
    return EntropyFit(float(res.slope), float(res.intercept), float(res.stderr),
                      float(res.intercept_stderr))


def iterations_to_converge(traj: Trajectory, threshold: float = CONVERGED_AR) -> int | None:
    for rec in traj.records:
        if rec.ar >= threshold:
            return rec.iteration
    return None


def padded_column(trajs: Sequence[Trajectory], name: str) -> np.ndarray:
    """(instances, max_len) array; shorter runs repeat their final value."""
    cols = [t.column(name) for t in trajs]
    length = max(c.size for c in cols)
    return np.array([np.concatenate([c, np.full(length - c.size, c[-1])]) for c in cols])


def batch_stats(trajs: Sequence[Trajectory]) -> BatchSummary:
    if not trajs:
        raise ValueError("empty batch")
    err = 1.0 - padded_column(trajs, "ar")
    k = len(trajs)
    stderr = err.std(axis=0, ddof=1) / math.sqrt(k) if k > 1 else np.zeros(err.shape[1])
    its = [iterations_to_converge(t) for t in trajs]
    its = [i for i in its if i is not None]
    layers = [t.max_active_count() / t.meta["n_edges"] for t in trajs if t.meta.get("n_edges")]
    return BatchSummary(
        instances=k,
        mean_ar_error=err.mean(axis=0),
        stderr_ar_error=stderr,
        success_fraction=sum(t.success for t in trajs) / k,
        mean_iterations=float(np.mean(its)) if its else math.nan,
        mean_max_layers=float(np.mean(layers)) if layers else math.nan,
        max_max_layers=float(np.max(layers)) if layers else math.nan,
    )
