"""ADAM on the same ZY ansatz, minimizing the raw cost energy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ansatz as ansatz_mod
from .ansatz import Ansatz, prepare_amplitudes, prepare_half
from .graph import Convention, WeightedGraph
from .hamiltonian import CostHamiltonian, build as build_hamiltonian
from .statevector import rotate_symmetric
from .trajectory import Phase, Trajectory
from .varit import SHIFT, make_record, random_bipartition


@dataclass
class AdamConfig:
    learning_rate: float = 0.05
    beta1: float = 0.9
    beta2: float = 0.999
    eps_hat: float = 1e-8
    max_iterations: int = 100
    objective: str = "raw_energy"
    record_entropy: bool = False
    record_rounding: bool = True

    def __post_init__(self):
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.objective != "raw_energy":
            raise ValueError(f"unsupported objective {self.objective!r}")


def gradient(ansatz: Ansatz, h: CostHamiltonian, psi: np.ndarray | None = None) -> np.ndarray:
    """``dE/dtheta_j = 2 <H psi| d_j psi>`` by one backward sweep over half arrays."""
    pairs = ansatz.qubit_pairs
    theta = ansatz.effective_theta()
    n = ansatz.n_qubits
    dim = 1 << (n - 1)
    half = prepare_half(ansatz, theta) if psi is None else np.ascontiguousarray(psi[:dim])
    # row 0: chi, row 1: H chi pulled back
    work = np.stack([half, h.diagonal[:dim] * half])
    grad = np.empty(ansatz.n_params)
    for j in range(ansatz.n_params - 1, -1, -1):
        r, q = pairs[j]
        v = work[0].copy()
        rotate_symmetric(v, r, q, n, 0.0, 1.0)
        grad[j] = 4.0 * (work[1] @ v)
        if theta[j] != 0.0:
            rotate_symmetric(work, r, q, n, math.cos(theta[j]), -math.sin(theta[j]))
    return grad


def gradient_shift(ansatz: Ansatz, h: CostHamiltonian) -> np.ndarray:
    """Same gradient from two shifted preparations per parameter: ``E(+pi/4) - E(-pi/4)``."""
    base = ansatz.effective_theta()
    grad = np.empty(ansatz.n_params)
    for j in range(ansatz.n_params):
        theta = base.copy()
        theta[j] = base[j] + SHIFT
        e_plus = prepare_amplitudes(ansatz, theta) ** 2 @ h.diagonal
        theta[j] = base[j] - SHIFT
        e_minus = prepare_amplitudes(ansatz, theta) ** 2 @ h.diagonal
        grad[j] = e_plus - e_minus
    return grad


def run(graph: WeightedGraph, convention: Convention, config: AdamConfig | None = None,
        seed: int = 0, initial_theta: np.ndarray | None = None) -> Trajectory:
    """Bias-corrected ADAM from ``theta = 0`` (or ``initial_theta``)."""
    config = config or AdamConfig()
    h = build_hamiltonian(graph, convention)
    ans = ansatz_mod.build(graph)
    if initial_theta is not None:
        ans.theta = np.array(initial_theta, dtype=float)
    n = graph.n_vertices
    partition = random_bipartition(n, seed) if config.record_entropy and n % 2 == 0 else None
    traj = Trajectory("adam", n, meta={"seed": seed, "convention": Convention(convention).value,
                                       "c_opt": h.c_opt, "n_optimal": len(h.optimal_set),
                                       "n_edges": graph.n_edges,
                                       "learning_rate": config.learning_rate,
                                       "beta1": config.beta1, "beta2": config.beta2,
                                       "eps_hat": config.eps_hat, "objective": config.objective,
                                       # none of these are fixed upstream; they are our defaults
                                       "hyperparameters": "chosen"})
    m = np.zeros(ans.n_params)
    v = np.zeros(ans.n_params)
    psi = prepare_amplitudes(ans)
    traj.append(make_record(ans, psi, h, graph, 0, 0.0, Phase.FLOW, partition,
                            config.record_rounding), ans.theta)
    for t in range(1, config.max_iterations + 1):
        g = gradient(ans, h, psi)
        m = config.beta1 * m + (1 - config.beta1) * g
        v = config.beta2 * v + (1 - config.beta2) * g * g
        m_hat = m / (1 - config.beta1 ** t)
        v_hat = v / (1 - config.beta2 ** t)
        ans.theta = ans.theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps_hat)
        psi = prepare_amplitudes(ans)
        phase = Phase.DONE if t == config.max_iterations else Phase.FLOW
        traj.append(make_record(ans, psi, h, graph, t, float(t), phase, partition,
                                config.record_rounding), ans.theta)
    return traj
