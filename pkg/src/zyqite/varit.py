"""Variational imaginary-time (VAR-IT) optimizer for the ZY ansatz.

Each flow iteration solves ``G theta_dot = D`` where

* ``G[a, j] = Re <psi| P_a d_j psi>``, the ``sin(2 delta)`` coefficient of
  ``<P_a>`` under a shift ``delta`` of parameter ``j``;
* ``D[a] = -(<P_a g> - <P_a> <g>)`` with ``g`` the (optionally sigmoid
  transformed) cost diagonal,

through a truncated-SVD pseudoinverse, then takes a forward Euler step. Once
the lowest-energy support string carries half the probability the flow stops
and one Jacobi sweep of exact single-parameter line minimizations finishes the
run.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import ansatz as ansatz_mod
from .ansatz import Ansatz, active_gate_count, prepare_amplitudes, prepare_half
from .graph import Convention, WeightedGraph
from .hamiltonian import (ConvergedSpectrum, CostHamiltonian, SpectralStats, approximation_ratio,
                          build as build_hamiltonian, sigmoid_transform)
from .statevector import StateVector, entanglement_entropy, rotate_symmetric
from .trajectory import Phase, Record, Trajectory

log = logging.getLogger(__name__)

SHIFT = math.pi / 4
ENERGY_TIE = 1e-9


@dataclass
class VarItConfig:
    dtau: float = 0.1
    svd_cutoff_ratio: float = 0.01
    max_iterations: int = 100
    switch_threshold: float = 0.5
    probability_floor: float = 1e-6
    use_sigmoid: bool = True
    epsilon: float = 0.0
    # treat the sin(2 delta) coefficient as 2 G instead of G
    literal_shift_factor: bool = False
    descending_rank: bool = True
    record_entropy: bool = True
    record_rounding: bool = True

    def __post_init__(self):
        if self.dtau <= 0:
            raise ValueError("dtau must be positive")
        if not 0 <= self.svd_cutoff_ratio < 1:
            raise ValueError("svd_cutoff_ratio must lie in [0, 1)")
        if not 0 < self.switch_threshold <= 1:
            raise ValueError("switch_threshold must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


@dataclass
class GDSystem:
    G: np.ndarray
    D: np.ndarray


def _stats(psi: np.ndarray, h: CostHamiltonian) -> SpectralStats:
    p = psi * psi
    e = float(p @ h.diagonal)
    var = max(float(p @ (h.diagonal - e) ** 2), 0.0)
    return SpectralStats(e, math.sqrt(var), h.sigma_0)


def compute_D(state: StateVector | np.ndarray, h: CostHamiltonian, stats: SpectralStats,
              use_sigmoid: bool = True) -> np.ndarray:
    """Right-hand side ``D[a] = -(<P_a g> - <P_a><g>)``.

    Raises ConvergedSpectrum when the sigmoid is requested on an eigenstate.
    """
    amps = state.amplitudes if isinstance(state, StateVector) else state
    p = np.abs(amps) ** 2
    g = sigmoid_transform(h, stats) if use_sigmoid else h.diagonal
    m = float(p @ g)
    signs = h.term_signs
    return -(signs @ (p * g) - (signs @ p) * m)


def compute_G_column(ansatz: Ansatz, j: int, h: CostHamiltonian,
                     literal_shift_factor: bool = False) -> np.ndarray:
    """Column ``j`` of G from two shifted preparations (the shift rule).

    Gate ``j`` is evaluated at its effective angle (0 when pruned) plus and minus pi/4.
    """
    if not 0 <= j < ansatz.n_params:
        raise IndexError(f"gate index {j} out of range")
    theta = ansatz.effective_theta().copy()
    t = theta[j]
    theta[j] = t + SHIFT
    plus = h.term_signs @ prepare_amplitudes(ansatz, theta) ** 2
    theta[j] = t - SHIFT
    minus = h.term_signs @ prepare_amplitudes(ansatz, theta) ** 2
    col = 0.5 * (plus - minus)
    return 0.5 * col if literal_shift_factor else col


def compute_G(ansatz: Ansatz, h: CostHamiltonian, psi: np.ndarray | None = None,
              literal_shift_factor: bool = False) -> np.ndarray:
    """Full G matrix by adjoint propagation; agrees with :func:`compute_G_column`.

    ``d_j psi = A_j (i Z Y)_j chi_j`` where ``chi_j`` is the state right after
    gate j and ``A_j`` the remaining gates. Either each ``d_j psi`` is pushed
    forward through ``A_j`` (cost ~ n_params**2 / 2 gate applications) or the
    term-weighted bras ``P_a psi`` are pulled backwards (cost ~ n_terms *
    n_params); the cheaper route is taken.

    All vectors involved are flip-symmetric, so the work is done on half
    amplitude arrays and the overlaps doubled.
    """
    pairs = ansatz.qubit_pairs
    theta = ansatz.effective_theta()
    n = ansatz.n_qubits
    n_params = ansatz.n_params
    n_terms = len(h.terms)
    dim = 1 << (n - 1)
    half = prepare_half(ansatz, theta) if psi is None else np.ascontiguousarray(psi[:dim])
    signs = h.term_signs[:, :dim]
    G = np.empty((n_terms, n_params))
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    if n_terms + 2 < (n_params + 1) / 2:
        # backward: rows of bras hold A_j^T P_a psi
        bras = signs * half
        chi = half.copy()
        for j in range(n_params - 1, -1, -1):
            r, q = pairs[j]
            v = chi.copy()
            rotate_symmetric(v, r, q, n, 0.0, 1.0)
            G[:, j] = bras @ v
            if theta[j] != 0.0:
                rotate_symmetric(chi, r, q, n, cos_t[j], -sin_t[j])
                rotate_symmetric(bras, r, q, n, cos_t[j], -sin_t[j])
    else:
        derivs = np.empty((n_params, dim))
        chi = np.full(dim, 2.0 ** (-n / 2))
        for j in range(n_params):
            r, q = pairs[j]
            if theta[j] != 0.0:
                rotate_symmetric(chi, r, q, n, cos_t[j], sin_t[j])
            v = derivs[j]
            v[:] = chi
            rotate_symmetric(v, r, q, n, 0.0, 1.0)
            for k in range(j + 1, n_params):
                if theta[k] != 0.0:
                    rk, qk = pairs[k]
                    rotate_symmetric(v, rk, qk, n, cos_t[k], sin_t[k])
        G[:] = (signs * half) @ derivs.T
    G *= 2.0
    return 0.5 * G if literal_shift_factor else G


def build_system(ansatz: Ansatz, h: CostHamiltonian, config: VarItConfig,
                 psi: np.ndarray | None = None) -> GDSystem:
    if psi is None:
        psi = prepare_amplitudes(ansatz)
    D = compute_D(psi, h, _stats(psi, h), config.use_sigmoid)
    G = compute_G(ansatz, h, psi, config.literal_shift_factor)
    return GDSystem(G, D)


def solve_step(system: GDSystem, config: VarItConfig | None = None,
               cutoff_ratio: float | None = None) -> np.ndarray:
    """Least-squares ``theta_dot`` with singular values below ``cutoff * s_max`` discarded."""
    if cutoff_ratio is None:
        cutoff_ratio = (config or VarItConfig()).svd_cutoff_ratio
    G, D = system.G, system.D
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(D))):
        raise FloatingPointError("non-finite entries in the G/D system")
    U, s, Vt = np.linalg.svd(G, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros(G.shape[1])
    keep = s >= cutoff_ratio * s[0]
    return Vt[keep].T @ ((U[:, keep].T @ D) / s[keep])


def euler_update(theta: np.ndarray, theta_dot: np.ndarray, dtau: float) -> np.ndarray:
    return theta + dtau * theta_dot


def switch_ready(state: StateVector | np.ndarray, h: CostHamiltonian,
                 config: VarItConfig | None = None) -> bool:
    """True once the lowest-energy string with probability >= floor holds the threshold mass."""
    config = config or VarItConfig()
    amps = state.amplitudes if isinstance(state, StateVector) else state
    p = np.abs(amps) ** 2
    support = p >= config.probability_floor
    if not support.any():
        support = p == p.max()
    e_low = h.diagonal[support].min()
    lowest = support & (h.diagonal <= e_low + ENERGY_TIE)
    return float(p[lowest].sum()) >= config.switch_threshold


def jacobi_sweep(ansatz: Ansatz, h: CostHamiltonian) -> np.ndarray:
    """One pass of exact line minimization of <H_c> over each parameter in gate order.

    With ``u`` the state right after gate j and ``w = iZY u``, shifting the
    angle by ``delta`` gives ``cos(delta) u + sin(delta) w`` before the later
    gates, so ``E(t + delta) = A + B cos 2 delta + C sin 2 delta`` follows from
    pushing ``u`` and ``w`` through the remaining gates. Its minimizer is
    ``delta = atan2(-C, -B) / 2``. Updates ``ansatz.theta`` in place and
    returns it.
    """
    n = ansatz.n_qubits
    pairs = ansatz.qubit_pairs
    dim = 1 << (n - 1)
    diag = h.diagonal[:dim]
    chi = np.full(dim, 2.0 ** (-n / 2))
    e0 = None
    for j in range(ansatz.n_params):
        theta = ansatz.effective_theta()
        t = theta[j]
        r, q = pairs[j]
        uw = np.empty((2, dim))
        uw[0] = chi
        if t != 0.0:
            rotate_symmetric(uw[0], r, q, n, math.cos(t), math.sin(t))
        uw[1] = uw[0]
        rotate_symmetric(uw[1], r, q, n, 0.0, 1.0)
        for k in range(j + 1, ansatz.n_params):
            if theta[k] != 0.0:
                rk, qk = pairs[k]
                rotate_symmetric(uw, rk, qk, n, math.cos(theta[k]), math.sin(theta[k]))
        hu = 2.0 * diag * uw[0]
        e_uu = float(hu @ uw[0])
        e_ww = float(2.0 * diag * uw[1] @ uw[1])
        c = float(hu @ uw[1])
        a = 0.5 * (e_uu + e_ww)
        b = 0.5 * (e_uu - e_ww)
        if e0 is None:
            e0 = e_uu
        if b != 0.0 or c != 0.0:
            delta = 0.5 * math.atan2(-c, -b)
            new = t + delta
            e_new = a - math.hypot(b, c)
            accept = e_new <= e0
            if ansatz.epsilon > 0 and abs(new) < ansatz.epsilon:
                # the optimum would be pruned to the identity, i.e. delta = -t
                e_new = a + b * math.cos(2 * t) - c * math.sin(2 * t)
                accept = e_new <= e0
            if accept:
                ansatz.theta[j] = new
                e0 = e_new
        t_eff = ansatz.effective_theta()[j]
        if t_eff != 0.0:
            rotate_symmetric(chi, r, q, n, math.cos(t_eff), math.sin(t_eff))
    return ansatz.theta


def random_bipartition(n: int, seed: int) -> list[int]:
    """Half of the qubits, drawn uniformly from PCG64(seed)."""
    if n % 2:
        raise ValueError(f"equal bipartition needs an even qubit count, got {n}")
    rng = np.random.default_rng(seed)
    return sorted(int(k) for k in rng.choice(n, n // 2, replace=False))


def make_record(ansatz: Ansatz, psi: np.ndarray, h: CostHamiltonian, graph: WeightedGraph,
                iteration: int, tau: float, phase: Phase, partition: list[int] | None,
                record_rounding: bool) -> Record:
    from .analysis import rounded_approximation_ratio

    state = StateVector(ansatz.n_qubits, psi)
    p = psi * psi
    e = float(p @ h.diagonal)
    ar = approximation_ratio(e, h)
    rec = Record(iteration, tau, phase, e, ar, float(p[h.optimal_set].sum()),
                 active_gate_count(ansatz))
    if partition is not None:
        rec.entropy = entanglement_entropy(state, partition)
    if record_rounding:
        rec.ar_rounded = rounded_approximation_ratio(state, graph, h)
    return rec


def run(graph: WeightedGraph, convention: Convention, config: VarItConfig | None = None,
        seed: int = 0) -> Trajectory:
    """Full VAR-IT optimization from ``theta = 0``.

    ``seed`` only selects the random bipartition used for the entropy column.
    """
    config = config or VarItConfig()
    h = build_hamiltonian(graph, convention)
    ans = ansatz_mod.build(graph, config.epsilon, config.descending_rank)
    n = graph.n_vertices
    partition = random_bipartition(n, seed) if config.record_entropy and n % 2 == 0 else None
    traj = Trajectory("varit", n, meta={"seed": seed, "convention": Convention(convention).value,
                                        "c_opt": h.c_opt, "n_optimal": len(h.optimal_set),
                                        "partition": partition, "n_edges": graph.n_edges,
                                        "stop": "max_iterations"})

    def record(it: int, tau: float, phase: Phase) -> None:
        traj.append(make_record(ans, psi, h, graph, it, tau, phase, partition,
                                config.record_rounding), ans.theta)

    psi = prepare_amplitudes(ans)
    record(0, 0.0, Phase.FLOW)
    it = 0
    while it < config.max_iterations:
        if switch_ready(psi, h, config):
            traj.meta["stop"] = "switch"
            break
        try:
            system = build_system(ans, h, config, psi)
        except ConvergedSpectrum:
            traj.meta["stop"] = "converged_spectrum"
            break
        theta_dot = solve_step(system, config)
        ans.theta = euler_update(ans.theta, theta_dot, config.dtau)
        psi = prepare_amplitudes(ans)
        it += 1
        record(it, it * config.dtau, Phase.FLOW)
    traj.meta["flow_iterations"] = it
    jacobi_sweep(ans, h)
    psi = prepare_amplitudes(ans)
    record(it + 1, it * config.dtau, Phase.JACOBI)
    log.debug("varit n=%d stop=%s iterations=%d norm=%.4f", n, traj.meta["stop"], it,
              traj.final.optimal_norm)
    return traj
