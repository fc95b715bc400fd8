"""Diagonal cost Hamiltonian, energy statistics and the sigmoid spectral transform."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import expit

from .graph import Convention, WeightedGraph, all_costs, MAX_ENUMERATION_VERTICES, TIE_TOLERANCE
from .statevector import StateVector, expect_diagonal, plus_state

SIGMA_FLOOR = 1e-9


class ConvergedSpectrum(ArithmeticError):
    """The state is (numerically) an eigenstate; sigma_tau fell below the floor."""


class DegenerateInstance(ValueError):
    """The optimal cost is zero, so the approximation ratio is undefined."""


@dataclass(frozen=True)
class SpectralStats:
    e_tau: float
    sigma_tau: float
    sigma_0: float


@dataclass(eq=False)
class CostHamiltonian:
    n_qubits: int
    terms: tuple[tuple[int, int, float], ...]
    convention: Convention
    constant_offset: float
    diagonal: np.ndarray
    c_opt: float
    optimal_set: list[int]
    sigma_0: float = field(default=0.0)

    @cached_property
    def term_signs(self) -> np.ndarray:
        """(n_terms, 2**n) stack of the +-1 diagonals of each ``Z_i Z_j`` term."""
        idx = np.arange(1 << self.n_qubits, dtype=np.int64)
        out = np.empty((len(self.terms), idx.size))
        for a, (i, j, _) in enumerate(self.terms):
            out[a] = 1.0 - 2.0 * (((idx >> i) ^ (idx >> j)) & 1)
        return out


def build(graph: WeightedGraph, convention: Convention) -> CostHamiltonian:
    if graph.n_vertices > MAX_ENUMERATION_VERTICES:
        raise ValueError(f"diagonal limited to {MAX_ENUMERATION_VERTICES} qubits")
    convention = Convention(convention)
    diag = all_costs(graph, convention)
    c_opt = float(diag.min())
    optimal = [int(z) for z in np.flatnonzero(diag <= c_opt + TIE_TOLERANCE)]
    offset = 0.0
    if convention is Convention.COMPUTER_SCIENCE:
        offset = -0.5 * float(sum(w for _, _, w in graph.edges))
    diag.setflags(write=False)
    h = CostHamiltonian(graph.n_vertices, graph.edges, convention, offset, diag, c_opt, optimal)
    h.sigma_0 = math.sqrt(variance(plus_state(graph.n_vertices), h))
    return h


def energy(state: StateVector, h: CostHamiltonian) -> float:
    return expect_diagonal(state, h.diagonal)


def variance(state: StateVector, h: CostHamiltonian) -> float:
    p = state.probabilities
    if p.shape != h.diagonal.shape:
        raise ValueError("state and Hamiltonian dimensions differ")
    mean = float(p @ h.diagonal)
    var = float(p @ h.diagonal ** 2) - mean ** 2
    if var < 0:
        if var < -1e-12 * max(1.0, mean ** 2):
            raise ArithmeticError(f"negative variance {var}")
        var = 0.0
    return var


def spectral_stats(state: StateVector, h: CostHamiltonian) -> SpectralStats:
    return SpectralStats(energy(state, h), math.sqrt(variance(state, h)), h.sigma_0)


def approximation_ratio(e: float, h: CostHamiltonian) -> float:
    if h.c_opt == 0:
        raise DegenerateInstance("optimal cost is zero")
    return e / h.c_opt


def sigmoid_transform(h: CostHamiltonian, stats: SpectralStats) -> np.ndarray:
    """``f(c) = 1 / (1 + exp(-sigma_0 (c - E) / (4 sigma^2)))`` over the diagonal."""
    if stats.sigma_tau < SIGMA_FLOOR:
        raise ConvergedSpectrum(f"sigma_tau = {stats.sigma_tau:.3e}")
    if stats.sigma_0 <= 0:
        raise ValueError("sigma_0 must be positive")
    x = stats.sigma_0 * (h.diagonal - stats.e_tau) / (4.0 * stats.sigma_tau ** 2)
    return expit(x)


def exact_imaginary_time_step(state: StateVector, h: CostHamiltonian, dtau: float) -> StateVector:
    """Return ``exp(-dtau H) |state>`` renormalized."""
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    # shifting by the minimum keeps every factor <= 1
    amps = state.amplitudes * np.exp(-dtau * (h.diagonal - h.c_opt))
    nrm = np.linalg.norm(amps)
    if nrm == 0 or not np.isfinite(nrm):
        raise ArithmeticError("imaginary time step produced a zero or non-finite state")
    return StateVector(state.n_qubits, amps / nrm)


def exact_imaginary_time_state(start: StateVector, h: CostHamiltonian, tau: float) -> StateVector:
    """``exp(-tau H) |start>`` renormalized, in one shot (``tau = 0`` returns a copy)."""
    if tau == 0:
        return start.copy()
    return exact_imaginary_time_step(start, h, tau)
