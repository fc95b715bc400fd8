"""Dense statevector with the ZY rotation and diagonal observables.

Bit convention is little-endian throughout: qubit ``k`` is bit ``k`` of the
amplitude index.

``exp(i theta Z_r Y_q) = cos(theta) I + sin(theta) (i Z_r Y_q)`` and ``i Z_r Y_q``
is a real matrix, so the kernels act identically on real and complex arrays.
Ansatz states are kept real; complex states are accepted everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

MAX_QUBITS = 24
ENTROPY_CUTOFF = 1e-12


@njit(cache=True)
def _zy_kernel(psi, r, q, c, s):
    lo = min(r, q)
    hi = max(r, q)
    mr = 1 << r
    mq = 1 << q
    slo = 1 << lo
    shi = 1 << hi
    # outer loops enumerate indices with bits r and q cleared; inner run is contiguous
    for a in range(0, psi.shape[0], 2 * shi):
        for b in range(a, a + shi, 2 * slo):
            for i0 in range(b, b + slo):
                # Z_r = +1 block: |0_r 0_q>, |0_r 1_q>
                i1 = i0 | mq
                a0 = psi[i0]
                a1 = psi[i1]
                psi[i0] = c * a0 + s * a1
                psi[i1] = c * a1 - s * a0
                # Z_r = -1 block
                j0 = i0 | mr
                j1 = j0 | mq
                a0 = psi[j0]
                a1 = psi[j1]
                psi[j0] = c * a0 - s * a1
                psi[j1] = c * a1 + s * a0


@njit(cache=True)
def _zy_kernel_rows(psi, r, q, c, s):
    for row in range(psi.shape[0]):
        _zy_kernel(psi[row], r, q, c, s)


@njit(cache=True)
def _y_top_kernel(h, q, c, s):
    # half representation, Z on the top qubit: its sign is always +1
    mq = 1 << q
    for a in range(0, h.shape[0], 2 * mq):
        for i0 in range(a, a + mq):
            i1 = i0 | mq
            a0 = h[i0]
            a1 = h[i1]
            h[i0] = c * a0 + s * a1
            h[i1] = c * a1 - s * a0


@njit(cache=True)
def _zy_top_kernel(h, r, c, s):
    # half representation, Y on the top qubit: the partner of i is its complement
    mr = 1 << r
    last = h.shape[0] - 1
    for i0 in range(h.shape[0]):
        if i0 & mr:
            continue
        j0 = last - i0
        a = h[i0]
        b = h[j0]
        h[i0] = c * a + s * b
        h[j0] = c * b - s * a


@njit(cache=True)
def _sym_kernel(h, r, q, top, c, s):
    if r == top:
        _y_top_kernel(h, q, c, s)
    elif q == top:
        _zy_top_kernel(h, r, c, s)
    else:
        _zy_kernel(h, r, q, c, s)


@njit(cache=True)
def _sym_kernel_rows(h, r, q, top, c, s):
    for row in range(h.shape[0]):
        _sym_kernel(h[row], r, q, top, c, s)


def rotate(psi: np.ndarray, r: int, q: int, c: float, s: float) -> None:
    """In place: ``psi <- (c I + s i Z_r Y_q) psi``.

    ``psi`` is one state, or a C-contiguous (batch, dim) stack rotated row by row.
    """
    if psi.ndim == 1:
        _zy_kernel(psi, r, q, c, s)
    else:
        _zy_kernel_rows(psi, r, q, c, s)


def apply_generator(psi: np.ndarray, r: int, q: int) -> np.ndarray:
    """Return ``i Z_r Y_q psi`` as a new array."""
    out = psi.copy()
    rotate(out, r, q, 0.0, 1.0)
    return out


def rotate_symmetric(half: np.ndarray, r: int, q: int, n: int, c: float, s: float) -> None:
    """:func:`rotate` for flip-symmetric states stored as their first half.

    A state with ``psi[z] == psi[~z]`` (every ansatz state, and anything
    built from one by ZY rotations and ZZ-diagonal products) is determined by
    the amplitudes whose top qubit ``n - 1`` is 0. ``half`` holds those
    ``2**(n-1)`` amplitudes, or a (batch, 2**(n-1)) stack of them.
    """
    if half.ndim == 1:
        _sym_kernel(half, r, q, n - 1, c, s)
    else:
        _sym_kernel_rows(half, r, q, n - 1, c, s)


def expand_symmetric(half: np.ndarray) -> np.ndarray:
    """Full amplitudes from the first half; index ``2**n - 1 - z`` mirrors ``z``."""
    return np.concatenate([half, half[::-1]])


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(f"expected {1 << self.n_qubits} amplitudes, got {self.amplitudes.shape}")

    @classmethod
    def from_amplitudes(cls, amplitudes) -> "StateVector":
        amps = np.ascontiguousarray(amplitudes)
        if not (np.iscomplexobj(amps)):
            amps = amps.astype(float)
        n = int(round(math.log2(amps.size)))
        if 1 << n != amps.size:
            raise ValueError(f"length {amps.size} is not a power of two")
        return cls(n, amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities.sum()))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def plus_state(n: int) -> StateVector:
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n must lie in [1, {MAX_QUBITS}], got {n}")
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2)))


def basis_state(n: int, z: int) -> StateVector:
    amps = np.zeros(1 << n)
    amps[z] = 1.0
    return StateVector(n, amps)


def _check_pair(state: StateVector, r: int, q: int) -> None:
    if r == q:
        raise ValueError(f"qubits must differ, got r = q = {r}")
    for k in (r, q):
        if not 0 <= k < state.n_qubits:
            raise ValueError(f"qubit {k} out of range for {state.n_qubits} qubits")


def apply_zy(state: StateVector, r: int, q: int, theta: float) -> StateVector:
    """Apply ``exp(i theta Z_r Y_q)`` in place and return the state."""
    _check_pair(state, r, q)
    rotate(state.amplitudes, r, q, math.cos(theta), math.sin(theta))
    return state


def expect_diagonal(state: StateVector, diagonal: np.ndarray) -> float:
    diagonal = np.asarray(diagonal)
    if diagonal.shape != state.amplitudes.shape:
        raise ValueError(f"diagonal length {diagonal.size} does not match state dimension "
                         f"{state.amplitudes.size}")
    return float(state.probabilities @ diagonal)


def zz_signs(n: int, i: int, j: int) -> np.ndarray:
    """Diagonal of ``Z_i Z_j`` as a float vector of +-1."""
    idx = np.arange(1 << n, dtype=np.int64)
    return 1.0 - 2.0 * (((idx >> i) ^ (idx >> j)) & 1)


def expect_zz(state: StateVector, i: int, j: int) -> float:
    if i == j:
        raise ValueError("expect_zz needs two distinct qubits")
    return float(state.probabilities @ zz_signs(state.n_qubits, i, j))


def zz_correlations(state: StateVector) -> np.ndarray:
    """Symmetric matrix of ``<Z_i Z_j>`` with unit diagonal."""
    n = state.n_qubits
    idx = np.arange(1 << n, dtype=np.int64)
    spins = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)) & 1)
    return spins.T @ (state.probabilities[:, None] * spins)


def subspace_norm(state: StateVector, bitstrings: Sequence[int]) -> float:
    idx = np.asarray(list(bitstrings), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    return float(state.probabilities[idx].sum())


def entanglement_entropy(state: StateVector, subset: Sequence[int]) -> float:
    """Von Neumann entropy (natural log) of the reduced state on ``subset``."""
    n = state.n_qubits
    subset = sorted(set(int(k) for k in subset))
    if not subset or len(subset) >= n:
        raise ValueError("subset must be a nonempty proper subset of the qubits")
    if subset[0] < 0 or subset[-1] >= n:
        raise ValueError(f"subset {subset} out of range")
    rest = [k for k in range(n) if k not in subset]
    # tensor axis a holds qubit n-1-a
    tensor = state.amplitudes.reshape((2,) * n)
    axes = [n - 1 - k for k in subset] + [n - 1 - k for k in rest]
    mat = tensor.transpose(axes).reshape(1 << len(subset), 1 << len(rest))
    sv = np.linalg.svd(mat, compute_uv=False)
    lam = sv ** 2
    lam = lam[lam > ENTROPY_CUTOFF]
    return float(-(lam * np.log(lam)).sum())
