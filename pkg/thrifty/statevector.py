# thrifty/statevector.py
"""Gate-by-gate application of gate sequences to state vectors (or batches of them)."""
from __future__ import annotations

import logging
from collections.abc import Iterable
from math import pi, sqrt
from typing import TYPE_CHECKING

import numpy as np

from thrifty import config
from thrifty.errors import DimensionMismatch, InvalidParameter, check_cutoff

if TYPE_CHECKING:
    from thrifty.pauli_clifford import Gate

logger = logging.getLogger(__name__)

_SQRT2_INV = 1 / sqrt(2)

GATE_MATRICES: dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * pi / 4)]], dtype=complex),
}


def _apply_single_qubit(tensor: np.ndarray, matrix: np.ndarray, qubit: int) -> np.ndarray:
    out = np.tensordot(matrix, tensor, axes=([1], [qubit]))
    return np.moveaxis(out, 0, qubit)


def _apply_cnot(tensor: np.ndarray, control: int, target: int) -> np.ndarray:
    out = tensor.copy()
    idx_10 = [slice(None)] * tensor.ndim
    idx_11 = [slice(None)] * tensor.ndim
    idx_10[control], idx_10[target] = 1, 0
    idx_11[control], idx_11[target] = 1, 1
    out[tuple(idx_10)] = tensor[tuple(idx_11)]
    out[tuple(idx_11)] = tensor[tuple(idx_10)]
    return out


def apply_gates(state: np.ndarray, gates: Iterable["Gate"], n: int) -> np.ndarray:
    """
    Apply gates in order to a 2^n vector or a (2^n, batch) array of column vectors.

    Qubit q is tensor factor q, i.e. axis q after reshaping to [2]*n.
    """
    check_cutoff(n, config.STATEVECTOR_MAX_QUBITS, "state-vector simulation")
    state = np.asarray(state, dtype=complex)
    if state.shape[0] != 2**n:
        raise DimensionMismatch(f"state has leading dimension {state.shape[0]}, expected {2**n}")
    batch_shape = state.shape[1:]
    tensor = state.reshape([2] * n + list(batch_shape))

    for gate in gates:
        if any(not 0 <= q < n for q in gate.qubits):
            raise InvalidParameter(f"gate {gate.name} acts on qubits {gate.qubits} outside [0, {n})")
        if gate.name == "CNOT":
            tensor = _apply_cnot(tensor, gate.qubits[0], gate.qubits[1])
        elif gate.name == "UNITARY":
            flat = tensor.reshape((2**n, -1))
            tensor = (np.asarray(gate.matrix) @ flat).reshape(tensor.shape)
        elif gate.name in GATE_MATRICES:
            tensor = _apply_single_qubit(tensor, GATE_MATRICES[gate.name], gate.qubits[0])
        else:
            raise InvalidParameter(f"unknown gate {gate.name!r}")

    return tensor.reshape((2**n,) + batch_shape)


def basis_probabilities(state: np.ndarray) -> np.ndarray:
    probs = np.abs(state) ** 2
    return probs / probs.sum()


def states_equal(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    """Check if two states are equal up to global phase."""
    if a.shape != b.shape:
        return False
    norm_a, norm_b = np.linalg.norm(a), np.linalg.norm(b)
    if norm_a < tol or norm_b < tol:
        return norm_a < tol and norm_b < tol
    return bool(np.isclose(np.abs(np.vdot(a, b)) / (norm_a * norm_b), 1.0, atol=tol))
