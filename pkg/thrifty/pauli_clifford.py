# thrifty/pauli_clifford.py
"""
Bit-level Pauli and Clifford group machinery.

Conventions:
  - qubit q is tensor factor q (leftmost factor is qubit 0); in a computational
    basis index it is bit n-1-q.
  - PauliString masks: bit q of x / z belongs to qubit q.
  - Pauli index: base-4 digit q is x_q + 2*z_q, i.e. 0=I, 1=X, 2=Z, 3=Y.
  - A PauliString is i^phase * Herm(x|z) with Herm(x|z) = i^{|x&z|} X^x Z^z,
    so Y is the Hermitian Pauli Y.
"""
from __future__ import annotations

import logging
from collections.abc import Iterator
from typing import Any, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from thrifty import config
from thrifty.errors import DimensionMismatch, InvalidParameter, check_cutoff, require
from thrifty.statevector import apply_gates
from thrifty.symplectic import (
    check_symplectic,
    count_symplectic,
    iter_symplectic,
    random_symplectic,
)

logger = logging.getLogger(__name__)

_LETTERS = "IXZY"
_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}


def _popcount(value: int) -> int:
    return bin(value).count("1")


# -------------------------
# Pauli strings
# -------------------------
class PauliString(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    x: int = 0
    z: int = 0
    phase: int = 0

    @field_validator("phase")
    @classmethod
    def _phase_mod4(cls, value: int) -> int:
        return value % 4

    @model_validator(mode="after")
    def _check_masks(self) -> "PauliString":
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"Pauli masks must fit in {self.n} bits")
        return self

    @property
    def index(self) -> int:
        idx = 0
        for q in range(self.n):
            digit = ((self.x >> q) & 1) + 2 * ((self.z >> q) & 1)
            idx += digit * 4**q
        return idx

    @property
    def label(self) -> str:
        """Letters in tensor order, qubit 0 first, without the phase."""
        return "".join(
            _LETTERS[((self.x >> q) & 1) + 2 * ((self.z >> q) & 1)] for q in range(self.n)
        )

    @property
    def sign(self) -> int:
        """+1/-1 for Hermitian strings; raises for the anti-Hermitian phases."""
        if self.phase % 2:
            raise InvalidParameter(f"Pauli with phase i^{self.phase} is not Hermitian")
        return 1 if self.phase == 0 else -1

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def projective(self) -> "PauliString":
        return PauliString(n=self.n, x=self.x, z=self.z)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return pauli_multiply(self, other)

    def __str__(self) -> str:
        prefix = ["+", "+i", "-", "-i"][self.phase]
        return f"{prefix}{self.label}"

    @classmethod
    def from_label(cls, label: str, phase: int = 0) -> "PauliString":
        x = z = 0
        for q, letter in enumerate(label.upper()):
            if letter not in _LETTERS:
                raise InvalidParameter(f"unknown Pauli letter {letter!r} in {label!r}")
            digit = _LETTERS.index(letter)
            x |= (digit & 1) << q
            z |= (digit >> 1) << q
        return cls(n=len(label), x=x, z=z, phase=phase)


def pauli_from_index(n: int, idx: int) -> PauliString:
    require(n >= 1, f"n must be >= 1 (got {n})")
    if not 0 <= idx < 4**n:
        raise InvalidParameter(f"Pauli index {idx} outside [0, 4^{n})")
    x = z = 0
    for q in range(n):
        digit = (idx >> (2 * q)) & 3
        x |= (digit & 1) << q
        z |= (digit >> 1) << q
    return PauliString(n=n, x=x, z=z)


def _check_same_n(a: Any, b: Any) -> None:
    if a.n != b.n:
        raise DimensionMismatch(f"qubit counts differ: {a.n} vs {b.n}")


def pauli_multiply(p: PauliString, q: PauliString) -> PauliString:
    """Exact product p*q including the power of i."""
    _check_same_n(p, q)
    x1, z1, x2, z2 = p.x, p.z, q.x, q.z
    y1 = x1 & z1
    xo1 = x1 & ~z1
    zo1 = ~x1 & z1
    g = (
        _popcount(y1 & z2 & ~x2)
        - _popcount(y1 & x2 & ~z2)
        + _popcount(xo1 & x2 & z2)
        - _popcount(xo1 & z2 & ~x2)
        + _popcount(zo1 & x2 & ~z2)
        - _popcount(zo1 & x2 & z2)
    )
    return PauliString(n=p.n, x=x1 ^ x2, z=z1 ^ z2, phase=(p.phase + q.phase + g) % 4)


def pauli_commutes(p: PauliString, q: PauliString) -> bool:
    _check_same_n(p, q)
    return (_popcount(p.x & q.z) + _popcount(p.z & q.x)) % 2 == 0


def pauli_matrix(p: PauliString) -> np.ndarray:
    check_cutoff(p.n, config.DENSE_UNITARY_MAX_QUBITS, "dense Pauli matrix")
    mat = np.ones((1, 1), dtype=complex)
    for letter in p.label:
        mat = np.kron(mat, _SINGLE[letter])
    return (1j**p.phase) * mat


# -------------------------
# Gates and gate sequences
# -------------------------
class Gate(NamedTuple):
    name: str
    qubits: tuple[int, ...]
    matrix: Any = None


CLIFFORD_GATES = ("H", "S", "CNOT")


class GateSequence(BaseModel):
    """Ordered gates, first element applied first."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    gates: tuple[Gate, ...] = ()

    @model_validator(mode="after")
    def _check_qubits(self) -> "GateSequence":
        for gate in self.gates:
            if any(not 0 <= q < self.n for q in gate.qubits):
                raise ValueError(f"gate {gate.name} acts on {gate.qubits} outside [0, {self.n})")
            if gate.name == "CNOT" and gate.qubits[0] == gate.qubits[1]:
                raise ValueError("CNOT control and target must differ")
        return self

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "GateSequence") -> "GateSequence":
        _check_same_n(self, other)
        return GateSequence(n=self.n, gates=self.gates + other.gates)

    def count(self, name: str) -> int:
        return sum(1 for gate in self.gates if gate.name == name)

    @property
    def is_clifford(self) -> bool:
        return all(gate.name in CLIFFORD_GATES for gate in self.gates)


def conjugate_by_gate(gate: Gate, p: PauliString) -> PauliString:
    """G p G^dagger for one Clifford gate, by bit updates."""
    x, z, phase = p.x, p.z, p.phase
    if gate.name == "H":
        q = gate.qubits[0]
        xq, zq = (x >> q) & 1, (z >> q) & 1
        if xq and zq:
            phase += 2
        x = (x & ~(1 << q)) | (zq << q)
        z = (z & ~(1 << q)) | (xq << q)
    elif gate.name == "S":
        q = gate.qubits[0]
        xq, zq = (x >> q) & 1, (z >> q) & 1
        if xq:
            if zq:
                phase += 2
            z ^= 1 << q
    elif gate.name == "CNOT":
        c, t = gate.qubits
        xc, zc, xt, zt = (x >> c) & 1, (z >> c) & 1, (x >> t) & 1, (z >> t) & 1
        if xc and zt and (xt ^ zc ^ 1):
            phase += 2
        x ^= xc << t
        z ^= zt << c
    else:
        raise InvalidParameter(f"gate {gate.name} is not a Clifford generator")
    return PauliString(n=p.n, x=x, z=z, phase=phase % 4)


# -------------------------
# Clifford elements
# -------------------------
class CliffordElement(BaseModel):
    """
    Projective Clifford: columns of `symplectic` are the images of
    X_0..X_{n-1}, Z_0..Z_{n-1} in (x|z) layout; `phases[j]` is the sign bit
    of image j.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    symplectic: np.ndarray
    phases: np.ndarray

    _images: tuple[PauliString, ...] = PrivateAttr()

    @field_validator("symplectic", "phases", mode="before")
    @classmethod
    def _as_bits(cls, value: Any) -> np.ndarray:
        bits = np.asarray(value, dtype=np.uint8) % 2
        bits.setflags(write=False)
        return bits

    @model_validator(mode="after")
    def _check_tableau(self) -> "CliffordElement":
        nn = 2 * self.n
        if self.symplectic.shape != (nn, nn) or self.phases.shape != (nn,):
            raise ValueError(f"tableau must be {nn}x{nn} with {nn} phase bits")
        if not check_symplectic(self.symplectic):
            raise ValueError("matrix does not preserve the symplectic form")
        return self

    def model_post_init(self, __context: Any) -> None:
        images = []
        weights = 1 << np.arange(self.n, dtype=np.int64)
        for j in range(2 * self.n):
            col = self.symplectic[:, j].astype(np.int64)
            x = int(col[: self.n] @ weights)
            z = int(col[self.n :] @ weights)
            images.append(PauliString(n=self.n, x=x, z=z, phase=2 * int(self.phases[j])))
        self._images = tuple(images)

    @property
    def images(self) -> tuple[PauliString, ...]:
        return self._images

    def key(self) -> tuple[bytes, bytes]:
        return self.symplectic.tobytes(), self.phases.tobytes()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self.n == other.n and self.key() == other.key()

    def __hash__(self) -> int:
        return hash((self.n,) + self.key())

    @classmethod
    def identity(cls, n: int) -> "CliffordElement":
        return cls(
            n=n,
            symplectic=np.eye(2 * n, dtype=np.uint8),
            phases=np.zeros(2 * n, dtype=np.uint8),
        )

    @classmethod
    def from_images(cls, n: int, images: list[PauliString]) -> "CliffordElement":
        sym = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        phases = np.zeros(2 * n, dtype=np.uint8)
        for j, image in enumerate(images):
            for q in range(n):
                sym[q, j] = (image.x >> q) & 1
                sym[n + q, j] = (image.z >> q) & 1
            phases[j] = 1 if image.sign < 0 else 0
        return cls(n=n, symplectic=sym, phases=phases)


def conjugate_pauli(c: CliffordElement, p: PauliString) -> PauliString:
    """C p C^dagger with exact phase."""
    _check_same_n(c, p)
    result = PauliString(n=p.n, phase=(p.phase + _popcount(p.x & p.z)) % 4)
    for q in range(p.n):
        if (p.x >> q) & 1:
            result = pauli_multiply(result, c.images[q])
    for q in range(p.n):
        if (p.z >> q) & 1:
            result = pauli_multiply(result, c.images[p.n + q])
    return result


def compose_clifford(first: CliffordElement, second: CliffordElement) -> CliffordElement:
    """The element that applies `first`, then `second`."""
    _check_same_n(first, second)
    return CliffordElement.from_images(
        first.n, [conjugate_pauli(second, image) for image in first.images]
    )


def clifford_count(n: int) -> int:
    """Order of the projective Clifford group, 4^n |Sp(2n, F2)|."""
    return 4**n * count_symplectic(n)


def random_clifford(n: int, rng: np.random.Generator) -> CliffordElement:
    require(n >= 1, f"n must be >= 1 (got {n})")
    sym = random_symplectic(n, rng)
    phases = rng.integers(0, 2, size=2 * n, dtype=np.uint8)
    return CliffordElement(n=n, symplectic=sym, phases=phases)


def enumerate_clifford(n: int) -> Iterator[CliffordElement]:
    """Every projective Clifford element exactly once (24 for n=1, 11520 for n=2)."""
    check_cutoff(n, config.ENUMERATION_MAX_QUBITS, "Clifford enumeration")
    require(n >= 1, f"n must be >= 1 (got {n})")
    nn = 2 * n
    sign_patterns = [
        np.array([(s >> j) & 1 for j in range(nn)], dtype=np.uint8) for s in range(1 << nn)
    ]
    logger.debug("enumerating %d Clifford elements on %d qubit(s)", clifford_count(n), n)
    for sym in iter_symplectic(n):
        for phases in sign_patterns:
            yield CliffordElement(n=n, symplectic=sym, phases=phases)


# -------------------------
# Circuits
# -------------------------
def clifford_from_circuit(seq: GateSequence) -> CliffordElement:
    """Tableau evolution of a T-free sequence."""
    if not seq.is_clifford:
        raise InvalidParameter("sequence contains non-Clifford gates")
    images = list(CliffordElement.identity(seq.n).images)
    for gate in seq.gates:
        images = [conjugate_by_gate(gate, image) for image in images]
    return CliffordElement.from_images(seq.n, images)


def _inverse(gate: Gate) -> list[Gate]:
    if gate.name == "S":
        return [gate, gate, gate]
    return [gate]


def clifford_to_circuit(c: CliffordElement) -> GateSequence:
    """
    Greedy column reduction: gates are appended after the tableau until every
    image is +X_j / +Z_j; the circuit is the reversed list of inverses.
    """
    n = c.n
    images = list(c.images)
    reducing: list[Gate] = []

    def apply(gate: Gate) -> None:
        reducing.append(gate)
        for idx, image in enumerate(images):
            images[idx] = conjugate_by_gate(gate, image)

    def bit(mask: int, q: int) -> int:
        return (mask >> q) & 1

    for j in range(n):
        xj = images[j]
        # X_j image: bring an X component onto qubit j
        if not any(bit(xj.x, k) for k in range(j, n)):
            k = next(k for k in range(j, n) if bit(xj.z, k))
            apply(Gate("H", (k,)))
        if not bit(images[j].x, j):
            k = next(k for k in range(j + 1, n) if bit(images[j].x, k))
            apply(Gate("CNOT", (k, j)))
        for k in range(j + 1, n):
            if bit(images[j].x, k):
                apply(Gate("CNOT", (j, k)))
        for k in range(j + 1, n):
            if bit(images[j].z, k):
                apply(Gate("H", (k,)))
                apply(Gate("CNOT", (j, k)))
        if bit(images[j].z, j):
            apply(Gate("S", (j,)))

        # Z_j image: make other qubits pure Z, then fold them into qubit j
        for k in range(j + 1, n):
            zj = images[n + j]
            if bit(zj.x, k):
                if bit(zj.z, k):
                    apply(Gate("S", (k,)))
                apply(Gate("H", (k,)))
        for k in range(j + 1, n):
            if bit(images[n + j].z, k):
                apply(Gate("CNOT", (k, j)))
        if bit(images[n + j].x, j):
            apply(Gate("H", (j,)))
            apply(Gate("S", (j,)))
            apply(Gate("H", (j,)))

    for j in range(n):
        if images[j].phase == 2:
            # Z_j = S S flips the sign of X_j only
            apply(Gate("S", (j,)))
            apply(Gate("S", (j,)))
        if images[n + j].phase == 2:
            for name in ("H", "S", "S", "H"):
                apply(Gate(name, (j,)))

    gates: list[Gate] = []
    for gate in reversed(reducing):
        gates.extend(_inverse(gate))
    return GateSequence(n=n, gates=tuple(gates))


def dense_unitary(seq: GateSequence, n: int | None = None) -> np.ndarray:
    n = seq.n if n is None else n
    if n != seq.n:
        raise DimensionMismatch(f"sequence is on {seq.n} qubits, asked for {n}")
    check_cutoff(n, config.DENSE_UNITARY_MAX_QUBITS, "dense unitary")
    return apply_gates(np.eye(2**n, dtype=complex), seq.gates, n)


def apply_circuit(seq: GateSequence, state: np.ndarray) -> np.ndarray:
    """State-vector (or column batch) evolution, gate by gate."""
    return apply_gates(state, seq.gates, seq.n)
