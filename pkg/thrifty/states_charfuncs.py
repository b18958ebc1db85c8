# thrifty/states_charfuncs.py
"""
Dense states and operators, characteristic and cross-characteristic
functions, and the stabilizer 2-Renyi entropy.

Characteristic vectors are computed with one Walsh-Hadamard product instead
of 4^n separate traces: for P = i^{|x&z|} X^x Z^z,
tr(A P) = i^{|x&z|} sum_b (-1)^{z.b} A[b, b^x].
"""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.linalg import hadamard
from scipy.stats import unitary_group

from thrifty import config
from thrifty.errors import DimensionMismatch, InvalidParameter, NotAState, check_cutoff, require
from thrifty.schemas import StateSpec

logger = logging.getLogger(__name__)


# -------------------------
# Domain types
# -------------------------
class DenseState(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    amplitudes: np.ndarray

    @field_validator("amplitudes", mode="before")
    @classmethod
    def _as_vector(cls, value: Any) -> np.ndarray:
        vec = np.asarray(value, dtype=complex).reshape(-1)
        vec.setflags(write=False)
        return vec

    @model_validator(mode="after")
    def _check_norm(self) -> "DenseState":
        if self.amplitudes.shape != (2**self.n,):
            raise ValueError(f"state needs {2**self.n} amplitudes, got {self.amplitudes.shape}")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > config.ATOL_STATE:
            raise ValueError("state vector is not normalized")
        return self

    @property
    def dim(self) -> int:
        return 2**self.n

    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


class DenseOperator(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1)
    matrix: np.ndarray
    hermitian: bool = True
    traceless: bool = False

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_matrix(cls, value: Any) -> np.ndarray:
        mat = np.asarray(value, dtype=complex)
        mat.setflags(write=False)
        return mat

    @model_validator(mode="after")
    def _check_flags(self) -> "DenseOperator":
        d = 2**self.n
        if self.matrix.shape != (d, d):
            raise ValueError(f"operator must be {d}x{d}, got {self.matrix.shape}")
        if self.hermitian and not np.allclose(self.matrix, self.matrix.conj().T, atol=config.ATOL_STATE):
            raise ValueError("operator flagged Hermitian is not Hermitian")
        if self.traceless and abs(np.trace(self.matrix)) > config.ATOL_STATE:
            raise ValueError("operator flagged traceless has nonzero trace")
        return self

    @property
    def dim(self) -> int:
        return 2**self.n


class CharVector(BaseModel):
    """tr(X P) for every Pauli P, in Pauli index order."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    values: np.ndarray

    @property
    def dim(self) -> int:
        return 2**self.n

    def norm2(self) -> float:
        return float(np.sum(self.values**2))

    def norm4(self) -> float:
        return float(np.sum(self.values**4))


class CrossCharPair(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int
    cross: np.ndarray
    twisted: np.ndarray

    def cross_norm2(self) -> float:
        return float(np.sum(self.cross**2))

    def twisted_norm2(self) -> float:
        return float(np.sum(self.twisted**2))

    def overlap(self) -> float:
        """The inner product twisted . cross."""
        return float(np.dot(self.twisted, self.cross))


class CharNorms(BaseModel):
    cross_norm2: float
    overlap: float
    o_norm4: float
    o_top_d: float
    o_norm2: float
    rho_traceless_inf2: float
    rho_sre2: float
    purity: float


# -------------------------
# Conversions
# -------------------------
def qubits_for_dim(d: int) -> int:
    n = int(d).bit_length() - 1
    if d < 2 or 2**n != d:
        raise DimensionMismatch(f"dimension {d} is not a power of two >= 2")
    return n


def as_matrix(x: DenseState | DenseOperator | np.ndarray) -> np.ndarray:
    """Density/operator matrix for any accepted input; 1-D arrays are state vectors."""
    if isinstance(x, DenseState):
        return x.density()
    if isinstance(x, DenseOperator):
        return np.asarray(x.matrix)
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a vector or square matrix, got shape {arr.shape}")
    return arr


def check_state(rho: np.ndarray) -> None:
    if abs(np.trace(rho) - 1.0) > config.PSD_TOL:
        raise NotAState(f"trace is {np.trace(rho).real:.6g}, expected 1")
    if not np.allclose(rho, rho.conj().T, atol=config.PSD_TOL):
        raise NotAState("density matrix is not Hermitian")
    smallest = float(np.linalg.eigvalsh(rho).min())
    if smallest < -config.PSD_TOL:
        raise NotAState(f"density matrix has eigenvalue {smallest:.3g} < 0")


def check_traceless(o: np.ndarray) -> None:
    if abs(np.trace(o)) > config.ATOL_STATE * max(1.0, np.linalg.norm(o)):
        raise InvalidParameter(f"observable must be traceless (trace = {np.trace(o):.3g})")


# -------------------------
# States
# -------------------------
def basis_state(n: int, index: int = 0) -> DenseState:
    require(0 <= index < 2**n, f"basis index {index} outside [0, {2**n})")
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return DenseState(n=n, amplitudes=amps)


def w_state(n: int, thetas: list[float] | tuple[float, ...] | None = None) -> DenseState:
    """(1/sqrt n) sum_j e^{i theta_j} |0..1_j..0>; qubit j excited."""
    require(n >= 1, f"n must be >= 1 (got {n})")
    thetas = [0.0] * n if thetas is None else list(thetas)
    if len(thetas) != n:
        raise InvalidParameter(f"w_state needs {n} phases, got {len(thetas)}")
    amps = np.zeros(2**n, dtype=complex)
    for j, theta in enumerate(thetas):
        amps[1 << (n - 1 - j)] = np.exp(1j * theta) / np.sqrt(n)
    return DenseState(n=n, amplitudes=amps)


def w_theta_state(n: int, theta: float) -> DenseState:
    """Generalized W state with phases theta_j = j*theta, j = 1..n."""
    return w_state(n, [j * theta for j in range(1, n + 1)])


def snk_state(n: int, k: int, theta: float) -> DenseState:
    """|0>^(n-k) (x) [(|0> + e^{i theta}|1>)/sqrt 2]^k."""
    if not 0 <= k <= n:
        raise InvalidParameter(f"snk_state needs 0 <= k <= n (got k={k}, n={n})")
    zero = np.array([1.0, 0.0], dtype=complex)
    magic = np.array([1.0, np.exp(1j * theta)], dtype=complex) / np.sqrt(2)
    amps = np.ones(1, dtype=complex)
    for q in range(n):
        amps = np.kron(amps, magic if q >= n - k else zero)
    return DenseState(n=n, amplitudes=amps)


def haar_state(n: int, rng: np.random.Generator) -> DenseState:
    vec = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return DenseState(n=n, amplitudes=vec / np.linalg.norm(vec))


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(2**n, random_state=rng)


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Induced-measure mixed state G G^dagger / tr, G of shape d x rank."""
    d = 2**n
    rank = d if rank is None else rank
    require(1 <= rank <= d, f"rank must be in [1, {d}]")
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_traceless_observable(n: int, rng: np.random.Generator) -> np.ndarray:
    d = 2**n
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return traceless_part((a + a.conj().T) / 2)


def density(state: DenseState | np.ndarray) -> np.ndarray:
    return as_matrix(state)


def fidelity_observable(state: DenseState | np.ndarray) -> np.ndarray:
    """O = |phi><phi| - 1/d."""
    proj = as_matrix(state)
    return proj - np.eye(proj.shape[0]) / proj.shape[0]


def depolarize(rho: np.ndarray, p: float) -> np.ndarray:
    require(0.0 <= p <= 1.0, f"depolarizing strength must be in [0, 1] (got {p})")
    rho = as_matrix(rho)
    return (1 - p) * rho + p * np.eye(rho.shape[0]) / rho.shape[0]


def purity(rho: DenseState | np.ndarray) -> float:
    rho = as_matrix(rho)
    return float(np.real(np.trace(rho @ rho)))


def traceless_part(o: np.ndarray) -> np.ndarray:
    o = np.asarray(o, dtype=complex)
    return o - np.trace(o) * np.eye(o.shape[0]) / o.shape[0]


def build_state(spec: StateSpec) -> DenseState:
    if spec.family == "basis":
        return basis_state(spec.n, spec.index)
    if spec.family == "w":
        return w_state(spec.n)
    if spec.family == "w_theta":
        return w_theta_state(spec.n, spec.theta)
    if spec.family == "phased_w":
        return w_state(spec.n, list(spec.thetas or ()))
    if spec.family == "snk":
        return snk_state(spec.n, spec.k, spec.theta)
    return haar_state(spec.n, np.random.default_rng(spec.seed))


# -------------------------
# Characteristic functions
# -------------------------
@lru_cache(maxsize=None)
def _pauli_index_maps(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For every Pauli index: basis-index X mask, basis-index Z mask, |x&z|."""
    idx = np.arange(4**n)
    xb = np.zeros(4**n, dtype=np.int64)
    zb = np.zeros(4**n, dtype=np.int64)
    ny = np.zeros(4**n, dtype=np.int64)
    for q in range(n):
        digit = (idx >> (2 * q)) & 3
        xq, zq = digit & 1, digit >> 1
        xb |= xq << (n - 1 - q)
        zb |= zq << (n - 1 - q)
        ny += xq & zq
    for arr in (xb, zb, ny):
        arr.setflags(write=False)
    return xb, zb, ny


@lru_cache(maxsize=None)
def _walsh(d: int) -> np.ndarray:
    h = hadamard(d).astype(float)
    h.setflags(write=False)
    return h


def _xor_table(d: int) -> np.ndarray:
    a = np.arange(d)
    return a[:, None] ^ a[None, :]


def _char_values(a: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    n = qubits_for_dim(d)
    xor = _xor_table(d)
    # F[x, b] = A[b, b^x]
    f = a[np.arange(d)[None, :], xor]
    w = f @ _walsh(d)
    xb, zb, ny = _pauli_index_maps(n)
    return (1j**ny) * w[xb, zb]


def char_vector(x: DenseState | DenseOperator | np.ndarray) -> CharVector:
    mat = as_matrix(x)
    n = qubits_for_dim(mat.shape[0])
    check_cutoff(n, config.CHAR_MAX_QUBITS, "characteristic vector")
    values = _char_values(mat)
    if np.max(np.abs(values.imag), initial=0.0) > 1e-8 * max(1.0, np.abs(values).max()):
        logger.debug("char_vector of a non-Hermitian input; keeping the real part")
    return CharVector(n=n, values=np.real(values))


def _twisted_values(rho: np.ndarray, o: np.ndarray) -> np.ndarray:
    """tr(rho P O P) for every Pauli, via G[x, c] = sum_a rho[a^c, a] O[a^x, a^c^x]."""
    d = rho.shape[0]
    n = qubits_for_dim(d)
    a = np.arange(d)
    xor = _xor_table(d)  # xor[c, a] = a ^ c
    rho_part = rho[xor, a[None, :]]
    g = np.empty((d, d), dtype=complex)
    for x in range(d):
        g[x] = np.sum(rho_part * o[a[None, :] ^ x, xor ^ x], axis=1)
    w = g @ _walsh(d)
    xb, zb, _ = _pauli_index_maps(n)
    return w[xb, zb]


def cross_chars(rho: DenseState | np.ndarray, o: DenseOperator | np.ndarray) -> CrossCharPair:
    rho_m = as_matrix(rho)
    o_m = as_matrix(o)
    if rho_m.shape != o_m.shape:
        raise DimensionMismatch(f"state {rho_m.shape} and observable {o_m.shape} differ")
    n = qubits_for_dim(rho_m.shape[0])
    check_cutoff(n, config.CHAR_MAX_QUBITS, "cross characteristic functions")
    cross = np.real(_char_values(rho_m)) * np.real(_char_values(o_m))
    twisted = np.real(_twisted_values(rho_m, o_m))
    return CrossCharPair(n=n, cross=cross, twisted=twisted)


def top_d_sum(char: CharVector | np.ndarray, d: int | None = None) -> float:
    """Sum of the d largest entries of the squared vector."""
    if isinstance(char, CharVector):
        values, d = char.values, char.dim if d is None else d
    else:
        values = np.asarray(char, dtype=float)
        d = int(round(np.sqrt(values.size))) if d is None else d
    squared = np.sort(values**2)[::-1]
    return float(squared[:d].sum())


# -------------------------
# Stabilizer 2-Renyi entropy
# -------------------------
def sre2(x: DenseState | np.ndarray) -> float:
    """-log2(||Xi||_4^4 / (d purity)); the mixed-state variant for density matrices."""
    rho = as_matrix(x)
    check_state(rho)
    char = char_vector(rho)
    ratio = char.norm4() / char.norm2()
    return max(0.0, float(-np.log2(ratio)))


def _sin_ratio(n: int, theta: float) -> float:
    """sin^2(2 n theta) / sin^2(2 theta), with the n^2 limit at the removable singularity."""
    s = np.sin(2 * theta)
    if abs(s) < 1e-9:
        return float(n * n)
    return float(np.sin(2 * n * theta) ** 2 / s**2)


SreFamily = Literal["w", "w_theta", "phased_w", "snk"]


def sre2_closed(
    family: SreFamily,
    n: int,
    k: int = 0,
    theta: float = 0.0,
    thetas: list[float] | tuple[float, ...] | None = None,
) -> float:
    if n < 1:
        raise InvalidParameter(f"n must be >= 1 (got {n})")
    if family == "w":
        return float(np.log2(n**3 / (7 * n - 6)))
    if family == "w_theta":
        return float(np.log2(n**4 / (6 * n * n - 6 * n + _sin_ratio(n, theta))))
    if family == "phased_w":
        if thetas is None or len(thetas) != n:
            raise InvalidParameter(f"phased W needs exactly {n} phases")
        s = abs(np.sum(np.exp(4j * np.asarray(thetas, dtype=float)))) ** 2
        return float(np.log2(n**4 / (6 * n * (n - 1) + s)))
    if family == "snk":
        if not 0 <= k <= n:
            raise InvalidParameter(f"snk needs 0 <= k <= n (got k={k}, n={n})")
        return float(-k * np.log2((np.cos(4 * theta) + 7) / 8))
    raise InvalidParameter(f"unknown state family {family!r}")


def sre2_product(factors: list[DenseState | np.ndarray]) -> float:
    """M2 of a tensor product of pure factors (additive)."""
    return float(sum(sre2(f) for f in factors))


def sre2_for_spec(spec: StateSpec) -> float:
    if spec.family == "basis":
        return 0.0
    if spec.family == "snk":
        return sre2_closed("snk", spec.n, k=spec.k, theta=spec.theta)
    if spec.family == "haar":
        return sre2(build_state(spec))
    return sre2_closed(spec.family, spec.n, theta=spec.theta, thetas=spec.thetas)


def phased_w_bounds(n: int) -> tuple[float, float]:
    """M2 window of the phased W family, attained at equal phases and at sum e^{4i theta_j} = 0."""
    lower = np.log2(n**3 / (7 * n - 6))
    upper = np.log2(n**3 / (6 * (n - 1))) if n > 1 else 0.0
    return float(lower), float(upper)


# -------------------------
# Norm collections and averages
# -------------------------
def char_norms(rho: DenseState | np.ndarray, o: np.ndarray) -> CharNorms:
    rho_m = as_matrix(rho)
    o_m = as_matrix(o)
    pair = cross_chars(rho_m, o_m)
    xi_o = char_vector(o_m)
    xi_rho = char_vector(rho_m).values.copy()
    xi_rho[0] = 0.0
    return CharNorms(
        cross_norm2=pair.cross_norm2(),
        overlap=pair.overlap(),
        o_norm4=xi_o.norm4(),
        o_top_d=top_d_sum(xi_o),
        o_norm2=float(np.real(np.trace(o_m @ o_m))),
        rho_traceless_inf2=float(np.max(xi_rho**2)),
        rho_sre2=sre2(rho_m),
        purity=purity(rho_m),
    )


def char_average_predictions(d: int, purity_value: float, norm_o2: float) -> dict[str, float]:
    """Averages over rho' = U rho U^dagger with U Haar random."""
    if not 1.0 / d - 1e-12 <= purity_value <= 1.0 + 1e-12:
        raise InvalidParameter(f"purity {purity_value} outside [1/d, 1]")
    return {
        "expectation_sq": (d * purity_value - 1) / (d * (d * d - 1)) * norm_o2,
        "cross_norm2": (d * d * purity_value - d) / (d * d - 1) * norm_o2,
        "overlap": (d * purity_value - 1) / (d * d - 1) * norm_o2,
    }
