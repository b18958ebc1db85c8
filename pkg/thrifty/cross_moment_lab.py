# thrifty/cross_moment_lab.py
"""
The fourth cross moment operator Omega and the commutant of the fourth
Clifford tensor power, built explicitly at small n.

Conventions
-----------
* A stochastic Lagrangian subspace T of Z_2^8 is stored as its 16 elements
  (x, y), each half a 4-bit integer; copy 1 is the most significant bit.
* r(T) = sum_{(x,y) in T} |x><y| on (C^2)^{x4}, R(T) = r(T)^{xn} re-ordered so
  that the row index is copy-major: (i_1, i_2, i_3, i_4) with i_c an n-qubit index.
* Omega pairs copies (1, 2) and (3, 4); contractions use (O x rho)^{x2} = O, rho, O, rho.
"""
from __future__ import annotations

import logging
import struct
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import sparse
from scipy.sparse import linalg as splinalg

from thrifty import config
from thrifty.errors import DimensionMismatch, InvalidParameter, check_cutoff, require
from thrifty.pauli_clifford import clifford_to_circuit, dense_unitary, enumerate_clifford
from thrifty.schemas import EnsembleSpec
from thrifty.states_charfuncs import as_matrix, cross_chars, haar_unitary, qubits_for_dim
from thrifty.variance_analytics import GAMMA, NU, alpha_beta

logger = logging.getLogger(__name__)

ALL_ONES = 0b1111
PARTITIONS = ("4", "31", "22", "211", "1111")


# -------------------------
# Permutations of four copies
# -------------------------
Perm = tuple[int, int, int, int]
IDENTITY: Perm = (0, 1, 2, 3)


def perm_from_cycles(text: str) -> Perm:
    """'(123)(4)' style cycle notation, 1-based; 'e' or '' is the identity."""
    image = list(IDENTITY)
    text = text.strip()
    if text in ("", "e", "(e)"):
        return IDENTITY
    for chunk in text.replace(")", " ").replace("(", " ").split():
        digits = [int(ch) - 1 for ch in chunk]
        if any(not 0 <= v < 4 for v in digits):
            raise InvalidParameter(f"bad cycle {chunk!r} in {text!r}")
        for a, b in zip(digits, digits[1:] + digits[:1]):
            image[a] = b
    if sorted(image) != [0, 1, 2, 3]:
        raise InvalidParameter(f"{text!r} is not a permutation")
    return tuple(image)  # type: ignore[return-value]


def cycle_count(p: Perm, letters: int = 4) -> int:
    seen = set()
    count = 0
    for start in range(letters):
        if start in seen:
            continue
        count += 1
        i = start
        while i not in seen:
            seen.add(i)
            i = p[i]
    return count


def cycle_label(p: Perm) -> str:
    seen: set[int] = set()
    parts = []
    for start in range(4):
        if start in seen or p[start] == start:
            seen.add(start)
            continue
        cycle, i = [], start
        while i not in seen:
            seen.add(i)
            cycle.append(str(i + 1))
            i = p[i]
        parts.append("(" + "".join(cycle) + ")")
    return "".join(parts) or "e"


def compose(a: Perm, b: Perm) -> Perm:
    """a after b."""
    return tuple(a[b[i]] for i in range(4))  # type: ignore[return-value]


def permute_bits(p: Perm, x: int) -> int:
    out = 0
    for i in range(4):
        if (x >> (3 - i)) & 1:
            out |= 1 << (3 - p[i])
    return out


def _cycle_type(p: Perm) -> tuple[int, ...]:
    seen: set[int] = set()
    lengths = []
    for start in range(4):
        if start in seen:
            continue
        length, i = 0, start
        while i not in seen:
            seen.add(i)
            i = p[i]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


# S4 character table, columns keyed by cycle type
CHARACTERS: dict[str, dict[tuple[int, ...], int]] = {
    "4": {(1, 1, 1, 1): 1, (2, 1, 1): 1, (2, 2): 1, (3, 1): 1, (4,): 1},
    "31": {(1, 1, 1, 1): 3, (2, 1, 1): 1, (2, 2): -1, (3, 1): 0, (4,): -1},
    "22": {(1, 1, 1, 1): 2, (2, 1, 1): 0, (2, 2): 2, (3, 1): -1, (4,): 0},
    "211": {(1, 1, 1, 1): 3, (2, 1, 1): -1, (2, 2): -1, (3, 1): 0, (4,): 1},
    "1111": {(1, 1, 1, 1): 1, (2, 1, 1): -1, (2, 2): 1, (3, 1): 1, (4,): -1},
}

G_LABELS = ("e", "(12)", "(34)", "(12)(34)")


def character(partition: str, p: Perm) -> int:
    return CHARACTERS[partition][_cycle_type(p)]


# -------------------------
# Stochastic Lagrangian subspaces
# -------------------------
class StochasticLagrangian(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    kind: Literal["permutation", "coset"]
    sigma: tuple[int, int, int, int]
    elements: frozenset[tuple[int, int]]

    @property
    def basis(self) -> list[tuple[int, int]]:
        """Four generators, as (x, y) pairs."""
        basis: list[int] = []
        for x, y in sorted(self.elements):
            v = (x << 4) | y
            for b in basis:
                v = min(v, v ^ b)
            if v:
                basis.append(v)
        return [(v >> 4, v & ALL_ONES) for v in basis]

    def dimension(self) -> int:
        return len(self.basis)

    def contains_all_ones(self) -> bool:
        return (ALL_ONES, ALL_ONES) in self.elements

    def weights_match(self) -> bool:
        return all(bin(x).count("1") % 4 == bin(y).count("1") % 4 for x, y in self.elements)

    def is_valid(self) -> bool:
        closed = all((a ^ c, b ^ e) in self.elements for a, b in self.elements for c, e in self.elements)
        return closed and self.dimension() == 4 and self.contains_all_ones() and self.weights_match()

    def diagonal_dim(self) -> int:
        """dim(T cap diagonal); tr r(T) = 2^{diagonal_dim}."""
        return (sum(1 for x, y in self.elements if x == y)).bit_length() - 1

    def intersection_dim(self, other: "StochasticLagrangian") -> int:
        return len(self.elements & other.elements).bit_length() - 1

    def left(self, p: Perm) -> frozenset[tuple[int, int]]:
        """Elements of R(p) R(T)."""
        return frozenset((permute_bits(p, x), y) for x, y in self.elements)

    def right(self, p: Perm) -> frozenset[tuple[int, int]]:
        """Elements of R(T) R(p)."""
        inv = tuple(p.index(i) for i in range(4))
        return frozenset((x, permute_bits(inv, y)) for x, y in self.elements)


def _span(generators: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    elements = {(0, 0)}
    for gx, gy in generators:
        elements |= {(x ^ gx, y ^ gy) for x, y in elements}
    return frozenset(elements)


# generating matrix of T4: rows (x | y)
T4_GENERATORS = ((0b1001, 0b1001), (0b0101, 0b0101), (0b0000, 0b1111), (0b1111, 0b0000))
T4_ELEMENTS = _span(T4_GENERATORS)
S3_TILDE = ("e", "(12)", "(13)", "(23)", "(123)", "(132)")


def permutation_subspace(p: Perm) -> StochasticLagrangian:
    return StochasticLagrangian(
        label=cycle_label(p),
        kind="permutation",
        sigma=p,
        elements=frozenset((permute_bits(p, x), x) for x in range(16)),
    )


def coset_subspace(p: Perm) -> StochasticLagrangian:
    label = "T4" if p == IDENTITY else f"{cycle_label(p)}T4"
    elements = frozenset((permute_bits(p, x), y) for x, y in T4_ELEMENTS)
    return StochasticLagrangian(label=label, kind="coset", sigma=p, elements=elements)


def parse_subspace(text: str) -> StochasticLagrangian:
    text = text.strip()
    if text.endswith("T4"):
        return coset_subspace(perm_from_cycles(text[:-2]))
    return permutation_subspace(perm_from_cycles(text))


@lru_cache(maxsize=None)
def sigma44_enumerate() -> tuple[StochasticLagrangian, ...]:
    """The 24 permutation subspaces followed by the 6 cosets of T4."""
    perms = [permutation_subspace(p) for p in permutations(range(4))]
    cosets = [coset_subspace(perm_from_cycles(label)) for label in S3_TILDE]
    return tuple(perms + cosets)


ORBIT_LABELS: tuple[tuple[str, ...], ...] = (
    ("e", "(12)", "(34)", "(12)(34)"),
    (
        "(13)", "(23)", "(14)", "(24)", "(123)", "(132)", "(124)", "(142)",
        "(134)", "(143)", "(234)", "(243)", "(1234)", "(1243)", "(1342)", "(1432)",
    ),
    ("(13)(24)", "(14)(23)", "(1324)", "(1423)"),
    ("T4", "(12)T4"),
    ("(13)T4", "(23)T4", "(123)T4", "(132)T4"),
)


@lru_cache(maxsize=None)
def orbit_members(i: int) -> tuple[StochasticLagrangian, ...]:
    require(1 <= i <= 5, f"orbit index must be in 1..5 (got {i})")
    return tuple(parse_subspace(label) for label in ORBIT_LABELS[i - 1])


def g_double_cosets() -> list[frozenset[frozenset[tuple[int, int]]]]:
    """Orbits of Sigma_{4,4} under left and right multiplication by G, computed from scratch."""
    group = [perm_from_cycles(label) for label in G_LABELS]
    remaining = {t.elements for t in sigma44_enumerate()}
    by_elements = {t.elements: t for t in sigma44_enumerate()}
    orbits = []
    while remaining:
        seed = by_elements[next(iter(remaining))]
        orbit = set()
        for g in group:
            left = StochasticLagrangian(label="", kind=seed.kind, sigma=seed.sigma, elements=seed.left(g))
            for h in group:
                orbit.add(left.right(h))
        orbits.append(frozenset(orbit))
        remaining -= orbit
    return orbits


# -------------------------
# Operators
# -------------------------
class SmallOperator(BaseModel):
    """Operator on H^{x4}; the matrix is dense or scipy.sparse."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int
    matrix: Any
    label: str = ""
    samples: int | None = None
    exact: bool = True

    @property
    def dim(self) -> int:
        return 16**self.n

    def dense(self) -> np.ndarray:
        check_cutoff(self.n, config.OMEGA_MAX_QUBITS, "dense H^{x4} operator")
        if sparse.issparse(self.matrix):
            return self.matrix.toarray()
        return np.asarray(self.matrix)


def r_small(t: StochasticLagrangian) -> np.ndarray:
    r = np.zeros((16, 16))
    for x, y in t.elements:
        r[x, y] = 1.0
    return r


def _copy_major(xq: np.ndarray, n: int) -> np.ndarray:
    """Map per-qubit 4-bit values (N, n) to copy-major indices on H^{x4}."""
    d = 2**n
    weights = 2 ** (n - 1 - np.arange(n))
    index = np.zeros(xq.shape[0], dtype=np.int64)
    for c in range(4):
        bits = (xq >> (3 - c)) & 1
        index += (bits @ weights) * d ** (3 - c)
    return index


@lru_cache(maxsize=None)
def big_r(t: StochasticLagrangian, n: int) -> sparse.csr_matrix:
    """R(T) = r(T)^{xn} as a sparse matrix with 16^n nonzeros."""
    check_cutoff(n, config.COMMUTANT_MAX_QUBITS, "R(T) construction")
    pairs = sorted(t.elements)
    xs = np.array([p[0] for p in pairs], dtype=np.int64)
    ys = np.array([p[1] for p in pairs], dtype=np.int64)
    tuples = np.arange(16**n)
    digits = (tuples[:, None] // 16 ** (n - 1 - np.arange(n))[None, :]) % 16
    rows = _copy_major(xs[digits], n)
    cols = _copy_major(ys[digits], n)
    size = 16**n
    mat = sparse.csr_matrix((np.ones(size), (rows, cols)), shape=(size, size))
    return mat


def perm_operator(p: Perm, n: int) -> sparse.csr_matrix:
    return big_r(permutation_subspace(p), n)


@lru_cache(maxsize=None)
def orbit_operators(n: int) -> tuple[sparse.csr_matrix, ...]:
    """(R_1, ..., R_5): sums of R(T) over the five G-orbits of Sigma_{4,4}."""
    check_cutoff(n, config.COMMUTANT_MAX_QUBITS, "orbit operators")
    ops = []
    for i in range(1, 6):
        total = sparse.csr_matrix((16**n, 16**n))
        for t in orbit_members(i):
            total = total + big_r(t, n)
        ops.append(total)
    logger.debug("built orbit operators for n=%d", n)
    return tuple(ops)


@lru_cache(maxsize=None)
def projectors(n: int) -> dict[str, sparse.csr_matrix]:
    """
    Keys: P4 .. P1111 (Schur-Weyl), Pn (stabilizer code), PG, and
    P4G, P31G, P22G with their '+' / '-' splits.
    """
    check_cutoff(n, config.COMMUTANT_MAX_QUBITS, "projectors")
    d = 2**n
    perms = list(permutations(range(4)))
    perm_ops = {p: perm_operator(p, n) for p in perms}
    out: dict[str, sparse.csr_matrix] = {}
    for lam in PARTITIONS:
        dim_lam = CHARACTERS[lam][(1, 1, 1, 1)]
        total = sparse.csr_matrix((16**n, 16**n))
        for p in perms:
            chi = character(lam, p)
            if chi:
                total = total + chi * perm_ops[p]
        out[f"P{lam}"] = (dim_lam / 24) * total
    out["Pn"] = big_r(coset_subspace(IDENTITY), n) / d
    out["PG"] = sum((perm_ops[perm_from_cycles(g)] for g in G_LABELS[1:]), perm_ops[IDENTITY]) / 4
    for lam in ("4", "31", "22"):
        p_lam_g = (out[f"P{lam}"] @ out["PG"]).tocsr()
        plus = (p_lam_g @ out["Pn"]).tocsr()
        out[f"P{lam}G"] = p_lam_g
        out[f"P{lam}G+"] = plus
        out[f"P{lam}G-"] = (p_lam_g - plus).tocsr()
    for mat in out.values():
        mat.eliminate_zeros()
    return out


def _sparse_trace(a: sparse.spmatrix) -> float:
    return float(np.real(a.diagonal().sum()))


def dimension_table(d: int) -> dict[str, dict[str, Fraction]]:
    """
    D_{lam,G}, D^+_{lam,G}, D^-_{lam,G} from tr R(T) = d^{dim(T cap diagonal)}.
    Exact for any d = 2^n; nothing of size d is materialised.
    """
    qubits_for_dim(d)
    group = [perm_from_cycles(g) for g in G_LABELS]
    t4 = coset_subspace(IDENTITY)
    table: dict[str, dict[str, Fraction]] = {}
    for lam in PARTITIONS:
        dim_lam = CHARACTERS[lam][(1, 1, 1, 1)]
        total = Fraction(0)
        plus = Fraction(0)
        for p in permutations(range(4)):
            chi = character(lam, p)
            if not chi:
                continue
            for g in group:
                sg = compose(p, g)
                total += chi * Fraction(d) ** cycle_count(sg)
                coset = StochasticLagrangian(label="", kind="coset", sigma=sg, elements=t4.left(sg))
                plus += chi * Fraction(d) ** coset.diagonal_dim()
        scale = Fraction(dim_lam, 24 * 4)
        total *= scale
        plus *= scale / d
        table[lam] = {"D": total, "D+": plus, "D-": total - plus}
    return table


def dimension_formulas(d: int) -> dict[str, dict[str, Fraction]]:
    """Closed-form dimension table, for comparison with dimension_table."""
    f = Fraction(d)
    zero = Fraction(0)
    return {
        "4": {
            "D": f * (f + 1) * (f + 2) * (f + 3) / 24,
            "D+": (f + 1) * (f + 2) / 6,
            "D-": (f * f - 1) * (f + 2) * (f + 4) / 24,
        },
        "31": {"D": f * (f + 2) * (f * f - 1) / 8, "D+": zero, "D-": f * (f + 2) * (f * f - 1) / 8},
        "22": {"D": f * f * (f * f - 1) / 12, "D+": (f * f - 1) / 3, "D-": (f * f - 4) * (f * f - 1) / 12},
        "211": {"D": zero, "D+": zero, "D-": zero},
        "1111": {"D": zero, "D+": zero, "D-": zero},
    }


# -------------------------
# Contractions
# -------------------------
def contract(op: Any, factors: Sequence[np.ndarray]) -> complex:
    """tr[op (A_1 x A_2 x A_3 x A_4)] using only the nonzeros of op."""
    if len(factors) != 4:
        raise InvalidParameter("need exactly four factors")
    mats = [as_matrix(a) for a in factors]
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise DimensionMismatch("factors must share one square shape")
    coo = sparse.coo_matrix(op)
    if coo.shape != (d**4, d**4):
        raise DimensionMismatch(f"operator shape {coo.shape} does not match d={d}")
    product = coo.data.astype(complex)
    for c in range(4):
        r_c = (coo.row // d ** (3 - c)) % d
        c_c = (coo.col // d ** (3 - c)) % d
        product = product * mats[c][c_c, r_c]
    return complex(product.sum())


def orbit_trace(i: int, factors: Sequence[np.ndarray]) -> complex:
    d = as_matrix(factors[0]).shape[0]
    n = qubits_for_dim(d)
    return contract(orbit_operators(n)[i - 1], factors)


def xi_traces_dense(o, rho) -> np.ndarray:
    """tr[R_i (O x rho)^{x2}], i = 1..5, by direct contraction."""
    o_m, rho_m = as_matrix(o), as_matrix(rho)
    factors = (o_m, rho_m, o_m, rho_m)
    return np.array([orbit_trace(i, factors).real for i in range(1, 6)])


def vstar_via_omega(omega: SmallOperator | np.ndarray, o, rho) -> float:
    """(d+1)^2 tr[Omega (O x rho)^{x2}] - tr(O rho)^2."""
    mat = omega.matrix if isinstance(omega, SmallOperator) else omega
    o_m, rho_m = as_matrix(o), as_matrix(rho)
    d = o_m.shape[0]
    value = contract(mat, (o_m, rho_m, o_m, rho_m)).real
    return float((d + 1) ** 2 * value - np.real(np.trace(o_m @ rho_m)) ** 2)


# -------------------------
# Omega: empirical
# -------------------------
def _check_basis(basis: np.ndarray | None, d: int) -> np.ndarray:
    if basis is None:
        return np.eye(d, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    if basis.shape != (d, d):
        raise DimensionMismatch(f"basis must be {d}x{d} (got {basis.shape})")
    if not np.allclose(basis.conj().T @ basis, np.eye(d), atol=1e-10):
        raise InvalidParameter("basis columns are not orthonormal")
    return basis


def _moment_vectors(unitaries: Iterable[np.ndarray], basis: np.ndarray) -> np.ndarray:
    """Rows vec(M_U), M_U = sum_b (u_b x u_b)(u_b x u_b)^dagger, u_b = U^dagger |psi_b>."""
    d = basis.shape[0]
    rows = []
    for u in unitaries:
        ub = u.conj().T @ basis
        a = (ub[:, None, :] * ub[None, :, :]).reshape(d * d, d)
        rows.append((a @ a.conj().T).reshape(-1))
    return np.array(rows)


def _omega_from_moments(s: np.ndarray, d: int) -> np.ndarray:
    # s[(i,k),(j,l)] = sum_U M[i,k] M[j,l]  ->  Omega[(i,j),(k,l)]
    d2 = d * d
    return s.reshape(d2, d2, d2, d2).transpose(0, 2, 1, 3).reshape(d2 * d2, d2 * d2)


def _accumulate(batches: list[list[np.ndarray]], basis: np.ndarray, workers: int) -> tuple[np.ndarray, int]:
    def work(batch: list[np.ndarray]) -> np.ndarray:
        v = _moment_vectors(batch, basis)
        return v.T @ v

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(work, batches))
    else:
        partials = [work(batch) for batch in batches]
    # merged in batch order so the sum does not depend on the worker count
    total = np.zeros_like(partials[0])
    for part in partials:
        total += part
    return total, sum(len(b) for b in batches)


def _chunks(items: Iterable[np.ndarray], size: int) -> list[list[np.ndarray]]:
    batches: list[list[np.ndarray]] = [[]]
    for item in items:
        if len(batches[-1]) == size:
            batches.append([])
        batches[-1].append(item)
    return [b for b in batches if b]


def omega_empirical(
    ensemble: EnsembleSpec | None = None,
    n: int | None = None,
    basis: np.ndarray | None = None,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
    unitaries: Sequence[np.ndarray] | None = None,
    workers: int = 1,
    batch_size: int = 512,
) -> SmallOperator:
    """
    Ensemble average of U^dagger{x4}[psi^{x2} x phi^{x2}]U^{x4} summed over basis pairs.

    Exact for an explicit unitary list or for the Clifford group (full
    enumeration, n <= 2); Monte Carlo with `samples` draws otherwise.
    """
    if unitaries is not None:
        d = np.asarray(unitaries[0]).shape[0]
        n = qubits_for_dim(d)
        label, exact = "explicit", True
        source: Iterable[np.ndarray] = unitaries
    else:
        require(ensemble is not None, "give an ensemble or an explicit unitary list")
        spec = ensemble.normalized()
        n = spec.n if n is None else n
        if n != spec.n:
            raise DimensionMismatch(f"ensemble is on n={spec.n}, asked for n={n}")
        d = 2**n
        label = spec.label()
        if spec.kind == "clifford" and samples is None:
            check_cutoff(n, config.ENUMERATION_MAX_QUBITS, "exact Clifford average")
            exact = True
            source = (dense_unitary(clifford_to_circuit(c)) for c in enumerate_clifford(n))
        else:
            require(samples is not None and samples >= 1, f"{label} needs a sample count")
            require(rng is not None, "sampled averages need an explicit rng")
            exact = False
            source = _sampled_unitaries(spec, samples, rng)
    check_cutoff(n, config.OMEGA_MAX_QUBITS, "dense Omega")
    basis = _check_basis(basis, d)

    total, count = _accumulate(_chunks(source, batch_size), basis, workers)
    omega = _omega_from_moments(total / count, d)
    logger.info("Omega(%s) on n=%d from %d unitaries (exact=%s)", label, n, count, exact)
    return SmallOperator(n=n, matrix=omega, label=label, samples=count, exact=exact)


def _sampled_unitaries(spec: EnsembleSpec, samples: int, rng: np.random.Generator) -> Iterable[np.ndarray]:
    from thrifty.shadow_sim import sample_unitary

    for _ in range(samples):
        if spec.kind == "fourdesign":
            yield haar_unitary(spec.n, rng)
        else:
            yield dense_unitary(sample_unitary(spec, rng))


# -------------------------
# Omega: closed forms
# -------------------------
class KappaSet(BaseModel):
    k4_plus: float
    k4_minus: float
    k22_plus: float
    k22_minus: float
    k31: float

    def as_dict(self) -> dict[str, float]:
        return self.model_dump()


class GiSet(BaseModel):
    g: tuple[float, float, float, float, float]
    residual: float
    unique: bool


def lambda12(basis: np.ndarray) -> tuple[float, float]:
    """Lambda_1, Lambda_2 of an orthonormal basis (columns)."""
    basis = np.asarray(basis, dtype=complex)
    d = basis.shape[0]
    basis = _check_basis(basis, d)
    lam1 = lam2 = 0.0
    for a in range(d):
        for b in range(d):
            pair = cross_chars(basis[:, a], basis[:, b])
            norm2, overlap = pair.cross_norm2(), pair.overlap()
            lam1 += norm2 + 2 * overlap
            lam2 += norm2 - overlap
    return lam1, lam2


def lambda12_computational(d: int) -> tuple[float, float]:
    return float(d**3 + 2 * d * d), float(d**3 - d * d)


def lambda12_t_basis(d: int, k: int) -> tuple[float, float]:
    return d**3 * GAMMA**k + 2 * d * d * NU**k, d**3 * GAMMA**k - d * d * NU**k


def t_basis(n: int, k: int) -> np.ndarray:
    """Columns (I^{n-k} x (HT)^{dagger x k}) |b>."""
    require(0 <= k <= n, f"need 0 <= k <= n (got k={k}, n={n})")
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    t = np.diag([1, np.exp(1j * np.pi / 4)])
    single = (h @ t).conj().T
    out = np.eye(1, dtype=complex)
    for q in range(n):
        out = np.kron(out, single if q >= n - k else np.eye(2))
    return out


def _kappa_haar(d: int) -> KappaSet:
    k4 = 4 * (d + 5) / ((d + 1) * (d + 2) * (d + 3))
    k22 = 4 / (d * (d + 1))
    k22_minus = 0.0 if d == 2 else k22
    return KappaSet(k4_plus=k4, k4_minus=k4, k22_plus=k22, k22_minus=k22_minus, k31=4 / ((d + 1) * (d + 2)))


def _kappa_clifford(d: int, lam1: float, lam2: float) -> KappaSet:
    if d == 2:
        return KappaSet(k4_plus=lam1 / 24, k4_minus=(28 - lam1) / 36, k22_plus=2 / 3, k22_minus=0.0, k31=1 / 3)
    return KappaSet(
        k4_plus=2 * lam1 / (d * d * (d + 1) * (d + 2)),
        k4_minus=(4 * d**3 * (d + 5) - 8 * lam1) / (d * d * (d * d - 1) * (d + 2) * (d + 4)),
        k22_plus=2 * lam2 / (d * d * (d * d - 1)),
        k22_minus=(4 * d**3 * (d - 1) - 8 * lam2) / (d * d * (d * d - 1) * (d * d - 4)),
        k31=4 / ((d + 1) * (d + 2)),
    )


def kappa_closed(
    ensemble: EnsembleSpec, lam1: float | None = None, lam2: float | None = None
) -> KappaSet:
    """
    kappa's of Omega(ensemble, B). Lambda_1/2 describe the measurement basis
    (defaults: computational basis, or the T basis for the simplet ensemble).
    """
    spec = ensemble.normalized()
    d = spec.d
    if spec.kind == "fourdesign":
        return _kappa_haar(d)
    if spec.kind == "simplet" and lam1 is None:
        lam1, lam2 = lambda12_t_basis(d, spec.k)
    if lam1 is None or lam2 is None:
        lam1, lam2 = lambda12_computational(d)
    clifford = _kappa_clifford(d, lam1, lam2)
    if spec.kind in ("clifford", "simplet"):
        return clifford
    haar = _kappa_haar(d)
    ab = alpha_beta(d, spec.k)
    a, b = ab.alpha**spec.l, ab.beta**spec.l
    if d == 2:
        sixth = (1 / 6) ** spec.l
        return KappaSet(
            k4_plus=7 / 15 + sixth * (lam1 / 24 - 7 / 15),
            k4_minus=7 / 15 - sixth * (lam1 / 36 - 14 / 45),
            k22_plus=2 / 3,
            k22_minus=0.0,
            k31=1 / 3,
        )
    return KappaSet(
        k4_plus=haar.k4_plus + a * (clifford.k4_plus - haar.k4_plus),
        k4_minus=haar.k4_minus - a * (haar.k4_minus - clifford.k4_minus),
        k22_plus=haar.k22_plus + b * (clifford.k22_plus - haar.k22_plus),
        k22_minus=haar.k22_minus - b * (haar.k22_minus - clifford.k22_minus),
        k31=haar.k31,
    )


def omega_from_kappa(kappa: KappaSet, n: int) -> sparse.csr_matrix:
    p = projectors(n)
    return (
        kappa.k4_plus * p["P4G+"]
        + kappa.k4_minus * p["P4G-"]
        + kappa.k22_plus * p["P22G+"]
        + kappa.k22_minus * p["P22G-"]
        + kappa.k31 * p["P31G"]
    ).tocsr()


def omega_closed(ensemble: EnsembleSpec, basis: np.ndarray | None = None) -> SmallOperator:
    spec = ensemble.normalized()
    check_cutoff(spec.n, config.COMMUTANT_MAX_QUBITS, "closed-form Omega")
    lam1 = lam2 = None
    if basis is not None:
        lam1, lam2 = lambda12(_check_basis(basis, spec.d))
    kappa = kappa_closed(spec, lam1, lam2)
    return SmallOperator(n=spec.n, matrix=omega_from_kappa(kappa, spec.n), label=spec.label())


def omega_from_g(g: Sequence[float], n: int) -> sparse.csr_matrix:
    ops = orbit_operators(n)
    return sum((gi * op for gi, op in zip(g, ops)), sparse.csr_matrix(ops[0].shape)).tocsr()


def _trace_product(a: Any, b: Any) -> float:
    """tr(a b) for sparse/dense operands."""
    if sparse.issparse(a):
        a = a.tocsr()
        if sparse.issparse(b):
            return float(np.real(a.multiply(b.T).sum()))
        return float(np.real(a.multiply(np.asarray(b).T).sum()))
    if sparse.issparse(b):
        return _trace_product(b, a)
    return float(np.real(np.sum(np.asarray(a) * np.asarray(b).T)))


def kappa_extract(omega: SmallOperator) -> KappaSet:
    """kappa = tr(Omega P) / tr(P) on every nonzero subspace."""
    p = projectors(omega.n)

    def ratio(key: str) -> float:
        dim = _sparse_trace(p[key])
        if dim < 0.5:
            return 0.0
        return _trace_product(omega.matrix, p[key]) / dim

    return KappaSet(
        k4_plus=ratio("P4G+"),
        k4_minus=ratio("P4G-"),
        k22_plus=ratio("P22G+"),
        k22_minus=ratio("P22G-"),
        k31=ratio("P31G"),
    )


def gi_fit(omega: SmallOperator) -> GiSet:
    """
    Least-squares g with Omega = sum g_i R_i. At n = 1 the R_i are dependent
    and the fit fixes g_5 = 0.
    """
    ops = orbit_operators(omega.n)
    gram = np.array([[_trace_product(a.T, b) for b in ops] for a in ops])
    rhs = np.array([_trace_product(a.T, omega.matrix) for a in ops])
    unique = omega.n >= 2
    size = 5 if unique else 4
    g = np.zeros(5)
    g[:size] = np.linalg.solve(gram[:size, :size], rhs[:size])
    fit = omega_from_g(g, omega.n)
    if sparse.issparse(omega.matrix):
        residual = float(splinalg.norm(fit - omega.matrix))
    else:
        residual = float(np.linalg.norm(fit.toarray() - np.asarray(omega.matrix)))
    if not unique:
        logger.debug("n=1: g coefficients are not unique, returning the g5 = 0 choice")
    return GiSet(g=tuple(float(v) for v in g), residual=residual, unique=unique)


# -------------------------
# Spectra, norms, identities
# -------------------------
class GramSpectrum(BaseModel):
    n: int
    eigenvalues: list[float]
    rank: int
    predicted: dict[str, tuple[float, int]]


def gram_matrix(n: int) -> np.ndarray:
    d = 2**n
    subspaces = sigma44_enumerate()
    return np.array([[float(d) ** a.intersection_dim(b) for b in subspaces] for a in subspaces])


def gram_spectrum(n: int) -> GramSpectrum:
    """Eigenvalues of tr(R(T_i)^dagger R(T_j)) = d^{dim(T_i cap T_j)}."""
    require(n >= 1, f"n must be >= 1 (got {n})")
    d = 2**n
    eig = np.sort(np.linalg.eigvalsh(gram_matrix(n)))
    scale = max(1.0, float(np.abs(eig).max()))
    rank = int(np.sum(np.abs(eig) > 1e-9 * scale))
    predicted = {
        "d(d-1)(d-2)(d-4)": (float(d * (d - 1) * (d - 2) * (d - 4)), 1),
        "d(d+1)(d+2)(d+4)": (float(d * (d + 1) * (d + 2) * (d + 4)), 1),
        "d(d^2-1)(d-2)": (float(d * (d * d - 1) * (d - 2)), 14),
        "d(d^2-1)(d+2)": (float(d * (d * d - 1) * (d + 2)), 14),
    }
    return GramSpectrum(n=n, eigenvalues=[float(v) for v in eig], rank=rank, predicted=predicted)


def omega_norms(omega: SmallOperator) -> dict[str, float]:
    eig = np.linalg.eigvalsh(omega.dense())
    return {"schatten1": float(np.abs(eig).sum()), "schatten_inf": float(np.abs(eig).max())}


def partial_trace_last(omega: SmallOperator) -> np.ndarray:
    d = 2**omega.n
    mat = omega.dense().reshape(d**3, d, d**3, d)
    return np.einsum("aibi->ab", mat)


def two_design_marginal(d: int) -> np.ndarray:
    """(1 + SWAP_12) x 1 / (d+1) on three copies."""
    eye = np.eye(d * d)
    swap = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            swap[i * d + j, j * d + i] = 1.0
    return np.kron((eye + swap) / (d + 1), np.eye(d))


def support_leak(omega: SmallOperator) -> float:
    """||(1 - P_G) Omega (1 - P_G)||_F."""
    pg = projectors(omega.n)["PG"].toarray()
    comp = np.eye(pg.shape[0]) - pg
    return float(np.linalg.norm(comp @ omega.dense() @ comp))


# -------------------------
# Export
# -------------------------
_MAGIC = b"THRO"
_HEADER = struct.Struct("<4sIIQQ")


def export_operator(op: SmallOperator, path: str | Path) -> Path:
    """
    Header: magic 'THRO', format version (uint32), n (uint32), rows, cols (uint64),
    little-endian; then the matrix as row-major complex128.
    """
    mat = op.dense().astype("<c16")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, 1, op.n, mat.shape[0], mat.shape[1]))
        fh.write(np.ascontiguousarray(mat).tobytes())
    logger.info("wrote %s (%dx%d)", path, *mat.shape)
    return path


def load_operator(path: str | Path) -> SmallOperator:
    raw = Path(path).read_bytes()
    magic, version, n, rows, cols = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != 1:
        raise InvalidParameter(f"{path} is not an exported operator")
    data = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if data.size != rows * cols:
        raise InvalidParameter(f"{path} is truncated")
    return SmallOperator(n=n, matrix=data.reshape(rows, cols).copy(), label=Path(path).stem)
