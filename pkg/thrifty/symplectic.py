# thrifty/symplectic.py
"""
Symplectic group Sp(2n, F2): index <-> matrix bijection via transvections.

Internally the canonical-form recursion works in the "directsum" layout
(x0, z0, x1, z1, ...); public helpers return matrices in the standard
(x | z) layout used by CliffordElement.
"""
from __future__ import annotations

from collections.abc import Iterator

import numpy as np

from thrifty.errors import InvalidParameter, require


def symplectic_form(n: int) -> np.ndarray:
    """Standard form [[0, I], [I, 0]] over F2."""
    omega = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    omega[:n, n:] = np.eye(n, dtype=np.uint8)
    omega[n:, :n] = np.eye(n, dtype=np.uint8)
    return omega


def check_symplectic(m: np.ndarray) -> bool:
    m = np.asarray(m, dtype=np.int64) % 2
    rows, cols = m.shape
    if rows != cols or rows % 2:
        return False
    omega = symplectic_form(rows // 2).astype(np.int64)
    return bool(np.array_equal((m.T @ omega @ m) % 2, omega))


def count_cosets(m: int) -> int:
    return 2 ** (2 * m - 1) * (4**m - 1)


def count_symplectic(n: int) -> int:
    total = 1
    for j in range(1, n + 1):
        total *= count_cosets(j)
    return total


# -------------------------
# Transvections (directsum layout)
# -------------------------
def _inner(v: np.ndarray, w: np.ndarray) -> int:
    return int(np.sum(v[0::2] * w[1::2] + v[1::2] * w[0::2]) % 2)


def _transvection(k: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (v + _inner(k, v) * k) % 2


def _find_transvection(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """h1, h2 with y = Z_h1 Z_h2 x; h2 may be zero (no-op)."""
    size = x.size
    h1 = np.zeros(size, dtype=np.int64)
    h2 = np.zeros(size, dtype=np.int64)
    if np.array_equal(x, y):
        return h1, h2
    if _inner(x, y) == 1:
        return (x + y) % 2, h2

    z = np.zeros(size, dtype=np.int64)
    for ii in range(0, size, 2):
        if (x[ii] + x[ii + 1]) and (y[ii] + y[ii + 1]):
            z[ii] = (x[ii] + y[ii]) % 2
            z[ii + 1] = (x[ii + 1] + y[ii + 1]) % 2
            if z[ii] + z[ii + 1] == 0:
                z[ii + 1] = 1
                if x[ii] != x[ii + 1]:
                    z[ii] = 1
            return (x + z) % 2, (y + z) % 2

    for ii in range(0, size, 2):
        if (x[ii] + x[ii + 1]) and not (y[ii] + y[ii + 1]):
            if x[ii] == x[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = x[ii]
                z[ii] = x[ii + 1]
            break
    for ii in range(0, size, 2):
        if not (x[ii] + x[ii + 1]) and (y[ii] + y[ii + 1]):
            if y[ii] == y[ii + 1]:
                z[ii + 1] = 1
            else:
                z[ii + 1] = y[ii]
                z[ii] = y[ii + 1]
            break
    return (x + z) % 2, (y + z) % 2


def _bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> j) & 1 for j in range(width)], dtype=np.int64)


# -------------------------
# Canonical form
# -------------------------
def index_digits(index: int, n: int) -> list[tuple[int, int]]:
    """Split a group index into per-level (k, bits) digits, outermost level first."""
    digits = []
    for m in range(n, 0, -1):
        nn = 2 * m
        s = 4**m - 1
        k = index % s + 1
        index //= s
        digits.append((k, index % (1 << (nn - 1))))
        index >>= nn - 1
    return digits


def _matrix_from_digits(digits: list[tuple[int, int]], n: int) -> np.ndarray:
    nn = 2 * n
    k, bits_value = digits[0]

    f1 = _bits(k, nn)
    e1 = np.zeros(nn, dtype=np.int64)
    e1[0] = 1
    t1, t2 = _find_transvection(e1, f1)

    bits = _bits(bits_value, nn - 1)
    eprime = e1.copy()
    eprime[2:] = bits[1:]
    h0 = _transvection(t2, _transvection(t1, eprime))
    if bits[0] == 1:
        f1 = np.zeros(nn, dtype=np.int64)

    g = np.eye(nn, dtype=np.int64)
    if n > 1:
        g[2:, 2:] = _matrix_from_digits(digits[1:], n - 1)

    for j in range(nn):
        row = _transvection(t1, g[j])
        row = _transvection(t2, row)
        row = _transvection(h0, row)
        g[j] = _transvection(f1, row)
    return g


def _to_standard(s: np.ndarray, n: int) -> np.ndarray:
    perm = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for i in range(n):
        perm[2 * i, i] = 1
        perm[2 * i + 1, n + i] = 1
    return ((perm.T @ s @ perm) % 2).astype(np.uint8)


def symplectic_from_index(index: int, n: int) -> np.ndarray:
    """Bijective map [0, |Sp(2n)|) -> Sp(2n, F2), standard layout."""
    require(n >= 1, f"n must be >= 1 (got {n})")
    total = count_symplectic(n)
    if not 0 <= index < total:
        raise InvalidParameter(f"symplectic index {index} outside [0, {total})")
    return _to_standard(_matrix_from_digits(index_digits(index, n), n), n)


def random_symplectic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform element of Sp(2n, F2); digits are drawn level by level so large n never overflows."""
    require(n >= 1, f"n must be >= 1 (got {n})")
    digits = []
    for m in range(n, 0, -1):
        k = int(rng.integers(1, 4**m))
        bits_value = int(rng.integers(0, 1 << (2 * m - 1)))
        digits.append((k, bits_value))
    return _to_standard(_matrix_from_digits(digits, n), n)


def iter_symplectic(n: int) -> Iterator[np.ndarray]:
    for index in range(count_symplectic(n)):
        yield symplectic_from_index(index, n)
