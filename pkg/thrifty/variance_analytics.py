# thrifty/variance_analytics.py
"""
Closed-form variances of (thrifty) shadow estimation.

V      : single-shot variance (any unitary 3-design).
V_*    : variance of the per-circuit conditional mean, the overhead of reusing a circuit.
V_R    : V/R + (R-1) V_*/R.

General (O, rho) values of V_* go through the expansion
V_* = (d+1)^2 sum_i g_i xi_i - tr(O rho)^2 with xi_i = tr[R_i (O x rho)^{x2}].
"""
from __future__ import annotations

import logging
from typing import Literal

import numpy as np
from pydantic import BaseModel

from thrifty import config
from thrifty.errors import DimensionMismatch, InvalidParameter, check_cutoff, require
from thrifty.schemas import EnsembleKind, EnsembleSpec
from thrifty.states_charfuncs import (
    as_matrix,
    char_norms,
    char_vector,
    check_state,
    check_traceless,
    cross_chars,
    qubits_for_dim,
    top_d_sum,
)

logger = logging.getLogger(__name__)

GAMMA = 0.75
NU = 0.5


# -------------------------
# Result types
# -------------------------
class VarianceBreakdown(BaseModel):
    V: float
    Vstar: float
    method: str

    def vr(self, R: int) -> float:
        return vr_combine(self.V, self.Vstar, R)


class XiTraces(BaseModel):
    xi1: float
    xi2: float
    xi3: float
    xi4: float
    xi5: float

    def as_array(self) -> np.ndarray:
        return np.array([self.xi1, self.xi2, self.xi3, self.xi4, self.xi5])


class AlphaBeta(BaseModel):
    alpha: float
    beta: float
    gamma: float = GAMMA
    nu: float = NU


# -------------------------
# Helpers
# -------------------------
def _pair(o, rho) -> tuple[np.ndarray, np.ndarray, int]:
    o_m = as_matrix(o)
    rho_m = as_matrix(rho)
    if o_m.shape != rho_m.shape:
        raise DimensionMismatch(f"observable {o_m.shape} and state {rho_m.shape} differ")
    check_traceless(o_m)
    return o_m, rho_m, o_m.shape[0]


def _real_trace(a: np.ndarray) -> float:
    return float(np.real(np.trace(a)))


def _hs_norm2(o: np.ndarray) -> float:
    return float(np.real(np.vdot(o, o)))


def _check_m2(m2: float) -> None:
    if m2 < 0:
        raise InvalidParameter(f"M2 must be >= 0 (got {m2})")


def _check_d(d: int) -> None:
    qubits_for_dim(d)


# -------------------------
# Single-shot variance
# -------------------------
def v_single(o, rho) -> float:
    """(d+1)/(d+2) [tr O^2 + 2 tr(rho O^2)] - tr(rho O)^2, valid for any 3-design."""
    o_m, rho_m, d = _pair(o, rho)
    o2 = o_m @ o_m
    return (d + 1) / (d + 2) * (_real_trace(o2) + 2 * _real_trace(rho_m @ o2)) - _real_trace(
        rho_m @ o_m
    ) ** 2


def v_fidelity(d: int, f: float) -> float:
    if not 0.0 <= f <= 1.0:
        raise InvalidParameter(f"fidelity must be in [0, 1] (got {f})")
    return -f * f + d * (2 * f + 1) / (d + 2)


def v_fidelity_max(d: int) -> tuple[float, float]:
    """Maximum of V over F and the maximising fidelity d/(d+2)."""
    return 2 * d * (d + 1) / (d + 2) ** 2, d / (d + 2)


def vr_combine(v: float, vstar: float, R: int) -> float:
    if R < 1:
        raise InvalidParameter(f"R must be >= 1 (got {R})")
    return v / R + (R - 1) * vstar / R


# -------------------------
# xi traces
# -------------------------
@np.errstate(all="ignore")
def _parity_table(d: int) -> np.ndarray:
    bits = np.arange(d)
    parity = np.zeros(d, dtype=np.int64)
    while bits.any():
        parity ^= bits & 1
        bits >>= 1
    return parity


def _xi5_pauli_sum(o: np.ndarray, rho: np.ndarray) -> float:
    """
    (1/d) sum_P [tr(POPO) tr(P rho)^2 + tr(rho POP) tr(PO) tr(P rho)
                 + 2 tr(P rho) tr(P rho P O P O)].
    """
    d = o.shape[0]
    n = qubits_for_dim(d)
    parity = _parity_table(d)
    rows = np.arange(d)
    total = 0.0
    for idx in range(4**n):
        xb = zb = ny = 0
        for q in range(n):
            digit = (idx >> (2 * q)) & 3
            xq, zq = digit & 1, digit >> 1
            xb |= xq << (n - 1 - q)
            zb |= zq << (n - 1 - q)
            ny += xq & zq
        src = rows ^ xb
        signs = (1j**ny) * (1 - 2 * parity[zb & src])
        p_o = signs[:, None] * o[src, :]
        p_rho = signs[:, None] * rho[src, :]
        t_rho = np.trace(p_rho)
        t_o = np.trace(p_o)
        popo = np.sum(p_o * p_o.T)
        rho_pop = np.sum(p_rho * p_o.T)
        chain = np.sum(p_rho * (p_o @ p_o).T)
        total += np.real(popo * t_rho**2 + rho_pop * t_o * t_rho + 2 * t_rho * chain)
    return float(total / d)


def xi_traces(o, rho, method: Literal["pauli", "dense"] = "pauli") -> XiTraces:
    """tr[R_i (O x rho)^{x2}] for the five orbit operators."""
    o_m, rho_m, d = _pair(o, rho)
    n = qubits_for_dim(d)
    if method == "dense":
        from thrifty.cross_moment_lab import xi_traces_dense

        values = xi_traces_dense(o_m, rho_m)
        return XiTraces(**{f"xi{i + 1}": float(v) for i, v in enumerate(values)})

    check_cutoff(n, config.XI_MAX_QUBITS, "xi traces")
    o2 = o_m @ o_m
    t_or = _real_trace(o_m @ rho_m)
    xi1 = t_or**2
    xi2 = (
        _real_trace(o2)
        + 4 * _real_trace(o2 @ rho_m)
        + 2 * _real_trace(o2 @ rho_m @ rho_m)
        + 2 * _real_trace(o_m @ rho_m @ o_m @ rho_m)
    )
    xi3 = _real_trace(o2) * _real_trace(rho_m @ rho_m) + t_or**2 + 2 * _real_trace(o2 @ rho_m @ rho_m)
    pair = cross_chars(rho_m, o_m)
    xi4 = (pair.cross_norm2() + pair.overlap()) / d
    xi5 = _xi5_pauli_sum(o_m, rho_m)
    return XiTraces(xi1=xi1, xi2=xi2, xi3=xi3, xi4=xi4, xi5=xi5)


def xi_fidelity(d: int, m2: float) -> XiTraces:
    """xi_i for rho = phi, O = phi - 1/d."""
    _check_m2(m2)
    u = 2.0**-m2
    d2 = d * d
    return XiTraces(
        xi1=(d - 1) ** 2 / d2,
        xi2=(d - 1) * (9 * d - 8) / d2,
        xi3=(d - 1) * (4 * d - 3) / d2,
        xi4=(2 * u * d2 - 3 * d + 1) / d2,
        xi5=(4 * u * d2 - 7 * d + 3) / d2,
    )


# -------------------------
# alpha_k, beta_k
# -------------------------
def alpha_beta(d: int, k: int) -> AlphaBeta:
    if k < 1:
        raise InvalidParameter("alpha_k/beta_k need k >= 1; k = 0 is the Clifford ensemble")
    n = qubits_for_dim(d)
    if k > n:
        raise InvalidParameter(f"k={k} exceeds the qubit count n={n}")
    gk, nk = GAMMA**k, NU**k
    alpha = (d * d * (d + 3) * (d * gk + 3 * nk) - 4 * (d + 1) * (d + 2)) / (
        (d * d - 1) * (d + 2) * (d + 4)
    )
    if d == 2:
        beta = (3 * d * d - 4) / (4 * (d * d - 1))
    else:
        beta = (d * d * (d * d * gk - 4) + 4) / ((d * d - 1) * (d * d - 4))
    return AlphaBeta(alpha=alpha, beta=beta)


def alpha_beta_chain(d: int, k: int, l: int) -> dict[str, float | bool]:
    """gamma^{kl}[1 - kl(3d+1)/(3(d^2-1))] <= a1^{kl} <= ak^l <= bk^l <= b1^{kl} <= a1^{kl} + kl d/(d^2-1) gamma^{kl}."""
    require(l >= 0, f"l must be >= 0 (got {l})")
    ab_k = alpha_beta(d, k)
    ab_1 = alpha_beta(d, 1)
    t = k * l
    g = GAMMA**t
    chain = {
        "lower": g * (1 - t * (3 * d + 1) / (3 * (d * d - 1))),
        "alpha1_kl": ab_1.alpha**t,
        "alphak_l": ab_k.alpha**l,
        "betak_l": ab_k.beta**l,
        "beta1_kl": ab_1.beta**t,
        "upper": ab_1.alpha**t + t * d / (d * d - 1) * g,
    }
    values = list(chain.values())
    slack = 1e-12
    chain["holds"] = all(a <= b + slack for a, b in zip(values, values[1:]))
    return chain


# -------------------------
# g coefficients
# -------------------------
def _g_haar(d: int) -> np.ndarray:
    den = d * (d + 1) * (d + 2) * (d + 3)
    return np.array([(d * d + 4 * d + 2) / den, -1 / den, 1 / (d * (d + 1) * (d + 3)), 0.0, 0.0])


def _g_clifford(d: int) -> np.ndarray:
    c = 1 / ((d + 1) * (d + 2))
    return np.array([c, 0.0, 0.0, c, 0.0])


def _g_interleaved(d: int, k: int, l: int) -> np.ndarray:
    ab = alpha_beta(d, k)
    a, b = ab.alpha**l, ab.beta**l
    d1, d2, d3 = d + 1, d + 2, d + 3
    return np.array(
        [
            (d * d + 4 * d + 2) / (d * d1 * d2 * d3) - a / (3 * d1 * d2 * d3) - 2 * b / (3 * d * d1 * d2),
            -1 / (d * d1 * d2 * d3) - a / (3 * d1 * d2 * d3) + b / (3 * d * d1 * d2),
            1 / (d * d1 * d3) - a / (3 * d1 * d2 * d3) - 2 * b / (3 * d * d1 * d2),
            a / (3 * d1 * d2) + 2 * b / (3 * d1 * d2),
            a / (3 * d1 * d2) - b / (3 * d1 * d2),
        ]
    )


def _g_simple_t(d: int, k: int) -> np.ndarray:
    if k == 1:
        den = 4 * (d - 1) * (d + 1) * (d + 2)
        return np.array([(4 * d - 3) / den, 0.0, 1 / den, (3 * d - 5) / den, -1 / den])
    gk, nk = GAMMA**k, NU**k
    den = (d * d - 4) * (d * d - 1) * (d + 4)
    return np.array(
        [
            ((-d * d - 2 * d) * gk + 4 * nk + d**3 + 2 * d * d - 8 * d + 4) / den,
            d * (2 * gk - 1 - nk) / den,
            ((d * d + 2 * d) * (1 - gk) - 4 * (1 - nk)) / den,
            (d * (d * d + 3 * d - 2) * gk - (2 * d + 4) * nk - 2 * (d * d + 3 * d - 6)) / den,
            -((d * d + 2 * d) * gk - (d * d + 2 * d - 4) * nk - 4) / den,
        ]
    )


def g_coefficients(kind: EnsembleKind, d: int, k: int = 0, l: int = 0) -> np.ndarray:
    """(g_1..g_5) of Omega = sum_i g_i R_i in the computational basis."""
    _check_d(d)
    n = qubits_for_dim(d)
    require(k >= 0 and l >= 0, f"T-gate count k and layer count l must be >= 0 (got k={k}, l={l})")
    if k > n:
        raise InvalidParameter(f"k={k} exceeds the qubit count n={n}")
    if kind == "fourdesign":
        return _g_haar(d)
    if kind == "clifford" or k == 0 or (kind == "interleaved" and l == 0):
        return _g_clifford(d)
    if kind == "interleaved":
        return _g_interleaved(d, k, l)
    if kind == "simplet":
        return _g_simple_t(d, k)
    raise InvalidParameter(f"unknown ensemble kind {kind!r}")


def vstar_from_g(g: np.ndarray, xi: XiTraces, d: int) -> float:
    return float((d + 1) ** 2 * np.dot(g, xi.as_array()) - xi.xi1)


# -------------------------
# V_* for the four ensembles
# -------------------------
def vstar_4design(o, rho) -> float:
    _, _, d = _pair(o, rho)
    return vstar_from_g(_g_haar(d), xi_traces(o, rho), d)


def vstar_4design_fidelity(d: int) -> float:
    return 4 * (d - 1) / ((d + 2) * (d + 3))


def v_triangle(o, rho) -> float:
    o_m, rho_m, d = _pair(o, rho)
    pair = cross_chars(rho_m, o_m)
    return (d + 1) / (d * (d + 2)) * (pair.cross_norm2() + pair.overlap())


def v_triangle_fidelity(d: int, m2: float) -> float:
    _check_m2(m2)
    return (d + 1) * (2.0 ** (1 - m2) * d * d - 3 * d + 1) / (d * d * (d + 2))


def v_triangle_fidelity_window(d: int, m2: float) -> tuple[float, float]:
    u = 2.0 ** (1 - m2)
    return u - 5 / d, u - 2 / d


def vstar_clifford(o, rho) -> float:
    o_m, rho_m, d = _pair(o, rho)
    return v_triangle(o_m, rho_m) - _real_trace(o_m @ rho_m) ** 2 / (d + 2)


def vstar_clifford_fidelity(d: int, m2: float) -> float:
    _check_m2(m2)
    return (2.0 ** (1 - m2) * (d + 1) - 4) / (d + 2)


def vstar_ukl_fidelity(d: int, m2: float, k: int, l: int) -> float:
    _check_m2(m2)
    require(k >= 0 and l >= 0, f"k and l must be >= 0 (got k={k}, l={l})")
    if k == 0 or l == 0:
        return vstar_clifford_fidelity(d, m2)
    a = alpha_beta(d, k).alpha ** l
    return vstar_4design_fidelity(d) + (
        (2.0 ** (1 - m2) * (d + 1) * (d + 3) - 8 * (d + 1)) * a / ((d + 2) * (d + 3))
    )


def vstar_tuk_fidelity(d: int, m2: float, k: int) -> float:
    _check_m2(m2)
    n = qubits_for_dim(d)
    if not 0 <= k <= n:
        raise InvalidParameter(f"simplet needs 0 <= k <= n (got k={k}, n={n})")
    if k == 0:
        return vstar_clifford_fidelity(d, m2)
    gk, nk = GAMMA**k, NU**k
    den = (d - 1) * (d + 2) * (d + 4)
    first = 2.0 ** (1 - m2) * (
        (d**3 + 4 * d * d + 3 * d) * gk + (2 * d * d + 8 * d + 6) * nk - 2 * d * d - 12 * d - 10
    )
    second = 2 * (-(4 * d * d + 4 * d) * gk - (8 * d + 8) * nk + 2 * d * d + 6 * d + 16)
    return (first + second) / den


def vstar_ukl(o, rho, k: int, l: int) -> float:
    _, _, d = _pair(o, rho)
    return vstar_from_g(g_coefficients("interleaved", d, k, l), xi_traces(o, rho), d)


def vstar_tuk(o, rho, k: int) -> float:
    _, _, d = _pair(o, rho)
    return vstar_from_g(g_coefficients("simplet", d, k), xi_traces(o, rho), d)


# -------------------------
# Dispatchers
# -------------------------
def vstar_general(spec: EnsembleSpec, o, rho) -> VarianceBreakdown:
    """V and V_* for an arbitrary pair, tagged with the path that produced V_*."""
    o_m, rho_m, d = _pair(o, rho)
    if d != spec.d:
        raise DimensionMismatch(f"ensemble is on d={spec.d}, pair on d={d}")
    check_state(rho_m)
    spec = spec.normalized()
    v = v_single(o_m, rho_m)
    if spec.kind == "clifford":
        return VarianceBreakdown(V=v, Vstar=vstar_clifford(o_m, rho_m), method="closed:clifford")
    g = g_coefficients(spec.kind, d, spec.k, spec.l)
    vstar = vstar_from_g(g, xi_traces(o_m, rho_m), d)
    return VarianceBreakdown(V=v, Vstar=vstar, method=f"g-path:{spec.label()}")


def breakdown(spec: EnsembleSpec, o, rho) -> VarianceBreakdown:
    return vstar_general(spec, o, rho)


def vstar_fidelity(spec: EnsembleSpec, m2: float) -> float:
    spec = spec.normalized()
    d = spec.d
    if spec.kind == "fourdesign":
        return vstar_4design_fidelity(d)
    if spec.kind == "clifford":
        return vstar_clifford_fidelity(d, m2)
    if spec.kind == "interleaved":
        return vstar_ukl_fidelity(d, m2, spec.k, spec.l)
    return vstar_tuk_fidelity(d, m2, spec.k)


def fidelity_method(spec: EnsembleSpec) -> str:
    spec = spec.normalized()
    return {
        "fourdesign": "closed:fourdesign-fidelity",
        "clifford": "closed:clifford-fidelity",
        "interleaved": "closed:interleaved-fidelity",
        "simplet": "closed:simplet-fidelity",
    }[spec.kind]


def breakdown_fidelity(spec: EnsembleSpec, m2: float, p: float = 0.0) -> VarianceBreakdown:
    """Target phi with the given M2, state rho_p = (1-p) phi + p/d."""
    d = spec.d
    v = v_fidelity_depolarized(d, p)
    vstar = vstar_fidelity_depolarized(spec, m2, p)
    return VarianceBreakdown(V=v, Vstar=vstar, method=fidelity_method(spec))


# -------------------------
# Depolarizing noise
# -------------------------
def depolarized(vstar: float, p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"p must be in [0, 1] (got {p})")
    return (1 - p) ** 2 * vstar


def v_fidelity_depolarized(d: int, p: float, f: float = 1.0) -> float:
    """V for rho_p = (1-p) rho + p/d with F(rho, phi) = f."""
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"p must be in [0, 1] (got {p})")
    return v_fidelity(d, (1 - p) * f + p / d)


def v_haar_depolarized_quadratic(d: int, p: float) -> float:
    """Same quantity written as the quadratic in p; maximal at p = 2d/((d-1)(d+2))."""
    return ((d - 1) / d) ** 2 * (
        -p * p + 4 * d * p / ((d - 1) * (d + 2)) + (d * d - 3 * d - 2) / ((d - 1) * (d + 2))
    ) + (d * d - 1) / (d * d)


def depolarized_v_argmax(d: int) -> float:
    return 2 * d / ((d - 1) * (d + 2))


def vstar_fidelity_depolarized(spec: EnsembleSpec, m2: float, p: float) -> float:
    return depolarized(vstar_fidelity(spec, m2), p)


# -------------------------
# Averages over random states / observables
# -------------------------
def ensemble_averages(d: int, purity_value: float, norm_o2: float) -> tuple[float, float]:
    if not 1.0 / d - 1e-12 <= purity_value <= 1.0 + 1e-12:
        raise InvalidParameter(f"purity {purity_value} outside [1/d, 1]")
    v_bar = (1 + (d - purity_value) / (d * d - 1)) * norm_o2
    vstar_bar = (d * purity_value - 1) / (d * d - 1) * norm_o2
    return v_bar, vstar_bar


def average_fidelity(d: int) -> tuple[float, float]:
    return 2 * (d - 1) / (d + 2), 4 * (d - 1) / ((d + 2) * (d + 3))


# -------------------------
# Pauli observables
# -------------------------
def pauli_variances(rho, pauli_index: int) -> tuple[float, float]:
    """(V, V_*) for O = P under the Clifford ensemble: (d+1 - Xi^2, d Xi^2)."""
    rho_m = as_matrix(rho)
    d = rho_m.shape[0]
    require(1 <= pauli_index < d * d, "need a non-identity Pauli index")
    xi = char_vector(rho_m).values[pauli_index]
    return d + 1 - xi**2, d * xi**2


# -------------------------
# Bounds
# -------------------------
def t_deviation_bound(o) -> float:
    o_m = as_matrix(o)
    return 6 * _hs_norm2(o_m) / o_m.shape[0]


def clifford_bound_chain(o, rho) -> dict[str, float | bool]:
    """V_* <= V_triangle <= 2(d+1)/(d(d+2)) ||Xi_{rho,O}||^2 <= 2(d+1)/(d+2) ||O||^2."""
    o_m, rho_m, d = _pair(o, rho)
    pair = cross_chars(rho_m, o_m)
    chain = {
        "vstar": vstar_clifford(o_m, rho_m),
        "v_triangle": v_triangle(o_m, rho_m),
        "cross_bound": 2 * (d + 1) / (d * (d + 2)) * pair.cross_norm2(),
        "norm_bound": 2 * (d + 1) / (d + 2) * _hs_norm2(o_m),
    }
    values = list(chain.values())
    chain["holds"] = all(a <= b + 1e-10 for a, b in zip(values, values[1:]))
    return chain


def vtriangle_bounds(o, rho) -> dict[str, float]:
    o_m, rho_m, d = _pair(o, rho)
    norms = char_norms(rho_m, o_m)
    pref = 2 * (d + 1) / (d * (d + 2))
    return {
        "v_triangle": v_triangle(o_m, rho_m),
        "sre_bound": pref * np.sqrt(2.0**-norms.rho_sre2 * d * norms.purity * norms.o_norm4),
        "inf_bound": 2 * (d + 1) / (d + 2) * norms.rho_traceless_inf2 * norms.o_norm2,
        "top_d_bound": pref * norms.o_top_d,
    }


def ensemble_vstar_bounds(spec: EnsembleSpec, o, rho) -> dict[str, float]:
    """Upper bounds on V_*(O, rho) (and on V_*(O) for the last entry)."""
    o_m, rho_m, d = _pair(o, rho)
    spec = spec.normalized()
    norms = char_norms(rho_m, o_m)
    sre_term = np.sqrt(2.0**-norms.rho_sre2 * d * norms.purity * norms.o_norm4)
    if spec.kind == "clifford":
        pref, extra = 2 * (d + 1) / (d * (d + 2)), 0.0
        inf_pref = 2 * (d + 1) / (d + 2)
    elif spec.kind == "fourdesign":
        bound = 4 * norms.o_norm2 / d
        return {"sre_bound": bound, "inf_bound": bound, "top_d_bound": bound}
    else:
        t = spec.k * (spec.l if spec.kind == "interleaved" else 1)
        pref, extra = 2 * GAMMA**t / d, 6 * norms.o_norm2 / d
        inf_pref = 2 * GAMMA**t / d
    return {
        "sre_bound": pref * sre_term + extra,
        "inf_bound": inf_pref * norms.rho_traceless_inf2 * norms.o_norm2 + extra,
        "top_d_bound": pref * top_d_sum(char_vector(o_m)) + extra,
    }


def fidelity_vstar_o_bound(spec: EnsembleSpec, m2: float) -> float:
    """Upper bound on max_rho V_*(O, rho) for O = phi - 1/d."""
    _check_m2(m2)
    spec = spec.normalized()
    d = spec.d
    root = 2.0 ** (1 - m2 / 2)
    if spec.kind == "fourdesign":
        return 4 / d * (1 - 1 / d)
    if spec.kind == "clifford":
        return root * (d + 1) / (d + 2)
    t = spec.k * (spec.l if spec.kind == "interleaved" else 1)
    return root * GAMMA**t + 6 / d


def fidelity_t_window(spec: EnsembleSpec, m2: float) -> dict[str, float]:
    """V_*(O, phi) - 2^{1-M2} gamma^{t} lies in (-6/d, 4/d) for the T-gate ensembles."""
    spec = spec.normalized()
    d = spec.d
    if spec.kind == "interleaved":
        t = spec.k * spec.l
    elif spec.kind == "simplet":
        t = spec.k
    else:
        t = 0
    centre = 2.0 ** (1 - m2) * GAMMA**t
    return {"centre": centre, "lower": centre - 6 / d, "upper": centre + 4 / d, "vstar": vstar_fidelity(spec, m2)}
