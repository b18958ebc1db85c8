# thrifty/figures.py
"""Plot-ready tables: analytic curves next to Monte Carlo points, at reduced scale."""
from __future__ import annotations

import logging
from math import pi
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, Field

from thrifty import config
from thrifty.errors import InvalidParameter, check_cutoff, require
from thrifty.schemas import EnsembleSpec, FigureParams, RunConfig, StateSpec
from thrifty.shadow_sim import run_depolarizing_sweep, run_experiment
from thrifty.states_charfuncs import (
    char_average_predictions,
    cross_chars,
    fidelity_observable,
    haar_state,
    haar_unitary,
    random_traceless_observable,
    sre2,
    sre2_closed,
    w_state,
)
from thrifty.variance_analytics import (
    average_fidelity,
    breakdown_fidelity,
    v_fidelity,
    v_triangle,
    vr_combine,
    vstar_clifford,
    vstar_fidelity,
)

logger = logging.getLogger(__name__)

SEEDED_FIGURES = {"random_states", "interleaved_compare", "depolarizing", "upper_bound_scatter", "ratio_scatter"}


class FigureTable(BaseModel):
    figure: str
    columns: list[str]
    rows: list[dict[str, Any]]
    diagnostics: dict[str, Any] = Field(default_factory=dict)


# -------------------------
# Mean variances over Haar random targets
# -------------------------
def random_states(params: FigureParams) -> FigureTable:
    """Per n: 2-design averages of V and V_* and V_R at R and 1000, plus a sampled mean of V_*(Clifford)."""
    n_max = params.n or 6
    check_cutoff(n_max, config.CHAR_MAX_QUBITS, "random-state averages")
    rng = np.random.default_rng(params.seed)
    rows = []
    for n in range(1, n_max + 1):
        d = 2**n
        v, vstar = average_fidelity(d)
        sampled = np.array(
            [vstar_fidelity(EnsembleSpec(kind="clifford", n=n), sre2(haar_state(n, rng))) for _ in range(params.samples)]
        )
        rows.append(
            {
                "n": n,
                "V": v,
                "Vstar_mean": vstar,
                f"V_{params.r}": vr_combine(v, vstar, params.r),
                "V_1000": vr_combine(v, vstar, 1000),
                "mc_Vstar_mean": float(sampled.mean()),
                "mc_Vstar_se": float(sampled.std(ddof=1) / np.sqrt(sampled.size)) if sampled.size > 1 else 0.0,
            }
        )
    columns = ["n", "V", "Vstar_mean", f"V_{params.r}", "V_1000", "mc_Vstar_mean", "mc_Vstar_se"]
    return FigureTable(figure="random_states", columns=columns, rows=rows)


# -------------------------
# V_* against n for named target families
# -------------------------
def var_types(params: FigureParams) -> FigureTable:
    n_max = params.n or 20
    families = (
        ("W", lambda n: sre2_closed("w", n)),
        ("W(pi/4)", lambda n: sre2_closed("w_theta", n, theta=pi / 4)),
        ("S(n,2,pi/4)", lambda n: sre2_closed("snk", n, k=min(2, n), theta=pi / 4)),
    )
    rows = []
    for label, m2_of in families:
        for n in range(1, n_max + 1):
            m2 = m2_of(n)
            row: dict[str, Any] = {"family": label, "n": n, "M2": m2}
            row["Vstar_Cl"] = vstar_fidelity(EnsembleSpec(kind="clifford", n=n), m2)
            for k in (5, 10):
                row[f"Vstar_U{k}1"] = (
                    vstar_fidelity(EnsembleSpec(kind="interleaved", n=n, k=k, l=1), m2) if k <= n else None
                )
            rows.append(row)
    columns = ["family", "n", "M2", "Vstar_Cl", "Vstar_U51", "Vstar_U101"]
    return FigureTable(figure="var_types", columns=columns, rows=rows)


# -------------------------
# U[k,1], U[1,k] and tU[k] on S(n,2,pi/4)
# -------------------------
def _three_ensembles(n: int, k: int) -> tuple[EnsembleSpec, EnsembleSpec, EnsembleSpec]:
    return (
        EnsembleSpec(kind="interleaved", n=n, k=k, l=1),
        EnsembleSpec(kind="interleaved", n=n, k=min(k, 1), l=k),
        EnsembleSpec(kind="simplet", n=n, k=k),
    )


def interleaved_compare(params: FigureParams) -> FigureTable:
    n = params.n or 8
    target = StateSpec(family="snk", n=n, k=min(2, n), theta=pi / 4)
    m2 = sre2_closed("snk", n, k=target.k, theta=pi / 4)
    rows = []
    max_gap = max_z = 0.0
    for k in range(n + 1):
        curves = [vstar_fidelity(spec, m2) for spec in _three_ensembles(n, k)]
        max_gap = max(max_gap, max(curves) - min(curves))
        row: dict[str, Any] = {"k": k, "Vstar_Uk1": curves[0], "Vstar_U1k": curves[1], "Vstar_tUk": curves[2]}
        run = RunConfig(
            n=n,
            ensemble=EnsembleSpec(kind="simplet", n=n, k=k),
            R=params.r,
            num_circuits=params.circuits,
            seed=params.seed + k,
            target=target,
        )
        stats = run_experiment(run)
        row["mc_Vstar_tUk"] = stats.vstar_hat
        row["mc_Vstar_tUk_se"] = stats.se_vstar
        if stats.se_vstar:
            max_z = max(max_z, abs(stats.vstar_hat - curves[2]) / stats.se_vstar)
        rows.append(row)
    columns = ["k", "Vstar_Uk1", "Vstar_U1k", "Vstar_tUk", "mc_Vstar_tUk", "mc_Vstar_tUk_se"]
    d = 2**n
    return FigureTable(
        figure="interleaved_compare",
        columns=columns,
        rows=rows,
        diagnostics={"M2": m2, "max_gap": max_gap, "deviation_budget": 12 / d, "max_mc_z": max_z},
    )


# -------------------------
# V_R against depolarizing strength, W_n target
# -------------------------
def depolarizing(params: FigureParams) -> FigureTable:
    n = params.n or 6
    grid = params.grid if params.grid is not None else [round(0.1 * i, 10) for i in range(11)]
    target = StateSpec(family="w", n=n)
    m2 = sre2_closed("w", n)
    clifford = EnsembleSpec(kind="clifford", n=n)
    haar = EnsembleSpec(kind="fourdesign", n=n)
    run = RunConfig(n=n, ensemble=clifford, R=params.r, num_circuits=params.circuits, seed=params.seed, target=target)
    points = run_depolarizing_sweep(run, grid)
    rows = []
    for point in points:
        cl = breakdown_fidelity(clifford, m2, point.p)
        ha = breakdown_fidelity(haar, m2, point.p)
        rows.append(
            {
                "p": point.p,
                "VR_Cl": vr_combine(cl.V, cl.Vstar, params.r),
                "VR_Haar": vr_combine(ha.V, ha.Vstar, params.r),
                "mc_VR_Cl": point.stats.vR_hat,
                "mc_VR_Cl_se": point.stats.se_vR,
            }
        )
    columns = ["p", "VR_Cl", "VR_Haar", "mc_VR_Cl", "mc_VR_Cl_se"]
    return FigureTable(figure="depolarizing", columns=columns, rows=rows, diagnostics={"M2": m2, "R": params.r})


# -------------------------
# Scatters over random states / observables
# -------------------------
def upper_bound_scatter(params: FigureParams) -> FigureTable:
    """V_*(Clifford) for O from W_n against its two upper bounds, phi Haar random."""
    n = params.n or 3
    check_cutoff(n, config.XI_MAX_QUBITS, "upper-bound scatter")
    d = 2**n
    rng = np.random.default_rng(params.seed)
    o = fidelity_observable(w_state(n))
    rows = []
    for i in range(params.samples):
        phi = haar_state(n, rng).density()
        rows.append(
            {
                "sample": i,
                "Vstar_Cl": vstar_clifford(o, phi),
                "V_triangle": v_triangle(o, phi),
                "cross_bound": 2 * (d + 1) * cross_chars(phi, o).cross_norm2() / (d * (d + 2)),
            }
        )
    return FigureTable(
        figure="upper_bound_scatter", columns=["sample", "Vstar_Cl", "V_triangle", "cross_bound"], rows=rows
    )


def ratio_scatter(params: FigureParams) -> FigureTable:
    """||Xi_{phi,O}||_2^2 against Xi~.Xi for O = U O_0 U^dagger, phi fixed."""
    n = params.n or 5
    check_cutoff(n, config.CHAR_MAX_QUBITS, "ratio scatter")
    rng = np.random.default_rng(params.seed)
    phi = haar_state(n, rng).density()
    o0 = random_traceless_observable(n, rng)
    o0 = o0 / np.sqrt(np.real(np.trace(o0 @ o0)))
    rows = []
    for i in range(params.samples):
        u = haar_unitary(n, rng)
        pair = cross_chars(phi, u @ o0 @ u.conj().T)
        rows.append({"sample": i, "cross_norm2": pair.cross_norm2(), "overlap": pair.overlap()})
    overlaps = np.array([row["overlap"] for row in rows])
    predicted = char_average_predictions(2**n, 1.0, 1.0)
    return FigureTable(
        figure="ratio_scatter",
        columns=["sample", "cross_norm2", "overlap"],
        rows=rows,
        diagnostics={
            "mean_overlap": float(overlaps.mean()),
            "predicted_overlap": predicted["overlap"],
            "predicted_cross_norm2": predicted["cross_norm2"],
        },
    )


# -------------------------
# Stabilizer target, three T-gate ensembles against k
# -------------------------
def ensemble_compare(params: FigureParams) -> FigureTable:
    n = params.n or 10
    rows = []
    for k in range(n + 1):
        curves = [vstar_fidelity(spec, 0.0) for spec in _three_ensembles(n, k)]
        rows.append({"k": k, "Vstar_Uk1": curves[0], "Vstar_U1k": curves[1], "Vstar_tUk": curves[2]})
    d = 2**n
    return FigureTable(
        figure="ensemble_compare",
        columns=["k", "Vstar_Uk1", "Vstar_U1k", "Vstar_tUk"],
        rows=rows,
        diagnostics={"V": v_fidelity(d, 1.0)},
    )


FIGURES: dict[str, Callable[[FigureParams], FigureTable]] = {
    "random_states": random_states,
    "var_types": var_types,
    "interleaved_compare": interleaved_compare,
    "depolarizing": depolarizing,
    "upper_bound_scatter": upper_bound_scatter,
    "ratio_scatter": ratio_scatter,
    "ensemble_compare": ensemble_compare,
}


def figure_dataset(params: FigureParams) -> FigureTable:
    builder = FIGURES.get(params.which)
    if builder is None:
        raise InvalidParameter(f"unknown figure id {params.which!r}; choose from {sorted(FIGURES)}")
    require(
        params.which not in SEEDED_FIGURES or params.seed is not None,
        f"figure {params.which} is randomized and needs an explicit --seed",
    )
    table = builder(params)
    logger.info("figure %s: %d rows", params.which, len(table.rows))
    return table
