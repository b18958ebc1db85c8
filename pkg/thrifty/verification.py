# thrifty/verification.py
"""
Named invariant suites. Each check records what was measured against which
tolerance; a failing check is data, not an exception.
"""
from __future__ import annotations

import logging
from functools import reduce
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, Field

from thrifty.cross_moment_lab import (
    big_r,
    dimension_formulas,
    dimension_table,
    gi_fit,
    gram_spectrum,
    kappa_extract,
    omega_closed,
    omega_empirical,
    omega_from_g,
    omega_norms,
    orbit_operators,
    partial_trace_last,
    sigma44_enumerate,
    support_leak,
    two_design_marginal,
    vstar_via_omega,
)
from thrifty.errors import InvalidParameter
from thrifty.pauli_clifford import (
    clifford_to_circuit,
    dense_unitary,
    enumerate_clifford,
    pauli_from_index,
    pauli_matrix,
    random_clifford,
)
from thrifty.schemas import EnsembleSpec
from thrifty.shadow_sim import exact_snapshot_mean, expected_value
from thrifty.states_charfuncs import (
    char_vector,
    cross_chars,
    depolarize,
    fidelity_observable,
    haar_state,
    phased_w_bounds,
    purity,
    random_density,
    random_traceless_observable,
    snk_state,
    sre2,
    sre2_closed,
    top_d_sum,
    w_state,
    w_theta_state,
)
from thrifty.variance_analytics import (
    GAMMA,
    alpha_beta_chain,
    clifford_bound_chain,
    fidelity_vstar_o_bound,
    g_coefficients,
    pauli_variances,
    v_single,
    v_triangle,
    vstar_4design_fidelity,
    vstar_clifford,
    vstar_clifford_fidelity,
    vstar_fidelity,
    vstar_from_g,
    vstar_general,
    vstar_tuk_fidelity,
    vtriangle_bounds,
    xi_fidelity,
    xi_traces,
)

logger = logging.getLogger(__name__)


class CheckResult(BaseModel):
    name: str
    passed: bool
    measured: Any = None
    tolerance: float | None = None
    detail: str = ""


class SuiteReport(BaseModel):
    suite: str
    seed: int
    cases: int
    checks: list[CheckResult] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_error(self, name: str, error: float, tolerance: float, detail: str = "") -> None:
        """Pass when the worst absolute error stays within tolerance."""
        self.checks.append(
            CheckResult(name=name, passed=bool(error <= tolerance), measured=float(error), tolerance=tolerance, detail=detail)
        )

    def add_flag(self, name: str, ok: bool, measured: Any = None, detail: str = "") -> None:
        self.checks.append(CheckResult(name=name, passed=bool(ok), measured=measured, detail=detail))


def _corpus(rng: np.random.Generator, cases: int, sizes: tuple[int, ...] = (1, 2, 3)):
    """(n, rho, O) triples with mixed-rank states and traceless Hermitian O."""
    for i in range(cases):
        n = sizes[i % len(sizes)]
        rank = int(rng.integers(1, 2**n + 1))
        yield n, random_density(n, rng, rank), random_traceless_observable(n, rng)


# -------------------------
# charfuncs
# -------------------------
def suite_charfuncs(seed: int, cases: int) -> SuiteReport:
    report = SuiteReport(suite="charfuncs", seed=seed, cases=cases)
    rng = np.random.default_rng(seed)

    twisted_err = overlap_excess = chain_excess = purity_err = 0.0
    for n, rho, o in _corpus(rng, cases):
        d = 2**n
        pair = cross_chars(rho, o)
        cross = pair.cross_norm2()
        twisted_err = max(twisted_err, abs(pair.twisted_norm2() - cross) / (1 + cross))
        overlap_excess = max(overlap_excess, abs(pair.overlap()) - cross)
        top_d = top_d_sum(char_vector(o))
        o_norm2 = float(np.real(np.trace(o @ o)))
        chain_excess = max(chain_excess, cross - top_d, top_d - d * o_norm2)
        purity_err = max(purity_err, abs(char_vector(rho).norm2() - d * purity(rho)))
    report.add_error("twisted_norm_equals_cross_norm", twisted_err, 1e-8)
    report.add_error("overlap_bounded_by_cross_norm", max(overlap_excess, 0.0), 1e-8)
    report.add_error("cross_norm_chain", max(chain_excess, 0.0), 1e-8)
    report.add_error("char_norm_is_d_times_purity", purity_err, 1e-8)

    fid_err = 0.0
    for n, rho, _ in _corpus(rng, min(cases, 200)):
        d = 2**n
        phi = haar_state(n, rng)
        proj = phi.density()
        o = fidelity_observable(phi)
        with_o, with_phi = cross_chars(rho, o), cross_chars(rho, proj)
        f = float(np.real(np.vdot(phi.amplitudes, rho @ phi.amplitudes)))
        fid_err = max(
            fid_err,
            abs(with_o.cross_norm2() - (with_phi.cross_norm2() - 1)),
            abs(with_o.overlap() - (with_phi.overlap() - 2 * f + 1 / d)),
        )
    report.add_error("fidelity_observable_identities", fid_err, 1e-8)

    sre_err = 0.0
    thetas = np.linspace(0.05, np.pi - 0.05, 10)
    for n in range(1, 7):
        sre_err = max(sre_err, abs(sre2(w_state(n)) - sre2_closed("w", n)))
        for theta in thetas:
            sre_err = max(
                sre_err,
                abs(sre2(w_theta_state(n, theta)) - sre2_closed("w_theta", n, theta=theta)),
                abs(sre2(snk_state(n, n // 2 + 1, theta)) - sre2_closed("snk", n, k=n // 2 + 1, theta=theta)),
            )
        phases = rng.uniform(0, 2 * np.pi, size=n)
        sre_err = max(sre_err, abs(sre2(w_state(n, phases)) - sre2_closed("phased_w", n, thetas=phases)))
    report.add_error("sre2_closed_matches_direct", sre_err, 1e-9)

    outside = 0.0
    for n in range(2, 7):
        lower, upper = phased_w_bounds(n)
        for _ in range(20):
            m2 = sre2_closed("phased_w", n, thetas=rng.uniform(0, 2 * np.pi, size=n))
            outside = max(outside, lower - m2, m2 - upper)
    report.add_error("phased_w_window", max(outside, 0.0), 1e-9)
    return report


# -------------------------
# commutant
# -------------------------
def suite_commutant(seed: int, cases: int) -> SuiteReport:
    report = SuiteReport(suite="commutant", seed=seed, cases=cases)
    rng = np.random.default_rng(seed)
    subspaces = sigma44_enumerate()
    report.add_flag("sigma44_size", len(subspaces) == 30, len(subspaces))
    report.add_flag("lagrangian_axioms", all(t.is_valid() for t in subspaces))

    ranks = tuple(gram_spectrum(n).rank for n in (1, 2, 3))
    report.add_flag("gram_ranks", ranks == (15, 29, 30), list(ranks), "expected (15, 29, 30)")

    for n in (2, 3):
        spectrum = gram_spectrum(n)
        eig = np.asarray(spectrum.eigenvalues)
        found = {}
        for label, (value, mult) in spectrum.predicted.items():
            found[label] = int(np.sum(np.abs(eig - value) <= 1e-9 * max(1.0, abs(value))))
        ok = all(found[label] == mult for label, (_, mult) in spectrum.predicted.items())
        report.add_flag(f"gram_eigenvalues_n{n}", ok, found)

    for n in (1, 2, 3):
        d = 2**n
        table, formulas = dimension_table(d), dimension_formulas(d)
        report.add_flag(f"dimension_table_n{n}", table == formulas, {k: {s: str(v) for s, v in row.items()} for k, row in table.items()})

    worst = 0.0
    for n in (1, 2):
        ops = [big_r(t, n) for t in subspaces]
        for _ in range(min(cases, 10)):
            u = dense_unitary(clifford_to_circuit(random_clifford(n, rng)))
            u4 = reduce(np.kron, [u] * 4)
            for op in ops:
                worst = max(worst, float(np.linalg.norm(op @ u4 - u4 @ op)))
    report.add_error("r_commutes_with_clifford_power", worst, 1e-9)
    return report


# -------------------------
# omega
# -------------------------
def suite_omega(seed: int, cases: int) -> SuiteReport:
    report = SuiteReport(suite="omega", seed=seed, cases=cases)
    rng = np.random.default_rng(seed)

    cl1 = omega_empirical(EnsembleSpec(kind="clifford", n=1))
    ops = orbit_operators(1)
    expected = ((ops[0] + ops[3]) / 12).toarray()
    report.add_error("omega_cl1_is_r1_plus_r4_over_12", float(np.abs(cl1.dense() - expected).max()), 1e-12)
    report.add_error(
        "omega_cl1_closed_form",
        float(np.abs(cl1.dense() - omega_closed(EnsembleSpec(kind="clifford", n=1)).dense()).max()),
        1e-12,
    )

    worst = 0.0
    for _, rho, o in _corpus(rng, min(cases, 100), sizes=(1,)):
        worst = max(worst, abs(vstar_via_omega(cl1, o, rho) - vstar_clifford(o, rho)))
    report.add_error("vstar_via_omega_matches_clifford", worst, 1e-10)

    for n in (1, 2):
        d = 2**n
        for kind in ("clifford", "fourdesign"):
            omega = omega_closed(EnsembleSpec(kind=kind, n=n))
            report.add_error(f"support_in_pg_{kind}_n{n}", support_leak(omega), 1e-10)
            marginal_err = float(np.abs(partial_trace_last(omega) - two_design_marginal(d)).max())
            report.add_error(f"partial_trace_{kind}_n{n}", marginal_err, 1e-10)
        norms = omega_norms(omega_closed(EnsembleSpec(kind="fourdesign", n=n)))
        report.add_error(
            f"haar_norms_n{n}",
            max(abs(norms["schatten1"] - d * d), abs(norms["schatten_inf"] - 4 / (d * (d + 1)))),
            1e-10,
        )

    d = 4
    cl2 = omega_empirical(EnsembleSpec(kind="clifford", n=2))
    closed = omega_closed(EnsembleSpec(kind="clifford", n=2)).dense()
    report.add_error("omega_cl2_enumeration_vs_closed", float(np.abs(cl2.dense() - closed).max()), 1e-10)
    kappa = kappa_extract(cl2)
    report.add_error(
        "kappa_cl2",
        max(abs(kappa.k4_plus - 2 / (d + 1)), abs(kappa.k31 - 4 / ((d + 1) * (d + 2)))),
        1e-10,
        "k4+ = 2/(d+1), k31 = 4/((d+1)(d+2))",
    )
    report.add_error("gi_fit_residual_cl2", gi_fit(cl2).residual, 1e-9)

    path_err = 0.0
    for spec in (
        EnsembleSpec(kind="clifford", n=2),
        EnsembleSpec(kind="fourdesign", n=2),
        EnsembleSpec(kind="interleaved", n=2, k=1, l=1),
        EnsembleSpec(kind="interleaved", n=2, k=2, l=2),
    ):
        g_path = omega_from_g(g_coefficients(spec.kind, d, spec.k, spec.l), 2)
        k_path = omega_closed(spec).matrix
        path_err = max(path_err, float(np.abs((g_path - k_path).toarray()).max()))
    report.add_error("g_path_matches_kappa_path", path_err, 1e-10)
    return report


# -------------------------
# variance-oracle
# -------------------------
def suite_variance_oracle(seed: int, cases: int) -> SuiteReport:
    report = SuiteReport(suite="variance-oracle", seed=seed, cases=cases)
    rng = np.random.default_rng(seed)

    report.add_error("vstar_4design_fidelity_d4", abs(vstar_4design_fidelity(4) - 2 / 7), 1e-12)
    report.add_error("vstar_clifford_fidelity_d2", abs(vstar_clifford_fidelity(2, 0.0) - 0.5), 1e-12)
    report.add_error("vstar_tuk_single_qubit_stabilizer", abs(vstar_tuk_fidelity(2, 0.0, 1) - 1 / 8), 1e-12)
    report.add_error(
        "vstar_tuk_single_qubit_magic", abs(vstar_tuk_fidelity(2, float(np.log2(4 / 3)), 1) - 7 / 32), 1e-12
    )
    four = max(
        abs(vstar_clifford_fidelity(d, float(np.log2((d + 3) / 4))) - vstar_4design_fidelity(d))
        for d in (4, 8, 16, 32)
    )
    report.add_error("clifford_meets_4design_at_threshold", four, 1e-12)

    web_err = g_err = 0.0
    lowest = np.inf
    for n in range(1, 7):
        d = 2**n
        for m2 in (0.0, 0.5 * np.log2((d + 3) / 4), float(np.log2((d + 3) / 4))):
            clifford = vstar_fidelity(EnsembleSpec(kind="clifford", n=n), m2)
            for spec in (
                EnsembleSpec(kind="interleaved", n=n, k=min(n, 2), l=0),
                EnsembleSpec(kind="interleaved", n=n, k=0, l=3),
                EnsembleSpec(kind="simplet", n=n, k=0),
            ):
                web_err = max(web_err, abs(vstar_fidelity(spec, m2) - clifford))
            specs = [EnsembleSpec(kind="clifford", n=n), EnsembleSpec(kind="fourdesign", n=n)]
            specs += [EnsembleSpec(kind="interleaved", n=n, k=k, l=l) for k in range(1, n + 1) for l in range(4)]
            specs += [EnsembleSpec(kind="simplet", n=n, k=k) for k in range(1, n + 1)]
            for spec in specs:
                closed = vstar_fidelity(spec, m2)
                g_path = vstar_from_g(g_coefficients(spec.kind, d, spec.k, spec.l), xi_fidelity(d, m2), d)
                g_err = max(g_err, abs(closed - g_path))
                lowest = min(lowest, closed)
    report.add_error("reduced_ensembles_equal_clifford", web_err, 1e-12)
    report.add_error("g_path_matches_fidelity_closed_form", g_err, 1e-10)
    report.add_flag("closed_forms_nonnegative", lowest >= -1e-12, float(lowest))

    pauli_err = 0.0
    for n in (1, 2):
        d = 2**n
        rho = random_density(n, rng)
        for idx in range(1, d * d):
            p = pauli_matrix(pauli_from_index(n, idx))
            v, vstar = pauli_variances(rho, idx)
            pauli_err = max(pauli_err, abs(v - v_single(p, rho)), abs(vstar - vstar_clifford(p, rho)))
    report.add_error("pauli_observable_variances", pauli_err, 1e-9)

    xi_err = 0.0
    for _, rho, o in _corpus(rng, min(cases, 20), sizes=(1, 2)):
        xi_err = max(xi_err, float(np.abs(xi_traces(o, rho).as_array() - xi_traces(o, rho, "dense").as_array()).max()))
    report.add_error("xi_pauli_matches_dense", xi_err, 1e-9)

    bias = 0.0
    cliffords = [clifford_to_circuit(c) for c in enumerate_clifford(1)]
    for _, rho, o in _corpus(rng, min(cases, 20), sizes=(1,)):
        mean = np.mean([exact_snapshot_mean(seq, rho, o) for seq in cliffords])
        bias = max(bias, abs(mean - expected_value(rho, o)))
    report.add_error("snapshot_unbiased_over_cl1", bias, 1e-10)
    return report


# -------------------------
# bounds
# -------------------------
def suite_bounds(seed: int, cases: int) -> SuiteReport:
    report = SuiteReport(suite="bounds", seed=seed, cases=cases)
    rng = np.random.default_rng(seed)

    violations = 0
    lowest = np.inf
    vtri_excess = dep_err = dev_excess = 0.0
    for n, rho, o in _corpus(rng, cases):
        d = 2**n
        chain = clifford_bound_chain(o, rho)
        violations += 0 if chain["holds"] else 1
        lowest = min(lowest, chain["vstar"], v_single(o, rho))
        bounds = vtriangle_bounds(o, rho)
        vtri_excess = max(vtri_excess, *(bounds["v_triangle"] - bounds[k] for k in ("sre_bound", "inf_bound", "top_d_bound")))
        p = float(rng.uniform())
        dep_err = max(dep_err, abs(vstar_clifford(o, depolarize(rho, p)) - (1 - p) ** 2 * chain["vstar"]))
    report.add_flag("clifford_bound_chain", violations == 0, violations, f"{cases} random pairs")
    report.add_flag("variances_nonnegative", lowest >= -1e-12, float(lowest))
    report.add_error("v_triangle_bounds", max(vtri_excess, 0.0), 1e-8)
    report.add_error("depolarizing_scales_vstar", dep_err, 1e-8)

    for n, rho, o in _corpus(rng, min(cases, 100), sizes=(2, 3)):
        d = 2**n
        o_norm2 = float(np.real(np.trace(o @ o)))
        vtri = v_triangle(o, rho)
        for spec in (EnsembleSpec(kind="interleaved", n=n, k=1, l=1), EnsembleSpec(kind="simplet", n=n, k=1)):
            vstar = vstar_general(spec, o, rho).Vstar
            dev_excess = max(dev_excess, abs(vstar - GAMMA * vtri) - 6 * o_norm2 / d)
    report.add_error("t_ensemble_deviation", max(dev_excess, 0.0), 1e-8)

    excess = -np.inf
    for n in (2, 3):
        phi = haar_state(n, rng)
        o = fidelity_observable(phi)
        bound = fidelity_vstar_o_bound(EnsembleSpec(kind="clifford", n=n), sre2(phi))
        best = max(vstar_clifford(o, haar_state(n, rng).density()) for _ in range(min(cases, 200)))
        excess = max(excess, best - bound)
    report.add_flag("fidelity_vstar_o_bound", excess < 0, float(excess))

    broken = [
        (n, k, l)
        for n in range(1, 13)
        for k in range(1, n + 1)
        for l in range(7)
        if not alpha_beta_chain(2**n, k, l)["holds"]
    ]
    report.add_flag("alpha_beta_chain", not broken, broken[:5])
    return report


SUITES: dict[str, Callable[[int, int], SuiteReport]] = {
    "charfuncs": suite_charfuncs,
    "commutant": suite_commutant,
    "omega": suite_omega,
    "variance-oracle": suite_variance_oracle,
    "bounds": suite_bounds,
}


def run_suite(suite: str, seed: int = 2024, cases: int = 500) -> SuiteReport:
    runner = SUITES.get(suite)
    if runner is None:
        raise InvalidParameter(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
    report = runner(seed, cases)
    failed = [c.name for c in report.checks if not c.passed]
    if failed:
        logger.warning("suite %s: %d/%d checks failed: %s", suite, len(failed), len(report.checks), ", ".join(failed))
    else:
        logger.info("suite %s: all %d checks passed", suite, len(report.checks))
    return report
