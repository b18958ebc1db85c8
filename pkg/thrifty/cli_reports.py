# thrifty/cli_reports.py
"""
Command-line surface.

    thrifty analytic --ensemble clifford --n 1 --m2 0 --f 1 --r 1,10,100
    thrifty sre --family w --n 10
    thrifty crossmoment --ensemble clifford --n 1
    thrifty simulate --config run.json
    thrifty figure depolarizing --n 6 --circuits 20000 --r 10 --seed 7 --format csv
    thrifty verify commutant
    thrifty request request.json
    thrifty schema

Every output is a ReportDocument (version, resolved config, results,
diagnostics); figure and simulate tables can also be written as CSV.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel, ValidationError

from thrifty import __version__, config
from thrifty.cross_moment_lab import (
    export_operator,
    gi_fit,
    kappa_closed,
    kappa_extract,
    omega_closed,
    omega_empirical,
    omega_norms,
    support_leak,
)
from thrifty.errors import InvalidParameter, ThriftyError, require
from thrifty.figures import figure_dataset
from thrifty.schemas import (
    AnalyticParams,
    CommandRequest,
    CrossMomentParams,
    EnsembleSpec,
    FigureParams,
    ReportDocument,
    SimulateParams,
    SreParams,
    StateSpec,
    VerifyParams,
)
from thrifty.shadow_sim import expected_value, resolve_inputs, run_experiment
from thrifty.states_charfuncs import (
    as_matrix,
    build_state,
    depolarize,
    qubits_for_dim,
    sre2,
    sre2_closed,
    sre2_for_spec,
)
from thrifty.variance_analytics import (
    alpha_beta_chain,
    breakdown_fidelity,
    clifford_bound_chain,
    ensemble_vstar_bounds,
    fidelity_method,
    fidelity_t_window,
    fidelity_vstar_o_bound,
    t_deviation_bound,
    v_fidelity_depolarized,
    v_triangle_fidelity_window,
    vr_combine,
    vstar_fidelity_depolarized,
    vstar_general,
    vtriangle_bounds,
)
from thrifty.verification import run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2


def _document(params: BaseModel, results: Any, **diagnostics: Any) -> ReportDocument:
    return ReportDocument(
        version=__version__,
        config=params.model_dump(mode="json"),
        results=results,
        diagnostics=diagnostics,
    )


# -------------------------
# analytic
# -------------------------
def _resolve_n(params: AnalyticParams) -> int:
    candidates = []
    if params.n is not None:
        candidates.append(params.n)
    if params.d is not None:
        candidates.append(qubits_for_dim(params.d))
    if params.family is not None:
        candidates.append(params.family.n)
    if params.rho is not None:
        candidates.append(qubits_for_dim(len(params.rho.real)))
    require(len(set(candidates)) == 1, f"n, d, family and dense pair disagree on the qubit count: {candidates}")
    return candidates[0]


def _vr_table(v: float, vstar: float | None, rs: list[int]) -> dict[str, float | None]:
    return {str(r): (v if r == 1 else None) if vstar is None else vr_combine(v, vstar, r) for r in rs}


def cmd_analytic(params: AnalyticParams) -> ReportDocument:
    n = _resolve_n(params)
    spec = EnsembleSpec(kind=params.ensemble, n=n, k=params.k, l=params.l)

    if params.rho is not None:
        rho, o = params.rho.to_array(), params.observable.to_array()
        result = vstar_general(spec, o, rho)
        bounds: dict[str, Any] = {"t_deviation": t_deviation_bound(o), "ensemble": ensemble_vstar_bounds(spec, o, rho)}
        if spec.is_clifford:
            bounds["clifford_chain"] = clifford_bound_chain(o, rho)
            bounds["v_triangle"] = vtriangle_bounds(o, rho)
        results = {
            "V": result.V,
            "Vstar": result.Vstar,
            "VR": _vr_table(result.V, result.Vstar, params.r),
            "method": result.method,
            "bounds": bounds,
        }
        return _document(params, results, n=n, d=spec.d, ensemble=spec.label())

    m2 = params.m2 if params.family is None else sre2_for_spec(params.family)
    f = 1.0 if params.fidelity_ideal or params.f is None else params.f
    d = spec.d
    if m2 is None and spec.kind != "fourdesign":
        raise InvalidParameter(f"{spec.label()} needs the target magic: pass --m2 or a state family")
    m2 = 0.0 if m2 is None else m2

    v = v_fidelity_depolarized(d, params.p, f)
    vstar = vstar_fidelity_depolarized(spec, m2, params.p) if f == 1.0 else None
    bounds = {"vstar_o_upper": fidelity_vstar_o_bound(spec, m2)}
    normalized = spec.normalized()
    if normalized.kind == "clifford":
        lower, upper = v_triangle_fidelity_window(d, m2)
        bounds["v_triangle_window"] = {"lower": lower, "upper": upper}
    elif normalized.kind in ("interleaved", "simplet"):
        bounds["t_window"] = fidelity_t_window(normalized, m2)
        if normalized.kind == "interleaved":
            bounds["alpha_beta_chain"] = alpha_beta_chain(d, normalized.k, normalized.l)
    results = {
        "V": v,
        "Vstar": vstar,
        "VR": _vr_table(v, vstar, params.r),
        "method": fidelity_method(spec),
        "M2": m2,
        "F": f,
        "bounds": bounds,
    }
    notes = {} if vstar is not None else {"note": "V_* depends on rho beyond M2 when F < 1; only its upper bound is reported"}
    return _document(params, results, n=n, d=d, ensemble=spec.label(), **notes)


# -------------------------
# sre
# -------------------------
def cmd_sre(params: SreParams) -> ReportDocument:
    m2 = sre2_closed(params.family, params.n, k=params.k, theta=params.theta, thetas=params.thetas)
    results: dict[str, Any] = {"M2": m2}
    if params.direct:
        state = build_state(
            StateSpec(family=params.family, n=params.n, k=params.k, theta=params.theta, thetas=params.thetas)
        )
        direct = sre2(state)
        results["direct"] = direct
        results["abs_error"] = abs(direct - m2)
    return _document(params, results)


# -------------------------
# crossmoment
# -------------------------
def cmd_crossmoment(params: CrossMomentParams) -> ReportDocument:
    spec = EnsembleSpec(kind=params.ensemble, n=params.n, k=params.k, l=params.l).normalized()
    if spec.kind == "clifford":
        omega = omega_empirical(spec)
    else:
        require(params.seed is not None, f"sampling Omega for {spec.label()} needs an explicit --seed")
        omega = omega_empirical(spec, samples=params.samples, rng=np.random.default_rng(params.seed))
    closed = omega_closed(spec)
    deviation = float(np.abs(omega.dense() - closed.dense()).max())
    fit = gi_fit(omega)
    results = {
        "ensemble": spec.label(),
        "exact": omega.exact,
        "samples": omega.samples,
        "kappa": kappa_extract(omega).as_dict(),
        "kappa_closed": kappa_closed(spec).as_dict(),
        "g": list(fit.g),
        "g_residual": fit.residual,
        "g_unique": fit.unique,
        "norms": omega_norms(omega),
        "support_leak": support_leak(omega),
        "max_deviation_from_closed_form": deviation,
    }
    diagnostics: dict[str, Any] = {}
    if params.export:
        diagnostics["export"] = str(export_operator(omega, params.export))
    return _document(params, results, **diagnostics)


# -------------------------
# simulate
# -------------------------
def cmd_simulate(params: SimulateParams) -> ReportDocument:
    run = params.run
    rho, o = resolve_inputs(run)
    stats = run_experiment(run)
    truth = expected_value(depolarize(as_matrix(rho), run.depolarizing_p), o)

    analytic: dict[str, Any] | None = None
    diagnostics: dict[str, Any] = {}
    try:
        if run.observable.kind == "fidelity":
            m2 = 0.0 if run.ensemble.kind == "fourdesign" else sre2_for_spec(run.target)
            ref = breakdown_fidelity(run.ensemble, m2, run.depolarizing_p)
        else:
            ref = vstar_general(run.ensemble, o, depolarize(as_matrix(rho), run.depolarizing_p))
        analytic = {"V": ref.V, "Vstar": ref.Vstar, "VR": vr_combine(ref.V, ref.Vstar, run.R), "method": ref.method}
    except ThriftyError as exc:
        diagnostics["analytic_skipped"] = str(exc)

    diagnostics["mean_z"] = (stats.mean - truth) / stats.se_mean if stats.se_mean else None
    if analytic is not None:
        diagnostics["vR_z"] = (stats.vR_hat - analytic["VR"]) / stats.se_vR if stats.se_vR else None
    results = {"stats": stats.model_dump(), "expected_value": truth, "analytic": analytic}
    return _document(params, results, **diagnostics)


def _simulate_rows(doc: ReportDocument) -> tuple[list[str], list[dict[str, Any]]]:
    row = dict(doc.results["stats"])
    row["expected_value"] = doc.results["expected_value"]
    analytic = doc.results["analytic"] or {}
    for key in ("V", "Vstar", "VR"):
        row[f"analytic_{key}"] = analytic.get(key)
    return list(row), [row]


# -------------------------
# figure / verify
# -------------------------
def cmd_figure(params: FigureParams) -> ReportDocument:
    table = figure_dataset(params)
    return _document(params, table.model_dump(), **table.diagnostics)


def cmd_verify(params: VerifyParams) -> ReportDocument:
    report = run_suite(params.suite, seed=params.seed, cases=params.cases)
    return _document(params, report.model_dump(), passed=report.passed)


COMMANDS: dict[str, Callable[[Any], ReportDocument]] = {
    "analytic": cmd_analytic,
    "sre": cmd_sre,
    "crossmoment": cmd_crossmoment,
    "simulate": cmd_simulate,
    "figure": cmd_figure,
    "verify": cmd_verify,
}


def execute(request: CommandRequest) -> ReportDocument:
    params = request.typed_params()
    logger.info("running %s", request.subcommand)
    return COMMANDS[request.subcommand](params)


# -------------------------
# Output
# -------------------------
def resolve_output(path: str) -> Path:
    """Bare file names land in THRIFTY_OUTPUT_DIR; anything with a directory part is kept."""
    out = Path(path)
    if not out.is_absolute() and out.parent == Path("."):
        out = Path(config.OUTPUT_DIR) / out
    return out


def render_csv(subcommand: str, doc: ReportDocument) -> str:
    if subcommand == "figure":
        columns, rows = doc.results["columns"], doc.results["rows"]
    elif subcommand == "simulate":
        columns, rows = _simulate_rows(doc)
    else:
        raise InvalidParameter(f"csv output is only available for figure and simulate, not {subcommand}")
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if row.get(k) is None else row.get(k) for k in columns})
    return buffer.getvalue()


def render(request: CommandRequest, doc: ReportDocument) -> str:
    if request.format == "csv":
        return render_csv(request.subcommand, doc)
    return doc.model_dump_json(indent=2) + "\n"


def write_output(request: CommandRequest, text: str) -> Path | None:
    if request.output is None:
        sys.stdout.write(text)
        return None
    out = resolve_output(request.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    logger.info("wrote %s", out)
    return out


# -------------------------
# Argument parsing
# -------------------------
def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", "-o", help="output file; bare names go to THRIFTY_OUTPUT_DIR")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--log-level", default=None)


def _add_ensemble(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ensemble", choices=("fourdesign", "clifford", "interleaved", "simplet"))
    p.add_argument("--k", type=int, help="T gates per layer")
    p.add_argument("--l", type=int, help="interleaved layers")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thrifty", description="Thrifty shadow estimation lab")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("analytic", help="closed-form V, V_*, V_R and bounds")
    _add_ensemble(p)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--m2", type=float, help="stabilizer 2-Renyi entropy of the target")
    p.add_argument("--state", choices=("basis", "w", "w_theta", "phased_w", "snk", "haar"), help="target family")
    p.add_argument("--state-k", type=int, default=0)
    p.add_argument("--theta", type=float, default=0.0, help="radians")
    p.add_argument("--thetas", type=_float_list, help="comma-separated radians")
    p.add_argument("--state-seed", type=int)
    p.add_argument("--f", type=float, help="fidelity of rho with the target")
    p.add_argument("--p", type=float, help="depolarizing strength")
    p.add_argument("--fidelity-ideal", action="store_true")
    p.add_argument("--r", type=_int_list, help="comma-separated reuse counts")
    p.add_argument("--pair", help="JSON file with {'rho': matrix, 'observable': matrix}")
    _add_common(p)

    p = sub.add_parser("sre", help="stabilizer 2-Renyi entropy of a state family")
    p.add_argument("--family", required=True, choices=("w", "w_theta", "phased_w", "snk"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--thetas", type=_float_list)
    p.add_argument("--direct", action="store_true", help="also compute from the state vector")
    _add_common(p)

    p = sub.add_parser("crossmoment", help="cross moment operator at n <= 2")
    _add_ensemble(p)
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--export", help="binary operator export path")
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo run")
    p.add_argument("--config", help="JSON file mirroring RunConfig")
    _add_ensemble(p)
    p.add_argument("--n", type=int)
    p.add_argument("--R", type=int)
    p.add_argument("--circuits", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--target", choices=("basis", "w", "w_theta", "phased_w", "snk", "haar"))
    p.add_argument("--state-k", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--state-seed", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--workers", type=int)
    _add_common(p)

    p = sub.add_parser("figure", help="plot-ready dataset")
    p.add_argument("which")
    p.add_argument("--n", type=int)
    p.add_argument("--circuits", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--grid", type=_float_list)
    _add_common(p)

    p = sub.add_parser("verify", help="invariant suites")
    p.add_argument("suite")
    p.add_argument("--seed", type=int)
    p.add_argument("--cases", type=int)
    _add_common(p)

    p = sub.add_parser("request", help="run a CommandRequest JSON document")
    p.add_argument("file")
    p.add_argument("--log-level", default=None)

    p = sub.add_parser("schema", help="print the report JSON schema")
    p.add_argument("--log-level", default=None)
    return parser


def _drop_none(values: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in values.items() if v is not None}


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidParameter(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"{path} is not valid JSON: {exc}") from exc


def _analytic_params(args: argparse.Namespace) -> dict[str, Any]:
    params = _drop_none(
        {
            "ensemble": args.ensemble,
            "n": args.n,
            "d": args.d,
            "k": args.k,
            "l": args.l,
            "m2": args.m2,
            "f": args.f,
            "p": args.p,
            "r": args.r,
        }
    )
    if args.fidelity_ideal:
        params["fidelity_ideal"] = True
    if args.state is not None:
        require(args.n is not None, "--state needs --n")
        params["family"] = _drop_none(
            {
                "family": args.state,
                "n": args.n,
                "k": args.state_k,
                "theta": args.theta,
                "thetas": args.thetas,
                "seed": args.state_seed,
            }
        )
    if args.pair is not None:
        pair = _read_json(args.pair)
        params["rho"], params["observable"] = pair.get("rho"), pair.get("observable")
    return params


def _simulate_params(args: argparse.Namespace) -> dict[str, Any]:
    if args.config is not None:
        return {"run": _read_json(args.config)}
    require(args.n is not None and args.ensemble is not None, "simulate needs --config or --ensemble and --n")
    run = _drop_none(
        {
            "n": args.n,
            "ensemble": _drop_none({"kind": args.ensemble, "n": args.n, "k": args.k, "l": args.l}),
            "R": args.R,
            "num_circuits": args.circuits,
            "seed": args.seed,
            "target": _drop_none(
                {
                    "family": args.target or "basis",
                    "n": args.n,
                    "k": args.state_k,
                    "theta": args.theta,
                    "seed": args.state_seed,
                }
            ),
            "depolarizing_p": args.p,
            "workers": args.workers,
        }
    )
    return {"run": run}


def request_from_args(args: argparse.Namespace) -> CommandRequest:
    if args.subcommand == "request":
        return CommandRequest.model_validate(_read_json(args.file))
    if args.subcommand == "analytic":
        params = _analytic_params(args)
    elif args.subcommand == "sre":
        params = _drop_none(
            {"family": args.family, "n": args.n, "k": args.k, "theta": args.theta, "thetas": args.thetas}
        )
        if args.direct:
            params["direct"] = True
    elif args.subcommand == "crossmoment":
        params = _drop_none(
            {
                "ensemble": args.ensemble,
                "n": args.n,
                "k": args.k,
                "l": args.l,
                "samples": args.samples,
                "seed": args.seed,
                "export": args.export,
            }
        )
    elif args.subcommand == "simulate":
        params = _simulate_params(args)
    elif args.subcommand == "figure":
        params = _drop_none(
            {
                "which": args.which,
                "n": args.n,
                "circuits": args.circuits,
                "r": args.r,
                "seed": args.seed,
                "samples": args.samples,
                "grid": args.grid,
            }
        )
    else:
        params = _drop_none({"suite": args.suite, "seed": args.seed, "cases": args.cases})
    return CommandRequest(subcommand=args.subcommand, params=params, output=args.output, format=args.format)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config.configure_logging(args.log_level)

    if args.subcommand == "schema":
        sys.stdout.write(json.dumps(ReportDocument.model_json_schema(), indent=2) + "\n")
        return EXIT_OK

    try:
        request = request_from_args(args)
        doc = execute(request)
        write_output(request, render(request, doc))
    except (ThriftyError, ValidationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BAD_INPUT

    if request.subcommand == "verify" and not doc.diagnostics.get("passed", False):
        return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
