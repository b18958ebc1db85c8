# thrifty/shadow_sim.py
"""
Monte Carlo engine for thrifty shadow estimation.

Each of `num_circuits` sampled unitaries is applied R times to fresh copies
of the input state; every shot yields the snapshot value
(d+1) <b|U O U^dagger|b> for the measured outcome b.  The circuits x R table
is split by one-way ANOVA into the single-shot variance V and the reuse
overhead V_*.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from thrifty import config
from thrifty.errors import DimensionMismatch, InvalidParameter, check_cutoff, require
from thrifty.pauli_clifford import Gate, GateSequence, apply_circuit, clifford_to_circuit, random_clifford
from thrifty.schemas import EnsembleSpec, RunConfig
from thrifty.states_charfuncs import (
    DenseState,
    as_matrix,
    build_state,
    check_state,
    check_traceless,
    fidelity_observable,
    haar_unitary,
)

logger = logging.getLogger(__name__)


# -------------------------
# Ensemble sampling
# -------------------------
def _t_layer(n: int, k: int) -> tuple[Gate, ...]:
    return tuple(Gate("T", (q,)) for q in range(n - k, n))


def sample_unitary(ensemble: EnsembleSpec, rng: np.random.Generator) -> GateSequence:
    """
    One draw from the ensemble as a gate sequence (first gate applied first).

    T gates always sit on the last k qubits, n-k..n-1.
    """
    spec = ensemble.normalized()
    n = spec.n

    if spec.kind == "fourdesign":
        check_cutoff(n, config.HAAR_SAMPLING_MAX_QUBITS, "dense Haar sampling for the 4-design ensemble")
        return GateSequence(n=n, gates=(Gate("UNITARY", tuple(range(n)), haar_unitary(n, rng)),))

    seq = clifford_to_circuit(random_clifford(n, rng))
    if spec.kind == "clifford":
        return seq

    if spec.kind == "interleaved":
        for _ in range(spec.l):
            layer = GateSequence(n=n, gates=_t_layer(n, spec.k))
            seq = seq + layer + clifford_to_circuit(random_clifford(n, rng))
        return seq

    # simplet: (HT) on each of the last k qubits after the Clifford block
    suffix: list[Gate] = []
    for q in range(n - spec.k, n):
        suffix.extend((Gate("T", (q,)), Gate("H", (q,))))
    return seq + GateSequence(n=n, gates=tuple(suffix))


# -------------------------
# Snapshots
# -------------------------
class _Spectral(NamedTuple):
    """A = vectors @ diag(weights) @ vectors^dagger + shift * 1."""

    weights: np.ndarray
    vectors: np.ndarray
    shift: float = 0.0


def _spectral(x: DenseState | np.ndarray, shift: float = 0.0) -> _Spectral:
    if isinstance(x, DenseState):
        return _Spectral(np.ones(1), np.asarray(x.amplitudes).reshape(-1, 1), shift)
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        return _Spectral(np.ones(1), arr.reshape(-1, 1), shift)
    weights, vectors = np.linalg.eigh((arr + arr.conj().T) / 2)
    keep = np.abs(weights) > config.ATOL_STATE
    return _Spectral(weights[keep], vectors[:, keep], shift)


def _rotated_diagonal(seq: GateSequence, spec: _Spectral) -> np.ndarray:
    # diag(U A U^dagger) without building U
    rotated = apply_circuit(seq, spec.vectors)
    return (np.abs(rotated) ** 2) @ spec.weights + spec.shift


def _observable(o: DenseState | np.ndarray) -> _Spectral:
    """A DenseState stands for its fidelity observable |phi><phi| - 1/d."""
    if isinstance(o, DenseState):
        return _spectral(o, shift=-1.0 / o.dim)
    mat = as_matrix(o)
    check_traceless(mat)
    return _spectral(mat)


def _input_state(rho: DenseState | np.ndarray) -> _Spectral:
    if isinstance(rho, DenseState):
        return _spectral(rho)
    arr = np.asarray(rho, dtype=complex)
    if arr.ndim == 2:
        check_state(arr)
    return _spectral(arr)


def snapshot_values(seq: GateSequence, o: DenseState | np.ndarray) -> np.ndarray:
    """(d+1) <b|U O U^dagger|b> for every outcome b."""
    spec = _observable(o)
    d = spec.vectors.shape[0]
    if d != 2**seq.n:
        raise DimensionMismatch(f"observable has dimension {d}, circuit acts on {seq.n} qubits")
    return (d + 1) * _rotated_diagonal(seq, spec)


def snapshot_estimate(seq: GateSequence, o: DenseState | np.ndarray, b: int) -> float:
    d = 2**seq.n
    require(0 <= b < d, f"outcome {b} outside [0, {d})")
    return float(snapshot_values(seq, o)[b])


def fidelity_snapshot(rotated: DenseState, b: int) -> float:
    """Snapshot of O = |phi><phi| - 1/d from the rotated target U|phi>."""
    d = rotated.dim
    require(0 <= b < d, f"outcome {b} outside [0, {d})")
    return (d + 1) * float(abs(rotated.amplitudes[b]) ** 2) - (d + 1) / d


def outcome_probabilities(seq: GateSequence, rho: DenseState | np.ndarray, p: float = 0.0) -> np.ndarray:
    """Born probabilities of U rho_p U^dagger, rho_p the globally depolarized input."""
    require(0.0 <= p <= 1.0, f"depolarizing strength must be in [0, 1] (got {p})")
    probs = _rotated_diagonal(seq, _input_state(rho))
    return _normalize((1 - p) * probs + p / probs.size)


def _normalize(probs: np.ndarray) -> np.ndarray:
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def exact_snapshot_mean(seq: GateSequence, rho: DenseState | np.ndarray, o: DenseState | np.ndarray) -> float:
    """E_b of the snapshot for one fixed unitary."""
    return float(outcome_probabilities(seq, rho) @ snapshot_values(seq, o))


def expected_value(rho: DenseState | np.ndarray, o: DenseState | np.ndarray) -> float:
    """tr(O rho), the quantity every snapshot estimates without bias."""
    mat_o = fidelity_observable(o) if isinstance(o, DenseState) else as_matrix(o)
    return float(np.real(np.trace(mat_o @ as_matrix(rho))))


# -------------------------
# ANOVA estimators
# -------------------------
class EstimatorStats(BaseModel):
    """
    One-way ANOVA summary of a circuits x R table of snapshot values.

    E[ms_between] = V + (R-1) V_*, E[ms_within] = V - V_*; hence
    vstar_hat = (ms_between - ms_within)/R, v_hat = vstar_hat + ms_within
    and vR_hat = ms_between/R. With R = 1 only V (= V_R) is identifiable.
    """

    model_config = ConfigDict(frozen=True)

    mean: float
    vR_hat: float
    v_hat: float
    vstar_hat: float | None
    se_mean: float
    se_vR: float
    se_v: float | None
    se_vstar: float | None
    circuits: int
    reuses: int
    ms_between: float
    ms_within: float | None
    f_statistic: float | None
    p_value: float | None


def _se(contributions: np.ndarray) -> float:
    return float(np.std(contributions, ddof=1) / np.sqrt(contributions.size))


def estimate_stats(values: np.ndarray) -> EstimatorStats:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise InvalidParameter(f"expected a circuits x R table, got shape {values.shape}")
    circuits, reuses = values.shape
    if circuits < 2:
        raise InvalidParameter("between-circuit variance needs at least 2 circuits")
    if reuses < 1:
        raise InvalidParameter("every circuit needs at least one shot")

    row_means = values.mean(axis=1)
    mean = float(row_means.mean())
    # per-circuit contributions: their averages are the estimators below
    between = circuits / (circuits - 1) * (row_means - mean) ** 2
    vr_hat = float(between.mean())
    ms_between = reuses * vr_hat

    if reuses == 1:
        return EstimatorStats(
            mean=mean,
            vR_hat=vr_hat,
            v_hat=vr_hat,
            vstar_hat=None,
            se_mean=float(np.sqrt(vr_hat / circuits)),
            se_vR=_se(between),
            se_v=_se(between),
            se_vstar=None,
            circuits=circuits,
            reuses=reuses,
            ms_between=ms_between,
            ms_within=None,
            f_statistic=None,
            p_value=None,
        )

    within = values.var(axis=1, ddof=1)
    ms_within = float(within.mean())
    vstar_c = between - within / reuses
    v_c = between + (1 - 1 / reuses) * within

    f_statistic = p_value = None
    if ms_within > 0:
        f_statistic = ms_between / ms_within
        p_value = float(stats.f.sf(f_statistic, circuits - 1, circuits * (reuses - 1)))

    return EstimatorStats(
        mean=mean,
        vR_hat=vr_hat,
        v_hat=float(v_c.mean()),
        vstar_hat=float(vstar_c.mean()),
        se_mean=float(np.sqrt(vr_hat / circuits)),
        se_vR=_se(between),
        se_v=_se(v_c),
        se_vstar=_se(vstar_c),
        circuits=circuits,
        reuses=reuses,
        ms_between=ms_between,
        ms_within=ms_within,
        f_statistic=f_statistic,
        p_value=p_value,
    )


# -------------------------
# Runs
# -------------------------
def resolve_inputs(
    run: RunConfig,
    state: DenseState | np.ndarray | None = None,
    observable: DenseState | np.ndarray | None = None,
) -> tuple[DenseState | np.ndarray, DenseState | np.ndarray]:
    """Input state and observable of a run; explicit arguments override the config."""
    target = build_state(run.target)
    rho = target if state is None else state
    if observable is not None:
        o: DenseState | np.ndarray = observable
    elif run.observable.kind == "fidelity":
        o = target
    else:
        o = run.observable.matrix.to_array()
    d = 2**run.n
    for what, x in (("state", rho), ("observable", o)):
        size = x.dim if isinstance(x, DenseState) else np.asarray(x).shape[0]
        if size != d:
            raise DimensionMismatch(f"{what} has dimension {size}, run is on n={run.n}")
    return rho, o


def _parallel_rows(fn: Callable[[int], Any], count: int, workers: int) -> list[Any]:
    # ordered map: row i always belongs to circuit i
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, range(count)))
    return [fn(i) for i in range(count)]


def circuit_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def simulate_values(
    run: RunConfig,
    state: DenseState | np.ndarray | None = None,
    observable: DenseState | np.ndarray | None = None,
) -> np.ndarray:
    """The raw circuits x R snapshot table."""
    rho, o = resolve_inputs(run, state, observable)
    rho_spec, o_spec = _input_state(rho), _observable(o)
    d = 2**run.n

    def one_circuit(i: int) -> np.ndarray:
        rng = circuit_rng(run.seed, i)
        seq = sample_unitary(run.ensemble, rng)
        probs = _normalize((1 - run.depolarizing_p) * _rotated_diagonal(seq, rho_spec) + run.depolarizing_p / d)
        snaps = (d + 1) * _rotated_diagonal(seq, o_spec)
        outcomes = rng.choice(d, size=run.R, p=probs)
        if i and i % 1000 == 0:
            logger.debug("circuit %d / %d", i, run.num_circuits)
        return snaps[outcomes]

    return np.vstack(_parallel_rows(one_circuit, run.num_circuits, run.workers))


def run_experiment(
    run: RunConfig,
    state: DenseState | np.ndarray | None = None,
    observable: DenseState | np.ndarray | None = None,
) -> EstimatorStats:
    result = estimate_stats(simulate_values(run, state, observable))
    logger.info(
        "%s n=%d R=%d circuits=%d p=%.3g: mean=%.6g vR=%.6g vstar=%s",
        run.ensemble.label(),
        run.n,
        run.R,
        run.num_circuits,
        run.depolarizing_p,
        result.mean,
        result.vR_hat,
        "n/a" if result.vstar_hat is None else f"{result.vstar_hat:.6g}",
    )
    return result


class SweepPoint(BaseModel):
    p: float
    stats: EstimatorStats


def run_depolarizing_sweep(
    run: RunConfig,
    grid: list[float],
    state: DenseState | np.ndarray | None = None,
    observable: DenseState | np.ndarray | None = None,
) -> list[SweepPoint]:
    """
    Same circuits and the same uniforms at every p (common random numbers);
    outcomes come from the inverse CDF of the exact mixture distribution.
    """
    require(len(grid) > 0, "depolarizing grid is empty")
    for p in grid:
        require(0.0 <= p <= 1.0, f"depolarizing strength must be in [0, 1] (got {p})")
    rho, o = resolve_inputs(run, state, observable)
    rho_spec, o_spec = _input_state(rho), _observable(o)
    d = 2**run.n
    ps = np.asarray(grid, dtype=float)

    def one_circuit(i: int) -> np.ndarray:
        rng = circuit_rng(run.seed, i)
        seq = sample_unitary(run.ensemble, rng)
        ideal = _rotated_diagonal(seq, rho_spec)
        snaps = (d + 1) * _rotated_diagonal(seq, o_spec)
        uniforms = rng.random(run.R)
        rows = np.empty((ps.size, run.R))
        for j, p in enumerate(ps):
            cdf = np.cumsum(_normalize((1 - p) * ideal + p / d))
            outcomes = np.minimum(np.searchsorted(cdf, uniforms, side="right"), d - 1)
            rows[j] = snaps[outcomes]
        return rows

    table = np.stack(_parallel_rows(one_circuit, run.num_circuits, run.workers), axis=1)
    points = [SweepPoint(p=float(p), stats=estimate_stats(table[j])) for j, p in enumerate(ps)]
    logger.info("depolarizing sweep over %d points, %d circuits each", len(points), run.num_circuits)
    return points
