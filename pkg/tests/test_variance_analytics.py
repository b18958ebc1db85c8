import numpy as np
import pytest

from thrifty.errors import DimensionMismatch, InvalidParameter, NotAState
from thrifty.pauli_clifford import pauli_from_index, pauli_matrix
from thrifty.schemas import EnsembleSpec
from thrifty.states_charfuncs import (
    basis_state,
    depolarize,
    fidelity_observable,
    haar_state,
    random_density,
    random_traceless_observable,
    sre2,
    w_state,
)
from thrifty.variance_analytics import (
    alpha_beta,
    alpha_beta_chain,
    average_fidelity,
    breakdown_fidelity,
    clifford_bound_chain,
    depolarized_v_argmax,
    ensemble_averages,
    ensemble_vstar_bounds,
    fidelity_t_window,
    fidelity_vstar_o_bound,
    g_coefficients,
    pauli_variances,
    v_fidelity,
    v_fidelity_depolarized,
    v_fidelity_max,
    v_haar_depolarized_quadratic,
    v_single,
    v_triangle,
    v_triangle_fidelity,
    vr_combine,
    vstar_4design_fidelity,
    vstar_clifford,
    vstar_clifford_fidelity,
    vstar_fidelity,
    vstar_from_g,
    vstar_general,
    vstar_tuk_fidelity,
    vstar_ukl,
    vtriangle_bounds,
    xi_fidelity,
    xi_traces,
)

MAGIC_M2 = float(np.log2(4 / 3))


def _pair(rng, n):
    return random_traceless_observable(n, rng), random_density(n, rng)


# -------------------------
# Closed-form reference values
# -------------------------
def test_single_shot_variance_values():
    assert v_fidelity(2, 1.0) == pytest.approx(0.5)
    phi = basis_state(1)
    assert v_single(fidelity_observable(phi), phi) == pytest.approx(0.5)
    v_max, f_max = v_fidelity_max(8)
    assert f_max == pytest.approx(0.8)
    assert v_fidelity(8, f_max) == pytest.approx(v_max)


def test_vstar_reference_values():
    assert vstar_4design_fidelity(4) == pytest.approx(2 / 7)
    assert vstar_clifford_fidelity(2, 0.0) == pytest.approx(0.5)
    assert vstar_tuk_fidelity(2, 0.0, 1) == pytest.approx(1 / 8)
    assert vstar_tuk_fidelity(2, MAGIC_M2, 1) == pytest.approx(7 / 32)


def test_stabilizer_clifford_vstar():
    for d in (2, 4, 64, 2**20):
        assert vstar_clifford_fidelity(d, 0.0) == pytest.approx((2 * d - 2) / (d + 2))


def test_clifford_meets_4design_at_the_magic_threshold():
    for d in (4, 8, 16, 32):
        m2 = float(np.log2((d + 3) / 4))
        assert vstar_clifford_fidelity(d, m2) == pytest.approx(vstar_4design_fidelity(d))


def test_vr_combine():
    assert vr_combine(0.5, 0.2, 1) == 0.5
    assert vr_combine(0.5, 0.2, 10) == pytest.approx(0.05 + 0.18)
    with pytest.raises(InvalidParameter):
        vr_combine(0.5, 0.2, 0)


def test_negative_m2_is_rejected():
    with pytest.raises(InvalidParameter):
        vstar_clifford_fidelity(4, -0.1)


# -------------------------
# Reduction to the Clifford group
# -------------------------
@pytest.mark.parametrize(
    "spec",
    [
        EnsembleSpec(kind="interleaved", n=3, k=2, l=0),
        EnsembleSpec(kind="interleaved", n=3, k=0, l=4),
        EnsembleSpec(kind="simplet", n=3, k=0),
    ],
)
def test_reduced_ensembles_are_clifford(spec):
    assert spec.normalized().kind == "clifford"
    for m2 in (0.0, 0.7):
        assert vstar_fidelity(spec, m2) == pytest.approx(vstar_clifford_fidelity(8, m2))


def test_t_gates_beyond_n_are_rejected():
    with pytest.raises(ValueError):
        EnsembleSpec(kind="simplet", n=2, k=3)
    with pytest.raises(InvalidParameter):
        vstar_tuk_fidelity(4, 0.0, 3)


def test_negative_layer_and_t_counts_are_rejected(rng):
    o, rho = _pair(rng, 2)
    with pytest.raises(InvalidParameter):
        vstar_ukl(o, rho, 1, -1)
    with pytest.raises(InvalidParameter):
        g_coefficients("interleaved", 4, 1, -1)
    with pytest.raises(InvalidParameter):
        g_coefficients("simplet", 4, -1)
    with pytest.raises(ValueError):
        EnsembleSpec(kind="interleaved", n=2, k=1, l=-1)


# -------------------------
# Dense pairs against closed forms
# -------------------------
def test_xi_fidelity_matches_dense_traces():
    for phi in (w_state(2), w_state(3), haar_state(2, np.random.default_rng(1))):
        d = phi.dim
        xi = xi_traces(fidelity_observable(phi), phi).as_array()
        assert np.allclose(xi, xi_fidelity(d, sre2(phi)).as_array(), atol=1e-9)


@pytest.mark.parametrize(
    "spec",
    [
        EnsembleSpec(kind="clifford", n=3),
        EnsembleSpec(kind="fourdesign", n=3),
        EnsembleSpec(kind="interleaved", n=3, k=1, l=2),
        EnsembleSpec(kind="interleaved", n=3, k=3, l=1),
        EnsembleSpec(kind="simplet", n=3, k=1),
        EnsembleSpec(kind="simplet", n=3, k=2),
    ],
)
def test_dense_fidelity_pair_matches_closed_form(spec):
    phi = w_state(3)
    dense = vstar_general(spec, fidelity_observable(phi), phi)
    assert dense.Vstar == pytest.approx(vstar_fidelity(spec, sre2(phi)), abs=1e-9)
    assert dense.V == pytest.approx(v_fidelity(8, 1.0))


def test_clifford_g_path_matches_closed_form(rng):
    for n in (1, 2, 3):
        o, rho = _pair(rng, n)
        d = 2**n
        g_path = vstar_from_g(g_coefficients("clifford", d), xi_traces(o, rho), d)
        assert g_path == pytest.approx(vstar_clifford(o, rho), abs=1e-9)


def test_xi_pauli_matches_dense(rng):
    for n in (1, 2):
        o, rho = _pair(rng, n)
        assert np.allclose(xi_traces(o, rho).as_array(), xi_traces(o, rho, "dense").as_array(), atol=1e-9)


def test_pauli_observable_variances(rng):
    assert pauli_variances(basis_state(1), 2) == pytest.approx((2.0, 2.0))
    rho = random_density(2, rng)
    for idx in (1, 6, 15):
        p = pauli_matrix(pauli_from_index(2, idx))
        v, vstar = pauli_variances(rho, idx)
        assert v == pytest.approx(v_single(p, rho))
        assert vstar == pytest.approx(vstar_clifford(p, rho))
    with pytest.raises(InvalidParameter):
        pauli_variances(rho, 0)


def test_v_triangle_fidelity_matches_dense():
    phi = w_state(4)
    assert v_triangle(fidelity_observable(phi), phi) == pytest.approx(v_triangle_fidelity(16, sre2(phi)))


def test_pair_checks():
    with pytest.raises(InvalidParameter):
        v_single(np.eye(2), basis_state(1))
    with pytest.raises(DimensionMismatch):
        vstar_general(EnsembleSpec(kind="clifford", n=2), fidelity_observable(basis_state(1)), basis_state(1))
    spec = EnsembleSpec(kind="simplet", n=1, k=1)
    z = np.diag([1.0, -1.0])
    with pytest.raises(NotAState):
        vstar_general(spec, z, np.diag([1.5, -0.5]))
    with pytest.raises(NotAState):
        vstar_general(spec, z, np.diag([0.5, 0.0]))


# -------------------------
# Depolarizing noise
# -------------------------
def test_depolarizing_scales_vstar_quadratically(rng):
    o, rho = _pair(rng, 2)
    base = vstar_clifford(o, rho)
    for p in (0.1, 0.5, 0.9):
        assert vstar_clifford(o, depolarize(rho, p)) == pytest.approx((1 - p) ** 2 * base, abs=1e-9)


def test_depolarized_v_quadratic_form():
    for d in (2, 4, 16):
        for p in np.linspace(0, 1, 7):
            assert v_haar_depolarized_quadratic(d, p) == pytest.approx(v_fidelity_depolarized(d, p))
        peak = depolarized_v_argmax(d)
        if peak <= 1:
            assert v_fidelity_depolarized(d, peak) >= v_fidelity_depolarized(d, min(1.0, peak + 0.05))


def test_breakdown_fidelity_with_noise():
    spec = EnsembleSpec(kind="clifford", n=2)
    clean = breakdown_fidelity(spec, 0.0)
    noisy = breakdown_fidelity(spec, 0.0, 0.5)
    assert noisy.Vstar == pytest.approx(0.25 * clean.Vstar)
    assert noisy.method == "closed:clifford-fidelity"
    assert noisy.vr(1) == pytest.approx(noisy.V)


# -------------------------
# Averages and bounds
# -------------------------
def test_average_fidelity_over_haar_targets():
    for d in (2, 8):
        v, vstar = average_fidelity(d)
        assert v == pytest.approx(v_fidelity(d, 1.0))
        assert vstar == pytest.approx(vstar_4design_fidelity(d))


def test_ensemble_averages():
    v_bar, vstar_bar = ensemble_averages(4, 1.0, 1.0)
    assert v_bar == pytest.approx(6 / 5)
    assert vstar_bar == pytest.approx(1 / 5)
    assert ensemble_averages(4, 0.25, 1.0)[1] == pytest.approx(0.0)
    with pytest.raises(InvalidParameter):
        ensemble_averages(4, 0.1, 1.0)


def test_bound_chains_hold(rng):
    for n in (1, 2, 3):
        o, rho = _pair(rng, n)
        assert clifford_bound_chain(o, rho)["holds"]
        bounds = vtriangle_bounds(o, rho)
        for key in ("sre_bound", "inf_bound", "top_d_bound"):
            assert bounds["v_triangle"] <= bounds[key] + 1e-9, key


def test_ensemble_vstar_bounds_cover_vstar(rng):
    o, rho = _pair(rng, 2)
    for spec in (EnsembleSpec(kind="clifford", n=2), EnsembleSpec(kind="simplet", n=2, k=1)):
        vstar = vstar_general(spec, o, rho).Vstar
        assert all(vstar <= value + 1e-9 for value in ensemble_vstar_bounds(spec, o, rho).values())


def test_fidelity_bounds():
    spec = EnsembleSpec(kind="clifford", n=3)
    phi = w_state(3)
    assert vstar_clifford(fidelity_observable(phi), phi) <= fidelity_vstar_o_bound(spec, sre2(phi))
    window = fidelity_t_window(EnsembleSpec(kind="simplet", n=6, k=2), 1.0)
    assert window["lower"] < window["vstar"] < window["upper"]


def test_alpha_beta_chain():
    assert alpha_beta_chain(2**5, 2, 3)["holds"]
    assert alpha_beta(2, 1).beta == pytest.approx(8 / 12)
    with pytest.raises(InvalidParameter):
        alpha_beta(4, 0)
