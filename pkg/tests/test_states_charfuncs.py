import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thrifty.errors import CutoffExceeded, DimensionMismatch, InvalidParameter, NotAState
from thrifty.pauli_clifford import pauli_from_index, pauli_matrix
from thrifty.schemas import StateSpec
from thrifty.states_charfuncs import (
    DenseState,
    basis_state,
    build_state,
    char_average_predictions,
    char_norms,
    char_vector,
    cross_chars,
    depolarize,
    fidelity_observable,
    haar_state,
    phased_w_bounds,
    purity,
    qubits_for_dim,
    random_density,
    random_traceless_observable,
    snk_state,
    sre2,
    sre2_closed,
    sre2_for_spec,
    top_d_sum,
    w_state,
    w_theta_state,
)


def _traces(a, n):
    return np.array([np.trace(a @ pauli_matrix(pauli_from_index(n, i))) for i in range(4**n)])


# -------------------------
# States
# -------------------------
def test_w_state_excites_one_qubit_per_term():
    amps = w_state(3).amplitudes
    support = sorted(np.flatnonzero(np.abs(amps) > 0))
    assert support == [1, 2, 4]
    assert np.allclose(np.abs(amps[support]) ** 2, 1 / 3)


def test_w_theta_phases_follow_the_qubit_position():
    theta = 0.3
    amps = w_theta_state(2, theta).amplitudes
    # qubit 0 is the most significant bit
    assert np.isclose(amps[2], np.exp(1j * theta) / np.sqrt(2))
    assert np.isclose(amps[1], np.exp(2j * theta) / np.sqrt(2))


def test_snk_puts_magic_factors_on_the_last_qubits():
    state = snk_state(3, 1, np.pi / 4)
    assert np.isclose(state.amplitudes[0], 1 / np.sqrt(2))
    assert np.isclose(state.amplitudes[1], np.exp(1j * np.pi / 4) / np.sqrt(2))
    with pytest.raises(InvalidParameter):
        snk_state(2, 3, 0.0)


def test_unnormalized_state_is_rejected():
    with pytest.raises(ValueError):
        DenseState(n=1, amplitudes=[1.0, 1.0])


def test_build_state_covers_the_families():
    assert np.allclose(build_state(StateSpec(family="basis", n=2, index=3)).amplitudes, [0, 0, 0, 1])
    assert np.allclose(build_state(StateSpec(family="w", n=2)).amplitudes, w_state(2).amplitudes)
    first = build_state(StateSpec(family="haar", n=2, seed=5))
    again = build_state(StateSpec(family="haar", n=2, seed=5))
    assert np.allclose(first.amplitudes, again.amplitudes), "seeded Haar states must repeat"


def test_depolarize_and_purity():
    rho = basis_state(1).density()
    assert np.isclose(purity(depolarize(rho, 1.0)), 0.5)
    assert np.isclose(purity(depolarize(rho, 0.5)), 0.625)
    with pytest.raises(InvalidParameter):
        depolarize(rho, 1.5)


def test_fidelity_observable_is_traceless():
    o = fidelity_observable(w_state(3))
    assert abs(np.trace(o)) < 1e-12


def test_qubits_for_dim():
    assert qubits_for_dim(8) == 3
    with pytest.raises(DimensionMismatch):
        qubits_for_dim(6)


# -------------------------
# Characteristic vectors
# -------------------------
def test_char_vector_of_zero_state():
    values = char_vector(basis_state(1)).values
    assert np.allclose(values, [1, 0, 1, 0]), values


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_char_vector_matches_explicit_traces(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(2, rng)
    assert np.allclose(char_vector(rho).values, _traces(rho, 2).real, atol=1e-10)


def test_char_norm_is_d_times_purity(rng):
    for n in (1, 2, 3, 4):
        rho = random_density(n, rng)
        assert np.isclose(char_vector(rho).norm2(), 2**n * purity(rho))


def test_twisted_values_match_explicit_traces(rng):
    n = 2
    rho = random_density(n, rng)
    o = random_traceless_observable(n, rng)
    pair = cross_chars(rho, o)
    expected = []
    for i in range(4**n):
        p = pauli_matrix(pauli_from_index(n, i))
        expected.append(np.trace(rho @ p @ o @ p).real)
    assert np.allclose(pair.twisted, expected, atol=1e-10)
    assert np.allclose(pair.cross, _traces(rho, n).real * _traces(o, n).real, atol=1e-10)


def test_cross_norm_chain(rng):
    for n in (1, 2, 3):
        d = 2**n
        rho = random_density(n, rng, rank=1)
        o = random_traceless_observable(n, rng)
        pair = cross_chars(rho, o)
        cross = pair.cross_norm2()
        assert np.isclose(pair.twisted_norm2(), cross)
        assert abs(pair.overlap()) <= cross + 1e-9
        top = top_d_sum(char_vector(o))
        assert cross <= top + 1e-9
        assert top <= d * np.real(np.trace(o @ o)) + 1e-9


def test_top_d_sum_of_stabilizer_state():
    assert np.isclose(top_d_sum(char_vector(basis_state(3))), 8.0)


def test_cross_chars_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cross_chars(basis_state(1), np.zeros((4, 4)))


def test_char_vector_cutoff():
    with pytest.raises(CutoffExceeded):
        char_vector(basis_state(9))


def test_char_norms_collects_the_same_quantities(rng):
    rho = haar_state(2, rng)
    o = random_traceless_observable(2, rng)
    norms = char_norms(rho, o)
    assert np.isclose(norms.purity, 1.0)
    assert np.isclose(norms.cross_norm2, cross_chars(rho, o).cross_norm2())
    assert np.isclose(norms.o_norm2, np.real(np.trace(o @ o)))


def test_char_average_predictions_rejects_bad_purity():
    assert char_average_predictions(4, 1.0, 1.0)["cross_norm2"] == pytest.approx(12 / 15)
    with pytest.raises(InvalidParameter):
        char_average_predictions(4, 0.1, 1.0)


# -------------------------
# Stabilizer 2-Renyi entropy
# -------------------------
def test_sre_of_stabilizer_states_is_zero():
    assert sre2(basis_state(3)) == pytest.approx(0.0, abs=1e-12)
    assert sre2(np.eye(4) / 4) == pytest.approx(0.0, abs=1e-12)


def test_sre_of_single_magic_qubit():
    assert sre2(snk_state(1, 1, np.pi / 4)) == pytest.approx(np.log2(4 / 3))


def test_sre_closed_forms_match_direct():
    for n in range(1, 6):
        assert sre2(w_state(n)) == pytest.approx(sre2_closed("w", n), abs=1e-9), n
        for theta in (0.2, np.pi / 4, 1.1):
            assert sre2(w_theta_state(n, theta)) == pytest.approx(sre2_closed("w_theta", n, theta=theta), abs=1e-9)
            assert sre2(snk_state(n, n, theta)) == pytest.approx(sre2_closed("snk", n, k=n, theta=theta), abs=1e-9)


def test_phased_w_closed_form_and_window(rng):
    for n in (2, 3, 4, 5):
        lower, upper = phased_w_bounds(n)
        phases = rng.uniform(0, 2 * np.pi, size=n)
        m2 = sre2_closed("phased_w", n, thetas=phases)
        assert m2 == pytest.approx(sre2(w_state(n, phases)), abs=1e-9)
        assert lower - 1e-12 <= m2 <= upper + 1e-12
    assert phased_w_bounds(4)[0] == pytest.approx(sre2_closed("w", 4))


def test_sre_reference_values():
    assert sre2_closed("w", 10) == pytest.approx(np.log2(1000 / 64))
    assert sre2_closed("snk", 20, k=2, theta=np.pi / 4) == pytest.approx(0.830075, abs=1e-6)
    # removable singularity at theta = 0
    assert sre2_closed("w_theta", 5, theta=0.0) == pytest.approx(sre2_closed("w", 5))


def test_sre_for_spec_uses_the_closed_forms():
    assert sre2_for_spec(StateSpec(family="basis", n=4)) == 0.0
    spec = StateSpec(family="snk", n=6, k=2, theta=np.pi / 4)
    assert sre2_for_spec(spec) == pytest.approx(2 * np.log2(4 / 3))


def test_sre_rejects_non_states():
    with pytest.raises(NotAState):
        sre2(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidParameter):
        sre2_closed("phased_w", 3, thetas=[0.0, 1.0])
