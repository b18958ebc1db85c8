from functools import reduce

import numpy as np
import pytest

from thrifty.cross_moment_lab import (
    SmallOperator,
    big_r,
    compose,
    cycle_count,
    cycle_label,
    dimension_formulas,
    dimension_table,
    export_operator,
    g_double_cosets,
    gi_fit,
    gram_spectrum,
    kappa_extract,
    lambda12,
    lambda12_computational,
    lambda12_t_basis,
    load_operator,
    omega_closed,
    omega_empirical,
    omega_from_g,
    omega_norms,
    orbit_members,
    orbit_operators,
    partial_trace_last,
    perm_from_cycles,
    projectors,
    sigma44_enumerate,
    support_leak,
    t_basis,
    two_design_marginal,
    vstar_via_omega,
)
from thrifty.errors import CutoffExceeded, InvalidParameter
from thrifty.pauli_clifford import clifford_to_circuit, dense_unitary, enumerate_clifford, random_clifford
from thrifty.schemas import EnsembleSpec
from thrifty.states_charfuncs import random_density, random_traceless_observable
from thrifty.variance_analytics import g_coefficients, vstar_clifford, vstar_fidelity


def _max_abs(a):
    return float(np.abs(a.toarray() if hasattr(a, "toarray") else a).max())


# -------------------------
# Permutations
# -------------------------
def test_cycle_notation_round_trip():
    for text in ("e", "(12)", "(123)", "(1324)", "(12)(34)"):
        assert cycle_label(perm_from_cycles(text)) == text
    assert cycle_count(perm_from_cycles("(12)(34)")) == 2
    assert cycle_count(perm_from_cycles("e")) == 4


def test_compose_is_a_after_b():
    a, b = perm_from_cycles("(12)"), perm_from_cycles("(23)")
    assert cycle_label(compose(a, b)) == "(123)"


def test_bad_cycles_are_rejected():
    with pytest.raises(InvalidParameter):
        perm_from_cycles("(15)")


# -------------------------
# Sigma_{4,4}
# -------------------------
def test_sigma44_has_thirty_valid_subspaces():
    subspaces = sigma44_enumerate()
    assert len(subspaces) == 30
    assert len({t.elements for t in subspaces}) == 30
    assert all(t.is_valid() for t in subspaces)
    assert [t.kind for t in subspaces].count("coset") == 6


def test_orbits_partition_sigma44():
    sizes = [len(orbit_members(i)) for i in range(1, 6)]
    assert sizes == [4, 16, 4, 2, 4]
    listed = {frozenset(t.elements for t in orbit_members(i)) for i in range(1, 6)}
    assert listed == set(g_double_cosets())


def test_gram_ranks():
    assert tuple(gram_spectrum(n).rank for n in (1, 2, 3)) == (15, 29, 30)


def test_gram_eigenvalue_multiplicities_at_n3():
    spectrum = gram_spectrum(3)
    eig = np.asarray(spectrum.eigenvalues)
    for label, (value, mult) in spectrum.predicted.items():
        assert int(np.sum(np.isclose(eig, value, rtol=1e-9))) == mult, label


def test_dimension_table_matches_formulas():
    for d in (2, 4, 8, 16):
        assert dimension_table(d) == dimension_formulas(d)


def test_projector_traces_match_dimension_table():
    p = projectors(1)
    table = dimension_table(2)
    for lam in ("4", "31", "22"):
        assert np.isclose(p[f"P{lam}G"].diagonal().sum(), float(table[lam]["D"]))
        assert np.isclose(p[f"P{lam}G+"].diagonal().sum(), float(table[lam]["D+"]))
    p4g = p["P4G"].toarray()
    assert np.allclose(p4g @ p4g, p4g)


def test_r_commutes_with_clifford_tensor_power(rng):
    ops = [big_r(t, 1) for t in sigma44_enumerate()]
    for _ in range(5):
        u = dense_unitary(clifford_to_circuit(random_clifford(1, rng)))
        u4 = reduce(np.kron, [u] * 4)
        for op in ops:
            assert np.allclose(op @ u4, u4 @ op)


def test_r_construction_cutoff():
    with pytest.raises(CutoffExceeded):
        big_r(sigma44_enumerate()[0], 4)


# -------------------------
# Omega
# -------------------------
def test_single_qubit_clifford_omega():
    omega = omega_empirical(EnsembleSpec(kind="clifford", n=1))
    ops = orbit_operators(1)
    assert omega.exact and omega.samples == 24
    assert np.allclose(omega.dense(), ((ops[0] + ops[3]) / 12).toarray())
    assert np.allclose(omega.dense(), omega_closed(EnsembleSpec(kind="clifford", n=1)).dense())


def test_explicit_unitary_list_matches_enumeration():
    unitaries = [dense_unitary(clifford_to_circuit(c)) for c in enumerate_clifford(1)]
    explicit = omega_empirical(unitaries=unitaries, workers=3, batch_size=5)
    assert np.allclose(explicit.dense(), omega_empirical(EnsembleSpec(kind="clifford", n=1)).dense())


def test_vstar_via_omega_matches_clifford_closed_form(rng):
    omega = omega_empirical(EnsembleSpec(kind="clifford", n=1))
    for _ in range(5):
        o, rho = random_traceless_observable(1, rng), random_density(1, rng)
        assert vstar_via_omega(omega, o, rho) == pytest.approx(vstar_clifford(o, rho), abs=1e-10)


@pytest.mark.parametrize("n", [1, 2])
def test_closed_omega_structure(n):
    d = 2**n
    for kind in ("clifford", "fourdesign"):
        omega = omega_closed(EnsembleSpec(kind=kind, n=n))
        assert support_leak(omega) < 1e-10
        assert np.allclose(partial_trace_last(omega), two_design_marginal(d))
    norms = omega_norms(omega_closed(EnsembleSpec(kind="fourdesign", n=n)))
    assert norms["schatten1"] == pytest.approx(d * d)
    assert norms["schatten_inf"] == pytest.approx(4 / (d * (d + 1)))


@pytest.mark.parametrize(
    "spec",
    [
        EnsembleSpec(kind="clifford", n=2),
        EnsembleSpec(kind="fourdesign", n=2),
        EnsembleSpec(kind="interleaved", n=2, k=1, l=1),
        EnsembleSpec(kind="interleaved", n=2, k=2, l=3),
    ],
)
def test_g_path_matches_kappa_path(spec):
    g_path = omega_from_g(g_coefficients(spec.kind, 4, spec.k, spec.l), 2)
    assert _max_abs(g_path - omega_closed(spec).matrix) < 1e-10


def test_closed_omega_reproduces_fidelity_vstar():
    phi = np.array([1, 1j, 0, 0]) / np.sqrt(2)
    o = np.outer(phi, phi.conj()) - np.eye(4) / 4
    spec = EnsembleSpec(kind="clifford", n=2)
    # phi is a stabilizer state
    assert vstar_via_omega(omega_closed(spec), o, phi) == pytest.approx(vstar_fidelity(spec, 0.0))


def test_gi_fit_recovers_g_at_n2():
    spec = EnsembleSpec(kind="interleaved", n=2, k=1, l=2)
    g = g_coefficients(spec.kind, 4, spec.k, spec.l)
    fit = gi_fit(omega_closed(spec))
    assert fit.unique
    assert fit.residual < 1e-9
    assert np.allclose(fit.g, g, atol=1e-10)


def test_gi_fit_at_n1_pins_g5():
    fit = gi_fit(omega_closed(EnsembleSpec(kind="clifford", n=1)))
    assert not fit.unique
    assert fit.g[4] == 0.0
    assert fit.residual < 1e-9


@pytest.mark.slow
def test_two_qubit_clifford_enumeration():
    d = 4
    omega = omega_empirical(EnsembleSpec(kind="clifford", n=2), workers=4)
    assert omega.samples == 11520
    assert _max_abs(omega.dense() - omega_closed(EnsembleSpec(kind="clifford", n=2)).dense()) < 1e-10
    kappa = kappa_extract(omega)
    assert kappa.k4_plus == pytest.approx(2 / (d + 1))
    assert kappa.k31 == pytest.approx(4 / ((d + 1) * (d + 2)))


@pytest.mark.slow
def test_sampled_haar_omega_converges():
    omega = omega_empirical(EnsembleSpec(kind="fourdesign", n=1), samples=20000, rng=np.random.default_rng(3))
    assert not omega.exact
    closed = omega_closed(EnsembleSpec(kind="fourdesign", n=1)).dense()
    assert _max_abs(omega.dense() - closed) < 0.05


@pytest.mark.slow
@pytest.mark.parametrize(
    "spec",
    [
        EnsembleSpec(kind="simplet", n=1, k=1),
        EnsembleSpec(kind="interleaved", n=1, k=1, l=1),
        EnsembleSpec(kind="interleaved", n=2, k=1, l=1),
        EnsembleSpec(kind="interleaved", n=2, k=2, l=1),
        EnsembleSpec(kind="simplet", n=2, k=2),
        EnsembleSpec(kind="fourdesign", n=2),
    ],
    ids=lambda spec: f"{spec.label()}-n{spec.n}",
)
def test_circuit_sampled_omega_matches_closed_form(spec):
    samples, tol = (20000, 0.05) if spec.n == 1 else (10000, 0.02)
    omega = omega_empirical(spec, samples=samples, rng=np.random.default_rng(40 + spec.n))
    closed = omega_closed(spec)
    assert _max_abs(omega.dense() - closed.dense()) < tol
    fit = gi_fit(omega)
    assert _max_abs(omega_from_g(fit.g, spec.n).toarray() - closed.dense()) < tol
    if fit.unique:
        g = g_coefficients(spec.kind, spec.d, spec.k, spec.l)
        assert np.allclose(fit.g, g, atol=5e-3), (fit.g, g)


def test_sampled_omega_needs_an_rng():
    with pytest.raises(InvalidParameter):
        omega_empirical(EnsembleSpec(kind="simplet", n=1, k=1), samples=10)


def test_sampled_omega_is_reproducible():
    spec = EnsembleSpec(kind="interleaved", n=1, k=1, l=2)
    first = omega_empirical(spec, samples=50, rng=np.random.default_rng(9))
    again = omega_empirical(spec, samples=50, rng=np.random.default_rng(9), workers=2, batch_size=7)
    assert np.allclose(first.dense(), again.dense())


# -------------------------
# Measurement bases
# -------------------------
def test_lambda12_closed_forms():
    for n in (1, 2):
        d = 2**n
        assert lambda12(np.eye(d)) == pytest.approx(lambda12_computational(d))
        for k in range(1, n + 1):
            assert lambda12(t_basis(n, k)) == pytest.approx(lambda12_t_basis(d, k))


def test_t_basis_is_unitary():
    b = t_basis(2, 1)
    assert np.allclose(b.conj().T @ b, np.eye(4))


# -------------------------
# Export
# -------------------------
def test_export_and_load(tmp_path):
    op = omega_closed(EnsembleSpec(kind="clifford", n=1))
    path = export_operator(op, tmp_path / "nested" / "omega_cl1.bin")
    raw = path.read_bytes()
    assert raw[:4] == b"THRO"
    assert len(raw) == 28 + 16 * 16 * 16
    loaded = load_operator(path)
    assert loaded.n == 1
    assert loaded.label == "omega_cl1"
    assert np.array_equal(loaded.dense(), op.dense())


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOPE" + bytes(24))
    with pytest.raises(InvalidParameter):
        load_operator(path)


def test_small_operator_dense_cutoff():
    with pytest.raises(CutoffExceeded):
        SmallOperator(n=3, matrix=np.zeros((1, 1))).dense()
