import pytest

from thrifty.errors import InvalidParameter
from thrifty.figures import FIGURES, SEEDED_FIGURES, figure_dataset
from thrifty.schemas import FigureParams
from thrifty.variance_analytics import vstar_clifford_fidelity


def _figure(which, **kw):
    return figure_dataset(FigureParams(which=which, **kw))


def test_every_figure_is_registered():
    assert set(FIGURES) == set(FigureParams.model_fields["which"].annotation.__args__)
    assert SEEDED_FIGURES < set(FIGURES)


@pytest.mark.parametrize("which", sorted(SEEDED_FIGURES))
def test_randomized_figures_need_a_seed(which):
    with pytest.raises(InvalidParameter):
        _figure(which, n=2)


def test_var_types_leaves_missing_ensembles_empty():
    table = _figure("var_types", n=6)
    assert len(table.rows) == 18
    for row in table.rows:
        assert set(row) == set(table.columns)
        assert (row["Vstar_U51"] is None) == (row["n"] < 5)
        assert row["Vstar_U101"] is None


def test_ensemble_compare_starts_at_the_clifford_value():
    table = _figure("ensemble_compare", n=4)
    assert [row["k"] for row in table.rows] == [0, 1, 2, 3, 4]
    first = table.rows[0]
    clifford = vstar_clifford_fidelity(16, 0.0)
    assert first["Vstar_Uk1"] == first["Vstar_U1k"] == first["Vstar_tUk"] == pytest.approx(clifford)
    assert table.diagnostics["V"] == pytest.approx(30 / 18)


def test_random_states_table():
    table = _figure("random_states", n=2, samples=5, seed=1, r=4)
    assert table.columns[:4] == ["n", "V", "Vstar_mean", "V_4"]
    assert [row["n"] for row in table.rows] == [1, 2]
    assert all(row["mc_Vstar_se"] >= 0 for row in table.rows)


def test_random_states_are_reproducible():
    first = _figure("random_states", n=2, samples=3, seed=8)
    again = _figure("random_states", n=2, samples=3, seed=8)
    assert first.rows == again.rows


def test_interleaved_compare_small():
    table = _figure("interleaved_compare", n=2, circuits=20, r=3, seed=1)
    assert [row["k"] for row in table.rows] == [0, 1, 2]
    assert table.diagnostics["deviation_budget"] == pytest.approx(3.0)
    assert table.diagnostics["max_gap"] >= 0
    assert all(row["mc_Vstar_tUk"] is not None for row in table.rows)


def test_depolarizing_small_grid():
    table = _figure("depolarizing", n=2, circuits=20, r=3, seed=2, grid=[0.0, 1.0])
    assert [row["p"] for row in table.rows] == [0.0, 1.0]
    assert table.diagnostics["R"] == 3
    assert table.rows[0]["VR_Cl"] >= table.rows[0]["VR_Haar"]


def test_upper_bound_scatter_orders_the_bounds():
    table = _figure("upper_bound_scatter", n=2, samples=6, seed=3)
    assert len(table.rows) == 6
    for row in table.rows:
        assert row["Vstar_Cl"] <= row["V_triangle"] + 1e-9
        assert row["V_triangle"] <= row["cross_bound"] + 1e-9


def test_ratio_scatter_reports_predictions():
    table = _figure("ratio_scatter", n=2, samples=6, seed=4)
    assert len(table.rows) == 6
    assert set(table.diagnostics) == {"mean_overlap", "predicted_overlap", "predicted_cross_norm2"}


@pytest.mark.slow
def test_interleaved_compare_monte_carlo_matches_closed_form():
    table = _figure("interleaved_compare", n=3, circuits=3000, r=5, seed=17)
    for row in table.rows:
        gap = abs(row["mc_Vstar_tUk"] - row["Vstar_tUk"])
        assert gap < 4 * row["mc_Vstar_tUk_se"], (row["k"], row["mc_Vstar_tUk"], row["Vstar_tUk"])
    assert table.diagnostics["max_mc_z"] < 4


@pytest.mark.slow
def test_depolarizing_sweep_on_w6_tracks_clifford_curve():
    table = _figure("depolarizing", n=6, circuits=2000, r=10, seed=21)
    assert len(table.rows) == 11
    for row in table.rows:
        gap = abs(row["mc_VR_Cl"] - row["VR_Cl"])
        assert gap < 4 * row["mc_VR_Cl_se"] + 1e-9, (row["p"], row["mc_VR_Cl"], row["VR_Cl"])
