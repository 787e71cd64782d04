import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modedisc.analytic import fock_bound_two_mode, two_mode_source_bound
from modedisc.fock import EnergyConstraint
from modedisc.modes import make_comp_ft_family, make_phase_family, make_two_mode
from modedisc.results import PROB, UD
from modedisc.source import (FockBoundTable, cache_path, condition_check, degenerate_points,
                             dual_geometric_solve, exact_lp_bound, floor_ceil_state, fock_table,
                             load_table, lp_bound, save_table, source_bound)


def concave_table(rng, n_max):
    steps = np.sort(rng.uniform(0, 1, n_max))[::-1]
    a = np.r_[0, np.cumsum(steps)]
    return FockBoundTable(a / a[-1] * rng.uniform(0.5, 1))


@pytest.mark.parametrize("task", [PROB, UD])
def test_two_mode_table_closed_form(task):
    table = fock_table(make_two_mode(0.5), 8, task)
    want = [fock_bound_two_mode(0.5, n, task) for n in range(9)]
    assert np.allclose(table.a, want, atol=1e-7)


def test_prob_table_starts_at_best_prior():
    assert fock_table(make_phase_family(3), 2, PROB).a[0] == pytest.approx(1 / 3)
    assert fock_table(make_phase_family(3), 2, UD).a[0] == 0


def test_phase_family_fock_states_are_identical():
    # every mode gives |n> up to a global phase, so nothing is distinguishable
    a = fock_table(make_phase_family(3), 4, UD).a
    assert np.all(a < 1e-6)


def test_parallel_matches_serial():
    fam = make_comp_ft_family(2)
    assert np.allclose(fock_table(fam, 4, PROB, jobs=2).a, fock_table(fam, 4, PROB, jobs=1).a, atol=1e-9)


def test_cache_round_trip(tmp_path):
    fam = make_two_mode(0.3)
    table = fock_table(fam, 5, PROB, cache_dir=tmp_path)
    path = cache_path(tmp_path, fam, PROB)
    assert path.exists()
    assert np.allclose(load_table(path, PROB).a, table.a)
    # second call reads the cache
    assert np.array_equal(fock_table(fam, 5, PROB, cache_dir=tmp_path).a, table.a)
    save_table(table, tmp_path / "copy.csv")
    assert (tmp_path / "copy.csv").read_text().startswith("n,a_n")


def test_table_validation():
    with pytest.raises(ValueError):
        FockBoundTable([0.2, 1.3])


def test_floor_ceil_state():
    p = floor_ceil_state(1.3)
    assert np.allclose(p.weights, [0, 0.7, 0.3])
    assert floor_ceil_state(2.0).weights[-1] == 1


def test_condition_and_degeneracy():
    linear = FockBoundTable([0.0, 0.25, 0.5, 0.75])
    assert not condition_check(linear)[1:-1].any()
    assert degenerate_points(linear) == [1, 2]
    assert dual_geometric_solve(linear, 1.5).degenerate
    kink = FockBoundTable([0.1, 0.2, 0.9, 0.95])
    assert list(condition_check(kink)) == [True, False, True, True]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_geometric_dual_matches_lp(seed):
    rng = np.random.default_rng(seed)
    n_max = int(rng.integers(2, 25))
    table = FockBoundTable(rng.uniform(0, 1, n_max + 1))
    nbar = float(rng.uniform(0, n_max))
    geo = dual_geometric_solve(table, nbar)
    assert geo.value == pytest.approx(exact_lp_bound(table, nbar).bound, abs=1e-7)
    # the returned weights are a primal optimizer
    n = np.arange(n_max + 1)
    assert geo.weights.sum() == pytest.approx(1) and geo.weights @ n == pytest.approx(nbar)
    assert geo.weights @ table.a == pytest.approx(geo.value, abs=1e-12)
    # and (x, y) is dual feasible
    assert np.all(geo.x + n * geo.y >= table.a - 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_concave_tables_pick_floor_ceil(seed):
    rng = np.random.default_rng(seed)
    table = concave_table(rng, int(rng.integers(3, 20)))
    assert condition_check(table).all()
    nbar = float(rng.uniform(0, table.n_max - 1))
    res = exact_lp_bound(table, nbar)
    want = np.zeros(table.n_max + 1)
    fc = floor_ceil_state(nbar).weights
    want[: fc.size] = fc
    assert np.allclose(res.weights, want, atol=1e-8)


def test_relaxed_lp_dominates_exact(rng):
    for _ in range(20):
        table = FockBoundTable(rng.uniform(0, 1, 12))
        nbar = float(rng.uniform(0, 10))
        assert lp_bound(table, EnergyConstraint(nbar, 11)).bound >= exact_lp_bound(table, nbar).bound - 1e-9


def test_two_mode_source_bound_pipeline():
    fam = make_two_mode(0.5)
    for task in (PROB, UD):
        for nbar in (0.5, 1.0, 2.3):
            res = source_bound(fam, EnergyConstraint(nbar, 20), task)
            assert res.bound == pytest.approx(two_mode_source_bound(0.5, nbar, task), abs=1e-6)


def test_comp_ft_mixture_beats_single_photon():
    table = fock_table(make_comp_ft_family(3), 12, PROB)
    assert not condition_check(table)[1]
    res = lp_bound(table, EnergyConstraint(1.0, 12))
    assert res.bound > table.a[1] + 1e-4
    assert res.weights[1] < 0.5


def test_relaxed_equals_dual_without_tail(rng):
    checked = 0
    for _ in range(40):
        table = concave_table(rng, 10) if rng.uniform() < 0.5 else FockBoundTable(rng.uniform(0, 1, 11))
        nbar = float(rng.uniform(0, 9))
        res = lp_bound(table, EnergyConstraint(nbar, 10))
        geo = dual_geometric_solve(table, nbar)
        if res.details["tail_mass"] < 1e-9:
            assert res.bound == pytest.approx(geo.value, abs=1e-7)
            checked += 1
        else:
            assert res.bound >= geo.value - 1e-9
    assert checked > 0


def test_lp_bound_monotone_and_concave():
    table = fock_table(make_comp_ft_family(2), 10, PROB)
    grid = np.linspace(0, 9, 37)
    vals = np.array([lp_bound(table, EnergyConstraint(x, 10)).bound for x in grid])
    assert np.all(np.diff(vals) >= -1e-9)
    assert np.all(vals[1:-1] >= 0.5 * (vals[:-2] + vals[2:]) - 1e-8)


def test_priors_used_by_table():
    from modedisc.modes import ModeFamily
    fam = ModeFamily(np.ones((2, 2)), priors=[0.7, 0.3])
    assert np.allclose(fock_table(fam, 3, PROB).a, 0.7, atol=1e-6)
