import cvxpy as cp
import numpy as np
import pytest
from scipy.linalg import sqrtm

from modedisc.analytic import chi_two_mode, helstrom, idp
from modedisc.fock import EnergyConstraint
from modedisc.gram import build_channel, build_fock, channel_bound, fock_bound, solve
from modedisc.modes import ModeFamily, make_comp_ft_family, make_phase_family, make_two_mode
from modedisc.results import PROB, UD


def povm_oracle(gram, priors=None):
    """Minimum-error discrimination of explicit vectors with the given Gram matrix."""
    n = gram.shape[0]
    pri = np.full(n, 1 / n) if priors is None else priors
    v = sqrtm(gram)  # columns realize the Gram matrix
    ops = [cp.Variable((n, n), hermitian=True) for _ in range(n)]
    cons = [e >> 0 for e in ops] + [sum(ops) == np.eye(n)]
    obj = sum(pri[j] * cp.real(v[:, j].conj() @ ops[j] @ v[:, j]) for j in range(n))
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver="CLARABEL")
    return prob.value


def random_family(rng, n, complex_=True):
    v = rng.normal(size=(n, n + 1)) + (1j * rng.normal(size=(n, n + 1)) if complex_ else 0)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return ModeFamily(v.conj() @ v.T)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_single_photon_matches_povm_oracle(rng, n):
    fam = random_family(rng, n)
    res = fock_bound(fam, 1, PROB)
    assert res.ok
    assert res.bound == pytest.approx(povm_oracle(fam.k), abs=1e-6)


def test_fock_n_uses_powers(rng):
    fam = random_family(rng, 3)
    g = povm_oracle(fam.k ** 2)
    assert fock_bound(fam, 2, PROB).bound == pytest.approx(g, abs=1e-6)


@pytest.mark.parametrize("task", [PROB, UD])
def test_reduced_matches_full(task):
    # the full form has no interior point and needs generic overlaps to converge
    rng = np.random.default_rng(7)
    fam = random_family(rng, 3, complex_=False)
    red = fock_bound(fam, 1, task, form="reduced").bound
    full = fock_bound(fam, 1, task, form="full").bound
    assert red == pytest.approx(full, abs=1e-4)
    two = make_two_mode(0.6)
    ec = EnergyConstraint(0.8, 10)
    assert channel_bound(two, ec, task, form="full").bound == pytest.approx(
        channel_bound(two, ec, task).bound, abs=1e-4)


def test_gram_layout_and_psd():
    fam = make_comp_ft_family(2)
    g = build_fock(fam, 1, PROB)
    res = solve(g)
    gram = res.details["gram"]
    assert gram.shape == (g.gram_dim, g.gram_dim)
    assert np.linalg.eigvalsh(gram).min() > -1e-6
    n = fam.n_modes
    ident = gram[np.ix_([g.index(0, j) for j in range(n)], [g.index(0, j) for j in range(n)])]
    assert np.allclose(ident, fam.k, atol=1e-6)
    # projectivity: <psi_i|M_m|psi_j> equals <M_m psi_i|M_m psi_j>
    for m in range(1, n + 1):
        for i in range(n):
            assert gram[g.index(0, i), g.index(m, i)] == pytest.approx(gram[g.index(m, i), g.index(m, i)], abs=1e-6)


def test_ud_gram_zero_error():
    fam = make_two_mode(0.4)
    g = build_fock(fam, 1, UD)
    gram = solve(g).details["gram"]
    for j in range(2):
        for i in range(2):
            if i != j:
                assert abs(gram[g.index(i + 1, j), g.index(i + 1, j)]) < 1e-7


@pytest.mark.parametrize("k", [0.0, 0.3, 0.8])
@pytest.mark.parametrize("nbar", [0.4, 1.0, 2.2])
def test_two_mode_channel_closed_form(k, nbar):
    fam, ec = make_two_mode(k), EnergyConstraint(nbar, 50)
    chi = chi_two_mode(k, nbar)
    assert channel_bound(fam, ec, PROB).bound == pytest.approx(helstrom(chi), abs=1e-5)
    assert channel_bound(fam, ec, UD).bound == pytest.approx(idp(chi), abs=1e-5)


def test_channel_weights_have_requested_mean():
    res = channel_bound(make_two_mode(0.5), EnergyConstraint(1.5, 20), PROB)
    n = np.arange(res.weights.size)
    tail = 1 - res.weights.sum()
    assert res.weights @ n + tail * 21 <= 1.5 + 1e-6


def test_conjugation_invariance():
    for task in (PROB, UD):
        ec = EnergyConstraint(0.7, 30)
        a = channel_bound(make_two_mode(0.2 + 0.5j), ec, task).bound
        b = channel_bound(make_two_mode(0.2 - 0.5j), ec, task).bound
        assert a == pytest.approx(b, abs=1e-6)


def test_monotone_in_nbar():
    fam = make_phase_family(3)
    vals = [channel_bound(fam, EnergyConstraint(x, 30), PROB).bound for x in (0.1, 0.3, 0.6, 1.0)]
    assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))


def test_relaxation_is_upper_bound():
    # a smaller cutoff relaxes more, so its bound cannot be lower
    fam = make_two_mode(0.7)
    loose = channel_bound(fam, EnergyConstraint(1.3, 5), PROB).bound
    tight = channel_bound(fam, EnergyConstraint(1.3, 40), PROB).bound
    assert loose >= tight - 1e-6


def test_unknown_form():
    with pytest.raises(ValueError):
        build_channel(make_two_mode(0.5), EnergyConstraint(1, 5), PROB, form="dense")


@pytest.mark.parametrize("fam", [make_phase_family(3), make_comp_ft_family(2), make_two_mode(0.3 + 0.6j)],
                         ids=lambda f: f.name)
def test_ranges_and_task_ordering(fam):
    for nbar in (0.2, 1.1):
        ec = EnergyConstraint(nbar, 30)
        p = channel_bound(fam, ec, PROB)
        u = channel_bound(fam, ec, UD)
        assert 1 / fam.n_modes - 1e-7 <= p.bound <= 1
        assert -1e-7 <= u.bound <= 1
        assert u.bound <= p.bound + 1e-6
        assert np.linalg.eigvalsh(p.details["gram"]).min() >= -1e-7


def test_nonuniform_priors_enter_objective():
    fam = ModeFamily(make_two_mode(0.6).k, priors=[0.8, 0.2])
    ov = 0.6
    want = 0.5 * (1 + np.sqrt(1 - 4 * 0.8 * 0.2 * ov ** 2))
    assert fock_bound(fam, 1, PROB).bound == pytest.approx(want, abs=1e-6)
