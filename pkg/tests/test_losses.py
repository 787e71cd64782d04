import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modedisc.analytic import helstrom, two_mode_source_bound
from modedisc.fock import EnergyConstraint, PhotonDistribution
from modedisc.losses import (LossChannel, coherent_bound, embedding, estimate_floor, fock_bound_lossy,
                             guessing_probability, heuristic_channel_lossy, kraus_ops, lossy_density,
                             lossy_pair, loss_invert, loss_transform, probe_probability,
                             source_lossy_bound, tilt_to_mean)
from modedisc.modes import make_phase_family, make_two_mode
from modedisc.results import PROB
from modedisc.source import source_bound


def test_channel_range():
    with pytest.raises(ValueError):
        LossChannel(1.2)


def test_transform_examples():
    half = LossChannel(0.5)
    assert np.allclose(loss_transform(PhotonDistribution([0, 1]), half).weights, [0.5, 0.5])
    assert np.allclose(loss_transform(PhotonDistribution([0, 0, 1]), half).weights, [0.25, 0.5, 0.25])
    p = PhotonDistribution([0.2, 0.3, 0.5])
    assert np.allclose(loss_transform(p, LossChannel(1)).weights, p.weights)
    assert np.allclose(loss_transform(p, LossChannel(0)).weights, [1, 0, 0])


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 20), st.floats(0.3, 1.0), st.integers(0, 2**31 - 1))
def test_round_trip_and_moments(n_max, t2, seed):
    w = np.random.default_rng(seed).dirichlet(np.ones(n_max + 1))
    p, ch = PhotonDistribution(w), LossChannel(t2)
    q = loss_transform(p, ch)
    assert q.mass == pytest.approx(p.mass, abs=1e-12)
    assert q.mean == pytest.approx(t2 * p.mean, abs=1e-12)
    inv = loss_invert(q, ch)
    assert inv.physical
    assert np.allclose(inv.weights, w, atol=1e-8)


def test_invert_examples():
    inv = loss_invert(PhotonDistribution([0.5, 0.5]), LossChannel(0.5))
    assert np.allclose(inv.weights, [0, 1])
    assert np.allclose(loss_invert(PhotonDistribution([1, 0, 0]), LossChannel(0.3)).weights, [1, 0, 0])


def test_invert_flags_unreachable():
    # a pure single photon cannot come out of a lossy channel
    inv = loss_invert(PhotonDistribution([0, 1]), LossChannel(0.5))
    assert inv.negative == (0,) and not inv.physical and inv.distribution is None
    with pytest.raises(ValueError):
        loss_invert(PhotonDistribution([1.0]), LossChannel(0))


def test_closed_form_benchmarks():
    ch1 = LossChannel(1.0)
    assert coherent_bound(0, 1, ch1) == pytest.approx(0.5 * (1 + math.sqrt(1 - math.exp(-2))))
    assert coherent_bound(1, 3, ch1) == 0.5 and coherent_bound(0.3, 0, ch1) == 0.5
    assert fock_bound_lossy(0.4, 1, ch1) == pytest.approx(helstrom(0.4))
    assert fock_bound_lossy(0.4, 0, LossChannel(0.5)) == 0.5
    assert fock_bound_lossy(0, 1, LossChannel(0.5)) == pytest.approx(0.75)
    assert estimate_floor(0, 1, ch1) == pytest.approx(1)


def test_coherent_dominates_fock_at_small_transmission():
    for t2 in (0.05, 0.1, 0.2, 0.3):
        for k in (0.0, 0.4, 0.8):
            assert coherent_bound(k, 1, LossChannel(t2)) > fock_bound_lossy(k, 1, LossChannel(t2))


def test_kraus_complete():
    ops = kraus_ops(6, LossChannel(0.37))
    assert np.allclose(sum(k.T @ k for k in ops), np.eye(7))


def test_embedding_overlap_convention():
    k = 0.3 + 0.4j
    e1, e2 = embedding(k, 3)
    one = np.zeros(4)
    one[1] = 1
    # <1_a1 | 1_a2> = k
    assert np.vdot(e1 @ one, e2 @ one) == pytest.approx(k)
    for n in range(4):
        v = np.zeros(4)
        v[n] = 1
        assert np.vdot(e1 @ v, e2 @ v) == pytest.approx(k ** n)
    assert np.allclose(e2.conj().T @ e2, np.eye(4))


def test_lossy_states_are_valid():
    amps = np.sqrt(np.array([0.2, 0.5, 0.2, 0.1]))
    r1, r2 = lossy_pair(amps, 0.6, LossChannel(0.4))
    for r in (r1, r2):
        assert np.allclose(r, r.conj().T)
        assert np.linalg.eigvalsh(r).min() > -1e-10
        assert np.trace(r).real == pytest.approx(1, abs=1e-9)
    assert np.trace(lossy_density(amps, LossChannel(0.4))).real == pytest.approx(1)


@pytest.mark.parametrize("t2", [0.2, 0.6, 1.0])
@pytest.mark.parametrize("k", [0.0, 0.5, 0.9])
def test_coherent_input_oracle(t2, k):
    # coherent states stay pure under loss, so the closed form applies
    w = PhotonDistribution.coherent(1.0, 25).weights
    assert probe_probability(w, k, LossChannel(t2)) == pytest.approx(coherent_bound(k, 1.0, LossChannel(t2)), abs=1e-4)


def test_pure_fock_oracle():
    assert probe_probability([0, 1, 0], 0.4, LossChannel(1)) == pytest.approx(helstrom(0.4))
    assert guessing_probability(np.eye(2) / 2, np.eye(2) / 2) == 0.5


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=8), st.floats(0.05, 0.95))
def test_tilt_hits_mean(logits, frac):
    logits = np.array(logits)
    nbar = frac * (logits.size - 1)
    p = tilt_to_mean(logits, nbar)
    assert p.sum() == pytest.approx(1) and p @ np.arange(p.size) == pytest.approx(nbar, abs=1e-9)


def test_source_lossy_examples():
    fam = make_two_mode(0.5)
    ec = EnergyConstraint(1.0, 20)
    res = source_lossy_bound(fam, ec, LossChannel(0.5))
    assert res.bound == pytest.approx(two_mode_source_bound(0.5, 0.5), abs=1e-6)
    assert "pre_loss" in res.details
    lossless = source_bound(fam, ec, PROB)
    assert source_lossy_bound(fam, ec, LossChannel(1.0)).bound == pytest.approx(lossless.bound, abs=1e-9)
    dark = source_lossy_bound(make_phase_family(3), EnergyConstraint(1.0, 10), LossChannel(0.0))
    assert dark.bound == pytest.approx(1 / 3, abs=1e-6)


def test_heuristic_small_cases():
    with pytest.raises(ValueError):
        heuristic_channel_lossy(0.4, 1.0, LossChannel(0.5), n_trunc=2)
    vac = heuristic_channel_lossy(0.4, 1.0, LossChannel(0.0), restarts=3)
    assert vac.bound == pytest.approx(0.5, abs=1e-9)


@pytest.mark.slow
def test_heuristic_phase_flag_reports_both():
    res = heuristic_channel_lossy(0.4, 1.0, LossChannel(0.5), restarts=3, optimize_phases=True)
    assert res.phase_bound is not None and res.phases.size == 6
    assert res.phase_bound >= res.bound - 1e-9
