import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modedisc.fock import (EnergyConstraint, PhotonDistribution, inner_product, relaxed_energy_row,
                           truncation_epsilon)


def test_fock_and_coherent():
    p = PhotonDistribution.fock(2, n_max=4)
    assert p.mean == 2 and p.mass == 1 and p.n_max == 4
    c = PhotonDistribution.coherent(1.5, 40)
    assert c.mass == pytest.approx(1, abs=1e-12)
    assert c.mean == pytest.approx(1.5, abs=1e-12)
    assert PhotonDistribution.coherent(0, 3).weights[0] == 1


def test_rejects_bad_weights():
    with pytest.raises(ValueError, match="negative"):
        PhotonDistribution([0.5, -0.1])
    with pytest.raises(ValueError, match="exceeds"):
        PhotonDistribution([0.7, 0.7])
    with pytest.raises(ValueError, match="declared"):
        PhotonDistribution([0.5, 0.5], declared_mean=1.0)


def test_energy_constraint_bounds():
    with pytest.raises(ValueError):
        EnergyConstraint(-0.1)
    with pytest.raises(ValueError):
        EnergyConstraint(60, n_max=50)
    EnergyConstraint(50, n_max=50)


def test_inner_product_vacuum_term():
    # 0**0 counts as one: the vacuum parts of any two modes overlap
    assert inner_product(PhotonDistribution([0.25, 0.75]), 0.0) == pytest.approx(0.25)


def test_truncation_epsilon():
    p = PhotonDistribution([0.5, 0.3])
    assert truncation_epsilon(p, 0.5) == pytest.approx(0.2 * 0.25)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=12), st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_truncated_overlap_within_slack(raw, extra, phase):
    # the full overlap of a longer ladder lies inside the slack of its truncation
    w = np.array(raw + [extra]) + 1e-3
    w /= w.sum()
    k = 0.9 * complex(math.cos(phase), math.sin(phase))
    full = inner_product(PhotonDistribution(w), k)
    head = PhotonDistribution(w[:-1])
    assert abs(full - inner_product(head, k)) <= truncation_epsilon(head, k) + 1e-12


def test_relaxed_row_charges_tail():
    ec = EnergyConstraint(1.0, n_max=3)
    c, b = relaxed_energy_row(ec)
    assert np.allclose(c, [4, 3, 2, 1]) and b == 3
    # a normalized distribution with mean nbar meets the row with equality
    p = np.array([0.2, 0.6, 0.2, 0.0])
    assert c @ p == pytest.approx(b)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=15), st.complex_numbers(max_magnitude=1))
def test_inner_product_bounds_and_conjugation(raw, k):
    w = np.array(raw) / max(1.0, sum(raw))
    p = PhotonDistribution(w)
    val = inner_product(p, k)
    assert abs(val) <= p.mass + 1e-12
    assert inner_product(p, k.conjugate()) == pytest.approx(val.conjugate(), abs=1e-12)


def test_epsilon_nonincreasing_in_cutoff():
    w = PhotonDistribution.coherent(2.0, 40).weights
    eps = [truncation_epsilon(PhotonDistribution(w[: n + 1]), 0.8) for n in range(2, 40)]
    assert all(b <= a + 1e-15 for a, b in zip(eps, eps[1:]))
