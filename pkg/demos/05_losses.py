"""
Loss before the measurement
===========================

A beam splitter of transmittivity t2 on every mode. For photon-number
mixtures the effect is a binomial thinning of the weights, so the lossless
machinery applies at mean nbar * t2. Pure probes turn into mixed states;
there only a numerical search for good probes is available.
"""
import numpy as np

from modedisc import (EnergyConstraint, LossChannel, PhotonDistribution, coherent_bound, estimate_floor,
                      fock_bound_lossy, heuristic_channel_lossy, loss_invert, loss_transform,
                      make_two_mode, source_lossy_bound)

ch = LossChannel(0.5)
q = loss_transform(PhotonDistribution([0, 0, 1]), ch)
print("two photons through t2=0.5:", q.weights)
print("back through the inverse:", loss_invert(q, ch).weights)

res = source_lossy_bound(make_two_mode(0.5), EnergyConstraint(1.0, 20), ch)
print("\nsource bound, k=0.5, nbar=1, t2=0.5:", round(res.bound, 6))

# Closed-form benchmarks: coherent probes versus counting a single photon.
for t2 in (0.2, 0.5, 0.9):
    c = LossChannel(t2)
    print(f"t2={t2}: coherent {coherent_bound(0.4, 1, c):.4f}  Fock {fock_bound_lossy(0.4, 1, c):.4f}")

# A better probe mixes a few photon numbers (takes a few seconds).
h = heuristic_channel_lossy(0.4, 1.0, ch, restarts=6)
print(f"\nsearched probe: P={h.bound:.4f} (floor {estimate_floor(0.4, 1, ch):.4f})")
print("weights:", np.round(h.weights, 4))
