"""
Differential-phase-shift modes
==============================

``ell + 1`` pulses whose consecutive phases differ by 0 or pi, one bit per
gap. Sweeps are keyed by the energy per pulse ``mu = nbar / (ell + 1)``.
"""
import numpy as np

from modedisc import EnergyConstraint, UD, channel_bound, fock_table, lp_bound, make_dps_family

fam3 = make_dps_family(3)
print("ell=3 overlaps (real part):")
print(np.round(fam3.k.real, 2))

fam = make_dps_family(2)
table = fock_table(fam, 50, UD)
print("\n   mu   channel    source   (unambiguous, ell=2)")
for mu in (0.05, 0.2, 0.5, 1.0):
    ec = EnergyConstraint(3 * mu, 50)
    print(f"{mu:5.2f}  {channel_bound(fam, ec, UD).bound:.5f}  {lp_bound(table, ec).bound:.5f}")
