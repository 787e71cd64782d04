"""
Telling phases apart
====================

Modes that differ only by a phase, ``a`` and ``-a`` for two outcomes or the
N-th roots of unity in general.
"""
import numpy as np

from modedisc import EnergyConstraint, PROB, channel_bound, helstrom, make_phase_family, phase_orthogonal_pair

# Half a photon on average already separates a from -a perfectly.
pair = phase_orthogonal_pair(0.5)
print("amplitudes on |0>,|1>,|2>:", np.round(pair.plus, 4), np.round(pair.minus, 4))
print("overlap:", pair.mode_overlap(), "-> guessing probability", helstrom(pair.mode_overlap()))

# The same holds above 0.5 with three-component probes.
for nbar in (1.0, 1.25, 2.0):
    p = phase_orthogonal_pair(nbar)
    print(f"nbar={nbar}: m={p.m}, delta={p.delta:+.2f}, overlap={p.mode_overlap():.1e}")

# More outcomes need more light.
grid = np.geomspace(1e-2, 3, 6)
print("\n  nbar  " + "  ".join(f"N={n}" for n in range(2, 6)))
for nbar in grid:
    row = [channel_bound(make_phase_family(n), EnergyConstraint(nbar, 30), PROB).bound for n in range(2, 6)]
    print(f"{nbar:6.3f}  " + "  ".join(f"{v:.3f}" for v in row))
