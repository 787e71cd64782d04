"""
Two modes with a real overlap
=============================

For two modes the optimal probes are known in closed form, so this is the
place to see the numerical programs agree with them.
"""
import numpy as np

from modedisc import (EnergyConstraint, PROB, UD, channel_bound, chi_two_mode, helstrom, idp,
                      make_two_mode, source_bound, two_mode_source_bound)

k = 0.5
fam = make_two_mode(k)

# With a phase reference the best probe mixes the Fock states around nbar
# coherently; the overlap it reaches is chi.
print(" nbar    chi    SDP(prob)  closed    SDP(ud)   closed")
for nbar in (0.3, 1.0, 1.7):
    ec = EnergyConstraint(nbar, 50)
    chi = chi_two_mode(k, nbar)
    print(f"{nbar:5.2f}  {chi:.4f}  {channel_bound(fam, ec, PROB).bound:.6f}  {helstrom(chi):.6f}"
          f"  {channel_bound(fam, ec, UD).bound:.6f}  {idp(chi):.6f}")

# Without a reference the verifier sees a photon-number mixture. The best
# mixture still sits on floor(nbar) and floor(nbar) + 1.
res = source_bound(fam, EnergyConstraint(1.7, 20), PROB)
print("\nsource bound at nbar=1.7:", round(res.bound, 6), "closed form:",
      round(two_mode_source_bound(k, 1.7), 6))
print("weights on n = 0..3:", np.round(res.weights[:4], 6))
