"""
Computational and Fourier modes
===============================

``d`` orthogonal modes plus their discrete Fourier transforms. A single
photon gives a guessing probability of exactly one half for every ``d``,
and for ``d >= 3`` the per-photon-number bounds are not concave at one
photon, so the best mixture at nbar = 1 skips the one-photon sector.
"""
import numpy as np

from modedisc import EnergyConstraint, PROB, condition_check, dual_geometric_solve, fock_table, lp_bound
from modedisc import make_comp_ft_family

fam = make_comp_ft_family(3)
table = fock_table(fam, 8, PROB)
print("a_n:", np.round(table.a, 4))
print("concavity holds at n:", [n for n, ok in enumerate(condition_check(table)) if ok])

res = lp_bound(table, EnergyConstraint(1.0, 8))
print(f"best mixture at nbar=1: {res.bound:.4f} > a_1 = {table.a[1]:.4f}")
print("weights:", np.round(res.weights[:4], 4))

# The geometric dual walks the upper hull of the points (n, a_n).
sol = dual_geometric_solve(table, 1.0)
print("hull vertices:", sol.hull, " supporting line: x=%.4f y=%.4f" % (sol.x, sol.y))
