"""
Your own modes, from a file
===========================

Any Gram matrix of single-photon overlaps defines a family. Families are
stored as JSON and the command-line tool takes them with ``--kfile``.
"""
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from modedisc import EnergyConstraint, ModeFamily, PROB, channel_bound, save_family

rng = np.random.default_rng(3)
v = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
v /= np.linalg.norm(v, axis=1, keepdims=True)
fam = ModeFamily(v.conj() @ v.T, name="random-3")
print("bound at nbar=0.5:", round(channel_bound(fam, EnergyConstraint(0.5, 30), PROB).bound, 6))

path = Path(tempfile.mkdtemp()) / "family.json"
save_family(fam, path)
out = subprocess.run([sys.executable, "-m", "modedisc.cli", "bound", "--family", "custom", "--kfile", str(path),
                      "--nbar", "0.5", "--nmax", "30", "--format", "table"], capture_output=True, text=True)
print(out.stdout)
