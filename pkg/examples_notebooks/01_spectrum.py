"""
Bound states inside the SSH gap
===============================

Two giant atoms sit on a dimerized ring of 100 cells.  Each atom touches
the lattice at two points.  When the atomic frequencies lie inside the
band gap, the single-excitation spectrum grows a pair of bound states
there, and their photon cloud stays next to the atoms.
"""

import numpy as np

from giant_ssh.lattice import LatticeSpec
from giant_ssh.presets import gap_states_at, preset
from giant_ssh.protocols import gap_eigensystem, shape_of
from giant_ssh.spectral import Label, photon_distribution

# the bare ring: hoppings and band edges for theta = 0.2 pi, delta = 0.5
lat = LatticeSpec(L=100)
print("t1, t2 =", lat.hoppings)
print("gap   =", lat.edges.gap, " band top =", lat.edges.band_top)

# %%
# The two-atom scenario, diagonalized at a detuning of 0.65 q.
sc = preset("fig2")
es = gap_eigensystem(sc, sc.frequencies_at(0.65))
counts = {lab.value: list(es.labels).count(lab) for lab in Label}
print(counts)

# %%
# Each gap state is classified by where its photon lives.
for energy, psi in gap_states_at(sc, 0.65):
    rep = shape_of(sc, psi)
    print(f"E = {energy:+.5f}  atom {rep.dominant_atom}  {rep.shape.value:<10s}"
          f" footprint weight {rep.footprint_probability:.3f}")

# %%
# Photon probability per cell for the lower state, near the atoms.
_, psi = gap_states_at(sc, 0.65)[0]
cells = photon_distribution(psi, sc.system.layout).cells
for c in range(46, 58):
    print(f"cell {c + 1:3d} " + "#" * int(round(200 * cells[c])))
print("weight beyond 10 cells:", cells[np.r_[:40, 65:100]].sum())
