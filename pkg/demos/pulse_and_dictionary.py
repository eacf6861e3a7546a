"""
A chirp pulse and its translated-atom dictionary
================================================

Builds the reference linear chirp, checks its energy normalization, and
looks at how quickly translated copies decorrelate.
"""

import numpy as np

import polarcpe as pc

spec = pc.PulseSpec()
grid = pc.SamplingGrid(N=100, Ts=2e-8)

g = pc.sample_pulse(spec, grid, delay=0.0)
print(f"pulse length {g.size}, energy {np.linalg.norm(g):.12f}")
print(f"support {np.count_nonzero(np.abs(g) > 1e-12)} of {grid.N} samples")

# translating by whole samples is exactly a circular shift
g7 = pc.sample_pulse(spec, grid, delay=7 * grid.Ts)
print(f"shift check: {np.linalg.norm(g7 - np.roll(g, 7)):.2e}")

dictionary = pc.build_dictionary("tde", spec, grid, c=1)
print(f"\ndictionary: {dictionary.P} atoms, spacing {dictionary.spacing:.2e} s")

mu = [pc.coherence(dictionary, 50, 50 + k) for k in range(0, 6)]
for k, m in enumerate(mu):
    print(f"coherence at shift {k}: {m:.4f}")

band = pc.band_exclusion(dictionary, [50], pc.BandExclusionConfig(eta=0.0, mu_floor=0.01))
print(f"atoms within the mu > 0.01 band of atom 50: {[int(i) for i in band]}")
