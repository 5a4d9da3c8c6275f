"""
Building a channel with a prescribed asymptotic structure
=========================================================

An ``UnfoldSpec`` lists blocks ``(d_k, m_k, rho_k, U_k)``, a permutation of
the blocks and a transient dimension.  ``unfold`` turns it into a channel,
``wolf_decompose`` should hand the same structure back, and the recovery map
undoes the channel on its attractor.
"""

import numpy as np

from peripheral import compare_decompositions, spec_decomposition, unfold, verify_unfold
from peripheral import verify_recovery_on_attractor, wolf_decompose
from peripheral.unfold import random_spec

rng = np.random.default_rng(7)

# a 2-cycle and a fixed block, plus one transient dimension
spec = random_spec(rng, max_dim=9, cycle_lengths=[2, 1], transient=1)
print("dimension:", spec.dim)
print("blocks (d, m):", [(b.d, b.m) for b in spec.blocks], "permutation:", spec.permutation)

ch = unfold(spec)
print("construction checks:", verify_unfold(spec, ch).to_dict()["ok"])

# decompose the channel without using the UnfoldSpec, then compare
dec = wolf_decompose(ch, seed=1)
cmp = compare_decompositions(dec, spec_decomposition(spec))
for name, check in cmp.to_dict()["checks"].items():
    print(f"  {name:13s} defect {check['defect']:.1e}")

# recovery inverts the channel on the attractor, even though it is not faithful here
rep = verify_recovery_on_attractor(ch)
print("recovery defects:", {k: f"{v:.1e}" for k, v in rep.defects.items()})
print("trace defect of the recovery map:", f"{rep.info['recovery_trace_defect']:.3f}")
