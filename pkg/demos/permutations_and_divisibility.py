"""
Permutations, Markovian dynamics and purity
===========================================

Channels of the form ``exp(t L)`` never permute the blocks of their
attractor.  A permutation between blocks with different states also makes
the asymptotic evolution non-unitary, which shows up as a change of purity.
"""

import numpy as np

from peripheral import classify, hs_unitarity_report, markovian_permutation_check, unfold
from peripheral import wolf_decompose
from peripheral.channel import random_gkls_generator
from peripheral.divisibility import root_asymptotics_witness, witness_defect
from peripheral.recovery import purity_change
from peripheral.unfold import random_spec, uneven_cycle_spec

# a generator with two noiseless blocks: the permutation stays trivial
g = random_gkls_generator(4, 2, seed=3, structure=[(1, 2), (1, 2)])
rep = markovian_permutation_check(g, t=1.0)
print("Markovian blocks:", rep.info["blocks"], "permutation:", rep.info["permutation"])

# a channel may swap two blocks carrying different states; no exp(t L) does that
ch = unfold(uneven_cycle_spec(equal=True))
print(classify(ch).to_dict())

# the block states have different purities, so the asymptotic map is not HS-unitary
dec = wolf_decompose(ch)
print(hs_unitarity_report(dec).to_dict())
x = dec.embed([np.ones((1, 1)), np.zeros((1, 1))])
print(f"purity change on the first block: {purity_change(dec, x):+.4f}")

# with a trivial permutation, n-th roots of the block unitaries give an n-th root
spec = random_spec(np.random.default_rng(0), cycle_lengths=[1, 1], max_d=2)
root = root_asymptotics_witness(spec, 3)
print(f"cube-root witness defect: {witness_defect(spec, root, 3):.1e}")
