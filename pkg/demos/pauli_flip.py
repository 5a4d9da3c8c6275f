"""
The asymptotic map of a Pauli channel
=====================================

``X -> (sigma_x X sigma_x + sigma_z X sigma_z) / 2`` keeps the identity,
flips the sign of ``sigma_y`` and kills the rest.  Its attractor is
``span{I, sigma_y}``, and in the block picture it consists of two
one-dimensional blocks that the channel swaps.
"""

import numpy as np

from peripheral import apply_asymptotic, attractor_basis, hs_unitarity_report, spectrum
from peripheral import wolf_decompose, zoo
from peripheral.channel import PAULI_Y

ch = zoo("pauli_xz")
print("spectrum:", np.round(spectrum(ch).real, 12))

# the peripheral part is {1, -1}; its eigenvectors span the attractor
for x in attractor_basis(ch):
    print(np.round(x, 3))

# two blocks with d = m = 1, exchanged by the permutation
dec = wolf_decompose(ch)
print("blocks (d, m):", [(b.d, b.m) for b in dec.blocks])
print("permutation (0-based):", dec.permutation)

# in the eigenbasis of sigma_y an attractor element is diag(a+b, a-b);
# the channel swaps the two diagonal weights
_, v = np.linalg.eigh(PAULI_Y)
v = v[:, ::-1]
a, b = 0.8, 0.3
x = v @ np.diag([a + b, a - b]) @ v.conj().T
y = v.conj().T @ apply_asymptotic(dec, x) @ v
print("asymptotic image of diag(a+b, a-b):", np.round(np.diag(y).real, 12))

# the block states have equal spectra, so the asymptotic map is a unitary channel
print(hs_unitarity_report(dec).to_dict())
