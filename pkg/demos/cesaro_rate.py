"""
How fast the Cesaro mean converges
==================================

The fixed-point projection ``P`` is the limit of ``(1/N) sum_{n=1..N} S^n``.
The residual is exactly ``(1/N) S (1 - S^N) (1 - S + P)^{-1} (1 - P)``,
so the error falls like ``1/N`` no matter how large the spectral gap is.
"""

import numpy as np

from peripheral import cesaro_oracle, fixed_point_projection
from peripheral.channel import random_kraus_channel

ch = random_kraus_channel(3, 2, seed=11)
s = np.asarray(ch.superop)
p = fixed_point_projection(ch)
gap = 1 - sorted(np.abs(np.linalg.eigvals(s)))[-2]
print(f"spectral gap: {gap:.3f}")

eye = np.eye(s.shape[0])
tail = s @ np.linalg.inv(eye - s + p) @ (eye - p)

print("     N   max|error|   N*max|error|   limit of N*error")
for n in (10, 100, 1000, 10000):
    err = np.abs(cesaro_oracle(ch, n) - p).max()
    print(f"{n:6d}   {err:.3e}    {n * err:.4f}         {np.abs(tail).max():.4f}")
