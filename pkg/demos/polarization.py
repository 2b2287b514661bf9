"""
Watching channels polarize
==========================

Start from N copies of one channel and apply the two-channel transform
recursively. The synthetic bit-channels drift towards perfect (Z near 0) or
useless (Z near 1), while their total capacity stays put.

Run with ``python demos/polarization.py``.
"""

import numpy as np

from polarlab import make_bec, make_bsc, symmetric_capacity, synthesize
from polarlab.transform import conservation_check, transform

# One step first. For BEC(0.5) the two children are BEC(0.75) and BEC(0.25).
W = make_bec(0.5)
pair = transform(W, W)
print("one step on BEC(0.5):")
print(f"  I(W-) = {symmetric_capacity(pair.minus):.4f}   I(W+) = {symmetric_capacity(pair.plus):.4f}")
lhs, rhs = conservation_check(W, W)
print(f"  I(W-) + I(W+) = {lhs:.15f},  2 I(W) = {rhs:.15f}")

# Many steps: the fraction of good and bad bit-channels.
print("\nstationary BEC(0.5), threshold 1e-3")
print("   n   good    bad  middle")
for n in (2, 6, 10, 14, 18, 20):
    z = synthesize([W] * (1 << n)).z
    good, bad = np.mean(z < 1e-3), np.mean(z > 1 - 1e-3)
    print(f"  {n:2d}  {good:.3f}  {bad:.3f}  {1 - good - bad:.3f}")

# Channels other than the BEC need output merging to keep alphabets small.
print("\nstationary BSC(0.11), merged to 64 outputs per bit-channel")
for n in (4, 8, 10):
    s = synthesize([make_bsc(0.11)] * (1 << n))
    mid = np.mean((s.z >= 1e-3) & (s.z <= 1 - 1e-3))
    print(f"  n={n:2d}  middle fraction {mid:.3f}   capacity lost to merging {sum(s.level_loss):.4f} bits")

# Polarization does not need identical channels.
print("\nalternating BEC(0.2) / BEC(0.8)")
for n in (8, 14):
    chans = [make_bec(0.2), make_bec(0.8)] * (1 << (n - 1))
    s = synthesize(chans)
    mid = np.mean((s.z >= 1e-3) & (s.z <= 1 - 1e-3))
    print(f"  n={n:2d}  mean capacity {np.mean(s.i):.12f}  middle fraction {mid:.3f}")
