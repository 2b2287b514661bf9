"""
Extremal channels for capacity and for Gallager's E0
====================================================

Among channels of equal capacity, the BEC and the BSC bracket how much one
transform step separates the two children. The same pair brackets E0 at
other values of rho once E0 is matched at a reference rho0.
"""

import numpy as np

from polarlab import bec_with_e0, bsc_with_e0, gallager_e0, make_quantized_bawgn, symmetric_capacity
from polarlab.channels import random_channel
from polarlab.extremality import e0_extremality_scan
from polarlab.transform import e0_improvement_check, extremal_split_check

W = make_quantized_bawgn(1.0, 32)
d, d_bec, d_bsc = extremal_split_check(W)
print(f"BAWGN(snr=1), 32 bins, I = {symmetric_capacity(W):.4f}")
print(f"  split I(W+) - I(W-):  BSC {d_bsc:.4f} <= W {d:.4f} <= BEC {d_bec:.4f}")

# E0 at the reference point rho0 = 1 fixes one BEC and one BSC.
target = gallager_e0(W, 1.0)
bec, bsc = bec_with_e0(target, 1.0), bsc_with_e0(target, 1.0)
print(f"\nE0(1) = {target:.5f}; matched BEC eps = {bec.w0[1]:.5f}, BSC p = {min(bsc.w0):.5f}")
print("  rho    BEC      W        BSC")
for r in e0_extremality_scan(W, 1.0, [0.25, 0.5, 2.0, 4.0]):
    print(f"  {r.rho1:4.2f}  {r.e0_bec:.5f}  {r.e0_w:.5f}  {r.e0_bsc:.5f}  {'inside' if r.in_interval else 'OUTSIDE'}")

# The transform never lowers E0(rho) on average.
rng = np.random.default_rng(0)
gains = []
for _ in range(200):
    V = random_channel(int(rng.integers(2, 9)), rng)
    children, parent = e0_improvement_check(V, 1.0)
    gains.append(children - parent)
print(f"\nE0(1, W-) + E0(1, W+) - 2 E0(1, W) over 200 random channels: min {min(gains):.2e}, "
      f"mean {np.mean(gains):.2e}")
