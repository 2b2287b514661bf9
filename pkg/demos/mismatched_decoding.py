"""
Decoding with the wrong channel law, and without knowing it at all
==================================================================

A code designed and decoded for BSC(0.08) is used over BSC(0.11). Building the
code from genie-aided simulations of the mismatched decoder gives an
achievable-rate estimate that grows with block length. When only a class of
channels is known, the code is built for the worst member and decoded by a
GLRT over the class.
"""

import math

from polarlab import ChannelClass, DecodeMetric, compound_construct, make_bsc, mc_genie_estimate, select_information_set
from polarlab.harness import block_error_rate, mismatched_rate_estimate

W, V = make_bsc(0.11), make_bsc(0.08)
n = 10
N = 1 << n
K = math.ceil(0.35 * N)

for name, metric in (("matched", DecodeMetric.matched()), ("metric BSC(0.08)", DecodeMetric.mismatched(V))):
    spec = select_information_set(mc_genie_estimate([W] * N, metric=metric, trials=2000, seed=1), K)
    err, t = block_error_rate([W] * N, spec, metric, 2000, seed=1, stream="demo")
    print(f"{name:18s} K={K}  block error {err / t:.4f}")

print("\nrate whose estimated SC error stays below 1e-2:")
for n_ in (8, 10, 12):
    r = mismatched_rate_estimate(W, V, n_, 1e-2, 4000, seed=7)
    print(f"  n={n_:2d}  K={r.K:4d}  rate {r.rate:.4f} +- {r.rate_se:.4f}")

members = ChannelClass(tuple(make_bsc(p) for p in (0.05, 0.08, 0.11, 0.14)))
spec = compound_construct(members, n, math.ceil(0.3 * N))
print(f"\ncompound code for BSC(p), p in {{0.05, 0.08, 0.11, 0.14}}, K={spec.K}, true channel BSC(0.11)")
for name, metric in (("matched SC", DecodeMetric.matched()), ("GLRT over class", DecodeMetric.glrt(members))):
    err, t = block_error_rate([W] * N, spec, metric, 1000, seed=2, stream="demo/glrt")
    print(f"  {name:16s} block error {err / t:.4f}")
