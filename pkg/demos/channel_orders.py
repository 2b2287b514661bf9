"""
Comparing channels: degradation and the symmetric convex order
==============================================================

A symmetric channel is a random BSC. Two channels of equal capacity can be
compared through the spread of the entropy of that random crossover; the BEC
is the most spread out, the BSC the least. Degradation is a stronger relation
decided by a small linear program.
"""

from polarlab import (
    bsc_decomposition,
    check_degradation,
    check_symmetric_convex_order,
    make_bec,
    make_bsc,
    make_quantized_bawgn,
    polar_order_probe,
    symmetric_capacity,
)
from polarlab.extremality import bec_with_capacity, bsc_with_capacity

W = make_quantized_bawgn(1.0, 16)
cap = symmetric_capacity(W)
print(f"BAWGN(snr=1), 16 bins, is a mixture of {len(bsc_decomposition(W).atoms)} BSCs, I = {cap:.4f}")
print("  BEC of equal capacity vs W:", check_symmetric_convex_order(bec_with_capacity(cap), W).value)
print("  W vs BSC of equal capacity:", check_symmetric_convex_order(W, bsc_with_capacity(cap)).value)
print("  BSC(0.05) vs BSC(0.2):     ", check_symmetric_convex_order(make_bsc(0.05), make_bsc(0.2)).value)

print("\ndegradation")
for a, b in ((make_bec(0.4), make_bec(0.6)), (make_bsc(0.1), make_bsc(0.2)), (make_bsc(0.1), make_bec(0.05))):
    print(f"  {a!r} -> {b!r}: {'degraded' if check_degradation(a, b) else 'not degraded'}")

print("\nthe code built for BSC(0.11) used on other channels (n=8, K=90, 2000 frames)")
# the last one is the BEC with the design channel's capacity, the top of the convex order
for other in (make_bsc(0.08), make_bec(0.3), bec_with_capacity(symmetric_capacity(make_bsc(0.11)))):
    r = polar_order_probe(make_bsc(0.11), other, 8, 90, 2000, seed=3)
    print(f"  {other!r:28s} error {r.err2:.4f} (design channel {r.err1:.4f})  no worse: {r.verdict}")
