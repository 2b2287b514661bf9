"""
One-step polar transform on a pair of channels, and output-alphabet merging.

The minus channel has outputs ``(y1, y2)`` laid out row-major; the plus channel
has outputs ``(y1, y2, u1)`` with ``u1`` varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import (
    BinaryChannel,
    bhattacharyya,
    gallager_e0,
    symmetric_capacity,
)

__all__ = [
    "TransformPair",
    "transform",
    "merge_outputs",
    "conservation_check",
    "extremal_split_check",
    "e0_improvement_check",
]

DEFAULT_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class TransformPair:
    minus: BinaryChannel
    plus: BinaryChannel


def transform(W: BinaryChannel, Wp: BinaryChannel) -> TransformPair:
    """Combine two channel uses into the minus and plus synthetic channels.

    ``minus(y1, y2 | u1) = 1/2 sum_u2 W(y1 | u1^u2) Wp(y2 | u2)`` and
    ``plus(y1, y2, u1 | u2) = 1/2 W(y1 | u1^u2) Wp(y2 | u2)``.
    """
    a0, a1 = W.w0, W.w1
    b0, b1 = Wp.w0, Wp.w1
    m0 = 0.5 * (np.outer(a0, b0) + np.outer(a1, b1))
    m1 = 0.5 * (np.outer(a1, b0) + np.outer(a0, b1))
    # plus rows indexed [y1, y2, u1]
    p0 = 0.5 * np.stack([np.outer(a0, b0), np.outer(a1, b0)], axis=-1)
    p1 = 0.5 * np.stack([np.outer(a1, b1), np.outer(a0, b1)], axis=-1)
    minus = BinaryChannel(_renorm(m0.ravel()), _renorm(m1.ravel()))
    plus = BinaryChannel(_renorm(p0.ravel()), _renorm(p1.ravel()))
    return TransformPair(minus, plus)


def _renorm(row: np.ndarray) -> np.ndarray:
    # products of normalized rows drift by a few ulps; keep the row invariant tight
    s = row.sum()
    return row if s == 1.0 else row / s


def _sorted_llr(w0: np.ndarray, w1: np.ndarray):
    with np.errstate(divide="ignore"):
        llr = np.log(w0) - np.log(w1)
    order = np.argsort(-llr, kind="stable")
    return llr[order], w0[order], w1[order]


def _group_sum(keys: np.ndarray, w0: np.ndarray, w1: np.ndarray):
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    return np.add.reduceat(w0, starts), np.add.reduceat(w1, starts)


def _llr_of(w0, w1):
    with np.errstate(divide="ignore"):
        return np.log(w0) - np.log(w1)


def merge_outputs(W: BinaryChannel, mu: int = 64, tol: float = DEFAULT_MERGE_TOL) -> BinaryChannel:
    """Shrink the output alphabet of ``W`` to at most ``mu`` symbols.

    Outputs whose log-likelihood ratios agree within ``tol`` are merged first;
    this step loses no information. If more than ``mu`` outputs remain, outputs
    that are adjacent in LLR order are merged, smallest LLR gap first. Each
    round merges a batch of disjoint smallest-gap pairs, so the loop takes a
    logarithmic number of rounds. Merging is a degradation: capacity can only
    decrease, and the caller measures the loss.

    The result lists outputs in decreasing LLR order.
    """
    if mu < 2:
        raise ValueError(f"mu must be at least 2, got {mu}")
    llr, w0, w1 = _sorted_llr(W.w0, W.w1)
    # exact-LR pass; inf - inf is nan and compares False, keeping infinite LLRs together
    with np.errstate(invalid="ignore"):
        breaks = np.r_[True, (llr[:-1] - llr[1:]) > tol]
    if not breaks.all():
        group = np.cumsum(breaks)
        w0, w1 = _group_sum(group, w0, w1)
        llr = _llr_of(w0, w1)
    if w0.size == W.num_outputs and w0.size <= mu:
        return W
    while w0.size > mu:
        excess = w0.size - mu
        gaps = llr[:-1] - llr[1:]
        want = excess
        kth = np.partition(gaps, want - 1)[want - 1]
        chosen = gaps <= kth
        # inside a run of consecutive chosen edges keep every other edge
        run_start = np.r_[True, ~chosen[:-1]]
        idx = np.arange(gaps.size)
        last_start = np.maximum.accumulate(np.where(run_start, idx, 0))
        keep = chosen & ((idx - last_start) % 2 == 0)
        kept = np.flatnonzero(keep)
        if kept.size > excess:
            # prefer the smallest gaps when ties overshoot the target
            kept = kept[np.argsort(gaps[kept], kind="stable")[:excess]]
            keep = np.zeros_like(keep)
            keep[kept] = True
        group = np.cumsum(np.r_[True, ~keep])
        w0, w1 = _group_sum(group, w0, w1)
        llr = _llr_of(w0, w1)
    return BinaryChannel(w0, w1)


def conservation_check(W: BinaryChannel, Wp: BinaryChannel) -> tuple:
    """Return ``(I(W-) + I(W+), I(W) + I(Wp))`` computed on unmerged children."""
    pair = transform(W, Wp)
    lhs = symmetric_capacity(pair.minus) + symmetric_capacity(pair.plus)
    rhs = symmetric_capacity(W) + symmetric_capacity(Wp)
    return lhs, rhs


def capacity_split(W: BinaryChannel) -> float:
    """``I(W+) - I(W-)`` for the stationary transform of ``W``."""
    pair = transform(W, W)
    return symmetric_capacity(pair.plus) - symmetric_capacity(pair.minus)


def extremal_split_check(W: BinaryChannel) -> tuple:
    """Capacity split of ``W`` next to the splits of the capacity-matched BEC and BSC.

    Returns ``(delta, bec_delta, bsc_delta)``; information combining bounds
    place ``delta`` between ``bsc_delta`` and ``bec_delta``.
    """
    from .extremality import bec_with_capacity, bsc_with_capacity

    cap = symmetric_capacity(W)
    return (
        capacity_split(W),
        capacity_split(bec_with_capacity(cap)),
        capacity_split(bsc_with_capacity(cap)),
    )


def e0_improvement_check(W: BinaryChannel, rho: float) -> tuple:
    """Return ``(E0(rho, W-) + E0(rho, W+), 2 E0(rho, W))``."""
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    pair = transform(W, W)
    children = gallager_e0(pair.minus, rho) + gallager_e0(pair.plus, rho)
    return children, 2.0 * gallager_e0(W, rho)


def z_bounds(W: BinaryChannel, Wp: BinaryChannel) -> dict:
    """Bhattacharyya values of the children next to their classical bounds."""
    pair = transform(W, Wp)
    z, zp = bhattacharyya(W), bhattacharyya(Wp)
    return {
        "z_minus": bhattacharyya(pair.minus),
        "z_plus": bhattacharyya(pair.plus),
        "minus_lower": max(z, zp),
        "minus_upper": z + zp - z * zp,
        "plus_exact": z * zp,
    }
