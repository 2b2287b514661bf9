"""
BEC and BSC representatives matched to a target capacity or E0 value.

The inverters invert monotone one-parameter families, so they either use a
closed form (BEC) or plain bisection (BSC). Bisection stops once the bracket
is narrower than ``1e-16`` or stops shrinking, which takes well under 200 steps.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels import (
    BinaryChannel,
    binary_entropy,
    gallager_e0,
    make_bec,
    make_bsc,
)

__all__ = [
    "bec_with_capacity",
    "bsc_with_capacity",
    "bec_with_e0",
    "bsc_with_e0",
    "bisect",
    "ScanRow",
    "e0_extremality_scan",
    "scan_to_csv",
]

MAX_BISECT_STEPS = 200


def bisect(f: Callable[[float], float], target: float, lo: float, hi: float, increasing: bool) -> tuple:
    """Solve ``f(x) = target`` on ``[lo, hi]`` for monotone ``f``.

    Returns ``(x, steps)``; ``x`` is the bracket end with the smaller residual.
    """
    steps = 0
    # no absolute width test: roots near 0 (large rho) need relative precision
    while steps < MAX_BISECT_STEPS:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        steps += 1
        if (f(mid) < target) == increasing:
            lo = mid
        else:
            hi = mid
    x = lo if abs(f(lo) - target) <= abs(f(hi) - target) else hi
    return x, steps


def _check_unit(value: float, what: str):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{what} must lie in [0, 1], got {value}")


def bec_with_capacity(target: float) -> BinaryChannel:
    _check_unit(target, "capacity")
    return make_bec(1.0 - target)


def bsc_with_capacity(target: float) -> BinaryChannel:
    _check_unit(target, "capacity")
    if target == 0.0:
        return make_bsc(0.5)
    if target == 1.0:
        return make_bsc(0.0)
    p, _ = bisect(lambda q: 1.0 - binary_entropy(q), target, 0.0, 0.5, increasing=False)
    return make_bsc(p)


def _e0_range(rho: float) -> tuple:
    # E0 of the noiseless channel is rho bits; the useless channel has 0
    return (min(0.0, rho), max(0.0, rho))


def _check_e0_target(target: float, rho: float):
    if not rho > -1:
        raise ValueError(f"rho must exceed -1, got {rho}")
    lo, hi = _e0_range(rho)
    slack = 1e-12
    if not lo - slack <= target <= hi + slack:
        raise ValueError(f"E0 target {target} outside the achievable range [{lo}, {hi}] at rho={rho}")


def bec_with_e0(target: float, rho: float) -> BinaryChannel:
    """BEC whose ``E0(rho)`` equals ``target``.

    ``E0(rho, BEC(e)) = -log2(e + (1 - e) 2^-rho)`` inverts in closed form.
    """
    _check_e0_target(target, rho)
    if rho == 0:
        # every channel has E0(0) = 0; return the useless member
        return make_bec(1.0)
    eps = (2.0 ** -target - 2.0 ** -rho) / (1.0 - 2.0 ** -rho)
    return make_bec(float(np.clip(eps, 0.0, 1.0)))


def bsc_with_e0(target: float, rho: float) -> BinaryChannel:
    _check_e0_target(target, rho)
    if rho == 0:
        return make_bsc(0.5)
    lo, hi = _e0_range(rho)
    if target <= lo and rho > 0 or target >= hi and rho < 0:
        return make_bsc(0.5)
    if target >= hi and rho > 0 or target <= lo and rho < 0:
        return make_bsc(0.0)
    # E0(rho, BSC(p)) falls with p when rho > 0 and rises with p when rho < 0
    p, _ = bisect(lambda q: gallager_e0(make_bsc(q), rho), target, 0.0, 0.5, increasing=rho < 0)
    return make_bsc(p)


@dataclass(frozen=True)
class ScanRow:
    rho0: float
    rho1: float
    e0_w: float
    e0_bec: float
    e0_bsc: float
    in_interval: bool


def e0_extremality_scan(
    W: BinaryChannel, rho0: float, rho_grid: Sequence[float], slack: float = 1e-10
) -> list:
    """Compare ``W`` with the BEC and BSC that share its ``E0(rho0)``.

    For every ``rho1`` in the grid, record the three ``E0(rho1)`` values and
    whether ``W``'s value lies in the closed interval spanned by the other two
    (widened by ``slack`` to absorb inversion error). No max/min orientation is
    assumed.
    """
    target = gallager_e0(W, rho0)
    bec = bec_with_e0(target, rho0)
    bsc = bsc_with_e0(target, rho0)
    rows = []
    for rho1 in rho_grid:
        if not rho1 > -1:
            raise ValueError(f"rho must exceed -1, got {rho1}")
        ew = gallager_e0(W, rho1)
        eb = gallager_e0(bec, rho1)
        es = gallager_e0(bsc, rho1)
        inside = min(eb, es) - slack <= ew <= max(eb, es) + slack
        rows.append(ScanRow(float(rho0), float(rho1), ew, eb, es, bool(inside)))
    return rows


SCAN_COLUMNS = ("rho0", "rho1", "e0_w", "e0_bec", "e0_bsc", "in_interval")


def scan_to_csv(rows: Sequence[ScanRow], header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(SCAN_COLUMNS)
    for r in rows:
        writer.writerow(
            [f"{r.rho0:.17g}", f"{r.rho1:.17g}", f"{r.e0_w:.17g}", f"{r.e0_bec:.17g}",
             f"{r.e0_bsc:.17g}", int(r.in_interval)]
        )
    return buf.getvalue()
