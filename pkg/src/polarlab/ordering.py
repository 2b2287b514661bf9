"""
Partial orders between binary-input channels.

* Stochastic degradation, decided by a linear feasibility problem.
* The symmetric convex order: a symmetric channel is a mixture of BSCs, and
  two channels are compared through the convex order of the entropy
  ``h2(P)`` of their random crossover probability ``P``. The mean of that
  statistic is ``1 - I(W)``, so comparable channels have equal capacity, and
  the more spread-out channel (the BEC end of the scale) dominates.
* An empirical polar-order probe that runs the SC decoder on both channels.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .channels import BinaryChannel, binary_entropy
from .codec import DecodeMetric
from .construction import DEFAULT_MU, select_information_set, synthesize

__all__ = [
    "AsymmetricChannelError",
    "CrossoverDistribution",
    "bsc_decomposition",
    "mix_bscs",
    "ConvexVerdict",
    "check_symmetric_convex_order",
    "check_degradation",
    "degradation_map",
    "ProbeReport",
    "polar_order_probe",
]

SYM_TOL = 1e-9
MEAN_TOL = 1e-9
MAX_DEGRADATION_OUTPUTS = 32


class AsymmetricChannelError(ValueError):
    pass


@dataclass(frozen=True)
class CrossoverDistribution:
    """Discrete law of the crossover probability of a BSC mixture.

    ``p`` is sorted ascending in [0, 1/2] with no repeats; ``mass`` sums to one.
    """

    p: np.ndarray
    mass: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        m = np.asarray(self.mass, dtype=np.float64)
        order = np.argsort(p, kind="stable")
        p, m = p[order], m[order]
        keep = np.r_[True, np.diff(p) > 0]
        if not keep.all():
            starts = np.flatnonzero(keep)
            m = np.add.reduceat(m, starts)
            p = p[keep]
        if abs(m.sum() - 1.0) > 1e-12:
            raise ValueError(f"masses sum to {m.sum():.17g}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "mass", m)

    @property
    def atoms(self) -> list:
        return list(zip(self.p.tolist(), self.mass.tolist()))

    def entropy_atoms(self):
        """Atoms of ``h2(P)``; ``h2`` is increasing on [0, 1/2] so the order is kept."""
        return binary_entropy(self.p), self.mass


def _pair_outputs(W: BinaryChannel, tol: float = SYM_TOL) -> list:
    """Greedy pairing of each output with its mirror image.

    Returns a list of ``(y, y')`` with ``y == y'`` for self-mirrored outputs.
    """
    M = W.num_outputs
    free = np.ones(M, dtype=bool)
    pairs = []
    for y in range(M):
        if not free[y]:
            continue
        free[y] = False
        if abs(W.w0[y] - W.w1[y]) <= tol:
            pairs.append((y, y))
            continue
        cand = np.flatnonzero(
            free & (np.abs(W.w1 - W.w0[y]) <= tol) & (np.abs(W.w0 - W.w1[y]) <= tol)
        )
        if cand.size == 0:
            raise AsymmetricChannelError(
                f"output {y} (W(y|0)={W.w0[y]:.6g}, W(y|1)={W.w1[y]:.6g}) has no mirror output"
            )
        free[cand[0]] = False
        pairs.append((y, int(cand[0])))
    return pairs


def bsc_decomposition(W: BinaryChannel) -> CrossoverDistribution:
    """Write a symmetric channel as a mixture of BSCs.

    A mirrored pair ``(y, y')`` is a BSC used with probability
    ``W(y|0) + W(y'|0)``; its crossover is the smaller of the two over their
    sum. A self-mirrored output is a BSC(1/2) component.
    """
    ps, masses = [], []
    for y, yp in _pair_outputs(W):
        if y == yp:
            ps.append(0.5)
            masses.append(W.w0[y])
        else:
            tot = W.w0[y] + W.w0[yp]
            ps.append(min(W.w0[y], W.w0[yp]) / tot)
            masses.append(tot)
    masses = np.array(masses)
    return CrossoverDistribution(np.array(ps), masses / masses.sum())


def mix_bscs(dist: CrossoverDistribution) -> BinaryChannel:
    """The symmetric channel whose BSC components are the atoms of ``dist``."""
    a = dist.mass * (1.0 - dist.p)
    b = dist.mass * dist.p
    return BinaryChannel(np.concatenate([a, b]), np.concatenate([b, a]))


class ConvexVerdict(enum.Enum):
    DOMINATES = "dominates"
    DOMINATED = "dominated"
    INCOMPARABLE = "incomparable"


def _stop_loss(values: np.ndarray, mass: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``E[(X - t)_+]`` for every point in ``t``."""
    return (mass[None, :] * np.maximum(values[None, :] - t[:, None], 0.0)).sum(axis=1)


def convex_leq(d_small: CrossoverDistribution, d_big: CrossoverDistribution, tol: float = MEAN_TOL) -> bool:
    """True when ``h2(P_small)`` is below ``h2(P_big)`` in the convex order."""
    xs, ms = d_small.entropy_atoms()
    xb, mb = d_big.entropy_atoms()
    if abs(np.dot(xs, ms) - np.dot(xb, mb)) > tol:
        return False
    # both stop-loss transforms are piecewise linear with kinks at the atoms
    grid = np.union1d(xs, xb)
    return bool(np.all(_stop_loss(xs, ms, grid) <= _stop_loss(xb, mb, grid) + tol))


def check_symmetric_convex_order(W1: BinaryChannel, W2: BinaryChannel) -> ConvexVerdict:
    """Compare two symmetric channels in the symmetric convex order.

    ``DOMINATES`` means ``W1`` is at least as spread out as ``W2`` (this
    includes equality), ``DOMINATED`` the reverse, ``INCOMPARABLE`` neither;
    channels of different capacity are always incomparable.
    """
    d1, d2 = bsc_decomposition(W1), bsc_decomposition(W2)
    if convex_leq(d2, d1):
        return ConvexVerdict.DOMINATES
    if convex_leq(d1, d2):
        return ConvexVerdict.DOMINATED
    return ConvexVerdict.INCOMPARABLE


def degradation_map(W1: BinaryChannel, W2: BinaryChannel, tol: float = 1e-9) -> Optional[np.ndarray]:
    """Row-stochastic ``P`` with ``W2 = W1 P`` if one exists, else None.

    Phase-one style: minimise the total absolute residual of ``W1 P - W2``
    over stochastic ``P``; the channel is degraded when the optimum is within
    ``tol``.
    """
    M1, M2 = W1.num_outputs, W2.num_outputs
    if max(M1, M2) > MAX_DEGRADATION_OUTPUTS:
        raise ValueError(f"degradation check is limited to {MAX_DEGRADATION_OUTPUTS} outputs per channel")
    nP = M1 * M2
    nR = 2 * M2
    # variables: P (row-major), then residual bounds r >= |W1 P - W2|
    c = np.r_[np.zeros(nP), np.ones(nR)]
    A = np.zeros((2 * M2, nP))
    for x, row in enumerate((W1.w0, W1.w1)):
        for k in range(M2):
            A[x * M2 + k, k::M2] = row
    target = np.r_[W2.w0, W2.w1]
    eye = np.eye(nR)
    A_ub = np.block([[A, -eye], [-A, -eye]])
    b_ub = np.r_[target, -target]
    A_eq = np.zeros((M1, nP + nR))
    for y in range(M1):
        A_eq[y, y * M2:(y + 1) * M2] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=np.ones(M1), bounds=(0, None), method="highs")
    if res.status != 0 or res.fun > tol:
        return None
    P = np.clip(res.x[:nP].reshape(M1, M2), 0.0, None)
    P /= P.sum(axis=1, keepdims=True)
    if np.max(np.abs(np.vstack([W1.w0, W1.w1]) @ P - np.vstack([W2.w0, W2.w1]))) > tol:
        return None
    return P


def check_degradation(W1: BinaryChannel, W2: BinaryChannel) -> bool:
    """True when ``W2`` is a stochastically degraded version of ``W1``."""
    return degradation_map(W1, W2) is not None


@dataclass(frozen=True)
class ProbeReport:
    w1: str
    w2: str
    n: int
    K: int
    err1: float
    err2: float
    se1: float
    se2: float
    verdict: bool

    def csv_row(self) -> list:
        return [self.w1, self.w2, self.n, self.K, f"{self.err1:.17g}", f"{self.err2:.17g}",
                f"{self.se1:.17g}", f"{self.se2:.17g}", int(self.verdict)]


PROBE_COLUMNS = ("w1", "w2", "n", "K", "err1", "err2", "se1", "se2", "verdict")


def polar_order_probe(W1: BinaryChannel, W2: BinaryChannel, n: int, K: int, trials: int, seed: int = 0,
                      mu: int = DEFAULT_MU, threads: Optional[int] = None) -> ProbeReport:
    """Use the code built for ``W1`` on both channels, each decoded with its own law.

    ``verdict`` is True when the block error on ``W2`` does not exceed the
    one on ``W1`` by more than three combined standard errors.
    """
    from .harness import block_error_rate

    for W in (W1, W2):
        _pair_outputs(W)
    N = 1 << n
    spec = select_information_set(synthesize([W1] * N, mu), K, {"designed_for": repr(W1)})
    e1, t1 = block_error_rate([W1] * N, spec, DecodeMetric.matched(), trials, seed, "probe/w1", threads)
    e2, t2 = block_error_rate([W2] * N, spec, DecodeMetric.matched(), trials, seed, "probe/w2", threads)
    p1, p2 = e1 / t1, e2 / t2
    se1 = float(np.sqrt(p1 * (1 - p1) / t1))
    se2 = float(np.sqrt(p2 * (1 - p2) / t2))
    verdict = p2 <= p1 + 3.0 * np.hypot(se1, se2)
    return ProbeReport(repr(W1), repr(W2), n, K, p1, p2, se1, se2, bool(verdict))


def probes_to_csv(reports, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(PROBE_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()
