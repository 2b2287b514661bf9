"""
Bit-channel synthesis and information-set selection.

Synthetic channel ``i`` always refers to decoder input ``u_i`` (see
:mod:`polarlab.codec` for the index convention). Channels are handed in
physical order; the bit-reversal is applied here once.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channels import (
    BinaryChannel,
    ChannelClass,
    bec_erasure_probability,
    bhattacharyya,
    is_bec_like,
    make_bec,
    symmetric_capacity,
)
from .codec import DecodeMetric, SCDecoder, encode, leaf_llrs, transmit_uniform
from .codes import CodeSpec, bit_reversal_permutation, log2_exact
from .montecarlo import run_chunked, trial_rng
from .transform import merge_outputs, transform

__all__ = [
    "BitChannelReport",
    "Synthesis",
    "bec_z_recursion",
    "synthesize",
    "select_information_set",
    "mc_genie_estimate",
    "compound_construct",
    "reports_to_csv",
]

DEFAULT_MU = 64


@dataclass(frozen=True)
class BitChannelReport:
    index: int
    z: float
    i: float
    mc_error: Optional[float] = None
    mc_se: Optional[float] = None

    def to_dict(self) -> dict:
        return {"index": self.index, "z": self.z, "i": self.i, "mc_error": self.mc_error, "mc_se": self.mc_se}


@dataclass
class Synthesis:
    """Outcome of :func:`synthesize`.

    ``z`` and ``i`` are indexed by bit-channel. ``level_capacity[l]`` is the
    total capacity after ``l`` levels (merged channels) and ``level_loss[l]``
    the capacity given up by merging at that level, so
    ``level_capacity[l] + level_loss[l]`` reproduces ``level_capacity[l-1]``.
    """

    n: int
    z: np.ndarray
    i: np.ndarray
    level_capacity: list
    level_loss: list
    exact: bool
    _channels: Optional[list] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def channels(self) -> list:
        if self._channels is None:
            # exact BEC path keeps only erasure probabilities
            self._channels = [make_bec(float(e)) for e in self.z]
        return self._channels

    @property
    def reports(self) -> list:
        return [BitChannelReport(k, float(z), float(i)) for k, (z, i) in enumerate(zip(self.z, self.i))]

    def __len__(self):
        return self.N


def bec_z_recursion(erasures: Sequence[float]) -> np.ndarray:
    """Exact erasure probabilities of all bit-channels for BEC inputs in natural order.

    Position ``j`` pairs with ``j + stride`` inside each block, largest stride
    first; the pair becomes ``(e1 + e2 - e1 e2, e1 e2)`` in place.
    """
    e = np.asarray(erasures, dtype=np.float64)
    return _synthesize_bec(e, log2_exact(e.size)).z


def synthesize(channels: Sequence[BinaryChannel], mu: int = DEFAULT_MU, exact_bec: Optional[bool] = None) -> Synthesis:
    """Apply the polar transform recursively to ``N = 2**n`` channels.

    Parameters
    ----------
    channels : sequence of BinaryChannel
        One channel per codeword position, physical order. Pass ``N`` copies
        of one channel for the stationary case.
    mu : int
        Output alphabet cap applied after every transform.
    exact_bec : bool, optional
        Use the exact erasure-probability recursion. By default it is chosen
        whenever every input channel is BEC-like.
    """
    channels = list(channels)
    n = log2_exact(len(channels))
    N = 1 << n
    uniq, which = _unique(channels)
    if exact_bec is None:
        exact_bec = all(is_bec_like(W) for W in uniq)
    if exact_bec:
        if not all(is_bec_like(W) for W in uniq):
            raise ValueError("exact BEC synthesis requested for a non-BEC channel")
        e = np.array([bec_erasure_probability(W) for W in uniq])[which]
        return _synthesize_bec(e[bit_reversal_permutation(n)], n)

    nat = [channels[k] for k in bit_reversal_permutation(n)]
    level_capacity = [sum(symmetric_capacity(W) for W in nat)]
    level_loss = [0.0]
    cur = nat
    s = N // 2
    while s >= 1:
        cache = {}
        nxt = [None] * N
        cap = loss = 0.0
        for b in range(0, N, 2 * s):
            for j in range(b, b + s):
                key = (id(cur[j]), id(cur[j + s]))
                hit = cache.get(key)
                if hit is None:
                    pair = transform(cur[j], cur[j + s])
                    minus = merge_outputs(pair.minus, mu)
                    plus = merge_outputs(pair.plus, mu)
                    ci_m, ci_p = symmetric_capacity(minus), symmetric_capacity(plus)
                    lost = (symmetric_capacity(pair.minus) - ci_m) + (symmetric_capacity(pair.plus) - ci_p)
                    hit = cache[key] = (minus, plus, ci_m + ci_p, lost)
                nxt[j], nxt[j + s] = hit[0], hit[1]
                cap += hit[2]
                loss += hit[3]
        level_capacity.append(cap)
        level_loss.append(loss)
        cur = nxt
        s //= 2
    z = np.array([bhattacharyya(W) for W in cur])
    i = np.array([symmetric_capacity(W) for W in cur])
    return Synthesis(n, z, i, level_capacity, level_loss, exact=False, _channels=cur)


def _unique(chans):
    """Distinct channel objects and, per position, the index of its object."""
    slot, uniq = {}, []
    which = np.empty(len(chans), dtype=np.int64)
    for k, W in enumerate(chans):
        j = slot.get(id(W))
        if j is None:
            j = slot[id(W)] = len(uniq)
            uniq.append(W)
        which[k] = j
    return uniq, which


def _synthesize_bec(e: np.ndarray, n: int) -> Synthesis:
    """Exact recursion on erasure probabilities given in natural order."""
    N = 1 << n
    e = e.astype(np.float64, copy=True)
    level_capacity = [float(np.sum(1.0 - e))]
    s = N // 2
    while s >= 1:
        blk = e.reshape(N // (2 * s), 2, s)
        top, bot = blk[:, 0, :].copy(), blk[:, 1, :].copy()
        blk[:, 0, :] = top + bot - top * bot
        blk[:, 1, :] = top * bot
        level_capacity.append(float(np.sum(1.0 - e)))
        s //= 2
    return Synthesis(n, e, 1.0 - e, level_capacity, [0.0] * (n + 1), exact=True)


def _selection_keys(reports):
    """(primary score, z) arrays for ranking; ``mc_error`` takes precedence when present."""
    if isinstance(reports, Synthesis):
        return reports.z, reports.z
    reports = list(reports)
    z = np.array([r.z for r in reports], dtype=np.float64)
    if reports and all(r.mc_error is not None for r in reports):
        return np.array([r.mc_error for r in reports], dtype=np.float64), z
    return z, z


def select_information_set(reports, K: int, provenance: Optional[dict] = None) -> CodeSpec:
    """Unfreeze the ``K`` most reliable bit-channels.

    Reliability is ``mc_error`` when every report carries one, otherwise
    ``z``. Ties fall back to ``z`` and then to the smaller index. Frozen bits
    are zero.
    """
    score, z = _selection_keys(reports)
    N = score.size
    if not 0 <= K <= N:
        raise ValueError(f"K must lie in [0, {N}], got {K}")
    order = np.lexsort((np.arange(N), z, score))
    mask = np.ones(N, dtype=bool)
    mask[order[:K]] = False
    prov = {"method": "z" if score is z else "mc_error", "K": int(K)}
    prov.update(provenance or {})
    return CodeSpec(log2_exact(N), mask, provenance=prov)


def mc_genie_estimate(
    channels,
    spec: Optional[CodeSpec] = None,
    metric: Optional[DecodeMetric] = None,
    trials: int = 1000,
    seed: int = 0,
    n: Optional[int] = None,
    threads: Optional[int] = None,
) -> list:
    """Per-bit-channel error rates of genie-aided SC decoding, by simulation.

    Every trial sends the all-zero input (or the frozen values of ``spec``
    when given) through the true ``channels``; the decoder computes its LLRs
    from ``metric`` but each decision sees the true past bits. An exactly-zero
    decision LLR is a tie and is settled by a fair coin from the trial's own
    random stream.

    The returned reports carry ``mc_error`` with its binomial standard error,
    plus Monte Carlo estimates of the bit-channel's Bhattacharyya value
    ``E[exp(-L/2)]`` and information ``E[1 - log2(1 + exp(-L))]`` taken on the
    decision LLR ``L`` signed toward the true bit. For a matched metric these
    are unbiased estimates of ``Z_i`` and ``I_i``.
    """
    metric = metric or DecodeMetric.matched()
    if isinstance(channels, BinaryChannel):
        if n is None:
            if spec is None:
                raise ValueError("pass n or spec when giving a single channel")
            n = spec.n
        channels = [channels] * (1 << n)
    channels = list(channels)
    n = log2_exact(len(channels))
    N = 1 << n
    if trials < 1:
        raise ValueError("trials must be positive")
    u_true = np.zeros(N, dtype=np.uint8) if spec is None else spec.frozen_values.copy()
    x_true = encode(u_true)
    metric_chans = metric.metric_channels(channels)
    decoder_spec = CodeSpec(n, np.ones(N, dtype=bool), u_true)

    def run(a, b):
        T = b - a
        unif = np.empty((T, N))
        coins = np.empty((T, N))
        for t in range(T):
            rng = trial_rng(seed, "genie", a + t)
            unif[t] = rng.random(N)
            coins[t] = rng.random(N)
        y = transmit_uniform(np.broadcast_to(x_true, (T, N)), channels, unif)
        dec = SCDecoder(decoder_spec)
        _, _, L = dec.decode_llr(leaf_llrs(y, metric_chans), genie=np.broadcast_to(u_true, (T, N)))
        signed = np.where(u_true == 0, L, -L)
        err = (signed < 0) | ((signed == 0) & (coins < 0.5))
        zs = np.exp(-0.5 * signed)
        inf = 1.0 - np.logaddexp(0.0, -signed) / np.log(2.0)
        return err.sum(axis=0), zs.sum(axis=0), inf.sum(axis=0)

    parts = run_chunked(run, trials, threads)
    errs = sum(p[0] for p in parts)
    zsum = sum(p[1] for p in parts)
    isum = sum(p[2] for p in parts)
    rate = errs / trials
    se = np.sqrt(rate * (1.0 - rate) / trials)
    z_hat = np.clip(zsum / trials, 0.0, 1.0)
    i_hat = np.clip(isum / trials, 0.0, 1.0)
    return [
        BitChannelReport(k, float(z_hat[k]), float(i_hat[k]), float(rate[k]), float(se[k]))
        for k in range(N)
    ]


def compound_worst_case(cls: ChannelClass, n: int, mu: int = DEFAULT_MU) -> list:
    """Per-index worst case over the class: largest ``z`` and smallest ``i``."""
    N = 1 << n
    synths = [synthesize([W] * N, mu) for W in cls]
    zmax = np.max([s.z for s in synths], axis=0)
    imin = np.min([s.i for s in synths], axis=0)
    return [BitChannelReport(k, float(z), float(i)) for k, (z, i) in enumerate(zip(zmax, imin))]


def compound_construct(cls: ChannelClass, n: int, K: int, mu: int = DEFAULT_MU) -> CodeSpec:
    """Code for a class of channels, ranking indices by their worst member.

    The resulting frozen set serves every member of the class.
    """
    if not isinstance(cls, ChannelClass):
        cls = ChannelClass(tuple(cls))
    prov = {"method": "compound", "members": [repr(W) for W in cls], "mu": int(mu)}
    return select_information_set(compound_worst_case(cls, n, mu), K, prov)


REPORT_COLUMNS = ("index", "z", "i", "mc_error")


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in reports:
        w.writerow([r.index, f"{r.z:.17g}", f"{r.i:.17g}", "" if r.mc_error is None else f"{r.mc_error:.17g}"])
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True)
