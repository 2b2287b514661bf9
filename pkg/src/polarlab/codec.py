"""
Polar encoder, channel sampler and successive-cancellation decoder.

Conventions
-----------
Inputs ``u`` are mapped to ``x = u B F^{(n)}`` where ``F^{(n)}`` is the n-fold
Kronecker power of ``[[1, 0], [1, 1]]`` and ``B`` is the bit-reversal
permutation. Internally the decoder works in "natural" order, i.e. on
``y[perm]``; the permutation is applied exactly once on the way in and once on
the way out, so bit-channel ``i`` of the constructor is decoder input ``u_i``.

All decoding routines accept a batch of frames, shape ``(T, N)``, and run the
recursion once for the whole batch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .channels import BinaryChannel, ChannelClass
from .codes import CodeSpec, bit_reversal_permutation, log2_exact

__all__ = [
    "LLR_CLIP",
    "DecodeMetric",
    "encode",
    "transmit",
    "leaf_llrs",
    "SCDecoder",
    "sc_decode",
    "glrt_decode",
    "schedule_count",
]

LLR_CLIP = 40.0

ChannelSeq = Union[BinaryChannel, Sequence[BinaryChannel]]


def _as_list(channels: ChannelSeq, N: int) -> list:
    if isinstance(channels, BinaryChannel):
        return [channels] * N
    channels = list(channels)
    if len(channels) != N:
        raise ValueError(f"expected {N} channels, got {len(channels)}")
    return channels


def _groups(channels: list) -> dict:
    """Positions that share one channel object, keyed by ``id``."""
    out = {}
    for i, W in enumerate(channels):
        out.setdefault(id(W), (W, []))[1].append(i)
    return out


def encode(u) -> np.ndarray:
    """Polar-encode ``u`` (last axis of length ``N = 2**n``) over GF(2).

    Uses the in-place butterfly, ``n`` stages of ``N/2`` XORs.
    """
    x = np.array(u, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    n = log2_exact(N)
    h = 1
    while h < N:
        blocks = x.reshape(x.shape[:-1] + (N // (2 * h), 2, h))
        blocks[..., 0, :] ^= blocks[..., 1, :]
        h *= 2
    return x[..., bit_reversal_permutation(n)]


def transmit(x, channels: ChannelSeq, rng: np.random.Generator) -> np.ndarray:
    """Sample output indices for codeword bits ``x`` sent over ``channels``."""
    x = np.asarray(x, dtype=np.uint8)
    return transmit_uniform(x, channels, rng.random(x.shape))


def transmit_uniform(x: np.ndarray, channels: ChannelSeq, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF sampling of channel outputs from supplied uniforms."""
    N = x.shape[-1]
    chans = _as_list(channels, N)
    y = np.empty(x.shape, dtype=np.int64)
    for W, pos in _groups(chans).values():
        pos = np.asarray(pos)
        xs, us = x[..., pos], uniforms[..., pos]
        out = np.empty(xs.shape, dtype=np.int64)
        for bit, row in ((0, W.w0), (1, W.w1)):
            cdf = np.cumsum(row)
            cdf[-1] = 1.0
            sel = xs == bit
            out[sel] = np.searchsorted(cdf, us[sel], side="right")
        # zero-probability tail symbols can only be hit through rounding
        np.minimum(out, W.num_outputs - 1, out=out)
        y[..., pos] = out
    return y


def leaf_llrs(y, channels: ChannelSeq, clip: float = LLR_CLIP) -> np.ndarray:
    """Per-position LLRs ``ln V(y|0)/V(y|1)`` under the metric channels, saturated."""
    y = np.asarray(y)
    N = y.shape[-1]
    chans = _as_list(channels, N)
    out = np.empty(y.shape, dtype=np.float64)
    for V, pos in _groups(chans).values():
        pos = np.asarray(pos)
        ys = y[..., pos]
        if ys.size and ys.max() >= V.num_outputs:
            raise ValueError("observed symbol outside the metric channel's output alphabet")
        out[..., pos] = V.llr(clip)[ys]
    return out


@dataclass(frozen=True)
class DecodeMetric:
    """Which channel law the decoder uses.

    ``kind`` is ``"matched"`` (use the true channels), ``"mismatched"`` (use
    ``channels``: one channel or a per-position list) or ``"glrt"`` (decode
    once per member of ``cls``).
    """

    kind: str = "matched"
    channels: Optional[ChannelSeq] = None
    cls: Optional[ChannelClass] = None

    def __post_init__(self):
        if self.kind not in ("matched", "mismatched", "glrt"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == "mismatched" and self.channels is None:
            raise ValueError("a mismatched metric needs its channel(s)")
        if self.kind == "glrt" and self.cls is None:
            raise ValueError("a GLRT metric needs a channel class")

    @classmethod
    def matched(cls) -> "DecodeMetric":
        return cls("matched")

    @classmethod
    def mismatched(cls, V: ChannelSeq) -> "DecodeMetric":
        if not isinstance(V, BinaryChannel):
            V = tuple(V)
        return cls("mismatched", channels=V)

    @classmethod
    def glrt(cls, members: ChannelClass) -> "DecodeMetric":
        if not isinstance(members, ChannelClass):
            members = ChannelClass(tuple(members))
        return cls("glrt", cls=members)

    def metric_channels(self, true_channels: Optional[ChannelSeq]) -> ChannelSeq:
        if self.kind == "matched":
            if true_channels is None:
                raise ValueError("a matched metric needs the true channels")
            return true_channels
        if self.kind == "mismatched":
            return self.channels
        raise ValueError("GLRT has no single metric; use glrt_decode")


def _check_node(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # 2 atanh(tanh(a/2) tanh(b/2)) without overflow
    out = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    out += np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    return np.clip(out, -LLR_CLIP, LLR_CLIP, out=out)


def schedule_count(n: int) -> int:
    """LLR updates performed by one SC pass: ``N/2`` check and ``N/2`` variable updates per stage."""
    return n * (1 << n)


class SCDecoder:
    """Successive-cancellation decoder for a fixed code.

    Parameters
    ----------
    spec : CodeSpec
        Frozen set and frozen values.

    After every call, ``llr_updates`` holds the number of check/variable node
    LLR evaluations and ``node_visits`` the number of recursion nodes entered;
    both are per frame and always equal ``n*N`` and ``2N-1``.
    """

    def __init__(self, spec: CodeSpec):
        self.spec = spec
        self.n = spec.n
        self.N = spec.N
        self._perm = bit_reversal_permutation(self.n)
        self.llr_updates = 0
        self.node_visits = 0

    def decode_llr(self, llr: np.ndarray, genie: Optional[np.ndarray] = None):
        """Decode channel LLRs given in physical order.

        With ``genie`` (true ``u``, shape ``(T, N)``) every decision is replaced
        by the true bit and the decision LLRs are returned instead.

        Returns
        -------
        u_hat, x_hat : ndarray of uint8, shape (T, N)
        decision_llr : ndarray of float, shape (T, N)
            LLR seen by each bit decision.
        """
        llr = np.atleast_2d(np.asarray(llr, dtype=np.float64))
        if llr.shape[-1] != self.N:
            raise ValueError(f"expected frames of length {self.N}, got {llr.shape[-1]}")
        T = llr.shape[0]
        self._u = np.zeros((T, self.N), dtype=np.uint8)
        self._dec_llr = np.zeros((T, self.N), dtype=np.float64)
        self._genie = None if genie is None else np.atleast_2d(np.asarray(genie, dtype=np.uint8))
        self.llr_updates = 0
        self.node_visits = 0
        x_nat = self._node(llr[:, self._perm], 0)
        u_hat, dec = self._u, self._dec_llr
        self._u = self._dec_llr = self._genie = None
        return u_hat, x_nat[:, self._perm], dec

    def _node(self, L: np.ndarray, lo: int) -> np.ndarray:
        self.node_visits += 1
        m = L.shape[1]
        if m == 1:
            return self._leaf(L[:, 0], lo)
        h = m // 2
        a, b = L[:, :h], L[:, h:]
        c = self._node(_check_node(a, b), lo)
        Ld = np.clip(b + (1.0 - 2.0 * c) * a, -LLR_CLIP, LLR_CLIP)
        self.llr_updates += m
        d = self._node(Ld, lo + h)
        return np.concatenate([c ^ d, d], axis=1)

    def _leaf(self, llr: np.ndarray, i: int) -> np.ndarray:
        self._dec_llr[:, i] = llr
        if self._genie is not None:
            bit = self._genie[:, i]
        elif self.spec.frozen_mask[i]:
            bit = np.full(llr.shape, self.spec.frozen_values[i], dtype=np.uint8)
        else:
            # ties go to 0
            bit = (llr < 0).astype(np.uint8)
        self._u[:, i] = bit
        return bit[:, None]


def sc_decode(
    y,
    spec: CodeSpec,
    metric: Optional[DecodeMetric] = None,
    channels: Optional[ChannelSeq] = None,
    decoder: Optional[SCDecoder] = None,
):
    """SC-decode received symbol indices ``y``.

    The leaf LLRs come from the metric's channel law: the true ``channels``
    when matched, the mismatched channel(s) otherwise.

    Returns ``(u_hat, x_hat)``, each shaped like ``y``.
    """
    metric = metric or DecodeMetric.matched()
    y = np.asarray(y)
    single = y.ndim == 1
    llr = leaf_llrs(np.atleast_2d(y), metric.metric_channels(channels))
    dec = decoder or SCDecoder(spec)
    u_hat, x_hat, _ = dec.decode_llr(llr)
    if single:
        return u_hat[0], x_hat[0]
    return u_hat, x_hat


def _log_likelihood(y: np.ndarray, x: np.ndarray, V: BinaryChannel) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logrows = np.log(V.rows)
    return logrows[x, y].sum(axis=-1)


def glrt_decode(y, spec: CodeSpec, cls: ChannelClass, with_scores: bool = False):
    """Universal decoding by running the SC decoder once per class member.

    Member ``j`` yields a candidate codeword; its score is the best
    log-likelihood any class member assigns to it. The highest score wins,
    with ties going to the smaller member index (so duplicate candidates
    never change the outcome).

    Returns ``(u_hat, x_hat, chosen_member)``; with ``with_scores`` the
    per-member log-likelihood scores, shaped ``(members, frames)``, are
    appended.
    """
    if not isinstance(cls, ChannelClass):
        cls = ChannelClass(tuple(cls))
    y = np.asarray(y)
    single = y.ndim == 1
    y2 = np.atleast_2d(y)
    dec = SCDecoder(spec)
    us, xs, scores = [], [], []
    for V in cls:
        u_hat, x_hat = sc_decode(y2, spec, DecodeMetric.mismatched(V), decoder=dec)
        us.append(u_hat)
        xs.append(x_hat)
        scores.append(np.max([_log_likelihood(y2, x_hat, Vs) for Vs in cls], axis=0))
    scores = np.array(scores)
    chosen = np.argmax(scores, axis=0)
    rows = np.arange(y2.shape[0])
    u_out = np.stack(us)[chosen, rows]
    x_out = np.stack(xs)[chosen, rows]
    if single:
        out = (u_out[0], x_out[0], int(chosen[0]))
        return out + (scores[:, 0],) if with_scores else out
    return (u_out, x_out, chosen, scores) if with_scores else (u_out, x_out, chosen)
