"""
Binary-input discrete memoryless channels and their scalar information measures.

A channel is stored as two rows of transition probabilities ``w0 = W(.|0)`` and
``w1 = W(.|1)`` over a shared finite output alphabet. All measures assume the
uniform input distribution and are reported in bits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtr

ROW_TOL = 1e-12

__all__ = [
    "BinaryChannel",
    "ChannelClass",
    "make_bsc",
    "make_bec",
    "make_quantized_bawgn",
    "symmetric_capacity",
    "bhattacharyya",
    "gallager_e0",
    "binary_entropy",
    "is_bec_like",
    "random_channel",
    "random_symmetric_channel",
    "channel_from_dict",
    "channel_from_json",
]


@dataclass(frozen=True, eq=False)
class BinaryChannel:
    """Binary-input channel with a finite output alphabet.

    Parameters
    ----------
    w0, w1 : array-like
        Transition probabilities ``W(y|0)`` and ``W(y|1)``; each must sum to one.
    labels : sequence of str, optional
        Tags for the outputs, e.g. ``("0", "erasure", "1")``.

    Outputs that have zero probability under both inputs are dropped on
    construction, together with their labels. Instances are immutable and
    compare by identity.
    """

    w0: np.ndarray
    w1: np.ndarray
    labels: Optional[tuple] = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        w0 = np.array(self.w0, dtype=np.float64).ravel()
        w1 = np.array(self.w1, dtype=np.float64).ravel()
        if w0.shape != w1.shape or w0.size == 0:
            raise ValueError("w0 and w1 must be non-empty and of equal length")
        if not (np.all(np.isfinite(w0)) and np.all(np.isfinite(w1))):
            raise ValueError("transition probabilities must be finite")
        if np.any(w0 < 0) or np.any(w1 < 0):
            raise ValueError("transition probabilities must be nonnegative")
        for row, tag in ((w0, "w0"), (w1, "w1")):
            if abs(row.sum() - 1.0) > ROW_TOL:
                raise ValueError(f"{tag} sums to {row.sum():.17g}, not 1")
        labels = self.labels
        if labels is not None:
            labels = tuple(str(s) for s in labels)
            if len(labels) != w0.size:
                raise ValueError("labels must have one entry per output")
        live = (w0 > 0) | (w1 > 0)
        if not live.all():
            w0, w1 = w0[live], w1[live]
            if labels is not None:
                labels = tuple(s for s, k in zip(labels, live) if k)
        w0.setflags(write=False)
        w1.setflags(write=False)
        object.__setattr__(self, "w0", w0)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "labels", labels)

    @property
    def num_outputs(self) -> int:
        return int(self.w0.size)

    @property
    def rows(self) -> np.ndarray:
        """The 2 x M transition matrix."""
        return np.vstack([self.w0, self.w1])

    def llr(self, clip: Optional[float] = None) -> np.ndarray:
        """Natural-log likelihood ratio ``ln W(y|0)/W(y|1)`` per output."""
        with np.errstate(divide="ignore"):
            out = np.log(self.w0) - np.log(self.w1)
        if clip is not None:
            out = np.clip(out, -clip, clip)
        return out

    def to_dict(self) -> dict:
        d = {"w0": self.w0.tolist(), "w1": self.w1.tolist()}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        return d

    def __repr__(self):
        if self.name:
            return f"BinaryChannel<{self.name}>"
        return f"BinaryChannel(M={self.num_outputs})"


@dataclass(frozen=True)
class ChannelClass:
    """An ordered, non-empty collection of channels (a compound class)."""

    members: tuple
    name: str = ""

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("a channel class needs at least one member")
        if not all(isinstance(m, BinaryChannel) for m in members):
            raise TypeError("class members must be BinaryChannel instances")
        object.__setattr__(self, "members", members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k):
        return self.members[k]


def make_bsc(p: float) -> BinaryChannel:
    """Binary symmetric channel with crossover probability ``p`` in [0, 1/2]."""
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"crossover probability must lie in [0, 1/2], got {p}")
    return BinaryChannel([1.0 - p, p], [p, 1.0 - p], labels=("0", "1"), name=f"BSC({p:g})")


def make_bec(eps: float) -> BinaryChannel:
    """Binary erasure channel; outputs are ``0``, ``erasure``, ``1``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {eps}")
    return BinaryChannel(
        [1.0 - eps, eps, 0.0],
        [0.0, eps, 1.0 - eps],
        labels=("0", "erasure", "1"),
        name=f"BEC({eps:g})",
    )


def make_quantized_bawgn(snr: float, bins: int, span: float = 3.0) -> BinaryChannel:
    """BPSK over additive Gaussian noise, observed through an LLR quantizer.

    Bit 0 is sent as +1 and bit 1 as -1 with noise variance ``1/snr``. The
    channel LLR ``2y*snr`` is cut into ``bins`` uniform cells covering
    ``|y| <= 1 + span*sigma``; the two outermost cells extend to infinity. The
    cell grid is symmetric about zero, so the result is an exactly symmetric
    channel.
    """
    if not snr > 0:
        raise ValueError("snr must be positive")
    if bins < 2 or bins % 2:
        raise ValueError(f"bins must be an even integer >= 2, got {bins}")
    sigma = 1.0 / np.sqrt(snr)
    edge = 1.0 + span * sigma
    cuts = np.linspace(-edge, edge, bins + 1)
    cuts[0], cuts[-1] = -np.inf, np.inf
    # descending LLR order: first cell is the most reliable "0"
    cdf = ndtr((cuts[::-1] - 1.0) / sigma)
    p0 = cdf[:-1] - cdf[1:]
    p0 = np.clip(p0, 0.0, None)
    p0 /= p0.sum()
    p1 = p0[::-1].copy()
    return BinaryChannel(p0, p1, name=f"BAWGN(snr={snr:g},bins={bins})")


def symmetric_capacity(W: BinaryChannel) -> float:
    """Mutual information between a uniform input and the output, in bits."""
    tot = W.w0 + W.w1
    total = 0.0
    for row in (W.w0, W.w1):
        m = row > 0
        # 2p/(p+q) never underflows, unlike p/((p+q)/2) for subnormal p
        total += 0.5 * float(np.dot(row[m], np.log2(2.0 * row[m] / tot[m])))
    return float(min(max(total, 0.0), 1.0))


def bhattacharyya(W: BinaryChannel) -> float:
    return float(min(np.sqrt(W.w0 * W.w1).sum(), 1.0))


def gallager_e0(W: BinaryChannel, rho: float) -> float:
    """Gallager's E0 at uniform input, in bits; defined for ``rho > -1``."""
    if not rho > -1:
        raise ValueError(f"rho must exceed -1, got {rho}")
    s = 1.0 / (1.0 + rho)
    inner = 0.5 * np.power(W.w0, s) + 0.5 * np.power(W.w1, s)
    return float(-np.log2(np.power(inner, 1.0 + rho).sum()))


def binary_entropy(p):
    p = np.asarray(p, dtype=np.float64)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(q > 0, q * np.log2(q), 0.0)
    return h if h.ndim else float(h)


def is_bec_like(W: BinaryChannel, tol: float = 0.0) -> bool:
    """True when every output is either conclusive or a pure erasure."""
    conclusive = (W.w0 == 0) | (W.w1 == 0)
    erasure = np.abs(W.w0 - W.w1) <= tol
    return bool(np.all(conclusive | erasure))


def bec_erasure_probability(W: BinaryChannel) -> float:
    """Erasure mass of a BEC-like channel (equal to its Bhattacharyya value)."""
    mask = (W.w0 > 0) & (W.w1 > 0)
    return float(W.w0[mask].sum())


def random_channel(M: int, rng: np.random.Generator, alpha: float = 1.0) -> BinaryChannel:
    """Channel with M outputs whose rows are independent Dirichlet draws."""
    w0 = rng.dirichlet(np.full(M, alpha))
    w1 = rng.dirichlet(np.full(M, alpha))
    return BinaryChannel(w0 / w0.sum(), w1 / w1.sum())


def random_symmetric_channel(m: int, rng: np.random.Generator, erasure: bool = False) -> BinaryChannel:
    """Symmetric channel with ``2m`` outputs (``2m+1`` with an erasure symbol).

    Output ``k`` and output ``k+m`` are mirror images: ``W(k|0) = W(k+m|1)``.
    """
    weights = rng.dirichlet(np.ones(m + (1 if erasure else 0)))
    pair_mass = weights[:m]
    cross = rng.uniform(0.0, 0.5, size=m)
    a = pair_mass * (1.0 - cross)
    b = pair_mass * cross
    w0 = np.concatenate([a, b])
    w1 = np.concatenate([b, a])
    if erasure:
        w0 = np.append(w0, weights[m])
        w1 = np.append(w1, weights[m])
    return BinaryChannel(w0 / w0.sum(), w1 / w1.sum())


def channel_from_dict(d: dict) -> BinaryChannel:
    """Build a channel from a literal ``{"w0", "w1", "labels"}`` or a family tag.

    Family tags: ``{"type": "bsc", "p": ..}``, ``{"type": "bec", "eps": ..}``,
    ``{"type": "bawgn", "snr": .., "bins": ..}``.
    """
    if "w0" in d or "w1" in d:
        return BinaryChannel(d["w0"], d["w1"], labels=d.get("labels"), name=d.get("name", ""))
    kind = str(d.get("type", "")).lower()
    if kind == "bsc":
        return make_bsc(float(d["p"]))
    if kind == "bec":
        return make_bec(float(d["eps"]))
    if kind == "bawgn":
        return make_quantized_bawgn(float(d["snr"]), int(d["bins"]))
    raise ValueError(f"unknown channel type {d.get('type')!r}")


def channel_from_json(text: str) -> BinaryChannel:
    return channel_from_dict(json.loads(text))

