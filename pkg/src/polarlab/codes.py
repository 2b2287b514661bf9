"""Code description shared by the constructor and the codec."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CodeSpec", "log2_exact", "bit_reversal_permutation"]


def log2_exact(N: int) -> int:
    """Return ``n`` with ``N == 2**n``; raise for anything else."""
    N = int(N)
    if N < 1 or N & (N - 1):
        raise ValueError(f"block length must be a power of two, got {N}")
    return N.bit_length() - 1


def bit_reversal_permutation(n: int) -> np.ndarray:
    """Index array ``perm`` with ``perm[k]`` equal to ``k`` with its n bits reversed."""
    idx = np.arange(1 << n)
    rev = np.zeros_like(idx)
    for b in range(n):
        rev |= ((idx >> b) & 1) << (n - 1 - b)
    return rev


@dataclass(frozen=True, eq=False)
class CodeSpec:
    """A polar code of length ``N = 2**n``.

    ``frozen_mask[i]`` is True when input ``u_i`` is frozen; frozen inputs take
    ``frozen_values[i]``, which is zero everywhere else.
    """

    n: int
    frozen_mask: np.ndarray
    frozen_values: np.ndarray = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        mask = np.asarray(self.frozen_mask, dtype=bool).copy()
        if mask.size != 1 << self.n:
            raise ValueError(f"frozen mask has length {mask.size}, expected {1 << self.n}")
        if self.frozen_values is None:
            values = np.zeros(mask.size, dtype=np.uint8)
        else:
            values = np.asarray(self.frozen_values, dtype=np.uint8).copy()
            if values.shape != mask.shape:
                raise ValueError("frozen_values must match frozen_mask in length")
            if np.any(values[~mask]):
                raise ValueError("frozen_values must be zero on information positions")
            if np.any(values > 1):
                raise ValueError("frozen_values must be bits")
        mask.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "frozen_mask", mask)
        object.__setattr__(self, "frozen_values", values)
        object.__setattr__(self, "provenance", dict(self.provenance))

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def K(self) -> int:
        return int(self.N - self.frozen_mask.sum())

    @property
    def information_set(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)

    def embed(self, message: np.ndarray) -> np.ndarray:
        """Place message bits (shape ``(..., K)``) on the information positions."""
        message = np.asarray(message, dtype=np.uint8)
        u = np.broadcast_to(self.frozen_values, message.shape[:-1] + (self.N,)).copy()
        u[..., ~self.frozen_mask] = message
        return u

    def __eq__(self, other):
        if not isinstance(other, CodeSpec):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.frozen_mask, other.frozen_mask)
            and np.array_equal(self.frozen_values, other.frozen_values)
            and self.provenance == other.provenance
        )

    __hash__ = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "N": self.N,
            "K": self.K,
            "frozen_mask": self.frozen_mask.astype(int).tolist(),
            "frozen_values": self.frozen_values.astype(int).tolist(),
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "CodeSpec":
        return cls(
            n=int(d["n"]),
            frozen_mask=np.asarray(d["frozen_mask"], dtype=bool),
            frozen_values=np.asarray(d.get("frozen_values", np.zeros(len(d["frozen_mask"]))), dtype=np.uint8),
            provenance=d.get("provenance", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "CodeSpec":
        return cls.from_dict(json.loads(text))
