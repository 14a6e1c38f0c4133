"""Puncturing / shortening patterns and the rate-matched code description.

Public indices are 1-based everywhere in this module.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .bits import generator_matrix, log2_exact
from .channel import BmsChannel, make_channel

MODES = ("none", "puncture", "shorten")


def bit_reverse(i, n):
    """Reverse the ``n``-bit expansion of ``i - 1`` and return it 1-based."""
    i = int(i)
    if not 1 <= i <= (1 << n):
        raise ValueError(f"index {i} outside 1..{1 << n}")
    v = i - 1
    r = 0
    for _ in range(n):
        r = (r << 1) | (v & 1)
        v >>= 1
    return r + 1


def make_pattern(mode, N, P):
    """Coded-bit positions removed by QUP (puncture) or RQUP (shorten).

    Returns the positions as a sorted list.
    """
    n = log2_exact(N)
    P = int(P)
    if not 0 <= P < N:
        raise ValueError(f"need 0 <= P < N, got P={P}, N={N}")
    if mode == "puncture":
        src = range(1, P + 1)
    elif mode == "shorten":
        src = range(N - P + 1, N + 1)
    elif mode == "none":
        if P:
            raise ValueError("mode 'none' requires P = 0")
        src = ()
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return sorted(bit_reverse(i, n) for i in src)


def shortening_frozen(N, pattern):
    """Source indices that must be frozen so the coded bits in ``pattern`` are 0.

    These are the rows of ``G_N`` with a one in any pattern column.  For RQUP
    they are exactly ``N-P+1 .. N``.
    """
    if not len(pattern):
        return []
    G = generator_matrix(N)
    cols = np.asarray(sorted(pattern), dtype=np.int64) - 1
    rows = np.flatnonzero(G[:, cols].any(axis=1))
    return (rows + 1).tolist()


@dataclass(frozen=True)
class CodeSpec:
    N: int
    M: int
    K: int
    mode: str = "none"
    pattern: tuple = ()
    info_set: tuple = ()
    frozen_values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        log2_exact(self.N)
        object.__setattr__(self, "pattern", tuple(sorted(int(p) for p in self.pattern)))
        object.__setattr__(self, "info_set", tuple(sorted(int(a) for a in self.info_set)))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 < self.M <= self.N:
            raise ValueError(f"need 0 < M <= N, got M={self.M}")
        if not 0 <= self.K <= self.M:
            raise ValueError(f"need 0 <= K <= M, got K={self.K}, M={self.M}")
        if len(self.pattern) != self.P or len(set(self.pattern)) != self.P:
            raise ValueError("pattern must list exactly P = N - M distinct positions")
        if self.mode == "none" and self.P:
            raise ValueError("mode 'none' requires M = N")
        if self.pattern and not (1 <= self.pattern[0] and self.pattern[-1] <= self.N):
            raise ValueError("pattern positions must lie in 1..N")
        if self.info_set:
            if len(self.info_set) != self.K or len(set(self.info_set)) != self.K:
                raise ValueError("info set must hold exactly K distinct indices")
            if not (1 <= self.info_set[0] and self.info_set[-1] <= self.N):
                raise ValueError("info set indices must lie in 1..N")
        object.__setattr__(self, "frozen_values", (0,) * (self.N - len(self.info_set)))

    @property
    def P(self):
        return self.N - self.M

    @property
    def rate(self):
        return self.K / self.M

    @classmethod
    def build(cls, N, M, K, mode="none", info_set=()):
        P = N - M
        return cls(N, M, K, mode, make_pattern(mode, N, P), info_set)

    def with_info_set(self, info_set):
        return CodeSpec(self.N, self.M, self.K, self.mode, self.pattern, info_set)

    def frozen_mask(self):
        """Boolean array of length N, True at frozen (0-based) positions."""
        mask = np.ones(self.N, dtype=bool)
        mask[np.asarray(self.info_set, dtype=np.int64) - 1] = False
        return mask

    def transmitted_positions(self):
        """0-based coded positions that are actually sent, ascending."""
        keep = np.ones(self.N, dtype=bool)
        if self.pattern:
            keep[np.asarray(self.pattern) - 1] = False
        return np.flatnonzero(keep)

    def forced_frozen(self):
        """1-based source indices that rate matching itself forces to be frozen."""
        if self.mode == "shorten":
            return shortening_frozen(self.N, self.pattern)
        return []

    def to_dict(self):
        return {
            "N": self.N,
            "M": self.M,
            "K": self.K,
            "mode": self.mode,
            "pattern": list(self.pattern),
            "infoSet": list(self.info_set),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        return cls(d["N"], d["M"], d["K"], d.get("mode", "none"),
                   d.get("pattern", ()), d.get("infoSet", ()))


def underlying_vector(w: BmsChannel, spec: CodeSpec):
    """Length-N list of underlying channels seen by the N coded bits."""
    out = [w] * spec.N
    if spec.mode == "none":
        return out
    sub = make_channel("punctured" if spec.mode == "puncture" else "shortened")
    for p in spec.pattern:
        out[p - 1] = sub
    return out
