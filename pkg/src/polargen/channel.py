"""
Finite-alphabet binary-input memoryless symmetric (BMS) channels.

A channel is stored in conjugate-pair form: every output symbol ``y`` with
``W(y|0) != W(y|1)`` is kept together with its mirror image ``ybar`` as one
row ``(p0, p1) = (W(y|0), W(y|1))`` oriented so that ``p0 >= p1``.  Symbols
with identical likelihoods under both inputs are collected into a single
self-conjugate (erasure-like) symbol of mass ``erasure``.  Rows are sorted by
likelihood ratio ``p0 / p1`` in non-increasing order, with ``p1 == 0`` rows
(infinite ratio) first.

Symmetry is therefore structural; the only thing that can go wrong is
normalisation, which is checked on construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from ._merge import greedy_merge

__all__ = [
    "BmsChannel",
    "ChannelStats",
    "ChannelParameterError",
    "make_channel",
    "make_awgn_quantized",
    "channel_stats",
    "degrading_merge",
    "canonical_channel",
]

NORMALIZATION_TOL = 1e-12
# drift tolerated before renormalising; anything beyond is a bug upstream
DRIFT_GUARD = 1e-9
# relative likelihood-ratio tolerance under which two rows are treated as one symbol
LR_MERGE_RTOL = 1e-12


class ChannelParameterError(ValueError):
    """A channel parameter lies outside its domain."""


@dataclass(frozen=True)
class ChannelStats:
    capacity: float
    bhattacharyya: float
    error_prob: float

    def as_dict(self):
        return {"I": self.capacity, "Z": self.bhattacharyya, "Pe": self.error_prob}


@dataclass(frozen=True, eq=False)
class BmsChannel:
    """Immutable BMS channel in canonical conjugate-pair form.

    Parameters
    ----------
    pairs : ndarray, shape (m, 2)
        ``(W(y|0), W(y|1))`` for one representative of each conjugate pair.
    erasure : float
        Mass of the self-conjugate symbol (0 when absent).
    kind, param : optional provenance used for serialisation only.
    """

    pairs: np.ndarray
    erasure: float = 0.0
    kind: str = "custom"
    param: float | None = None
    _stats: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        pairs = np.ascontiguousarray(self.pairs, dtype=np.float64).reshape(-1, 2)
        pairs.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "erasure", float(self.erasure))
        if np.any(pairs < 0) or self.erasure < 0:
            raise ValueError("channel probabilities must be non-negative")
        total = pairs.sum() + self.erasure
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"channel is not normalised: total mass {total!r}")
        if np.any(pairs[:, 1] > pairs[:, 0]):
            raise ValueError("pairs must be oriented with p0 >= p1")
        t = _flip_fraction(pairs[:, 0], pairs[:, 1])
        if np.any(np.diff(t) < 0):
            raise ValueError("pairs must be sorted by non-increasing likelihood ratio")

    @property
    def alphabet_size(self):
        """Number of output symbols (both members of every pair, plus the erasure)."""
        return 2 * len(self.pairs) + (1 if self.erasure > 0 else 0)

    @property
    def stats(self) -> ChannelStats:
        if not self._stats:
            self._stats.append(channel_stats(self))
        return self._stats[0]

    def likelihood_ratios(self):
        with np.errstate(divide="ignore"):
            return self.pairs[:, 0] / self.pairs[:, 1]

    def symbols(self):
        """Full output alphabet as an array of shape (|Y|, 2) of ``(W(y|0), W(y|1))``.

        Ordering: representatives, then their conjugates, then the erasure.
        """
        rows = [self.pairs, self.pairs[:, ::-1]]
        if self.erasure > 0:
            rows.append(np.array([[self.erasure, self.erasure]]))
        return np.concatenate(rows, axis=0)

    def to_dict(self):
        return {
            "kind": self.kind,
            "param": self.param,
            "pairs": self.pairs.tolist(),
            "selfConjugate": self.erasure,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["pairs"], dtype=float).reshape(-1, 2),
            d.get("selfConjugate", 0.0) or 0.0,
            kind=d.get("kind", "custom"),
            param=d.get("param"),
        )

    def __repr__(self):
        return (
            f"BmsChannel(kind={self.kind!r}, param={self.param!r}, "
            f"pairs={len(self.pairs)}, erasure={self.erasure:.6g})"
        )


def _flip_fraction(p0, p1):
    """``p1 / (p0 + p1)``: 0 for a noiseless pair, 1/2 for an erasure.

    Sorting by this key ascending is sorting by likelihood ratio descending,
    without infinities.
    """
    s = p0 + p1
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(s > 0, p1 / s, 0.5)
    return t


def canonical_channel(p0, p1, kind="custom", param=None, renormalize=True):
    """Build a canonical :class:`BmsChannel` from un-normalised conjugate pairs.

    ``(p0[i], p1[i])`` is the pair mass of one representative symbol; the
    conjugate symbol is implied.  Rows may be in any orientation and order.
    Zero-mass rows are dropped, rows with equal likelihood ratio are combined
    (a lossless operation) and balanced rows are folded into the erasure.
    """
    p0 = np.asarray(p0, dtype=np.float64).ravel()
    p1 = np.asarray(p1, dtype=np.float64).ravel()
    hi = np.maximum(p0, p1)
    lo = np.minimum(p0, p1)
    mass = hi + lo
    keep = mass > 0
    hi, lo, mass = hi[keep], lo[keep], mass[keep]

    total = mass.sum()
    if renormalize:
        if abs(total - 1.0) > DRIFT_GUARD:
            raise ValueError(f"probability drift {total - 1.0:.3e} exceeds guard")
        hi = hi / total
        lo = lo / total
        mass = hi + lo

    t = lo / mass
    balanced = t >= 0.5 * (1.0 - LR_MERGE_RTOL)
    erasure = float(mass[balanced].sum())
    hi, lo, t = hi[~balanced], lo[~balanced], t[~balanced]

    order = np.argsort(t, kind="stable")
    hi, lo, t = hi[order], lo[order], t[order]
    if len(t) > 1:
        new_group = np.empty(len(t), dtype=bool)
        new_group[0] = True
        new_group[1:] = (t[1:] - t[:-1]) > LR_MERGE_RTOL * t[1:]
        starts = np.flatnonzero(new_group)
        hi = np.add.reduceat(hi, starts)
        lo = np.add.reduceat(lo, starts)
    pairs = np.column_stack([hi, lo]) if len(hi) else np.zeros((0, 2))
    # the summed masses can drift by an ulp or two from 1
    total = pairs.sum() + erasure
    if renormalize and total != 1.0:
        pairs = pairs / total
        erasure = erasure / total
    return BmsChannel(pairs, erasure, kind=kind, param=param)


def make_channel(kind, param=None):
    """Construct one of the elementary channels.

    ``bec`` takes an erasure probability, ``bsc`` a crossover probability.
    ``punctured`` is the useless channel (a single self-conjugate symbol of
    mass 1) and ``shortened`` the noiseless one; both ignore ``param``.
    """
    if kind == "bec":
        eps = _check_param(param, 0.0, 1.0, "erasure probability")
        pairs = [[1.0 - eps, 0.0]] if eps < 1.0 else np.zeros((0, 2))
        return BmsChannel(np.asarray(pairs, dtype=float), eps, kind="bec", param=eps)
    if kind == "bsc":
        p = _check_param(param, 0.0, 0.5, "crossover probability")
        if p == 0.5:
            return BmsChannel(np.zeros((0, 2)), 1.0, kind="bsc", param=p)
        return BmsChannel(np.array([[1.0 - p, p]]), 0.0, kind="bsc", param=p)
    if kind == "punctured":
        return BmsChannel(np.zeros((0, 2)), 1.0, kind="punctured")
    if kind == "shortened":
        return BmsChannel(np.array([[1.0, 0.0]]), 0.0, kind="shortened")
    raise ChannelParameterError(f"unknown channel kind {kind!r}")


def _check_param(param, lo, hi, what):
    if param is None:
        raise ChannelParameterError(f"{what} is required")
    param = float(param)
    if not (lo <= param <= hi):
        raise ChannelParameterError(f"{what} {param} outside [{lo}, {hi}]")
    return param


def awgn_sigma2(es_n0_db):
    """Noise variance of unit-energy BPSK at the given Es/N0 (dB)."""
    return 1.0 / (2.0 * 10.0 ** (es_n0_db / 10.0))


def make_awgn_quantized(design_snr_db, alphabet_size=2048):
    """BPSK over AWGN quantised to ``alphabet_size`` output symbols.

    The magnitude axis ``|y|`` is cut into ``alphabet_size // 2`` bins of equal
    probability under input 0 (mean +1); each bin together with its mirror
    image on the negative axis forms one conjugate pair.  Any output
    quantiser is a degrading map, so the result is degraded with respect to
    the continuous channel.
    """
    if alphabet_size < 2:
        raise ChannelParameterError("alphabet_size must be at least 2")
    sigma2 = awgn_sigma2(design_snr_db)
    if not (sigma2 > 0 and np.isfinite(sigma2)):
        raise ChannelParameterError(f"noise variance {sigma2} must be positive and finite")
    sigma = np.sqrt(sigma2)
    m = alphabet_size // 2

    def folded_cdf(t):
        return ndtr((t - 1.0) / sigma) - ndtr((-t - 1.0) / sigma)

    targets = np.arange(1, m) / m
    lo = np.zeros_like(targets)
    hi = np.full_like(targets, 1.0 + 40.0 * sigma)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = folded_cdf(mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= 1e-15 * np.maximum(hi, 1.0)):
            break
    edges = np.concatenate([[0.0], 0.5 * (lo + hi), [np.inf]])

    def sf(x):
        return ndtr(-x)

    # survival-function differences keep the tail bins accurate
    a, b = edges[:-1], edges[1:]
    p0 = sf((a - 1.0) / sigma) - sf((b - 1.0) / sigma)
    p1 = sf((a + 1.0) / sigma) - sf((b + 1.0) / sigma)
    ch = canonical_channel(p0, p1, kind="awgn", param=float(design_snr_db))
    return ch


def _pair_capacity(p0, p1):
    s = p0 + p1
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p0 > 0, p0 * np.log2(np.where(p0 > 0, 2 * p0 / s, 1.0)), 0.0)
        b = np.where(p1 > 0, p1 * np.log2(np.where(p1 > 0, 2 * p1 / s, 1.0)), 0.0)
    return a + b


def channel_stats(w: BmsChannel) -> ChannelStats:
    """Symmetric capacity (bits), Bhattacharyya parameter and ML error probability."""
    p0, p1 = w.pairs[:, 0], w.pairs[:, 1]
    cap = float(_pair_capacity(p0, p1).sum())
    z = float(2.0 * np.sqrt(p0 * p1).sum() + w.erasure)
    # each pair contributes min(p0, p1) / 2 from y and again from ybar
    pe = float(p1.sum() + 0.5 * w.erasure)
    return ChannelStats(
        capacity=min(max(cap, 0.0), 1.0),
        bhattacharyya=min(max(z, 0.0), 1.0),
        error_prob=min(max(pe, 0.0), 0.5),
    )


def degrading_merge(w: BmsChannel, mu: int) -> BmsChannel:
    """Reduce ``w`` to at most ``mu`` output symbols by greedy adjacent merging.

    Rows adjacent in likelihood-ratio order are merged, each time choosing the
    pair whose merge loses the least capacity (ties: leftmost).  The erasure
    symbol takes part as a row of ratio one placed last.  The result is
    degraded with respect to ``w``.
    """
    mu = int(mu)
    if mu < 2:
        raise ChannelParameterError(f"mu must be >= 2, got {mu}")
    if w.alphabet_size <= mu:
        return w
    p0 = np.array(w.pairs[:, 0])
    p1 = np.array(w.pairs[:, 1])
    has_erasure = w.erasure > 0
    if has_erasure:
        p0 = np.append(p0, 0.5 * w.erasure)
        p1 = np.append(p1, 0.5 * w.erasure)
    q0, q1 = greedy_merge(p0, p1, has_erasure, mu)
    return canonical_channel(q0, q1, kind="merged")
