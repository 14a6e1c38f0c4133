"""Monte-Carlo frame-error-rate experiments for rate-matched polar codes.

Frames are processed in fixed-size blocks.  Block ``b`` of sweep point ``p``
draws all of its randomness from ``SeedSequence([seed, p, b])``, so a result
depends only on the configuration and the seed, never on how many workers
share the blocks.  Early stopping is exact: the run ends at the frame on
which the error count reaches ``max_errors``.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import beta

from .codec import TxChannel, encode, init_llrs, sc_decode
from .construction import construct, select_info_set
from .ratematch import MODES, CodeSpec, underlying_vector

SCHEMA = 1
CHANNELS = ("bec", "bsc", "awgn")
ORDERINGS = ("reordered", "original")

STOPPING_NOTE = (
    "frames stop at max_errors; the ratio estimator carries the usual "
    "small sequential-stopping bias"
)
DESIGN_NOTE = {
    "reordered": "constructed per sweep point from the rate-matched channel vector",
    "original": "constructed from N copies of the channel, no rate matching",
}


class ConfigError(ValueError):
    """Inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    channel: str
    sweep: list
    N: int = 256
    M: int = 186
    K: int | None = None
    rate: float = 0.5
    mode: str = "puncture"
    ordering: str = "reordered"
    mu: int = 256
    max_frames: int = 100_000
    max_errors: int = 100
    seed: int = 0
    alphabet_size: int = 2048
    block_size: int = 2048
    workers: int = 1

    def __post_init__(self):
        self.sweep = [float(v) for v in self.sweep]
        if self.K is None:
            self.K = int(round(self.rate * self.M))
        self.rate = self.K / self.M if self.M else self.rate

    def validate(self):
        if self.channel not in CHANNELS:
            raise ConfigError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if not self.sweep:
            raise ConfigError("sweep must not be empty")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.ordering not in ORDERINGS:
            raise ConfigError(f"ordering must be one of {ORDERINGS}, got {self.ordering!r}")
        if self.N < 2 or self.N & (self.N - 1):
            raise ConfigError(f"N must be a power of two, got {self.N}")
        if not 0 < self.M <= self.N:
            raise ConfigError(f"need 0 < M <= N, got M={self.M}")
        if self.mode == "none" and self.M != self.N:
            raise ConfigError("mode 'none' requires M = N")
        if self.mode != "none" and self.M == self.N:
            raise ConfigError(f"mode {self.mode!r} requires M < N")
        if not 0 <= self.K <= self.M:
            raise ConfigError(f"need 0 <= K <= M, got K={self.K}")
        if self.mu < 2:
            raise ConfigError("mu must be at least 2")
        if self.max_frames < 1 or self.max_errors < 1 or self.block_size < 1:
            raise ConfigError("max_frames, max_errors and block_size must be positive")
        for v in self.sweep:
            if self.channel == "bec" and not 0 <= v <= 1:
                raise ConfigError(f"BEC erasure probability {v} outside [0, 1]")
            if self.channel == "bsc" and not 0 <= v <= 0.5:
                raise ConfigError(f"BSC crossover probability {v} outside [0, 1/2]")
            if self.channel == "awgn" and not math.isfinite(v):
                raise ConfigError(f"Eb/N0 {v} is not finite")
        return self

    def to_dict(self):
        d = asdict(self)
        d["schema"] = SCHEMA
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        schema = d.pop("schema", SCHEMA)
        if schema != SCHEMA:
            raise ConfigError(f"unsupported config schema {schema}")
        return cls(**d)

    def tx_channel(self, param):
        """Physical channel at a sweep point (Eb/N0 becomes Es/N0 for AWGN)."""
        if self.channel == "awgn":
            return TxChannel("awgn", param + 10 * math.log10(self.rate))
        return TxChannel(self.channel, param)


@dataclass
class FerPoint:
    param: float
    frames: int
    errors: int
    fer: float
    ci_low: float
    ci_high: float
    wall_time: float
    info_set: list = field(default_factory=list, repr=False)


@dataclass
class FerResult:
    config: ExperimentConfig
    points: list
    metadata: dict = field(default_factory=dict)

    CSV_COLUMNS = ("param", "frames", "errors", "fer", "ci_low", "ci_high")

    def to_csv(self):
        lines = [",".join(self.CSV_COLUMNS)]
        for p in self.points:
            lines.append(f"{p.param!r},{p.frames},{p.errors},{p.fer!r},{p.ci_low!r},{p.ci_high!r}")
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "config": self.config.to_dict(),
            "metadata": self.metadata,
            "points": [asdict(p) for p in self.points],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def clopper_pearson(k, n, level=0.95):
    """Exact two-sided binomial confidence interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        return 0.0, 1.0
    a = (1 - level) / 2
    lo = 0.0 if k == 0 else float(beta.ppf(a, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a, k + 1, n - k))
    return lo, hi


def design_spec(cfg: ExperimentConfig, design_param):
    """Rate-matched code with its information set for one design point."""
    spec = CodeSpec.build(cfg.N, cfg.M, cfg.K, cfg.mode)
    w = cfg.tx_channel(design_param).design_channel(cfg.alphabet_size)
    if cfg.ordering == "reordered":
        quality = construct(underlying_vector(w, spec), mu=cfg.mu, reuse=True)
        info = select_info_set(quality, cfg.K, exclude=spec.forced_frozen())
    else:
        quality = construct([w] * cfg.N, mu=cfg.mu, reuse=True)
        info = select_info_set(quality, cfg.K)
    return spec.with_info_set(info)


def _block_errors(spec: CodeSpec, tx: TxChannel, seed, point, block, n_frames):
    rng = np.random.default_rng(np.random.SeedSequence([seed, point, block]))
    u = np.zeros((n_frames, spec.N), dtype=np.uint8)
    info = np.asarray(spec.info_set, dtype=np.int64) - 1
    u[:, info] = rng.integers(0, 2, size=(n_frames, len(info)), dtype=np.uint8)
    x = encode(u)[:, spec.transmitted_positions()]
    y = tx.transmit(x, rng)
    u_hat = sc_decode(init_llrs(y, tx, spec), spec.frozen_mask())
    return np.any(u_hat[:, info] != u[:, info], axis=1)


def _block_task(args):
    return _block_errors(*args)


def _simulate_point(cfg, spec, tx, point, pool):
    B = cfg.block_size
    frames = errors = 0
    block = 0
    width = cfg.workers if pool is not None else 1
    while frames < cfg.max_frames and errors < cfg.max_errors:
        tasks = []
        for b in range(block, block + width):
            start = b * B
            if start >= cfg.max_frames:
                break
            tasks.append((spec, tx, cfg.seed, point, b, min(B, cfg.max_frames - start)))
        block += len(tasks)
        results = pool.map(_block_task, tasks) if pool is not None else map(_block_task, tasks)
        for err in results:
            if errors >= cfg.max_errors:
                break
            cum = errors + np.cumsum(err)
            hit = np.flatnonzero(cum >= cfg.max_errors)
            if hit.size:
                frames += int(hit[0]) + 1
                errors = cfg.max_errors
            else:
                frames += len(err)
                errors = int(cum[-1]) if len(err) else errors
    return frames, errors


def run_fer(cfg: ExperimentConfig, progress=None):
    """Run the sweep described by ``cfg`` and return a :class:`FerResult`.

    ``progress(point)`` is called after each sweep point if given.
    """
    cfg.validate()
    if cfg.ordering == "original" and cfg.channel == "awgn":
        mid = 0.5 * (min(cfg.sweep) + max(cfg.sweep))
        fixed = design_spec(cfg, mid)
        design = f"{DESIGN_NOTE['original']}; AWGN design at sweep midpoint {mid} dB"
    else:
        fixed = None
        design = DESIGN_NOTE[cfg.ordering]
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    points = []
    try:
        for idx, param in enumerate(cfg.sweep):
            t0 = time.perf_counter()
            spec = fixed if fixed is not None else design_spec(cfg, param)
            frames, errors = _simulate_point(cfg, spec, cfg.tx_channel(param), idx, pool)
            lo, hi = clopper_pearson(errors, frames)
            pt = FerPoint(param, frames, errors, errors / frames, lo, hi,
                          time.perf_counter() - t0, list(spec.info_set))
            points.append(pt)
            if progress is not None:
                progress(pt)
    finally:
        if pool is not None:
            pool.shutdown()
    meta = {
        "seed": cfg.seed,
        "design": design,
        "stopping": STOPPING_NOTE,
        "ci": "Clopper-Pearson 95%",
        "rng": f"SeedSequence([seed, point, block]), block_size={cfg.block_size}",
    }
    if cfg.channel == "awgn":
        meta["noise"] = "sigma^2 = 1 / (2 R 10^(EbN0/10))"
    return FerResult(cfg, points, meta)
