"""Command-line entry point: ``polargen {construct,simulate,folded-sim,pattern}``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import folded
from .codec import encode
from .construction import construct, select_info_set
from .harness import ExperimentConfig, run_fer
from .ratematch import CodeSpec, make_pattern, underlying_vector

EXIT_USAGE = 2


def _sweep(text):
    """``a,b,c`` or ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step))
            return [round(start + i * step, 12) for i in range(n + 1)]
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed sweep {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty sweep")
    return vals


def _channel_spec(text):
    kind, _, param = text.partition(":")
    if kind not in ("bec", "bsc", "awgn"):
        raise argparse.ArgumentTypeError(f"unknown channel {kind!r}")
    try:
        return kind, float(param)
    except ValueError:
        raise argparse.ArgumentTypeError(f"channel needs a parameter, e.g. {kind}:0.5") from None


def _code_args(p):
    p.add_argument("--N", type=int, default=256, help="mother code length")
    p.add_argument("--M", type=int, help="transmitted length (default N)")
    p.add_argument("--K", type=int, help="information bits (default rate * M)")
    p.add_argument("--rate", type=float, default=0.5)
    p.add_argument("--mode", choices=("none", "puncture", "shorten"), default="none")
    p.add_argument("--ordering", choices=("reordered", "original"), default="reordered")
    p.add_argument("--mu", type=int, default=256)
    p.add_argument("--alphabet-size", type=int, default=2048,
                   help="AWGN quantizer output alphabet")


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dims(args):
    M = args.M if args.M is not None else args.N
    K = args.K if args.K is not None else int(round(args.rate * M))
    return M, K


def cmd_construct(args):
    M, K = _dims(args)
    mode = args.mode if M < args.N else "none"
    cfg = ExperimentConfig(args.channel[0], [args.channel[1]], N=args.N, M=M, K=K,
                           mode=mode, ordering=args.ordering, mu=args.mu,
                           alphabet_size=args.alphabet_size).validate()
    spec = CodeSpec.build(args.N, M, K, mode)
    w = cfg.tx_channel(args.channel[1]).design_channel(args.alphabet_size)
    if args.ordering == "reordered":
        quality = construct(underlying_vector(w, spec), mu=args.mu, reuse=True)
        info = select_info_set(quality, K, exclude=spec.forced_frozen())
    else:
        quality = construct([w] * args.N, mu=args.mu, reuse=True)
        info = select_info_set(quality, K)
    out = quality.to_dict(info)
    out["approxCalls"] = quality.approx_calls
    out["code"] = spec.with_info_set(info).to_dict()
    out["C"] = folded.leading_frozen_count(info, args.N)
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return 0


def cmd_simulate(args):
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
    else:
        if args.channel is None or args.sweep is None:
            raise ValueError("simulate needs --channel and --sweep (or --config)")
        M, K = _dims(args)
        cfg = ExperimentConfig(args.channel, args.sweep, N=args.N, M=M, K=K,
                               mode=args.mode, ordering=args.ordering, mu=args.mu,
                               max_frames=args.max_frames, max_errors=args.max_errors,
                               seed=args.seed, alphabet_size=args.alphabet_size,
                               workers=args.workers)
    cfg.validate()

    def progress(pt):
        if args.verbose:
            print(f"{pt.param}: {pt.errors}/{pt.frames} fer={pt.fer:.3e}", file=sys.stderr)

    result = run_fer(cfg, progress)
    _emit(result.to_csv(), args.out)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(result.to_json(indent=2) + "\n")
    return 0


def cmd_folded_sim(args):
    pruned = args.pruned or args.C > 0
    sched = folded.build_schedule(args.N, args.L, pruned=pruned, C=args.C)
    rng = np.random.default_rng(args.seed)
    u = rng.integers(0, 2, size=(args.frames, args.N), dtype=np.uint8)
    if pruned:
        u[:, :args.C] = 0
    x, report, run = folded.simulate(sched, u, trace=bool(args.trace))
    d = json.loads(folded.report_json(sched, report))
    d["mismatches"] = int(np.any(x != encode(u), axis=1).sum())
    _emit(json.dumps(d, indent=2) + "\n", args.out)
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write(folded.trace_csv(run["trace"]))
    return 0 if d["mismatches"] == 0 else 1


def cmd_pattern(args):
    P = args.P if args.P is not None else args.N - (args.M if args.M is not None else args.N)
    _emit(json.dumps(make_pattern(args.mode, args.N, P)) + "\n", args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="polargen",
                                     description="Rate-matched polar code toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="bit-channel qualities and information set (JSON)")
    _code_args(p)
    p.add_argument("--channel", type=_channel_spec, required=True,
                   help="bec:EPS, bsc:P or awgn:EBN0_DB")
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("simulate", help="FER sweep (CSV)")
    _code_args(p)
    p.add_argument("--channel", choices=("bec", "bsc", "awgn"))
    p.add_argument("--sweep", type=_sweep, help="a,b,c or start:stop:step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-frames", type=int, default=100_000)
    p.add_argument("--max-errors", type=int, default=100)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", help="JSON experiment config (overrides the flags)")
    p.add_argument("--json", help="also write the full result as JSON here")
    p.add_argument("--out")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("folded-sim", help="cycle-stepped folded encoder (JSON report)")
    p.add_argument("--N", type=int, default=16)
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--C", type=int, default=0, help="leading frozen bits (implies --pruned if > 0)")
    p.add_argument("--pruned", action="store_true")
    p.add_argument("--frames", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the per-cycle register trace CSV here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_folded_sim)

    p = sub.add_parser("pattern", help="QUP / RQUP positions (JSON list)")
    p.add_argument("--mode", choices=("puncture", "shorten"), required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--P", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_pattern)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError) as exc:
        print(f"polargen {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
