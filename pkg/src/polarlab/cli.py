"""Command line entry point: ``polarlab run|channels|verify``."""

from __future__ import annotations

import argparse
import sys

from .harness import EXPERIMENT_KINDS, ExperimentError, run_experiment, verify

CHANNEL_FAMILIES = [
    ("bsc", '{"type": "bsc", "p": 0.11}', "binary symmetric channel, 0 <= p <= 1/2"),
    ("bec", '{"type": "bec", "eps": 0.5}', "binary erasure channel, 0 <= eps <= 1"),
    ("bawgn", '{"type": "bawgn", "snr": 1.0, "bins": 32}', "BPSK + Gaussian noise, LLR quantized to an even number of bins"),
    ("literal", '{"w0": [0.7, 0.3, 0.0], "w1": [0.0, 0.3, 0.7]}', "explicit transition rows"),
]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polarlab", description="Channel polarization experiments")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config", help="JSON config with a 'kind' field")
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--seed", type=int, default=None, help="master seed, overrides the config")
    run.add_argument("--threads", type=int, default=None, help="worker threads (env POLARLAB_THREADS)")

    sub.add_parser("channels", help="channel families").add_subparsers(dest="action", required=True).add_parser(
        "list", help="list channel families and their JSON form"
    )
    sub.add_parser("verify", help="run the invariant suite")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        try:
            manifest = run_experiment(args.config, args.out, args.seed, args.threads)
        except ExperimentError as exc:
            print(f"polarlab: {type(exc).__name__}: {exc}", file=sys.stderr)
            return exc.exit_code
        print(f"{manifest['kind']}: {manifest['rows']} rows -> {args.out}/{manifest['csv']}")
        return 0
    if args.command == "channels":
        for name, example, text in CHANNEL_FAMILIES:
            print(f"{name:8s} {text}\n         {example}")
        print("experiment kinds: " + ", ".join(sorted(EXPERIMENT_KINDS)))
        return 0
    results = verify()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})")
    return 0 if all(ok for _, ok, _ in results) else 1


if __name__ == "__main__":
    sys.exit(main())
