"""Command-line entry point: ``gseuwb {sce,receiver,bounds,surface} [options]``."""
import argparse
from dataclasses import replace
import sys

from . import harness


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gseuwb",
        description="Group-based shrinkage estimation experiments on a DS-UWB SC-FDE link.")
    sub = parser.add_subparsers(dest="scenario", required=True)
    helps = {
        "sce": "channel-estimation MSE trajectories",
        "receiver": "multiuser receiver NMSE trajectories and BER",
        "bounds": "unbiased variance and GSE lower bounds over SNR",
        "surface": "two-group MSE-difference surface and adaptive convergence point",
    }
    for name in harness.SCENARIOS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="INI experiment file")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--trials", type=int, help="number of channel realizations")
        p.add_argument("--blocks", type=int, help="training blocks per trial")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes for the trial loop (default: 1)")
    return parser


def make_spec(args):
    if args.config:
        spec = harness.load_config(args.config, args.scenario)
    else:
        spec = harness.ExperimentSpec(args.scenario)
    changes = {}
    if args.trials is not None:
        changes["n_trials"] = args.trials
    if args.blocks is not None:
        changes["n_blocks"] = args.blocks
    if args.seed is not None:
        changes["cfg"] = replace(spec.cfg, seed=args.seed)
    return replace(spec, **changes) if changes else spec


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        spec = make_spec(args)
    except (ValueError, OSError) as exc:
        print(f"gseuwb: error: {exc}", file=sys.stderr)
        return 2
    result = harness.run(spec, workers=args.workers)
    for path in harness.write_result(result, args.out, args.format):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
