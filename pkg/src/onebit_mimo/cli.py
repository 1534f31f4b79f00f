"""Command-line interface.

``run`` executes an FER sweep from a flat key-value config file and/or CLI
flags (flags win); ``selftest`` runs the built-in property checks.  Exit
codes: 0 success, 1 configuration error, 2 I/O error.
"""

import argparse
import sys

from .selftest import run_selftest
from .sim import ConfigError, SimConfig, emit_results, parse_config_file, run_fer_sweep

_FLAG_TO_KEY = {
    "k": "k",
    "nr": "nr",
    "mod": "mod",
    "code": "code",
    "detector": "detector",
    "snr": "snr",
    "frames": "frames",
    "seed": "seed",
    "out": "out",
    "format": "format",
    "workers": "workers",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit-mimo",
        description="Coded MU-MIMO link simulator with one-bit ADCs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an FER sweep")
    run_p.add_argument("--config", help="flat key = value config file")
    run_p.add_argument("--k", help="number of users")
    run_p.add_argument("--nr", help="number of receive antennas")
    run_p.add_argument("--mod", help="modulation (bpsk, 4qam, 16qam)")
    run_p.add_argument("--code", help="channel code, e.g. polar:128:0.5")
    run_p.add_argument("--detector",
                       help="so|scso|oscso|zf|ml-genie (comma-separated list ok)")
    run_p.add_argument("--snr", help="grid A:B:STEP in dB")
    run_p.add_argument("--frames", help="frames per SNR point")
    run_p.add_argument("--seed", help="master seed")
    run_p.add_argument("--out", help="output file path")
    run_p.add_argument("--format", help="csv or json")
    run_p.add_argument("--workers", help="parallel worker processes")

    sub.add_parser("selftest", help="run the built-in property checks")
    return parser


def _config_from_args(args) -> SimConfig:
    mapping = {}
    if args.config:
        mapping.update(parse_config_file(args.config))
    for flag, key in _FLAG_TO_KEY.items():
        value = getattr(args, flag)
        if value is not None:
            mapping[key] = value
    return SimConfig.from_mapping(mapping)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "selftest":
        return 0 if run_selftest() else 1

    try:
        cfg = _config_from_args(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2

    points = run_fer_sweep(cfg)
    for pt in points:
        print(f"snr {pt.snr_db:+6.2f} dB  {pt.detector:<8s} fer {pt.fer:.5f}  "
              f"frame_fer {pt.frame_fer:.5f}  scans/group {pt.mean_scans:.1f}")
    if cfg.out_path:
        try:
            emit_results(points, cfg.out_path, cfg.out_format, cfg)
        except OSError as exc:
            print(f"i/o error: {exc}", file=sys.stderr)
            return 2
        print(f"wrote {cfg.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
