"""Command-line front end: `iaoverhead sweep` and `iaoverhead validate`.

Options come from an INI-style config file (sections [network], [link],
[fading], [sweep]) with command-line flags taking precedence. dB-to-linear
conversion happens here and nowhere deeper in the library.
"""
import argparse
import configparser
import sys

from .sweeps import SWEEP_KINDS, ExperimentSpec, format_csv, format_report, run_sweep, run_validate

_FILE_KEYS = {
    # (section, option) -> (spec field, parser)
    ("network", "users"): ("K", int),
    ("network", "tx_antennas"): ("Nt", int),
    ("network", "rx_antennas"): ("Nr", int),
    ("network", "streams"): ("d", int),
    ("link", "snr_db"): ("snr_db", float),
    ("link", "gamma"): ("gamma", float),
    ("fading", "doppler"): ("fd", float),
    ("sweep", "kind"): ("kind", str),
    ("sweep", "grid_min"): ("grid_min", float),
    ("sweep", "grid_max"): ("grid_max", float),
    ("sweep", "grid_points"): ("grid_points", int),
    ("sweep", "grid_scale"): ("grid_scale", str),
    ("sweep", "trials"): ("trials", int),
    ("sweep", "seed"): ("seed", int),
    ("sweep", "kmax"): ("kmax", int),
    ("sweep", "workers"): ("workers", int),
    ("sweep", "output"): ("output", str),
}


def load_config(path: str) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as fh:
        parser.read_file(fh)
    values = {}
    for (section, option), (field, cast) in _FILE_KEYS.items():
        if parser.has_option(section, option):
            values[field] = cast(parser.get(section, option))
    return values


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--users", type=int, dest="K")
    p.add_argument("--tx-antennas", type=int, dest="Nt")
    p.add_argument("--rx-antennas", type=int, dest="Nr")
    p.add_argument("--streams", type=int, dest="d")
    p.add_argument("--snr-db", type=float, dest="snr_db")
    p.add_argument("--gamma", type=float)
    p.add_argument("--doppler", type=float, dest="fd")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--output", "-o")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iaoverhead",
                                     description="Aligned-network effective-rate experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    ps = sub.add_parser("sweep", help="evaluate a parameter sweep and write CSV")
    _add_common(ps)
    ps.add_argument("--kind", choices=SWEEP_KINDS)
    ps.add_argument("--grid-min", type=float, dest="grid_min")
    ps.add_argument("--grid-max", type=float, dest="grid_max")
    ps.add_argument("--grid-points", type=int, dest="grid_points")
    ps.add_argument("--grid-scale", choices=("linear", "log"), dest="grid_scale")
    pv = sub.add_parser("validate", help="run the oracle battery; exit 1 on any failure")
    _add_common(pv)
    return parser


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    values = load_config(args.config) if args.config else {}
    for field in ExperimentSpec.__dataclass_fields__:
        flag = getattr(args, field, None)
        if flag is not None:
            values[field] = flag
    if args.command == "validate":
        values["kind"] = "validate"
    return ExperimentSpec(**values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = build_spec(args)
    if args.command == "validate":
        checks = run_validate(spec)
        report = format_report(checks)
        if spec.output:
            with open(spec.output, "w") as fh:
                fh.write(report + "\n")
        print(report)
        return 0 if all(c.passed for c in checks) else 1
    result = run_sweep(spec)
    text = format_csv(result)
    if spec.output:
        with open(spec.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if spec.kind == "validate":
        return 0 if all(row[1] for row in result.rows) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
