"""Command line entry point: ``localgen run <config.json>``.

Exit codes: 0 success, 3 success with certification failures (outputs are
still written), 1 validation or I/O error, 2 numerical error.  Errors are
reported on stderr as ``error[<category>]: <message>``.
"""

import argparse
import sys
from pathlib import Path

from .errors import NumericalError, ValidationError
from .records import emit_table
from .scenario import load_config, run_tasks

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_CERTIFICATION = 3


def _parse_overrides(items):
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ValidationError(f"--tol-override: expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="localgen",
        description="Local generators, ordered propagation and CPT certification of open-system dynamics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="execute a scenario config")
    run.add_argument("config", help="scenario JSON document")
    run.add_argument("--out-dir", default=None, help="directory for output files (default: current directory)")
    run.add_argument("--tol-override", action="append", metavar="KEY=VALUE",
                     help="override a tolerance, e.g. rtol=1e-12 (repeatable)")
    run.add_argument("--quiet", action="store_true", help="suppress the summary table")
    return parser


def _error(category, message):
    print(f"error[{category}]: {message}", file=sys.stderr)


def run(config_path, out_dir=None, tol_overrides=None, quiet=False):
    """Execute a scenario and write one output file per task; return the exit code."""
    try:
        cfg = load_config(config_path, tol_overrides)
        results = run_tasks(cfg)
    except OSError as exc:
        _error("io", exc)
        return EXIT_VALIDATION
    except ValidationError as exc:
        _error("validation", exc)
        return EXIT_VALIDATION
    except NumericalError as exc:
        _error("numerical", exc)
        return EXIT_NUMERICAL

    base = Path(out_dir) if out_dir else Path(".")
    stem = Path(cfg.output_path)
    ext = cfg.output_format
    try:
        base.mkdir(parents=True, exist_ok=True)
        written = []
        for name, res in results.items():
            target = base / stem.parent / f"{stem.name}_{name}.{ext}"
            target.parent.mkdir(parents=True, exist_ok=True)
            written.append(emit_table(res.table, ext, target))
    except OSError as exc:
        _error("io", exc)
        return EXIT_VALIDATION
    except ValueError as exc:  # non-finite value refused by the JSON writer
        _error("numerical", exc)
        return EXIT_NUMERICAL

    certified = all(r.certified for r in results.values())
    if not quiet:
        print(f"model: {cfg.model_name}  grid: [{cfg.grid.t0}, {cfg.grid.t_end}] x {len(cfg.grid.samples)}")
        for res in results.values():
            for line in res.summary:
                print(line)
        for path in written:
            print(f"wrote {path}")
        print("status: " + ("ok" if certified else "certification failures"))
    return EXIT_OK if certified else EXIT_CERTIFICATION


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        overrides = _parse_overrides(args.tol_override)
    except ValidationError as exc:
        _error("validation", exc)
        return EXIT_VALIDATION
    return run(args.config, args.out_dir, overrides, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
