"""``mmd`` command-line front end.

Exit status: 0 when every check passes, 1 when a check fails, 2 when the
scenario (or the command line) is unusable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import amplifier
from .errors import MMDError
from .scenario import COMMANDS, ScenarioError, load, run, tabular

log = logging.getLogger("mmd")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmd", description="Finite abelian measurement-scheme simulator.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", help="scenario JSON file (not needed for 'suite')")
    p.add_argument("--out", help="report path; stdout when omitted")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, help="overrides the scenario seed")
    p.add_argument("--max-dim", type=int, dest="max_dim",
                   help=f"dense state cap (default {amplifier.DEFAULT_MAX_DIM}, or $MMD_MAX_DIM)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def to_csv(report: dict) -> str:
    header, rows = tabular(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return 2
    cap = args.max_dim
    if cap is None:
        cap = amplifier.max_dim()  # env override, else the default
    try:
        doc = None
        if args.command != "suite":
            if not args.scenario:
                raise ScenarioError("", f"'{args.command}' needs --scenario")
            doc = load(args.scenario, args.command)
        elif args.scenario:
            log.info("'suite' runs the built-in catalogue; --scenario ignored")
        report = run(args.command, doc, args.seed, cap)
    except ScenarioError as exc:
        print(f"scenario error at {exc.pointer or '/'}: {exc.message}", file=sys.stderr)
        return 2
    except MMDError as exc:
        print(f"scenario error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2

    text = dumps(report)
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        if args.format == "csv":
            out.with_suffix(".csv").write_text(to_csv(report), encoding="utf-8")
    else:
        sys.stdout.write(to_csv(report) if args.format == "csv" else text)
    for c in report["checks"]:
        if not c["pass"]:
            log.warning("check failed: %s = %.3g (tolerance %.3g)", c["name"], c["value"], c["tolerance"])
    return 0 if report["pass"] else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
