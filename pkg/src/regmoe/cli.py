"""Command-line driver.

Exit codes: 0 when every asserted inequality holds, 1 when a counterexample
was found, 2 on a configuration error, 3 when a resource cap was hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import fields

from .channels import GramCapExceeded
from .suites import COMMANDS, SUITES, Report, RunConfig

log = logging.getLogger("regmoe")

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3


def _number(text: str):
    x = float(text)
    return int(x) if x.is_integer() and abs(x) < 2 ** 63 else x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regmoe", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--N", type=_number, default=None, help="channel width / number of generators")
    p.add_argument("--k", type=int, default=None, help="tensor power")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0, help="root seed (64-bit)")
    p.add_argument("--support-radius", type=int, default=None, help="max word length per component")
    p.add_argument("--moment-budget", type=int, default=20_000,
                   help="max candidate support points per convolution in the moment method")
    p.add_argument("--precision", choices=("exact", "float"), default="exact")
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--log-base", choices=("e", "2"), default="e")
    p.add_argument("--restarts", type=int, default=8, help="optimizer restarts (minimize)")
    p.add_argument("--iterations", type=int, default=300, help="optimizer iterations (minimize)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_json(), sort_keys=True, indent=2)
    if fmt == "csv":
        rows = report.rows or [report.summary]
        cols: list[str] = []
        for r in rows:
            cols.extend(c for c in r if c not in cols)
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: json.dumps(v) if isinstance(v, (dict, list, tuple)) else v for c, v in r.items()})
        return buf.getvalue().rstrip("\n")
    lines = [f"[{report.command}] " + ("PASS" if report.ok else "FAIL")] + report.lines
    for f in report.failures[:5]:
        lines.append(f"counterexample: observed={f['observed']!r} bound={f['bound']!r} input={json.dumps(f['input'], sort_keys=True)}")
    return "\n".join(lines)


def run(config: RunConfig) -> tuple[int, Report | None]:
    """Run one command; returns ``(exit_code, report)``."""
    try:
        config.validate()
        report = SUITES[config.command](config)
    except GramCapExceeded as exc:
        log.error("%s", exc)
        return EXIT_RESOURCE, None
    except MemoryError as exc:
        log.error("out of memory: %s", exc)
        return EXIT_RESOURCE, None
    except ValueError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG, None
    return (EXIT_OK if report.ok else EXIT_VIOLATION), report


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    names = {f.name for f in fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in names})
    code, report = run(cfg)
    if report is not None:
        print(render(report, cfg.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
