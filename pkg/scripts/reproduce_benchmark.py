#!/usr/bin/env python3
"""Reproduce the benchmark table on a directory of Solomon-derived instances.

Builds a manifest by inspecting each file (size class from the number of
customer rows; spatial class C/R/RC from the instance name; tight/wide
windows from the series digit, 1xx vs 2xx), then runs the full suite under
the benchmark protocol defaults (3600 s per instance, 16 threads) and
prints the aggregate table.

Examples:
    python scripts/reproduce_benchmark.py data/ --manifest-only --out results/
    python scripts/reproduce_benchmark.py data/ --sizes 25 --workers 8 --out results/
"""

from __future__ import annotations

import argparse
import csv
import re
import sys
from pathlib import Path

from cdsp import InstanceConfig, Setting, SolveLimits, parse_solomon
from cdsp.harness import ManifestEntry, report_table, run_suite, write_report

NAME_RE = re.compile(r"^(RC|C|R)(\d)", re.IGNORECASE)


def classify(path: Path) -> Setting | None:
    try:
        raw = parse_solomon(path.read_text())
    except Exception as exc:
        print(f"skipping {path}: {exc}", file=sys.stderr)
        return None
    n = len(raw.sites) - 1
    name = raw.name or path.stem
    match = NAME_RE.match(name.strip()) or NAME_RE.match(path.stem)
    klass = match.group(1).upper() if match else None
    tw = None
    if match:
        tw = "tight" if match.group(2) == "1" else "wide"
    return Setting(size=n if n in (25, 50, 100) else None, klass=klass, tw=tw)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("data_dir", help="directory holding the instance files")
    parser.add_argument("--pattern", default="**/*.txt", help="glob under data_dir")
    parser.add_argument("--out", default="benchmark-results", help="output directory")
    parser.add_argument("--sizes", type=int, nargs="*", help="restrict to these size classes")
    parser.add_argument("--time-limit", type=float, default=3600.0)
    parser.add_argument("--threads", type=int, default=16)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument(
        "--manifest-only", action="store_true", help="write manifest.csv and stop"
    )
    args = parser.parse_args(argv)

    files = sorted(Path(args.data_dir).glob(args.pattern))
    if not files:
        print(f"no instance files match {args.pattern} under {args.data_dir}", file=sys.stderr)
        return 1

    entries = []
    for path in files:
        setting = classify(path)
        if setting is None:
            continue
        if args.sizes and setting.size not in args.sizes:
            continue
        entries.append(ManifestEntry(path=path, setting=setting))
    print(f"{len(entries)} instances manifested from {len(files)} files")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.csv", "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["path", "size", "class", "tw"])
        for entry in entries:
            writer.writerow(
                [
                    str(entry.path.resolve()),
                    entry.setting.size or "",
                    entry.setting.klass or "",
                    entry.setting.tw or "",
                ]
            )
    print(f"manifest written to {out / 'manifest.csv'}")
    if args.manifest_only:
        return 0

    report = run_suite(
        entries,
        InstanceConfig(),
        SolveLimits(time_limit_s=args.time_limit, threads=args.threads),
        workers=args.workers,
        out_dir=out,
    )
    print(report_table(report), end="")
    write_report(report, out)
    print(f"report written to {out}")
    return 1 if report.has_errors else 0


if __name__ == "__main__":
    sys.exit(main())
