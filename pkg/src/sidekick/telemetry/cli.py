"""`sidekick-metrics`: turn an event log into a usage report."""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date

from .events import read_events
from .metrics import compute_metrics, render_markdown


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sidekick-metrics",
        description="Aggregate a usage event log (newline-delimited JSON) into a report.",
    )
    parser.add_argument("--log", required=True, help="path to the event log")
    parser.add_argument(
        "--term-start", required=True, type=date.fromisoformat,
        metavar="YYYY-MM-DD", help="first day of week 1 of the term",
    )
    parser.add_argument("--tz", default="UTC", help="IANA timezone for hour-of-day splits")
    parser.add_argument("--format", choices=("json", "markdown"), default="markdown")
    args = parser.parse_args(argv)

    try:
        events = read_events(args.log)
        report = compute_metrics(events, tz=args.tz, term_start=args.term_start)
    except FileNotFoundError:
        print(f"sidekick-metrics: no such log file: {args.log}", file=sys.stderr)
        return 2

    if args.format == "json":
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        print(render_markdown(report), end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
