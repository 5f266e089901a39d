import argparse
import logging

from app.services.scoring import emit, read_records, score

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("score", help="score a records.jsonl file")
    parser.add_argument("records", help="records.jsonl")
    parser.add_argument("--out", required=True, help="directory for scores.csv / scores.json")
    parser.add_argument("--format", default="csv,json", help="comma separated: csv, json")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    formats = [f.strip() for f in args.format.split(",") if f.strip()]
    written = emit(score(read_records(args.records)), args.out, formats)
    for path in written:
        print(path)
    return 0
