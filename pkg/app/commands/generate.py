import argparse
import logging

from app.services.benchmark import generate_benchmark
from app.settings import settings

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("generate", help="generate the synthetic benchmark corpus")
    parser.add_argument("--out", default=f"{settings.DATA_DIR}/benchmark", help="output directory")
    parser.add_argument("--seed", type=int, default=settings.MASTER_SEED, help="master seed")
    parser.add_argument("--scale", type=float, default=0.1, help="fraction of the 100 graphs per cell")
    parser.add_argument("--size-cap", type=int, default=100_000, help="largest graph size")
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    manifest = generate_benchmark(args.out, args.seed, args.scale, args.size_cap)
    print(f"{len(manifest.entries)} graphs, manifest sha256 {manifest.digest}")
    return 0
