import argparse
import asyncio
import logging

from app.services.snap_client import DATASETS, SnapClient
from app.settings import settings

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("fetch", help="download SNAP datasets")
    parser.add_argument("datasets", nargs="*", help=f"any of: {', '.join(DATASETS)} (default: all)")
    parser.add_argument("--dest", default=f"{settings.DATA_DIR}/snap", help="download directory")
    parser.add_argument("--force", action="store_true", help="download even if present")
    parser.set_defaults(func=run)


async def _fetch_all(names: list[str], dest: str, force: bool):
    client = SnapClient()
    for name in names:
        path = await client.fetch(name, dest, force=force)
        print(f"{name}: {path}")


def run(args: argparse.Namespace) -> int:
    asyncio.run(_fetch_all(args.datasets or list(DATASETS), args.dest, args.force))
    return 0
