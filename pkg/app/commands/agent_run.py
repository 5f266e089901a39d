import argparse
import asyncio
import logging
from pathlib import Path

from app.commands.common import add_task_arguments, build_task_spec
from app.errors import ConfigError
from app.services.agents import make_agent
from app.services.benchmark import load_manifest
from app.services.runner import AGENT_METHODS, run_task
from app.services.scoring import emit, score, write_records
from app.settings import settings

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("agent-run", help="query an exec or replay agent over task prompts")
    parser.add_argument("--manifest", default=f"{settings.DATA_DIR}/benchmark")
    parser.add_argument("--out", default=f"{settings.DATA_DIR}/results")
    add_task_arguments(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    spec = build_task_spec(args)
    if spec.agent is None:
        raise ConfigError("agent-run needs --agent exec or --agent replay")
    if not spec.methods:
        spec = spec.model_copy(update={"methods": list(AGENT_METHODS[spec.task])})
    agent = make_agent(spec.agent, spec.agent_command, spec.replay_dir, spec.agent_timeout)

    manifest = load_manifest(args.manifest)
    root = Path(args.manifest)
    root = root if root.is_dir() else root.parent
    records = asyncio.run(run_task(manifest, root, spec, agent))

    out = Path(args.out) / spec.task
    write_records(records, out)
    emit(score(records), out)
    crashed = sum(r.crashed for r in records)
    print(f"{len(records)} records, {crashed} crashed, results in {out}")
    return 1 if crashed else 0
