import argparse
import asyncio
import logging
from pathlib import Path

from app.commands.common import add_task_arguments, build_task_spec
from app.services.agents import make_agent
from app.services.benchmark import generate_benchmark
from app.services.runner import run_task
from app.services.scoring import emit, score, write_records
from app.settings import settings

logger = logging.getLogger(__name__)

TASKS = ("size", "community", "structure", "topk")


def register(subparsers):
    parser = subparsers.add_parser("bench", help="generate, run every task and score, end to end")
    parser.add_argument("--out", default=f"{settings.DATA_DIR}/bench")
    parser.add_argument("--scale", type=float, default=0.1)
    parser.add_argument("--size-cap", type=int, default=100_000)
    parser.add_argument("--tasks", default=",".join(TASKS), help="comma separated tasks")
    add_task_arguments(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    out = Path(args.out)
    base = build_task_spec(args)
    manifest = generate_benchmark(out / "benchmark", base.master_seed, args.scale, args.size_cap)
    agent = None
    if base.agent:
        agent = make_agent(base.agent, base.agent_command, base.replay_dir, base.agent_timeout)

    crashed = 0
    for task in [t.strip() for t in args.tasks.split(",") if t.strip()]:
        spec = build_task_spec(args, task=task)
        records = asyncio.run(run_task(manifest, out / "benchmark", spec, agent))
        write_records(records, out / "results" / task)
        emit(score(records), out / "results" / task)
        crashed += sum(r.crashed for r in records)

    print(f"manifest sha256 {manifest.digest}; {crashed} crashed records")
    return 1 if crashed else 0
