import argparse
import logging
from pathlib import Path

from app.commands.common import add_task_arguments, build_task_spec
from app.services.benchmark import load_entry, load_manifest
from app.services.runner import BenchmarkRunner, build_prompts
from app.services.seeding import mix_seed
from app.settings import settings

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("prompt", help="render task prompts for benchmark graphs")
    parser.add_argument("--manifest", default=f"{settings.DATA_DIR}/benchmark")
    parser.add_argument("--out", default=f"{settings.DATA_DIR}/prompts")
    parser.add_argument("--sampler", choices=["mh", "srw"], default="mh", help="size-task walks")
    add_task_arguments(parser)
    parser.set_defaults(func=run)


def run(args: argparse.Namespace) -> int:
    """
    Writes prompts.jsonl plus one <sha256>.prompt.txt per prompt; a replay
    agent expects its response under <sha256>.txt.
    """
    spec = build_task_spec(args)
    manifest = load_manifest(args.manifest)
    root = Path(args.manifest)
    root = root if root.is_dir() else root.parent
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sampler = args.sampler if spec.task == "size" else "srw"
    method = f"agent-{sampler}" if spec.task == "size" else "agent"
    entries = BenchmarkRunner(manifest, root, spec).entries()
    count = 0
    with (out / "prompts.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
        for entry in entries:
            g, labels = load_entry(root, entry)
            for trial in range(spec.trials):
                seed = mix_seed(spec.master_seed, entry.graph_id, method, trial)
                prompts, _, _ = build_prompts(
                    spec.task, g, labels, spec, seed, entry.graph_id, sampler
                )
                for prompt in prompts:
                    fh.write(prompt.model_dump_json() + "\n")
                    (out / f"{prompt.prompt_hash}.prompt.txt").write_text(prompt.text, encoding="utf-8")
                    count += 1
    logger.info("Prompts written", extra={"prompts": count, "out": str(out)})
    print(f"{count} prompts written to {out}")
    return 0
