"""Shared CLI plumbing: TaskSpec config files and flag overrides."""

import argparse
import logging
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values
from pydantic import ValidationError

from app.errors import ConfigError
from app.models import TaskSpec
from app.settings import settings

logger = logging.getLogger(__name__)

LIST_FIELDS = {"families", "size_classes", "methods", "topk_k"}


def _coerce(key: str, value: str) -> Any:
    if key in LIST_FIELDS:
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


def read_config(path: Optional[str | Path]) -> dict[str, Any]:
    """KEY=VALUE file (same syntax as .env) -> TaskSpec field values."""
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    values: dict[str, Any] = {}
    for raw_key, raw_value in dotenv_values(path).items():
        key = raw_key.strip().lower()
        if key not in TaskSpec.model_fields:
            raise ConfigError(f"unknown config key {raw_key!r} in {path}")
        if raw_value is not None:
            values[key] = _coerce(key, raw_value)
    return values


def add_task_arguments(parser: argparse.ArgumentParser):
    """Flags mirroring TaskSpec; every flag overrides the config file."""
    parser.add_argument("--config", help="KEY=VALUE file with TaskSpec fields")
    parser.add_argument("--task", choices=["size", "community", "structure", "topk"])
    parser.add_argument("--families", help="comma separated families")
    parser.add_argument("--size-classes", help="comma separated size classes")
    parser.add_argument("--methods", help="comma separated methods")
    parser.add_argument("--budget-fraction", type=float)
    parser.add_argument("--burn-in-fraction", type=float)
    parser.add_argument("--k-returns", type=int)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--topk-k", help="comma separated k values")
    parser.add_argument("--centrality", choices=["pagerank", "betweenness", "closeness"])
    parser.add_argument("--seed", dest="master_seed", type=int, help="master seed")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--agent", choices=["exec", "replay"])
    parser.add_argument("--agent-command")
    parser.add_argument("--replay-dir")
    parser.add_argument("--agent-timeout", type=float)


def build_task_spec(args: argparse.Namespace, **fixed: Any) -> TaskSpec:
    values: dict[str, Any] = {
        "master_seed": settings.MASTER_SEED,
        "workers": settings.WORKER_LIMIT,
        "agent_timeout": settings.AGENT_TIMEOUT_SECONDS,
    }
    values.update(read_config(getattr(args, "config", None)))
    for field in TaskSpec.model_fields:
        flag = getattr(args, field, None)
        if flag is not None:
            values[field] = _coerce(field, flag) if isinstance(flag, str) else flag
    values.update({k: v for k, v in fixed.items() if v is not None})
    try:
        return TaskSpec.model_validate(values)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
