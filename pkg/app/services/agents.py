"""
Agent adapters: an external command that reads a prompt on stdin and
answers on stdout, or a replay directory of stored responses keyed by
prompt hash. Responses are parsed from their final "ANSWER:" line.
"""

import asyncio
import logging
import re
import shlex
from pathlib import Path
from typing import Any, Protocol

from app.errors import AgentTimeout, ProcessFailure, ReplayMissing, Unparsable
from app.models import PromptArtifact
from app.settings import settings

logger = logging.getLogger(__name__)

STRUCTURE_LABELS = ("BA", "ER", "LFR", "Grid")

_ANSWER_LINE = re.compile(r"^\s*\**\s*ANSWER\s*:\s*\**\s*(.*?)\s*$", re.IGNORECASE | re.MULTILINE)
_NUMBER = re.compile(r"[-+]?\d[\d,_]*(?:\.\d+)?(?:[eE][-+]?\d+)?")
_LABEL = re.compile(r"\b(BA|ER|LFR|GRID)\b", re.IGNORECASE)


class AgentAdapter(Protocol):
    name: str

    async def respond(self, prompt: PromptArtifact) -> str: ...


class ExecAgent:
    """Runs ``command`` once per prompt; non-zero exit is a ProcessFailure."""

    name = "exec"

    def __init__(self, command: str, timeout: float | None = None):
        self.argv = shlex.split(command)
        if not self.argv:
            raise ValueError("agent command is empty")
        self.timeout = timeout if timeout is not None else settings.AGENT_TIMEOUT_SECONDS

    async def respond(self, prompt: PromptArtifact) -> str:
        try:
            proc = await asyncio.create_subprocess_exec(
                *self.argv,
                stdin=asyncio.subprocess.PIPE,
                stdout=asyncio.subprocess.PIPE,
                stderr=asyncio.subprocess.PIPE,
            )
        except OSError as exc:
            raise ProcessFailure(f"cannot start agent {self.argv[0]}: {exc}") from exc

        try:
            stdout, stderr = await asyncio.wait_for(
                proc.communicate(prompt.text.encode("utf-8")), timeout=self.timeout
            )
        except asyncio.TimeoutError:
            proc.kill()
            await proc.wait()
            raise AgentTimeout(f"agent gave no answer within {self.timeout}s") from None

        if proc.returncode != 0:
            logger.warning(
                "Agent exited with an error",
                extra={
                    "returncode": proc.returncode,
                    "stderr": stderr.decode("utf-8", "replace")[-500:],
                },
            )
            raise ProcessFailure(f"agent exited with status {proc.returncode}")
        return stdout.decode("utf-8", "replace")


class ReplayAgent:
    """Serves ``<replay_dir>/<prompt sha256>.txt``."""

    name = "replay"

    def __init__(self, replay_dir: str | Path):
        self.replay_dir = Path(replay_dir)

    def path_for(self, prompt: PromptArtifact) -> Path:
        return self.replay_dir / f"{prompt.prompt_hash}.txt"

    async def respond(self, prompt: PromptArtifact) -> str:
        path = self.path_for(prompt)
        if not path.is_file():
            raise ReplayMissing(f"no stored response {path.name}")
        return await asyncio.to_thread(path.read_text, encoding="utf-8")


def make_agent(kind: str, command: str | None = None, replay_dir: str | None = None,
               timeout: float | None = None) -> AgentAdapter:
    if kind == "exec":
        if not command:
            raise ValueError("exec agent needs a command")
        return ExecAgent(command, timeout)
    if kind == "replay":
        if not replay_dir:
            raise ValueError("replay agent needs a directory")
        return ReplayAgent(replay_dir)
    raise ValueError(f"unknown agent kind {kind!r}")


def _number(text: str) -> float | None:
    matches = _NUMBER.findall(text)
    if not matches:
        return None
    return float(matches[-1].replace(",", "").replace("_", ""))


def _label(text: str) -> str | None:
    matches = _LABEL.findall(text)
    if not matches:
        return None
    found = matches[-1].upper()
    return "Grid" if found == "GRID" else found


def _parse_value(task: str, text: str) -> Any:
    match task:
        case "size":
            return _number(text)
        case "community":
            value = _number(text)
            return None if value is None else int(round(value))
        case "structure":
            return _label(text)
        case "topk":
            names = [int(float(m.replace(",", ""))) for m in re.findall(r"\d+", text)]
            return names or None
    raise ValueError(f"unknown task {task!r}")


def parse_answer(task: str, text: str) -> Any:
    """
    Value of the last ANSWER line; without one, the last number (or label)
    anywhere in the text. Top-k answers are only read from an ANSWER line.
    """
    lines = _ANSWER_LINE.findall(text)
    if lines:
        value = _parse_value(task, lines[-1])
        if value is not None:
            return value
    if task != "topk":
        value = _parse_value(task, text)
        if value is not None:
            return value
    raise Unparsable(f"no {task} answer found in response")


async def agent_query(adapter: AgentAdapter, prompt: PromptArtifact) -> Any:
    text = await adapter.respond(prompt)
    return parse_answer(prompt.task, text)
