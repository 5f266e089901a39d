import shlex
import sys

import pytest

from app.errors import AgentTimeout, ProcessFailure, ReplayMissing, Unparsable
from app.models import PromptArtifact
from app.services.agents import ExecAgent, ReplayAgent, agent_query, make_agent, parse_answer


def _prompt(task: str = "size", text: str = "How many nodes?\n") -> PromptArtifact:
    return PromptArtifact(task=task, text=text, token_estimate=4)


def _script(tmp_path, body: str) -> str:
    path = tmp_path / "agent.py"
    path.write_text(body, encoding="utf-8")
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(path))}"


@pytest.mark.parametrize(
    "task, text, expected",
    [
        ("size", "thinking...\nANSWER: 12,500\n", 12500.0),
        ("size", "ANSWER: 10\nwait, no\nANSWER: 1.5e3", 1500.0),
        ("size", "**ANSWER:** 42 nodes", 42.0),
        ("size", "I would guess about 3000 nodes overall.", 3000.0),
        ("community", "answer: 7.0", 7),
        ("structure", "It looks scale-free.\nANSWER: ba", "BA"),
        ("structure", "Degrees are all 6 or less, a grid", "Grid"),
        ("topk", "ANSWER: 1000012, 1000007, 1000003", [1000012, 1000007, 1000003]),
    ],
)
def test_parse_answer(task, text, expected):
    assert parse_answer(task, text) == expected


@pytest.mark.parametrize(
    "task, text",
    [
        ("size", "no idea"),
        ("structure", "ANSWER: a small world"),
        ("topk", "nodes 1, 2 and 3 look central"),
    ],
)
def test_unparsable_answers(task, text):
    with pytest.raises(Unparsable):
        parse_answer(task, text)


async def test_replay_agent(tmp_path):
    prompt = _prompt()
    agent = ReplayAgent(tmp_path)
    agent.path_for(prompt).write_text("ANSWER: 900\n", encoding="utf-8")
    assert await agent_query(agent, prompt) == 900.0
    with pytest.raises(ReplayMissing):
        await agent.respond(_prompt(text="another prompt\n"))


async def test_exec_agent_reads_stdin(tmp_path):
    command = _script(
        tmp_path,
        "import sys\ntext = sys.stdin.read()\nprint('ANSWER:', len(text.splitlines()))\n",
    )
    agent = ExecAgent(command, timeout=30)
    assert await agent_query(agent, _prompt(text="a\nb\nc\n")) == 3.0


async def test_exec_agent_failure(tmp_path):
    agent = ExecAgent(_script(tmp_path, "import sys\nsys.exit(3)\n"), timeout=30)
    with pytest.raises(ProcessFailure):
        await agent.respond(_prompt())


async def test_exec_agent_timeout(tmp_path):
    agent = ExecAgent(_script(tmp_path, "import time\ntime.sleep(30)\n"), timeout=0.5)
    with pytest.raises(AgentTimeout):
        await agent.respond(_prompt())


async def test_exec_agent_missing_binary(tmp_path):
    agent = ExecAgent(str(tmp_path / "no-such-agent"), timeout=5)
    with pytest.raises(ProcessFailure):
        await agent.respond(_prompt())


def test_make_agent(tmp_path):
    assert isinstance(make_agent("replay", replay_dir=str(tmp_path)), ReplayAgent)
    assert isinstance(make_agent("exec", command="cat"), ExecAgent)
    with pytest.raises(ValueError):
        make_agent("exec")
    with pytest.raises(ValueError):
        make_agent("http")
