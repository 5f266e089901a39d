import json

import pytest

from app.commands.common import build_task_spec, read_config
from app.errors import ConfigError
from app.main import build_parser, main
from app.models import PromptArtifact
from app.services.benchmark import MANIFEST_NAME
from app.services.scoring import read_scores


@pytest.fixture
def bench_dir(isolated_settings):
    out = isolated_settings / "bench"
    assert main(["generate", "--out", str(out), "--seed", "3", "--scale", "0.01", "--size-cap", "200"]) == 0
    return out


def test_config_file_and_flag_precedence(tmp_path):
    config = tmp_path / "task.env"
    config.write_text("TASK=topk\nTOPK_K=5,10\nBUDGET_FRACTION=0.3\n", encoding="utf-8")
    assert read_config(config)["topk_k"] == ["5", "10"]

    args = build_parser().parse_args(
        ["agent-run", "--config", str(config), "--budget-fraction", "0.5", "--seed", "11"]
    )
    spec = build_task_spec(args)
    assert spec.task == "topk"
    assert spec.topk_k == [5, 10]
    assert spec.budget_fraction == 0.5
    assert spec.master_seed == 11


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.env"
    bad.write_text("NOT_A_FIELD=1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_config(bad)
    with pytest.raises(ConfigError):
        read_config(tmp_path / "missing.env")
    args = build_parser().parse_args(["agent-run", "--budget-fraction", "2"])
    with pytest.raises(ConfigError):
        build_task_spec(args)


def test_generate_writes_manifest(capsys, bench_dir):
    assert (bench_dir / MANIFEST_NAME).is_file()
    assert "manifest sha256" in capsys.readouterr().out


def test_estimate_on_edgelist(bench_dir, capsys):
    manifest = json.loads((bench_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    entry = next(e for e in manifest["entries"] if e["task"] == "size")
    graph = bench_dir / entry["path"]
    code = main(["estimate", "--graph", str(graph), "--method", "uniform", "--budget-fraction", "1.0"])
    result = json.loads(capsys.readouterr().out)
    assert code == (0 if result["status"] == "ok" else 1)
    assert result["diagnostics"]["true_nodes"] == entry["truth"]["nodes"]


def test_estimate_rejects_bad_fraction(isolated_settings):
    graph = isolated_settings / "g.txt"
    graph.write_text("0 1\n1 2\n", encoding="utf-8")
    assert main(["estimate", "--graph", str(graph), "--budget-fraction", "0"]) == 2


def test_prompt_then_replay_then_score(bench_dir, isolated_settings):
    prompts_dir = isolated_settings / "prompts"
    results_dir = isolated_settings / "results"
    assert main(["prompt", "--manifest", str(bench_dir), "--out", str(prompts_dir), "--task", "structure", "--seed", "4"]) == 0

    lines = (prompts_dir / "prompts.jsonl").read_text(encoding="utf-8").splitlines()
    prompts = [PromptArtifact.model_validate_json(line) for line in lines]
    assert len(prompts) == 4
    for prompt in prompts:
        assert (prompts_dir / f"{prompt.prompt_hash}.prompt.txt").read_text(encoding="utf-8") == prompt.text
        (prompts_dir / f"{prompt.prompt_hash}.txt").write_text("ANSWER: Grid\n", encoding="utf-8")

    code = main([
        "agent-run", "--manifest", str(bench_dir), "--out", str(results_dir),
        "--task", "structure", "--seed", "4", "--agent", "replay", "--replay-dir", str(prompts_dir),
    ])
    assert code == 0
    table = read_scores(results_dir / "structure" / "scores.json")
    accuracy = {row.family: row.median for row in table.rows}
    assert accuracy == {"BA": 0.0, "ER": 0.0, "Grid": 1.0, "LFR": 0.0}

    rescored = isolated_settings / "rescored"
    assert main(["score", str(results_dir / "structure" / "records.jsonl"), "--out", str(rescored), "--format", "csv"]) == 0
    assert (rescored / "scores.csv").is_file()
    assert not (rescored / "scores.json").exists()


def test_agent_run_requires_agent(bench_dir):
    assert main(["agent-run", "--manifest", str(bench_dir), "--task", "structure"]) == 2


def test_bench_end_to_end_is_deterministic(isolated_settings):
    outputs = []
    for name in ("one", "two"):
        out = isolated_settings / name
        args = ["bench", "--out", str(out), "--scale", "0.01", "--size-cap", "200", "--tasks", "structure,topk", "--seed", "8"]
        assert main(args) == 0
        outputs.append(out)
    for relative in (
        "benchmark/manifest.json",
        "results/structure/records.jsonl",
        "results/structure/scores.csv",
        "results/topk/records.jsonl",
        "results/topk/scores.json",
    ):
        assert (outputs[0] / relative).read_bytes() == (outputs[1] / relative).read_bytes()
