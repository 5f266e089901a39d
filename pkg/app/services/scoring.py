"""
Scoring of experiment records and emission of score tables and record
files.
"""

import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from app.models import ExperimentRecord, ScoreRow, ScoreTable, structure_label

logger = logging.getLogger(__name__)

REL_ERR_CAP = 10_000.0
# higher is better for these; every other metric is an error
HIGHER_IS_BETTER = frozenset({"accuracy", "precision"})
CSV_COLUMNS = [
    "task",
    "family",
    "size_class",
    "method",
    "metric",
    "k",
    "attempted",
    "ok",
    "failed",
    "unparsed",
    "median",
    "mean",
    "std",
    "rank",
]


def relative_error(estimate: float, truth: float) -> float:
    """100 * |est - true| / true."""
    return 100.0 * abs(estimate - truth) / truth


def precision_at_k(predicted: Sequence[int], truth: Sequence[int], k: int) -> float:
    return len(set(predicted[:k]) & set(truth[:k])) / k


def _group_family(record: ExperimentRecord) -> str:
    if record.task == "structure":
        return record.truth.get("structure") or structure_label(record.family)
    return record.family


def record_metrics(record: ExperimentRecord) -> list[tuple[str, Optional[int], float]]:
    """(metric, k, value) triples for an ok record."""
    est, truth = record.estimate or {}, record.truth
    match record.task:
        case "size":
            return [
                ("node_rel_err", None, relative_error(est["n_hat"], truth["nodes"])),
                ("edge_rel_err", None, relative_error(est["m_hat"], truth["edges"])),
            ]
        case "community":
            return [("community_abs_err", None, float(abs(est["communities"] - truth["communities"])))]
        case "structure":
            return [("accuracy", None, float(est["structure"] == truth["structure"]))]
        case "topk":
            return [
                ("precision", k, precision_at_k(est["ranking"], truth["ranking"], k))
                for k in truth["k"]
            ]
    return []


def _metric_names(task: str, truth: dict) -> list[tuple[str, Optional[int]]]:
    match task:
        case "size":
            return [("node_rel_err", None), ("edge_rel_err", None)]
        case "community":
            return [("community_abs_err", None)]
        case "structure":
            return [("accuracy", None)]
        case "topk":
            return [("precision", k) for k in truth.get("k", [])]
    return []


def _rank(rows: list[ScoreRow]):
    by_bucket: dict[tuple, list[ScoreRow]] = defaultdict(list)
    for row in rows:
        by_bucket[(row.task, row.family, row.size_class, row.metric, row.k)].append(row)
    for bucket in by_bucket.values():
        higher = bucket[0].metric in HIGHER_IS_BETTER

        def order(row: ScoreRow):
            if row.median is None:
                return (1, 0.0, row.method)
            return (0, -row.median if higher else row.median, row.method)

        for position, row in enumerate(sorted(bucket, key=order), start=1):
            row.rank = position


def score(records: Iterable[ExperimentRecord]) -> ScoreTable:
    """
    Group by (task, family, size class, method) and summarize each metric
    over the ok records. Size errors above REL_ERR_CAP are clipped for the
    summary statistics; ``values`` keeps them raw.
    """
    groups: dict[tuple, list[ExperimentRecord]] = defaultdict(list)
    for record in records:
        groups[(record.task, _group_family(record), record.size_class, record.method)].append(record)

    rows: list[ScoreRow] = []
    for (task, family, size_class, method), members in groups.items():
        counts = {
            "attempted": len(members),
            "ok": sum(r.status == "ok" for r in members),
            "failed": sum(r.status == "failed" for r in members),
            "unparsed": sum(r.status == "unparsed" for r in members),
        }
        values: dict[tuple[str, Optional[int]], list[float]] = {
            key: [] for key in _metric_names(task, members[0].truth)
        }
        for record in members:
            if record.status != "ok":
                continue
            for metric, k, value in record_metrics(record):
                values.setdefault((metric, k), []).append(value)

        for (metric, k), raw in values.items():
            summary = np.minimum(raw, REL_ERR_CAP) if metric.endswith("rel_err") else np.asarray(raw)
            rows.append(
                ScoreRow(
                    task=task,
                    family=family,
                    size_class=size_class,
                    method=method,
                    metric=metric,
                    k=k,
                    median=float(np.median(summary)) if raw else None,
                    mean=float(np.mean(summary)) if raw else None,
                    std=float(np.std(summary)) if raw else None,
                    values=[float(v) for v in raw],
                    **counts,
                )
            )

    _rank(rows)
    rows.sort(key=lambda r: (r.task, r.family, r.size_class or "", r.metric, r.k or 0, r.method))
    logger.info("Scored records", extra={"groups": len(groups), "rows": len(rows)})
    return ScoreTable(rows=rows)


def emit(table: ScoreTable, out_dir: str | Path, formats: Sequence[str] = ("csv", "json")) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "csv" in formats:
        frame = pd.DataFrame(
            [row.model_dump(include=set(CSV_COLUMNS)) for row in table.rows],
            columns=CSV_COLUMNS,
        ).astype({"k": "Int64", "rank": "Int64"})
        path = out / "scores.csv"
        frame.to_csv(path, index=False, lineterminator="\n")
        written.append(path)
    if "json" in formats:
        path = out / "scores.json"
        path.write_text(table.model_dump_json(indent=2) + "\n", encoding="utf-8")
        written.append(path)
    return written


def write_records(records: Sequence[ExperimentRecord], out_dir: str | Path) -> tuple[Path, Path]:
    """
    records.jsonl holds everything but wall time, so reruns are
    byte-identical; wall times go to timings.jsonl.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_path, timings_path = out / "records.jsonl", out / "timings.jsonl"
    with records_path.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(record.model_dump_json(exclude={"wall_time"}) + "\n")
    with timings_path.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            timing = {
                "graph_id": record.graph_id,
                "method": record.method,
                "trial": record.trial,
                "wall_time": record.wall_time,
            }
            fh.write(json.dumps(timing) + "\n")
    return records_path, timings_path


def read_records(path: str | Path) -> list[ExperimentRecord]:
    with Path(path).open(encoding="utf-8") as fh:
        return [ExperimentRecord.model_validate_json(line) for line in fh if line.strip()]


def read_scores(path: str | Path) -> ScoreTable:
    return ScoreTable.model_validate_json(Path(path).read_text(encoding="utf-8"))
