"""
Rule-based structure classifier over walk statistics; the non-LLM
baseline for the structure task.
"""

import logging
from typing import Sequence

import numpy as np

from app.errors import EmptyStats
from app.models import StructureLabel, WalkStats

logger = logging.getLogger(__name__)

LATTICE_DEGREES = frozenset({2, 3, 4, 5, 6})
SKEW_RATIO = 4.0
# share of new nodes found in the second half of a walk vs the first half
CLUSTERED_DISCOVERY = 0.5


def _pooled_degrees(stats: Sequence[WalkStats]) -> np.ndarray:
    histogram: dict[int, int] = {}
    for s in stats:
        for degree, count in s.degree_histogram.items():
            histogram[int(degree)] = histogram.get(int(degree), 0) + count
    if not histogram:
        raise EmptyStats("walk statistics carry no degrees")
    keys = np.fromiter(histogram.keys(), dtype=np.int64)
    return np.repeat(keys, np.fromiter(histogram.values(), dtype=np.int64))


def discovery_ratio(stats: Sequence[WalkStats]) -> float:
    early = sum(sum(s.decile_new_nodes[:5]) for s in stats)
    late = sum(sum(s.decile_new_nodes[5:]) for s in stats)
    return late / early if early else 0.0


def classify_structure(stats: Sequence[WalkStats]) -> StructureLabel:
    """
    Grid when every observed degree fits a lattice (or there is only one
    degree value); otherwise a heavy degree tail means BA, or LFR when new
    nodes dry up in the second half of the walks; everything else is ER.
    """
    if not stats:
        raise EmptyStats("classify_structure needs at least one walk")
    degrees = _pooled_degrees(stats)
    distinct = set(np.unique(degrees).tolist())

    if len(distinct) == 1 or distinct <= LATTICE_DEGREES:
        label: StructureLabel = "Grid"
    elif degrees.max() / max(float(np.median(degrees)), 1.0) >= SKEW_RATIO:
        label = "LFR" if discovery_ratio(stats) < CLUSTERED_DISCOVERY else "BA"
    else:
        label = "ER"
    logger.debug(
        "Classified structure",
        extra={"label": label, "distinct_degrees": len(distinct), "walks": len(stats)},
    )
    return label
