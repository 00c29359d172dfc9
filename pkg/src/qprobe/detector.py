"""Fraud verdicts from fingerprint distances.

The working metric is the average per-qubit Manhattan distance between two
survival fingerprints; a device is flagged as fraudulent when that distance
strictly exceeds the decision threshold.  The default threshold of 0.035
sits inside the gap between honest self-distances and cross-device
distances observed on separated fleets.

`static_match` is the baseline scheme this protocol improves on: comparing
advertised calibration vectors directly, with an unaveraged Manhattan
distance.  It identifies honest devices but cannot see through a fabricated
profile, which is the point of probing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .device import ErrorVector
from .estimator import Fingerprint

__all__ = [
    "DEFAULT_THRESHOLD",
    "Verdict",
    "manhattan_avg",
    "detect",
    "match_device",
    "static_match",
]

DEFAULT_THRESHOLD = 0.035


@dataclass(frozen=True)
class Verdict:
    distance: float
    threshold: float
    classification: str

    @property
    def is_fraud(self) -> bool:
        return self.classification == "fraudulent"


def manhattan_avg(a: Fingerprint, b: Fingerprint) -> float:
    """Average per-qubit Manhattan distance between two fingerprints."""
    if len(a) == 0 or len(a) != len(b):
        raise ValueError("fingerprints must be non-empty and the same length")
    return sum(abs(x - y) for x, y in zip(a.survivals, b.survivals)) / len(a)


def detect(expected: Fingerprint, observed: Fingerprint,
           threshold: float = DEFAULT_THRESHOLD) -> Verdict:
    """Classify a device: fraudulent iff distance strictly exceeds threshold."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    distance = manhattan_avg(expected, observed)
    classification = "fraudulent" if distance > threshold else "honest"
    return Verdict(distance=distance, threshold=threshold, classification=classification)


def match_device(candidates: Mapping[str, Fingerprint],
                 observed: Fingerprint) -> tuple[str, dict[str, float]]:
    """Closest candidate by fingerprint distance; ties go to the lowest id.

    Candidates whose probes would not fit the observed device must be
    excluded by the caller before matching.
    """
    if not candidates:
        raise ValueError("no candidates to match against")
    distances = {name: manhattan_avg(fp, observed) for name, fp in candidates.items()}
    best = min(sorted(distances), key=lambda name: distances[name])
    return best, distances


def static_match(candidates: Mapping[str, ErrorVector],
                 observed: ErrorVector) -> tuple[str, dict[str, float]]:
    """Baseline matcher on advertised calibration vectors (total Manhattan).

    All vectors must carry identical label sequences.
    """
    if not candidates:
        raise ValueError("no candidates to match against")
    distances = {}
    for name, vec in candidates.items():
        if vec.labels() != observed.labels():
            raise ValueError(f"candidate {name!r} has mismatched error-vector labels")
        distances[name] = sum(abs(x - y) for x, y in zip(vec.rates(), observed.rates()))
    best = min(sorted(distances), key=lambda name: distances[name])
    return best, distances
