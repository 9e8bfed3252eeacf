"""Aggregation of multiple readers' outputs.

Two rules: mean_probability averages the members' distributions (weighted,
renormalized); majority lets each member vote its argmax, breaking vote
ties by total probability mass and then by lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .reader import ChoiceDistribution, predict

RULES = ("majority", "mean_probability")


@dataclass(frozen=True)
class EnsembleConfig:
    members: tuple[str, ...]
    weights: tuple[float, ...]
    rule: str = "majority"

    def __post_init__(self):
        if not self.members:
            raise ValueError("ensemble needs at least one member")
        if len(self.weights) != len(self.members):
            raise ValueError("weights and members must have the same length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("ensemble weights must be positive")
        if self.rule not in RULES:
            raise ValueError(f"unknown ensemble rule {self.rule!r}")

    @classmethod
    def single(cls, reader_id: str) -> "EnsembleConfig":
        return cls(members=(reader_id,), weights=(1.0,))


def _check_members(dists: Sequence[ChoiceDistribution]) -> int:
    if not dists:
        raise ValueError("no member distributions")
    n = len(dists[0].probabilities)
    qid = dists[0].qid
    for d in dists[1:]:
        if len(d.probabilities) != n:
            raise ValueError(
                f"member {d.reader_id!r} has {len(d.probabilities)} choices, "
                f"expected {n}"
            )
        if d.qid != qid:
            raise ValueError(f"mixed qids in ensemble: {d.qid!r} vs {qid!r}")
    return n


def aggregate_probabilities(
    dists: Sequence[ChoiceDistribution], weights: Sequence[float] | None = None
) -> ChoiceDistribution:
    """Weighted mean of member distributions, renormalized to sum to one."""
    _check_members(dists)
    if weights is None:
        weights = [1.0] * len(dists)
    if len(weights) != len(dists):
        raise ValueError("weights and distributions must have the same length")
    stacked = np.asarray([d.probabilities for d in dists], dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)[:, None]
    merged = (stacked * w).sum(axis=0)
    merged = merged / merged.sum()
    return ChoiceDistribution(
        qid=dists[0].qid,
        probabilities=[float(p) for p in merged],
        reader_id="+".join(d.reader_id for d in dists),
    )


def majority_vote(dists: Sequence[ChoiceDistribution]) -> int:
    """Each member votes its argmax; most votes wins.

    Vote ties go to the tied choice with the highest probability mass summed
    across all members, then to the lowest index.
    """
    n = _check_members(dists)
    votes = np.zeros(n, dtype=np.int64)
    mass = np.zeros(n, dtype=np.float64)
    for d in dists:
        votes[predict(d)] += 1
        mass += np.asarray(d.probabilities)
    best_votes = votes.max()
    tied = np.flatnonzero(votes == best_votes)
    if tied.size == 1:
        return int(tied[0])
    tied_mass = mass[tied]
    return int(tied[int(np.argmax(tied_mass))])
