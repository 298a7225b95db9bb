"""Ranking metrics over per-question candidate sets.

Candidates are ranked by descending model score (stable, so tied scores
keep their original order), then scored two ways: average precision (the
mean of precision taken at each relevant item's rank) and reciprocal rank
of the first relevant item.  Questions without a single relevant candidate
carry no signal for either metric and are excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

Array = np.ndarray


@dataclass
class Candidate:
    answer_id: str
    score: float
    relevant: bool


@dataclass
class RankedResult:
    question_id: str
    candidates: list  # sorted by descending score

    @property
    def has_relevant(self) -> bool:
        return any(c.relevant for c in self.candidates)


def rank_candidates(question_id: str, candidates) -> RankedResult:
    """Stable descending-score sort; ties keep their input order."""
    items = list(candidates)
    if not items:
        raise ShapeError(f"question {question_id!r} has no candidates")
    order = sorted(range(len(items)), key=lambda i: -items[i].score)
    # python's sort is stable, so equal scores preserve input order
    return RankedResult(question_id, [items[i] for i in order])


def average_precision(ranked: RankedResult) -> float:
    """Mean of precision-at-rank over the relevant candidates.

    Returns the AP in (0, 1]; raises if the question has no relevant
    candidate (callers filter those out first).
    """
    if not ranked.has_relevant:
        raise ShapeError(f"question {ranked.question_id!r} has no relevant candidate")
    hits = 0
    total = 0.0
    for rank, cand in enumerate(ranked.candidates, start=1):
        if cand.relevant:
            hits += 1
            total += hits / rank
    return total / hits


def reciprocal_rank(ranked: RankedResult) -> float:
    if not ranked.has_relevant:
        raise ShapeError(f"question {ranked.question_id!r} has no relevant candidate")
    for rank, cand in enumerate(ranked.candidates, start=1):
        if cand.relevant:
            return 1.0 / rank
    raise AssertionError("unreachable: has_relevant checked above")


def includable(results) -> list:
    """Drop questions with zero relevant candidates."""
    return [r for r in results if r.has_relevant]


def map_score(results) -> float:
    """Mean average precision over the includable questions."""
    kept = includable(results)
    if not kept:
        raise ShapeError("no question has a relevant candidate")
    return float(np.mean([average_precision(r) for r in kept]))


def mrr_score(results) -> float:
    """Mean reciprocal rank over the includable questions."""
    kept = includable(results)
    if not kept:
        raise ShapeError("no question has a relevant candidate")
    return float(np.mean([reciprocal_rank(r) for r in kept]))


def rank_dataset(dataset, scores: Array) -> list:
    """Build one RankedResult per question from per-pair scores.

    scores[i] is the model score of dataset.pairs[i]; candidate ids are
    the row indices so results stay traceable to the input file.
    """
    if len(scores) != len(dataset):
        raise ShapeError(f"have {len(scores)} scores for {len(dataset)} pairs")
    results = []
    for qid in dataset.question_ids:
        cands = [Candidate(str(i), float(scores[i]), dataset.pairs[i].label == 1)
                 for i in dataset.group(qid)]
        results.append(rank_candidates(qid, cands))
    return results
