"""Independent brute-force oracles.

These deliberately avoid the package's numpy code paths: similarity and
scoring run as plain-python double loops, and retrieval is found by
enumerating every ordered sentence subset and keeping the unique one
consistent with the selection rules.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass


def oracle_cosine(u: list[float], v: list[float]) -> float:
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def oracle_best_alignment(
    keyword: str, sentence: list[str], vectors: dict[str, list[float]], dim: int
) -> float:
    zero = [0.0] * dim
    best = 0.0 if not sentence else -1.0
    for token in sentence:
        sim = oracle_cosine(vectors.get(keyword, zero), vectors.get(token, zero))
        best = max(best, sim)
    return best


def oracle_alignment_score(
    keywords: set[str],
    sentence: list[str],
    vectors: dict[str, list[float]],
    idf: dict[str, float],
    default_idf: float,
    dim: int,
) -> float:
    total = 0.0
    for keyword in sorted(keywords):
        best = max(0.0, oracle_best_alignment(keyword, sentence, vectors, dim))
        total += idf.get(keyword, default_idf) * best
    return total


@dataclass
class OracleRetrieval:
    indices: list[int]
    scores: list[float]
    covered: set[str]
    uncovered: set[str]


def _argmax_lowest_index(scores: dict[int, float]) -> int:
    best_index = min(scores)
    best_score = scores[best_index]
    for index in sorted(scores):
        if scores[index] > best_score:
            best_index, best_score = index, scores[index]
    return best_index


def oracle_retrieve(
    keywords: set[str],
    sentences: list[list[str]],
    vectors: dict[str, list[float]],
    idf: dict[str, float],
    default_idf: float,
    dim: int,
    max_sentences: int,
    coverage_threshold: float,
) -> OracleRetrieval:
    """Enumerate all ordered sentence subsets; exactly one obeys the rules."""

    def step_scores(uncovered: set[str], remaining: set[int]) -> dict[int, float]:
        return {
            i: oracle_alignment_score(uncovered, sentences[i], vectors, idf, default_idf, dim)
            for i in remaining
        }

    def newly_covered(uncovered: set[str], index: int) -> set[str]:
        return {
            t
            for t in uncovered
            if oracle_best_alignment(t, sentences[index], vectors, dim) >= coverage_threshold
        }

    def check(sequence: tuple[int, ...]) -> OracleRetrieval | None:
        uncovered = set(keywords)
        remaining = set(range(len(sentences)))
        scores: list[float] = []
        for index in sequence:
            if not uncovered or not remaining:
                return None
            step = step_scores(uncovered, remaining)
            if _argmax_lowest_index(step) != index:
                return None
            gained = newly_covered(uncovered, index)
            if not gained:
                return None
            scores.append(step[index])
            uncovered -= gained
            remaining.discard(index)
        # Termination must be justified at the end of the sequence.
        if uncovered and remaining and len(sequence) < max_sentences:
            step = step_scores(uncovered, remaining)
            if newly_covered(uncovered, _argmax_lowest_index(step)):
                return None
        return OracleRetrieval(
            indices=list(sequence),
            scores=scores,
            covered=set(keywords) - uncovered,
            uncovered=uncovered,
        )

    valid: list[OracleRetrieval] = []
    limit = min(max_sentences, len(sentences))
    for size in range(limit + 1):
        for sequence in itertools.permutations(range(len(sentences)), size):
            outcome = check(sequence)
            if outcome is not None:
                valid.append(outcome)
    assert len(valid) == 1, f"expected exactly one rule-consistent sequence, got {len(valid)}"
    return valid[0]
