"""Key-sentence retrieval by IDF-weighted token alignment.

A query keyword aligns with a manual sentence through the best cosine
similarity between their word vectors; sentence scores sum the keywords'
idf-weighted alignments. Sentences are selected greedily against the still
uncovered keywords until every keyword is covered, a selection would cover
nothing new, or the sentence budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .corpus import ManualEntry
from .errors import EmptyManual
from .textproc import DEFAULT_STOPWORDS, IdfTable, WordVectorTable, content_keywords, tokenize


@dataclass(frozen=True)
class RetrievalConfig:
    max_sentences: int = 7
    coverage_threshold: float = 0.95
    min_keyword_idf: float = 0.0

    def __post_init__(self):
        if self.max_sentences < 1:
            raise ValueError("max_sentences must be >= 1")
        if not 0.0 < self.coverage_threshold <= 1.0:
            raise ValueError("coverage_threshold must be in (0, 1]")


@dataclass(frozen=True)
class RetrievedSentence:
    text: str
    index: int
    score: float


@dataclass
class RetrievalResult:
    """Selected sentences plus the keyword-coverage record."""

    sentences: list[RetrievedSentence] = field(default_factory=list)
    covered_keywords: set[str] = field(default_factory=set)
    uncovered_keywords: set[str] = field(default_factory=set)
    query_keywords: set[str] = field(default_factory=set)

    def sentence_texts(self) -> list[str]:
        return [s.text for s in self.sentences]


def _unit_rows(tokens: Iterable[str], vectors: WordVectorTable) -> np.ndarray:
    rows = np.array([vectors.get(t) for t in tokens], dtype=float)
    if rows.size == 0:
        return rows.reshape(0, vectors.dimension)
    norms = np.linalg.norm(rows, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return rows / norms


def _best_alignments(
    keywords: list[str], sentence_tokens: list[str], vectors: WordVectorTable
) -> np.ndarray:
    """Best cosine against the sentence for each keyword (unclamped)."""
    if not keywords or not sentence_tokens:
        return np.zeros(len(keywords))
    q = _unit_rows(keywords, vectors)
    s = _unit_rows(sentence_tokens, vectors)
    return (q @ s.T).max(axis=1)


def alignment_score(
    keywords: Iterable[str],
    sentence_tokens: list[str],
    vectors: WordVectorTable,
    idf: IdfTable,
) -> float:
    """Sum over keywords of idf(t) times its best within-sentence cosine.

    Negative per-keyword maxima clamp to zero, so an unrelated sentence never
    scores below the empty sentence.
    """
    ordered = sorted(set(keywords))
    best = np.maximum(_best_alignments(ordered, sentence_tokens, vectors), 0.0)
    weights = np.array([idf.value(t) for t in ordered])
    return float((weights * best).sum())


class KeySentenceRetriever:
    """Binds vector, idf and stopword tables to the retrieval procedure."""

    def __init__(
        self,
        vectors: WordVectorTable,
        idf: IdfTable,
        stopwords: frozenset[str] | set[str] = DEFAULT_STOPWORDS,
        config: RetrievalConfig = RetrievalConfig(),
    ):
        self.vectors = vectors
        self.idf = idf
        self.stopwords = frozenset(stopwords)
        self.config = config

    def query_keywords(self, description: str) -> set[str]:
        return content_keywords(
            tokenize(description), self.idf, self.stopwords, self.config.min_keyword_idf
        )

    def retrieve(self, description: str, manual_entry: ManualEntry) -> RetrievalResult:
        """Greedy iterative selection of manual sentences.

        Each step scores every unselected sentence against the currently
        uncovered keywords only and takes the argmax (ties to the lowest
        sentence index). A keyword counts as covered once its best cosine
        within a selected sentence reaches the coverage threshold. Selection
        stops when all keywords are covered, the argmax sentence would cover
        nothing new (it is not taken), or ``max_sentences`` is reached.
        """
        if not manual_entry.sentences:
            raise EmptyManual(f"manual entry {manual_entry.heading} has no sentences")

        keywords = self.query_keywords(description)
        sentence_tokens = [tokenize(s) for s in manual_entry.sentences]

        result = RetrievalResult(query_keywords=set(keywords), uncovered_keywords=set(keywords))
        remaining = list(range(len(sentence_tokens)))

        while (
            result.uncovered_keywords
            and remaining
            and len(result.sentences) < self.config.max_sentences
        ):
            uncovered = sorted(result.uncovered_keywords)
            best_index = -1
            best_score = -1.0
            for index in remaining:
                score = alignment_score(uncovered, sentence_tokens[index], self.vectors, self.idf)
                if score > best_score:
                    best_index, best_score = index, score

            alignments = _best_alignments(uncovered, sentence_tokens[best_index], self.vectors)
            newly_covered = {
                t
                for t, a in zip(uncovered, alignments)
                if a >= self.config.coverage_threshold
            }
            if not newly_covered:
                break

            result.sentences.append(
                RetrievedSentence(
                    text=manual_entry.sentences[best_index], index=best_index, score=best_score
                )
            )
            remaining.remove(best_index)
            result.covered_keywords |= newly_covered
            result.uncovered_keywords -= newly_covered

        return result
