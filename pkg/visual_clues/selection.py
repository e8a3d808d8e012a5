"""Candidate selection and sentence-level hallucination filtering.

The best of the K paragraphs is the one whose text embedding is closest to
the image embedding; its sentences are then re-scored one by one and those at
or below ``gamma`` are dropped.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput

WITH_CAPTION = "with_caption"
WITHOUT_CAPTION = "without_caption"

# Split after . ! ? when followed by whitespace; no abbreviation handling.
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+")


@dataclass
class CandidateParagraph:
    text: str
    similarity: float
    source: str = WITH_CAPTION
    sentences: list = field(default_factory=list)

    def to_dict(self):
        return {
            "text": self.text,
            "similarity": self.similarity,
            "source": self.source,
            "sentences": [[s, v] for s, v in self.sentences],
        }


def split_sentences(text):
    """Split after '.', '!' or '?' followed by whitespace or end of text."""
    parts = _SENTENCE_END.split(str(text).strip())
    return [p.strip() for p in parts if p.strip()]


def best_index(scores):
    """Index of the maximum score; the lowest index wins ties."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise InvalidInput("no candidates to select from")
    return int(np.argmax(scores))


def keep_above(scores, gamma):
    """Indices with score > gamma, in order; falls back to the single best index."""
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        raise InvalidInput("no sentences to filter")
    kept = [int(i) for i in np.flatnonzero(scores > gamma)]
    return kept or [best_index(scores)]


class CandidateJudge:
    """Scores candidate text against an image embedding through the gateway."""

    def __init__(self, gateway, gamma=0.2):
        if not -1.0 <= gamma <= 1.0:
            raise InvalidInput(f"gamma must lie in [-1, 1], got {gamma}")
        self.gateway = gateway
        self.gamma = float(gamma)

    def _scores(self, image_emb, texts):
        embs = self.gateway.embed_texts(texts)
        return [self.gateway.similarity(image_emb, e) for e in embs]

    def score_candidates(self, image_emb, candidates, sources=None):
        if not candidates:
            raise InvalidInput("candidate list is empty")
        sources = sources or [WITH_CAPTION] * len(candidates)
        scores = self._scores(image_emb, candidates)
        return [CandidateParagraph(t, s, src) for t, s, src in zip(candidates, scores, sources)]

    def select_best(self, image_emb, candidates, sources=None):
        """Return ``(index, CandidateParagraph)`` of the best-aligned candidate."""
        scored = self.score_candidates(image_emb, candidates, sources)
        i = best_index([c.similarity for c in scored])
        return i, scored[i]

    def score_sentences(self, image_emb, sentences):
        if not sentences:
            raise InvalidInput("sentence list is empty")
        return list(zip(sentences, self._scores(image_emb, sentences)))

    def filter_sentences(self, image_emb, sentences, gamma=None):
        """Sentences scoring above ``gamma`` (order kept); never empty."""
        gamma = self.gamma if gamma is None else float(gamma)
        if not -1.0 <= gamma <= 1.0:
            raise InvalidInput(f"gamma must lie in [-1, 1], got {gamma}")
        scored = self.score_sentences(image_emb, sentences)
        return [scored[i][0] for i in keep_above([s for _, s in scored], gamma)]

    def refine(self, image_emb, paragraph):
        """Split and score ``paragraph`` in place; return the filtered sentences."""
        sentences = split_sentences(paragraph.text)
        if not sentences:
            raise InvalidInput("selected paragraph is empty")
        paragraph.sentences = self.score_sentences(image_emb, sentences)
        keep = keep_above([s for _, s in paragraph.sentences], self.gamma)
        return [paragraph.sentences[i][0] for i in keep]
