import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from ..errors import InvalidInput
from .graph import KIND_BY_ARITY, tuples
from .lexicon import synonym_match

LOG = logging.getLogger(__name__)

KINDS = tuple(KIND_BY_ARITY.values())


def _f1(precision, recall):
    if precision + recall <= 0:
        return 0.0
    return 2.0 * (precision * recall) / (precision + recall)


def _ratios(matched, candidate_total, reference_total):
    if candidate_total == 0 and reference_total == 0:
        return 1.0, 1.0
    if candidate_total == 0 or reference_total == 0:
        return 0.0, 0.0
    return matched / candidate_total, matched / reference_total


@dataclass
class SpipeScore:
    """Synonym-matched tuple precision / recall / F-score of one graph pair."""

    precision: float
    recall: float
    f1: float
    matched: int
    candidate_total: int
    reference_total: int
    matches: list = field(default_factory=list)
    breakdown: dict = field(default_factory=dict)

    @classmethod
    def from_counts(cls, matched, candidate_total, reference_total, **kw):
        p, r = _ratios(matched, candidate_total, reference_total)
        return cls(p, r, _f1(p, r), int(matched), int(candidate_total), int(reference_total), **kw)

    def as_row(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "matched": self.matched,
            "candidate_total": self.candidate_total,
            "reference_total": self.reference_total,
        }


def match_tuples(candidate, reference, lexicon=None):
    """Maximum one-to-one synonym matching between two tuple collections.

    Returns (candidate tuple, reference tuple) pairs. Inputs are sorted first so
    the chosen pairing does not depend on set iteration order.
    """
    cand = sorted(candidate)
    ref = sorted(reference)
    if not cand or not ref:
        return []

    rows, cols = [], []
    for i, a in enumerate(cand):
        for j, b in enumerate(ref):
            if synonym_match(a, b, lexicon):
                rows.append(i)
                cols.append(j)
    if not rows:
        return []

    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(cand), len(ref)))
    col_of_row = maximum_bipartite_matching(graph, perm_type="column")
    return [(cand[i], ref[j]) for i, j in enumerate(col_of_row) if j >= 0]


def spipe(candidate, reference, lexicon=None):
    """Score a candidate scene graph against a reference graph.

    Both graphs are reduced to deduplicated tuple sets; all three tuple
    classes are pooled into one matching. ``breakdown`` holds the same
    quantities restricted to each class.
    """
    cand, ref = tuples(candidate), tuples(reference)
    matches = match_tuples(cand, ref, lexicon)

    breakdown = {}
    for kind in KINDS:
        breakdown[kind] = SpipeScore.from_counts(
            sum(1 for a, _ in matches if a.kind == kind),
            sum(1 for t in cand if t.kind == kind),
            sum(1 for t in ref if t.kind == kind),
        )

    score = SpipeScore.from_counts(len(matches), len(cand), len(ref),
                                   matches=matches, breakdown=breakdown)
    LOG.debug("spipe matched=%d cand=%d ref=%d f1=%.4f",
              score.matched, score.candidate_total, score.reference_total, score.f1)
    return score


def corpus_scores(scores, average="macro"):
    """Aggregate per-item scores into one corpus triple.

    ``macro`` averages the per-item P/R/F; ``micro`` pools the counts first.
    """
    scores = list(scores)
    if average not in ("macro", "micro"):
        raise InvalidInput(f"average must be 'macro' or 'micro', got {average!r}")
    if not scores:
        return SpipeScore(0.0, 0.0, 0.0, 0, 0, 0)

    matched = sum(s.matched for s in scores)
    cand = sum(s.candidate_total for s in scores)
    ref = sum(s.reference_total for s in scores)
    if average == "micro":
        return SpipeScore.from_counts(matched, cand, ref)

    df = pd.DataFrame([s.as_row() for s in scores])
    return SpipeScore(
        precision=float(df["precision"].mean()),
        recall=float(df["recall"].mean()),
        f1=float(df["f1"].mean()),
        matched=matched,
        candidate_total=cand,
        reference_total=ref,
    )


def breakdown_frame(scores, average="macro"):
    """Per tuple class corpus scores as a DataFrame indexed by class."""
    scores = list(scores)
    rows = []
    for kind in KINDS:
        agg = corpus_scores([s.breakdown[kind] for s in scores if kind in s.breakdown], average)
        rows.append({"kind": kind, **agg.as_row()})
    return pd.DataFrame(rows).set_index("kind")
