import numpy as np
import pytest

from visual_clues.errors import InvalidInput
from visual_clues.reporting import format_spipe_table, spipe_report
from visual_clues.scene_graph import (
    SceneGraph,
    SemanticTuple,
    SynonymLexicon,
    breakdown_frame,
    corpus_scores,
    match_tuples,
    spipe,
    synonym_match,
    tuples,
)

from conftest import FIXTURES

NOUNS = ["dog", "dogs", "cat", "couch", "sofa", "table", "tables", "man"]
ADJS = ["red", "blue", "sitting"]
RELS = ["on", "under", "next to"]


@pytest.fixture(scope="module")
def lexicon():
    return SynonymLexicon.load(FIXTURES / "lexicon.tsv")


def random_graph(rng, max_items=6):
    n_obj = int(rng.integers(0, 3))
    n_attr = int(rng.integers(0, 3))
    n_rel = int(rng.integers(0, 3))
    return SceneGraph(
        objects=[str(rng.choice(NOUNS)) for _ in range(n_obj)],
        attributes=[(str(rng.choice(NOUNS)), str(rng.choice(ADJS))) for _ in range(n_attr)],
        relations=[(str(rng.choice(NOUNS)), str(rng.choice(RELS)), str(rng.choice(NOUNS)))
                   for _ in range(n_rel)],
    )


def brute_force_matched(cand, ref, lexicon):
    """Largest one-to-one matching by exhaustive search."""
    cand, ref = sorted(cand), sorted(ref)

    def best(i, used):
        if i == len(cand):
            return 0
        out = best(i + 1, used)
        for j, b in enumerate(ref):
            if j not in used and synonym_match(cand[i], b, lexicon):
                out = max(out, 1 + best(i + 1, used | {j}))
        return out

    return best(0, frozenset())


def small_pair(rng):
    while True:
        a, b = random_graph(rng), random_graph(rng)
        if len(tuples(a)) <= 6 and len(tuples(b)) <= 6:
            return a, b


# ----------------------------------------------------------------------
# Examples
# ----------------------------------------------------------------------
def test_identity_scores_one(lexicon):
    g = SceneGraph(objects=["man", "snowboard"], attributes=[("snowboard", "blue")],
                   relations=[("man", "in front of", "snowboard")])
    s = spipe(g, g, lexicon)
    assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)
    assert s.matched == 4


def test_disjoint_scores_zero(lexicon):
    s = spipe(SceneGraph(objects=["dog"]), SceneGraph(objects=["cat"]), lexicon)
    assert (s.precision, s.recall, s.f1, s.matched) == (0.0, 0.0, 0.0, 0)


def test_empty_graphs():
    both = spipe(SceneGraph(), SceneGraph())
    assert (both.precision, both.recall, both.f1) == (1.0, 1.0, 1.0)
    one = spipe(SceneGraph(objects=["dog"]), SceneGraph())
    assert (one.precision, one.recall, one.f1) == (0.0, 0.0, 0.0)
    other = spipe(SceneGraph(), SceneGraph(objects=["dog"]))
    assert other.f1 == 0.0


def test_synonyms_and_plurals_count(lexicon):
    cand = SceneGraph(objects=["dogs", "couch"], attributes=[("couch", "red")])
    ref = SceneGraph(objects=["dog", "sofa"], attributes=[("sofa", "red")])
    s = spipe(cand, ref, lexicon)
    assert s.matched == 3 and s.f1 == 1.0
    assert spipe(cand, ref).matched == 1


def test_partial_overlap_values(lexicon):
    cand = SceneGraph(objects=["dog", "cat", "table"])
    ref = SceneGraph(objects=["dog", "man"])
    s = spipe(cand, ref, lexicon)
    assert s.precision == pytest.approx(1 / 3)
    assert s.recall == pytest.approx(1 / 2)
    assert s.f1 == pytest.approx(2 * (1 / 3) * (1 / 2) / (1 / 3 + 1 / 2))


def test_matching_is_one_to_one(lexicon):
    # dog and dogs both match the single reference "dog"; only one may count.
    cand = [SemanticTuple.of("dog"), SemanticTuple.of("dogs")]
    ref = [SemanticTuple.of("dog")]
    assert len(match_tuples(cand, ref, lexicon)) == 1


def test_breakdown_by_kind(lexicon):
    cand = SceneGraph(objects=["man"], attributes=[("man", "sitting")], relations=[("man", "on", "table")])
    ref = SceneGraph(objects=["man", "table"], relations=[("man", "under", "table")])
    s = spipe(cand, ref, lexicon)
    assert s.breakdown["object"].matched == 2
    assert s.breakdown["attribute"].reference_total == 0
    assert s.breakdown["attribute"].f1 == 0.0
    assert s.breakdown["relation"].matched == 0
    assert sum(b.matched for b in s.breakdown.values()) == s.matched


# ----------------------------------------------------------------------
# Properties
# ----------------------------------------------------------------------
def test_matching_is_maximum(lexicon):
    rng = np.random.default_rng(2024)
    for _ in range(500):
        a, b = small_pair(rng)
        expected = brute_force_matched(tuples(a), tuples(b), lexicon)
        assert spipe(a, b, lexicon).matched == expected


def test_symmetry(lexicon):
    rng = np.random.default_rng(11)
    for _ in range(200):
        a, b = random_graph(rng), random_graph(rng)
        ab, ba = spipe(a, b, lexicon), spipe(b, a, lexicon)
        assert ab.matched == ba.matched
        assert ab.precision == ba.recall and ab.recall == ba.precision
        assert ab.f1 == ba.f1


def test_adding_reference_tuples_never_lowers_matches(lexicon):
    rng = np.random.default_rng(3)
    for _ in range(200):
        a, b = random_graph(rng), random_graph(rng)
        bigger = SceneGraph(objects=b.objects + [str(rng.choice(NOUNS))],
                            attributes=list(b.attributes), relations=list(b.relations))
        assert spipe(a, bigger, lexicon).matched >= spipe(a, b, lexicon).matched


def test_duplicates_do_not_change_score(lexicon):
    rng = np.random.default_rng(8)
    for _ in range(100):
        a, b = random_graph(rng), random_graph(rng)
        doubled = SceneGraph(objects=a.objects * 2, attributes=a.attributes * 2, relations=a.relations * 2)
        assert spipe(doubled, b, lexicon).as_row() == spipe(a, b, lexicon).as_row()


def test_scores_are_bounded(lexicon):
    rng = np.random.default_rng(21)
    for _ in range(200):
        s = spipe(*small_pair(rng), lexicon)
        assert 0.0 <= s.precision <= 1.0 and 0.0 <= s.recall <= 1.0 and 0.0 <= s.f1 <= 1.0
        assert min(s.precision, s.recall) - 1e-12 <= s.f1 <= max(s.precision, s.recall) + 1e-12


# ----------------------------------------------------------------------
# Corpus aggregation and reporting
# ----------------------------------------------------------------------
def test_macro_and_micro(lexicon):
    perfect = spipe(SceneGraph(objects=["dog"]), SceneGraph(objects=["dog"]), lexicon)
    half = spipe(SceneGraph(objects=["dog", "cat", "man", "table"]),
                 SceneGraph(objects=["dog", "sofa", "couch", "table"]), lexicon)
    macro = corpus_scores([perfect, half], "macro")
    assert macro.f1 == pytest.approx((1.0 + half.f1) / 2)
    micro = corpus_scores([perfect, half], "micro")
    assert micro.matched == perfect.matched + half.matched
    assert micro.precision == pytest.approx(micro.matched / (1 + 4))
    with pytest.raises(InvalidInput):
        corpus_scores([perfect], "weighted")
    assert corpus_scores([]).f1 == 0.0


def test_breakdown_frame_and_report(lexicon):
    g = SceneGraph(objects=["man"], attributes=[("man", "sitting")])
    scores = [spipe(g, g, lexicon), spipe(g, SceneGraph(objects=["man"]), lexicon)]
    frame = breakdown_frame(scores)
    assert list(frame.index) == ["object", "attribute", "relation"]
    assert frame.loc["object", "f1"] == pytest.approx(1.0)
    report = spipe_report(list(zip(["a", "b"], scores)), corpus_scores(scores), frame, "macro")
    assert report["average"] == "macro"
    assert set(report["by_kind"]) == {"object", "attribute", "relation"}
    assert [i["id"] for i in report["items"]] == ["a", "b"]


def test_format_spipe_table():
    s = corpus_scores([spipe(SceneGraph(objects=["dog", "cat"]), SceneGraph(objects=["dog"]))])
    table = format_spipe_table([("ours", s)]).splitlines()
    assert table[0].split() == ["Method", "F-score", "Precision", "Recall"]
    assert table[1].split() == ["ours", "66.7", "50.0", "100.0"]
