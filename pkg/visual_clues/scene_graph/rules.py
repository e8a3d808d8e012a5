"""Rule-based mapping from dependency trees to scene graphs.

A reduced, deterministic rule set over Universal Dependencies labels:

- nouns (NOUN/PROPN) become objects; ``compound``/``flat`` dependents are
  merged into the head noun's name (``tennis racket``); ``fixed`` parts of
  multiword prepositions are never objects;
- ``amod`` adjectives give (noun, adjective) attributes;
- copular ``X is ADJ`` gives (X, adj);
- verbs with a subject and an object give (subject, verb, object) relations;
- prepositional attachments (``obl``/``nmod`` with a ``case`` child) give
  (noun, preposition phrase, noun) relations, also for copular
  ``X is on Y``;
- verbs with a subject but no object give (subject, verb-participle);
- ``conj`` spreads a role over coordinated nouns and adjectives.

Structures matching no rule produce nothing; no input raises.
"""

from .graph import SceneGraph

NOUN_TAGS = frozenset({"NOUN", "PROPN"})
ADJ_TAGS = frozenset({"ADJ", "VERB"})
MERGED_LABELS = ("compound", "flat")
SUBJECT_LABELS = ("nsubj",)
OBJECT_LABELS = ("obj", "iobj")
PREP_LABELS = ("obl", "nmod")
CLAUSE_LABELS = ("acl",)
VOWELS = "aeiou"


def participle(form, lemma):
    """Present participle of a verb (``sit`` -> ``sitting``)."""
    form, lemma = form.lower(), lemma.lower()
    if form.endswith("ing"):
        return form
    if lemma.endswith("ie"):
        return lemma[:-2] + "ying"
    if lemma.endswith("e") and not lemma.endswith("ee") and len(lemma) > 2:
        return lemma[:-1] + "ing"
    if (len(lemma) <= 4 and len(lemma) >= 3 and lemma[-1] not in VOWELS + "wxy"
            and lemma[-2] in VOWELS and lemma[-3] not in VOWELS):
        return lemma + lemma[-1] + "ing"
    return lemma + "ing"


class _Extractor:
    def __init__(self, tree):
        self.tree = tree
        self.objects = {}
        self.attributes = {}
        self.relations = {}

    # --- token helpers -------------------------------------------------
    def upos(self, i):
        return self.tree.token(i).upos

    def is_object(self, i):
        if self.upos(i) not in NOUN_TAGS:
            return False
        e = self.tree.head_of(i)
        if e is None:
            return True
        if e.base_label == "fixed":
            return False
        return not (e.base_label in MERGED_LABELS and self.upos(e.head) in NOUN_TAGS)

    def name(self, i):
        merged = sorted(self.tree.children(i, *MERGED_LABELS))
        if merged and merged[-1] > i:
            # flat names are headed by their first token; keep surface forms
            return " ".join(self.tree.token(j).form for j in sorted(merged + [i])).lower()
        words = [self.tree.token(j).form for j in merged] + [self.tree.token(i).lemma]
        return " ".join(words).lower()

    def conj_closure(self, i, tags):
        out = [i]
        for c in self.tree.children(i, "conj"):
            if self.upos(c) in tags:
                out.extend(self.conj_closure(c, tags))
        return out

    def nouns(self, ids):
        out = []
        for i in ids:
            if self.is_object(i):
                out.extend(j for j in self.conj_closure(i, NOUN_TAGS) if self.is_object(j))
        return out

    def prep_phrase(self, i):
        words = []
        for c in sorted(self.tree.children(i, "case")):
            parts = sorted([c] + self.tree.children(c, "fixed"))
            words.extend(self.tree.token(p).form.lower() for p in parts)
        return " ".join(words)

    def subjects(self, v):
        subj = self.nouns(self.tree.children(v, *SUBJECT_LABELS))
        if subj:
            return subj
        e = self.tree.head_of(v)
        if e is None:
            return []
        if e.base_label in CLAUSE_LABELS and self.is_object(e.head):
            return self.nouns([e.head])
        if e.base_label == "conj" and self.upos(e.head) == "VERB":
            return self.subjects(e.head)
        return []

    # --- emitters --------------------------------------------------------
    def add_object(self, i):
        self.objects.setdefault(self.name(i), i)

    def add_attribute(self, noun, value, *idx):
        key = (self.name(noun), value.lower())
        self.attributes.setdefault(key, (noun, *idx))

    def add_relation(self, subj, rel, obj, *idx):
        if subj == obj or not rel:
            return
        key = (self.name(subj), rel.lower(), self.name(obj))
        self.relations.setdefault(key, (subj, *idx, obj))

    # --- rules -----------------------------------------------------------
    def run(self):
        n = len(self.tree.tokens)
        for i in range(1, n + 1):
            if self.is_object(i):
                self.add_object(i)
        for i in range(1, n + 1):
            tag = self.upos(i)
            if self.is_object(i):
                self._noun_rules(i)
            if tag == "ADJ":
                self._copula_adjective(i)
            if tag == "VERB":
                self._verb_rules(i)
        return self

    def _noun_rules(self, i):
        for a in self.tree.children(i, "amod"):
            if self.upos(a) in ADJ_TAGS:
                for adj in self.conj_closure(a, ADJ_TAGS):
                    self.add_attribute(i, self.tree.token(adj).form, adj)
        for m in self.nouns(self.tree.children(i, "nmod")):
            self.add_relation(i, self.prep_phrase(m), m)
        # copular "X is on Y": Y carries the case marker and X is its subject
        if self.tree.children(i, "cop"):
            prep = self.prep_phrase(i)
            if prep:
                for s in self.nouns(self.tree.children(i, *SUBJECT_LABELS)):
                    self.add_relation(s, prep, i)

    def _copula_adjective(self, i):
        if not self.tree.children(i, "cop"):
            return
        for s in self.nouns(self.tree.children(i, *SUBJECT_LABELS)):
            for adj in self.conj_closure(i, {"ADJ"}):
                self.add_attribute(s, self.tree.token(adj).form, adj)

    def _verb_rules(self, v):
        subjects = self.subjects(v)
        if not subjects:
            return
        tok = self.tree.token(v)
        objects = self.nouns(self.tree.children(v, *OBJECT_LABELS))
        for s in subjects:
            for o in objects:
                self.add_relation(s, tok.lemma, o, v)
            for m in self.nouns(self.tree.children(v, *PREP_LABELS)):
                self.add_relation(s, self.prep_phrase(m), m)
            if not objects:
                self.add_attribute(s, participle(tok.form, tok.lemma), v)

    def graph(self):
        provenance = {
            "objects": [[i] for i in self.objects.values()],
            "attributes": [list(ix) for ix in self.attributes.values()],
            "relations": [list(ix) for ix in self.relations.values()],
        }
        return SceneGraph(
            objects=list(self.objects),
            attributes=list(self.attributes),
            relations=list(self.relations),
            provenance=provenance,
        )


def graph_from_dependencies(tree):
    """Scene graph of one dependency tree (deterministic, never raises on valid trees)."""
    return _Extractor(tree).run().graph()


def graph_from_parses(trees):
    """Merge the graphs of several sentences (one paragraph) into one graph."""
    objects, attributes, relations = {}, {}, {}
    for tree in trees:
        g = graph_from_dependencies(tree)
        objects.update(dict.fromkeys(g.objects))
        attributes.update(dict.fromkeys(g.attributes))
        relations.update(dict.fromkeys(g.relations))
    return SceneGraph(objects=list(objects), attributes=list(attributes), relations=list(relations))
