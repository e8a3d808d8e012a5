"""Synonym lexicon and the tuple synonym match.

Two components match when their lemmatized forms are equal or when they share
a synset id. The lexicon is a user-supplied tab-separated file
(``word<TAB>synset1,synset2``); the lemmatizer is a small suffix table.
"""

from ..errors import ParseError
from ..utils import normalize_text

# (suffix, replacement, minimum word length), first match wins.
SUFFIX_RULES = (
    ("ies", "y", 5),
    ("sses", "ss", 5),
    ("ches", "ch", 5),
    ("shes", "sh", 5),
    ("xes", "x", 4),
    ("zes", "z", 4),
    ("ing", "", 6),
    ("ed", "", 5),
    ("s", "", 4),
)
_KEEP_S = ("ss", "us", "is")
_VOWELS = "aeiou"


def lemmatize(word):
    """Strip one inflectional suffix (plural -s/-es/-ies, -ing, -ed)."""
    w = normalize_text(word)
    for suffix, repl, min_len in SUFFIX_RULES:
        if len(w) < min_len or not w.endswith(suffix):
            continue
        if suffix == "s" and w.endswith(_KEEP_S):
            return w
        stem = w[: -len(suffix)] + repl
        if suffix in ("ing", "ed") and not any(c in _VOWELS for c in stem):
            return w  # string, bed
        if suffix in ("ing", "ed") and len(stem) >= 3 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS + "ls":
            stem = stem[:-1]  # sitting -> sit, stopped -> stop
        return stem
    return w


def lemmatize_phrase(text, head="last"):
    """Lemmatize only the head word of a multi-word component.

    Noun phrases are headed by their last word (``neon signs`` ->
    ``neon sign``); relation phrases by their first (``riding on``).
    """
    words = normalize_text(text).split(" ")
    if not words or not words[0]:
        return ""
    k = -1 if head == "last" else 0
    words[k] = lemmatize(words[k])
    return " ".join(words)


class SynonymLexicon:
    """Immutable word -> synset-id map; lookups are case-insensitive."""

    def __init__(self, synsets=None):
        self._synsets = {normalize_text(w): frozenset(ids) for w, ids in (synsets or {}).items()}

    def __len__(self):
        return len(self._synsets)

    def synsets(self, word):
        return self._synsets.get(normalize_text(word), frozenset())

    @classmethod
    def parse(cls, text):
        synsets = {}
        for lineno, raw in enumerate(str(text).splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            word, sep, ids = line.partition("\t")
            if not sep or not word.strip():
                raise ParseError("expected 'word<TAB>synset1,synset2'", line=lineno)
            ids = {s.strip() for s in ids.split(",") if s.strip()}
            if not ids:
                raise ParseError(f"no synset ids for {word.strip()!r}", line=lineno)
            key = normalize_text(word)
            synsets[key] = synsets.get(key, frozenset()) | ids
        return cls(synsets)

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())


def components_match(a, b, lexicon, head="last"):
    if a == b:
        return True
    la, lb = lemmatize_phrase(a, head), lemmatize_phrase(b, head)
    if la == lb:
        return True
    if lexicon is None:
        return False
    return bool((lexicon.synsets(a) | lexicon.synsets(la)) & (lexicon.synsets(b) | lexicon.synsets(lb)))


def synonym_match(a, b, lexicon=None):
    """True when tuples have equal arity and every component pair matches."""
    if a.arity != b.arity:
        return False
    for pos, (x, y) in enumerate(zip(a.values, b.values)):
        head = "first" if a.arity == 3 and pos == 1 else "last"
        if not components_match(x, y, lexicon, head):
            return False
    return True
