"""Reader for CoNLL-U style dependency parses (10 tab-separated columns).

Columns used: ID, FORM, LEMMA, UPOS, HEAD, DEPREL. Multiword-token ranges
(``1-2``) and empty nodes (``1.1``) are skipped; ``#`` lines are comments.
"""

from dataclasses import dataclass, field

from ..errors import ParseError

N_COLUMNS = 10


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    upos: str


@dataclass(frozen=True)
class Edge:
    head: int
    dependent: int
    label: str

    @property
    def base_label(self):
        """Universal relation without subtype (``nsubj:pass`` -> ``nsubj``)."""
        return self.label.split(":", 1)[0]


@dataclass
class DependencyTree:
    """Tokens (1-based ids, index 0 of ``tokens`` is token 1) and head edges.

    The root token has head 0 and no edge.
    """

    tokens: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    first_line: int = None

    def token(self, i):
        return self.tokens[i - 1]

    def children(self, head, *labels):
        wanted = set(labels)
        return [e.dependent for e in self.edges
                if e.head == head and (not wanted or e.base_label in wanted or e.label in wanted)]

    def head_of(self, dependent):
        for e in self.edges:
            if e.dependent == dependent:
                return e
        return None

    @property
    def text(self):
        return " ".join(t.form for t in self.tokens)


def _validate(tree, heads):
    roots = [i for i, h in heads.items() if h == 0]
    if len(roots) != 1:
        raise ParseError(f"sentence has {len(roots)} roots, expected 1", line=tree.first_line)
    for start in heads:
        seen = set()
        node = start
        while node != 0:
            if node in seen:
                raise ParseError(f"cyclic heads through token {start}", line=tree.first_line)
            seen.add(node)
            node = heads[node]


def _finish(rows, first_line):
    tree = DependencyTree(first_line=first_line)
    heads = {}
    for lineno, cols in rows:
        try:
            idx, head = int(cols[0]), int(cols[6])
        except ValueError as exc:
            raise ParseError("ID and HEAD must be integers", line=lineno) from exc
        if idx != len(tree.tokens) + 1:
            raise ParseError(f"token id {idx} out of sequence", line=lineno)
        form = cols[1]
        lemma = cols[2] if cols[2] not in ("", "_") else form
        tree.tokens.append(Token(form=form, lemma=lemma, upos=cols[3].upper()))
        heads[idx] = head
        if head != 0:
            tree.edges.append(Edge(head=head, dependent=idx, label=cols[7].lower()))
    for lineno, cols in rows:
        if int(cols[6]) > len(tree.tokens) or int(cols[6]) < 0:
            raise ParseError(f"head {cols[6]} points outside the sentence", line=lineno)
    _validate(tree, heads)
    return tree


def ingest_dependencies(text):
    """Parse CoNLL-U text into one :class:`DependencyTree` per sentence."""
    trees = []
    rows, first = [], None
    for lineno, raw in enumerate(str(text).splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if rows:
                trees.append(_finish(rows, first))
            rows, first = [], None
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != N_COLUMNS:
            raise ParseError(f"expected {N_COLUMNS} tab-separated columns, got {len(cols)}", line=lineno)
        if "-" in cols[0] or "." in cols[0]:
            continue
        if first is None:
            first = lineno
        rows.append((lineno, cols))
    if rows:
        trees.append(_finish(rows, first))
    return trees


def read_conllu(path):
    with open(path, encoding="utf-8") as fh:
        return ingest_dependencies(fh.read())
