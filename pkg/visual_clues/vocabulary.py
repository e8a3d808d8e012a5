import logging
from pathlib import Path

import numpy as np

from .embedding import UnitEmbedding, scores_against, stack
from .errors import InvalidInput, ParseError
from .utils import normalize_text

LOG = logging.getLogger(__name__)

CACHE_HEADER = "#dim="


def read_entries(path):
    """Read a vocabulary file: UTF-8, one entry per line, ``#`` comments ignored."""
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            entries.append(line)
    return entries


class Vocabulary:
    """Ordered entries with one cached unit embedding each.

    Entries are unique after case-folding; the order is the tie-break order of
    every selection in the package (lower index wins).
    """

    def __init__(self, entries, embeddings):
        entries = [str(e).strip() for e in entries]
        if not entries:
            raise InvalidInput("vocabulary must not be empty")
        if len(entries) != len(embeddings):
            raise InvalidInput(f"{len(entries)} entries but {len(embeddings)} embeddings")
        seen = {}
        for i, e in enumerate(entries):
            key = normalize_text(e)
            if not key:
                raise InvalidInput(f"vocabulary entry {i} is blank")
            if key in seen:
                raise InvalidInput(f"duplicate vocabulary entry {e!r} (also at index {seen[key]})")
            seen[key] = i
        self.entries = entries
        self.embeddings = list(embeddings)
        self.matrix = stack(self.embeddings)
        self.matrix.setflags(write=False)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def dim(self):
        return int(self.matrix.shape[1])

    def scores(self, query):
        """Similarity of ``query`` to every entry, in entry order."""
        return scores_against(query, self.matrix)

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------
    @classmethod
    def build(cls, entries, gateway, batch_size=256):
        entries = list(entries)
        embs = []
        for start in range(0, len(entries), batch_size):
            embs.extend(gateway.embed_texts(entries[start:start + batch_size]))
        return cls(entries, embs)

    @classmethod
    def load(cls, path, gateway, cache_path=None):
        """Load entries from ``path``; reuse or refresh the embedding cache.

        The cache is rebuilt when its entries or dimension disagree with the
        vocabulary file and the active backend.
        """
        entries = read_entries(path)
        if cache_path is not None and Path(cache_path).is_file():
            try:
                cached = cls.read_cache(cache_path)
            except ParseError as exc:
                LOG.warning("ignoring unreadable embedding cache %s: %s", cache_path, exc)
            else:
                if cached.entries == entries and cached.dim == gateway.dim:
                    LOG.debug("vocabulary %s: %d entries from cache", path, len(cached))
                    return cached
                LOG.info("embedding cache %s is stale, rebuilding", cache_path)
        vocab = cls.build(entries, gateway)
        if cache_path is not None:
            vocab.write_cache(cache_path)
        return vocab

    # ------------------------------------------------------------------
    # Cache file: "#dim=<d>" header, then "entry<TAB>v1 v2 ... vd" per line.
    # ------------------------------------------------------------------
    def write_cache(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{CACHE_HEADER}{self.dim}\n")
            for entry, row in zip(self.entries, self.matrix):
                fh.write(entry + "\t" + " ".join(repr(float(x)) for x in row) + "\n")
        return path

    @classmethod
    def read_cache(cls, path):
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or not lines[0].startswith(CACHE_HEADER):
            raise ParseError("missing dimension header", line=1)
        try:
            dim = int(lines[0][len(CACHE_HEADER):])
        except ValueError as exc:
            raise ParseError("bad dimension header", line=1) from exc
        entries, embs = [], []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            entry, _, vec = line.partition("\t")
            try:
                values = np.array([float(x) for x in vec.split()])
            except ValueError as exc:
                raise ParseError("non-numeric vector component", line=lineno) from exc
            if values.shape[0] != dim:
                raise ParseError(f"vector has {values.shape[0]} components, header says {dim}", line=lineno)
            try:
                embs.append(UnitEmbedding(values))
            except InvalidInput as exc:
                raise ParseError(str(exc), line=lineno) from exc
            entries.append(entry)
        return cls(entries, embs)
