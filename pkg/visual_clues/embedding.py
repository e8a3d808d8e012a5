"""Unit-norm embeddings and the inner-product similarity used everywhere.

All similarity thresholds (``beta``, ``gamma``) are interpreted on cosine
scale, which only holds because every vector is normalized at the gateway
boundary.
"""

import numpy as np

from .errors import InvalidInput

NORM_TOLERANCE = 1e-6


class UnitEmbedding:
    """Immutable fixed-dimension vector with Euclidean norm 1.

    Use :meth:`from_raw` for backend output (normalizes); the constructor only
    validates, so hand-built vectors keep their exact coordinates.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        v = np.array(values, dtype=np.float64).reshape(-1)
        if v.size == 0:
            raise InvalidInput("embedding must have at least one dimension")
        if not np.all(np.isfinite(v)):
            raise InvalidInput("embedding contains non-finite values")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise InvalidInput(f"embedding norm is {norm:.8f}, expected 1")
        v.setflags(write=False)
        self._values = v

    @classmethod
    def from_raw(cls, values):
        v = np.asarray(values, dtype=np.float64).reshape(-1)
        norm = float(np.linalg.norm(v))
        if not np.isfinite(norm) or norm <= 0.0:
            raise InvalidInput("cannot normalize a zero or non-finite vector")
        return cls(v / norm)

    @property
    def values(self):
        return self._values

    @property
    def dim(self):
        return int(self._values.shape[0])

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        return isinstance(other, UnitEmbedding) and np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def __repr__(self):
        head = ", ".join(f"{x:.4f}" for x in self._values[:3])
        return f"UnitEmbedding(dim={self.dim}, [{head}, ...])"


def similarity(a, b):
    """Inner product of two unit embeddings, in [-1, 1] up to rounding."""
    if a.dim != b.dim:
        raise InvalidInput(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.dot(a.values, b.values))


def stack(embeddings, dim=None):
    """Stack embeddings into an (n, d) matrix, rejecting mixed dimensions."""
    embeddings = list(embeddings)
    if not embeddings:
        return np.zeros((0, dim or 0))
    d = embeddings[0].dim if dim is None else int(dim)
    for e in embeddings:
        if e.dim != d:
            raise InvalidInput(f"dimension mismatch: {e.dim} vs {d}")
    return np.vstack([e.values for e in embeddings])


def scores_against(query, matrix):
    """Similarities of ``query`` to every row of an (n, d) embedding matrix."""
    matrix = np.asarray(matrix)
    if matrix.size and matrix.shape[1] != query.dim:
        raise InvalidInput(f"dimension mismatch: {query.dim} vs {matrix.shape[1]}")
    return matrix @ query.values if matrix.size else np.zeros(0)
