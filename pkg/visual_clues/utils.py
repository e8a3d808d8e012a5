import hashlib
import re

import numpy as np


_WS = re.compile(r"\s+")


def normalize_text(s):
    """Lowercase and collapse internal whitespace; used for every lookup key."""
    return _WS.sub(" ", str(s).strip().lower())


def stable_hash(*parts):
    """Return a 64-bit integer hash of ``parts`` that is stable across processes.

    Python's builtin ``hash`` is salted per interpreter, so mock backends and
    golden tests go through sha256 instead.
    """
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, bytes):
            h.update(p)
        else:
            h.update(repr(p).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "big")


def seeded_rng(*parts):
    """numpy Generator seeded from :func:`stable_hash` of ``parts``."""
    return np.random.default_rng(stable_hash(*parts))


def short_hash(*parts, length=8):
    return f"{stable_hash(*parts):016x}"[:length]


class GeometryUtils:
    """Box arithmetic on ``[x0, y0, x1, y1]`` arrays (pixels, origin top-left)."""

    @staticmethod
    def area(coords):
        c = np.asarray(coords, dtype=float)
        return np.clip(c[..., 2] - c[..., 0], 0.0, None) * np.clip(c[..., 3] - c[..., 1], 0.0, None)

    @staticmethod
    def iou_one_to_many(box, others):
        """Vectorized IoU of ``box`` against an (n, 4) array."""
        others = np.asarray(others, dtype=float).reshape(-1, 4)
        ix0 = np.maximum(box[0], others[:, 0])
        iy0 = np.maximum(box[1], others[:, 1])
        ix1 = np.minimum(box[2], others[:, 2])
        iy1 = np.minimum(box[3], others[:, 3])
        inter = np.clip(ix1 - ix0, 0.0, None) * np.clip(iy1 - iy0, 0.0, None)
        union = GeometryUtils.area(box) + GeometryUtils.area(others) - inter
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(union > 0, inter / union, 0.0)
        return out
