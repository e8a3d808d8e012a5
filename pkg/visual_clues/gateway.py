import logging

import numpy as np

from .backends import make_backend
from .clues import BoundingBox
from .config import SamplingParams
from .embedding import UnitEmbedding, similarity
from .errors import BackendError, InvalidInput, PartialCompletion

LOG = logging.getLogger(__name__)


class ModelGateway:
    """Uniform, validated access to the model backends.

    Responsibilities
    ----------------
    - Normalize every embedding to unit norm and enforce the configured
      dimension (thresholds are meaningless on unnormalized inner products).
    - Clamp detector boxes to the image frame and order them by score.
    - Treat an empty caption as absent (``None``).
    - Retry a partial completion batch once, then raise
      :class:`PartialCompletion`.
    - Wrap any backend failure in :class:`BackendError`.

    The gateway holds no mutable state besides the backend, so one instance
    can be shared by all worker threads.
    """

    def __init__(self, backend, dim=512, sampling=None):
        self.backend = backend
        self.dim = int(dim)
        self.sampling = sampling or SamplingParams()

    @classmethod
    def from_config(cls, backend_cfg, sampling=None):
        backend_cfg.validate()
        return cls(make_backend(backend_cfg), dim=backend_cfg.dim, sampling=sampling)

    similarity = staticmethod(similarity)

    def close(self):
        self.backend.close()

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------
    def _call(self, capability, fn, *args):
        try:
            return fn(*args)
        except BackendError:
            raise
        except Exception as exc:
            raise BackendError(f"{capability} failed", endpoint=self.backend.endpoint(capability),
                               cause=exc) from exc

    def _expect_count(self, capability, items, expected):
        if len(items) != expected:
            raise BackendError(f"{capability} returned {len(items)} items for {expected} inputs",
                               endpoint=self.backend.endpoint(capability))
        return items

    def _to_unit(self, capability, raw):
        v = np.asarray(raw, dtype=np.float64).reshape(-1)
        if v.shape[0] != self.dim:
            raise BackendError(f"{capability} returned dimension {v.shape[0]}, expected {self.dim}",
                               endpoint=self.backend.endpoint(capability))
        try:
            return UnitEmbedding.from_raw(v)
        except InvalidInput as exc:
            raise BackendError(f"{capability} returned an unusable vector",
                               endpoint=self.backend.endpoint(capability), cause=exc) from exc

    @staticmethod
    def _crop_coords(image, crop):
        """Clamp a crop to the frame; None means whole image."""
        if crop is None:
            return None
        box = BoundingBox.clamped(crop.as_list(), image.width, image.height, crop.score)
        if box is None:
            raise InvalidInput(f"crop {crop.as_list()} has no area inside the image")
        if box.is_full_frame(image.width, image.height):
            return None
        return box.as_list()

    # ------------------------------------------------------------------
    # Encoders
    # ------------------------------------------------------------------
    def embed_texts(self, texts):
        texts = [str(t) for t in texts]
        for t in texts:
            if not t.strip():
                raise InvalidInput("cannot embed empty text")
        if not texts:
            return []
        raw = self._call("embed_text", self.backend.embed_texts, texts)
        self._expect_count("embed_text", raw, len(texts))
        return [self._to_unit("embed_text", r) for r in raw]

    def embed_text(self, text):
        return self.embed_texts([text])[0]

    def embed_regions(self, image, crops):
        """Embed several crops of one image in a single backend batch."""
        coords = [self._crop_coords(image, c) for c in crops]
        boxes = [c for c in coords if c is not None]
        cropped = iter(())
        if boxes:
            raw = self._call("embed_image", self.backend.embed_image, image, boxes)
            self._expect_count("embed_image", raw, len(boxes))
            cropped = iter([self._to_unit("embed_image", r) for r in raw])
        whole = self.embed_image(image) if len(boxes) < len(coords) else None
        return [whole if c is None else next(cropped) for c in coords]

    def embed_image(self, image, crop=None):
        coords = self._crop_coords(image, crop)
        boxes = None if coords is None else [coords]
        raw = self._call("embed_image", self.backend.embed_image, image, boxes)
        self._expect_count("embed_image", raw, 1)
        return self._to_unit("embed_image", raw[0])

    # ------------------------------------------------------------------
    # Captioner / detector
    # ------------------------------------------------------------------
    @staticmethod
    def _clean_caption(text):
        text = "" if text is None else str(text).strip()
        return text or None

    def caption(self, image, crop=None):
        """Caption of the image or crop; ``None`` when the backend returns nothing."""
        coords = self._crop_coords(image, crop)
        boxes = None if coords is None else [coords]
        out = self._call("caption", self.backend.caption, image, boxes)
        self._expect_count("caption", out, 1)
        return self._clean_caption(out[0])

    def caption_regions(self, image, crops):
        coords = [self._crop_coords(image, c) for c in crops]
        boxes = [c for c in coords if c is not None]
        cropped = iter(())
        if boxes:
            out = self._call("caption", self.backend.caption, image, boxes)
            self._expect_count("caption", out, len(boxes))
            cropped = iter([self._clean_caption(t) for t in out])
        whole = self.caption(image) if len(boxes) < len(coords) else None
        return [whole if c is None else next(cropped) for c in coords]

    def detect(self, image):
        """Detector proposals clamped to the frame, by descending score.

        No truncation happens here; NMS keeps the top proposals downstream.
        """
        raw = self._call("detect", self.backend.detect, image)
        boxes = []
        for r in raw:
            try:
                score = float(r[4]) if len(r) > 4 else 1.0
                box = BoundingBox.clamped(r, image.width, image.height, score)
            except (TypeError, ValueError, IndexError) as exc:
                raise BackendError("detect returned a malformed box",
                                   endpoint=self.backend.endpoint("detect"), cause=exc) from exc
            if box is not None:
                boxes.append(box)
        boxes.sort(key=lambda b: -b.score)
        return boxes

    # ------------------------------------------------------------------
    # Language model
    # ------------------------------------------------------------------
    def complete(self, prompt, params=None, n=1):
        """Exactly ``n`` completions of ``prompt``."""
        if not str(prompt).strip():
            raise InvalidInput("prompt must not be empty")
        n = int(n)
        if n < 1:
            raise InvalidInput("n must be >= 1")
        p = params or self.sampling

        def _ask(count):
            out = self._call("complete", self.backend.complete, prompt, count,
                             p.temperature, p.frequency_penalty, p.max_tokens)
            return ["" if c is None else str(c) for c in out]

        completions = _ask(n)
        if len(completions) < n:
            LOG.warning("partial completion batch (%d of %d), retrying once", len(completions), n)
            completions += _ask(n - len(completions))
            if len(completions) < n:
                raise PartialCompletion(len(completions), n, endpoint=self.backend.endpoint("complete"))
        return completions[:n]
