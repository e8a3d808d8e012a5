"""Visual clue extraction: tags, caption and local region descriptions.

Pipeline for one image::

    detect -> nms -> prune_small -> embed regions -> select_regions
           -> per region (assign_attribute, region_tags, optional caption)
           -> global caption + select_top_tags

All selections break ties by the lower vocabulary / input index and use a
strict ``>`` against the thresholds.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .clues import RegionDescription, VisualClues
from .errors import InvalidInput, run_stage
from .utils import GeometryUtils

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExtractionParams:
    max_tags: int = 5
    beta: float = 0.2
    iou: float = 0.5
    keep: int = 100
    min_area_fraction: float = 1.0 / 400.0
    with_region_captions: bool = True

    @classmethod
    def from_config(cls, cfg):
        return cls(
            max_tags=cfg.effective_max_tags,
            beta=cfg.beta,
            iou=cfg.nms_iou,
            keep=cfg.nms_keep,
            min_area_fraction=cfg.min_area_fraction,
            with_region_captions=cfg.with_region_captions,
        )


# ----------------------------------------------------------------------
# Box filtering
# ----------------------------------------------------------------------
def nms(boxes, iou_threshold=0.5, keep=100):
    """Greedy non-maximum suppression by descending detector score.

    A box is suppressed when its IoU with an already kept box exceeds
    ``iou_threshold``. At most ``keep`` boxes are returned, best first.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise InvalidInput(f"iou_threshold must lie in (0, 1], got {iou_threshold}")
    if int(keep) < 1:
        raise InvalidInput("keep must be >= 1")
    if not boxes:
        return []
    coords = np.array([b.as_list() for b in boxes], dtype=float)
    scores = np.array([b.score for b in boxes], dtype=float)
    order = np.argsort(-scores, kind="stable")
    suppressed = np.zeros(len(boxes), dtype=bool)
    kept = []
    for idx in order:
        if suppressed[idx]:
            continue
        kept.append(int(idx))
        if len(kept) >= keep:
            break
        suppressed |= GeometryUtils.iou_one_to_many(coords[idx], coords) > iou_threshold
    return [boxes[i] for i in kept]


def prune_small(boxes, image_dims, min_area_fraction=1.0 / 400.0):
    """Drop boxes covering less than ``min_area_fraction`` of the image."""
    if not 0.0 < min_area_fraction < 1.0:
        raise InvalidInput(f"min_area_fraction must lie in (0, 1), got {min_area_fraction}")
    width, height = image_dims
    image_area = float(width) * float(height)
    return [b for b in boxes if b.area / image_area >= min_area_fraction]


# ----------------------------------------------------------------------
# Open-vocabulary selection
# ----------------------------------------------------------------------
def _ranked(scores, indices=None):
    """Indices sorted by descending score, lower index first on ties."""
    if indices is None:
        indices = np.arange(scores.shape[0])
    order = np.argsort(-scores[indices], kind="stable")
    return indices[order]


def select_top_tags(image_emb, vocab, max_tags=5):
    """Top-``M`` tags of the image as ``(tag, score)``, best first."""
    if int(max_tags) < 1:
        raise InvalidInput("M must be >= 1")
    scores = vocab.scores(image_emb)
    top = _ranked(scores)[: int(max_tags)]
    return [(vocab[i], float(scores[i])) for i in top]


def _tags_above(scores, vocab, beta):
    above = np.flatnonzero(scores > beta)
    return [(vocab[i], float(scores[i])) for i in _ranked(scores, above)]


def select_regions(region_embs, vocab, beta=0.2):
    """Indices of regions that at least one tag describes with similarity > beta."""
    if not -1.0 <= beta <= 1.0:
        raise InvalidInput(f"beta must lie in [-1, 1], got {beta}")
    return [j for j, e in enumerate(region_embs) if bool(np.any(vocab.scores(e) > beta))]


def assign_attribute(region_emb, attrs):
    """Best-matching attribute of a region as ``(attribute, score)``."""
    if len(attrs) == 0:
        raise InvalidInput("attribute vocabulary is empty")
    scores = attrs.scores(region_emb)
    i = int(np.argmax(scores))
    return attrs[i], float(scores[i])


def region_tags(region_emb, vocab, beta=0.2):
    """All tags scoring above ``beta`` for the region, best first (may be empty)."""
    return _tags_above(vocab.scores(region_emb), vocab, beta)


# ----------------------------------------------------------------------
# Orchestration
# ----------------------------------------------------------------------
class ClueExtractor:
    """Turns images into :class:`VisualClues` with a shared gateway and vocabularies."""

    def __init__(self, gateway, tag_vocab, attr_vocab, params=None):
        if tag_vocab.dim != gateway.dim or attr_vocab.dim != gateway.dim:
            raise InvalidInput("vocabulary embeddings do not match the gateway dimension")
        self.gateway = gateway
        self.tag_vocab = tag_vocab
        self.attr_vocab = attr_vocab
        self.params = params or ExtractionParams()

    def propose_regions(self, image):
        """Detector proposals after NMS and small-box pruning."""
        p = self.params
        boxes = run_stage("detect", self.gateway.detect, image)
        kept = nms(boxes, p.iou, p.keep)
        kept = prune_small(kept, (image.width, image.height), p.min_area_fraction)
        LOG.debug("%s: %d proposals, %d after nms+pruning", image.image_id, len(boxes), len(kept))
        return kept

    def extract_with_embedding(self, image, ocr_text=None):
        """Return ``(clues, image_embedding)``; the embedding is reused for selection."""
        p = self.params
        boxes = self.propose_regions(image)
        region_embs = run_stage("embed_regions", self.gateway.embed_regions, image, boxes)

        # One score row per region so membership and tag lists agree bit for bit.
        rows = [self.tag_vocab.scores(e) for e in region_embs]
        selected = [j for j, row in enumerate(rows) if bool(np.any(row > p.beta))]

        captions = [None] * len(selected)
        if p.with_region_captions and selected:
            captions = run_stage("region_captions", self.gateway.caption_regions,
                              image, [boxes[j] for j in selected])

        regions = []
        for j, cap in zip(selected, captions):
            attribute, attr_score = assign_attribute(region_embs[j], self.attr_vocab)
            tags = _tags_above(rows[j], self.tag_vocab, p.beta)
            regions.append(RegionDescription(
                box=boxes[j],
                attribute=attribute,
                tags=[t for t, _ in tags],
                caption=cap,
                tag_scores=[s for _, s in tags],
                attribute_score=attr_score,
            ))

        caption = run_stage("caption", self.gateway.caption, image)
        image_emb = run_stage("embed_image", self.gateway.embed_image, image)
        tags = select_top_tags(image_emb, self.tag_vocab, p.max_tags)
        clues = VisualClues(
            image_id=image.image_id,
            width=image.width,
            height=image.height,
            tags=tags,
            caption=caption,
            regions=regions,
            ocr_text=ocr_text or None,
        )
        return clues, image_emb

    def extract(self, image, ocr_text=None):
        return self.extract_with_embedding(image, ocr_text)[0]


def extract_clues(image, tag_vocab, attr_vocab, params, gateway, ocr_text=None):
    """Functional entry point; see :class:`ClueExtractor`."""
    return ClueExtractor(gateway, tag_vocab, attr_vocab, params).extract(image, ocr_text)
