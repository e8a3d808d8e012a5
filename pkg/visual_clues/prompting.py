"""Serialize visual clues into the language-model prompt.

Layout (blocks separated by one blank line, lines joined with ``\\n``, no
trailing newline)::

    Objects in this image:
    <region caption>. <region tag>, is at <location> of the image and is <size> in the image. Attribute: <attribute>
    ...

    This image contains text: <ocr>

    Caption:
    <global caption>

    Tags:
    This image is about <tag1>, <tag2>, ...

    <ending>

Tags are always the last clue block, right before the ending.
"""

from dataclasses import dataclass
from enum import Enum

from .config import SamplingParams
from .errors import InvalidInput


class LocationClass(str, Enum):
    UPPER_LEFT = "upper left"
    UPPER_MIDDLE = "upper middle"
    UPPER_RIGHT = "upper right"
    LEFT = "left"
    MIDDLE = "middle"
    RIGHT = "right"
    LOWER_LEFT = "lower left"
    LOWER_MIDDLE = "lower middle"
    LOWER_RIGHT = "lower right"


class SizeClass(str, Enum):
    LARGE = "large"
    MODERATE = "moderate-sized"
    SMALL = "small"


# Row-major 3x3 grid: rows top to bottom, columns left to right.
_GRID = (
    (LocationClass.UPPER_LEFT, LocationClass.UPPER_MIDDLE, LocationClass.UPPER_RIGHT),
    (LocationClass.LEFT, LocationClass.MIDDLE, LocationClass.RIGHT),
    (LocationClass.LOWER_LEFT, LocationClass.LOWER_MIDDLE, LocationClass.LOWER_RIGHT),
)

DEFAULT_ENDINGS = {
    "describe": "Describe this image in detail:",
    "story": "Tell me a creative story:",
    "ads": "Write a product description to sell in eBay or Amazon marketplace to get lots of engagement:",
    "social": "Social media post:",
    "textbook": "Textbook text:",
}

OBJECTS_HEADER = "Objects in this image:"
CAPTION_HEADER = "Caption:"
TAGS_HEADER = "Tags:"
TAGS_PREFIX = "This image is about "
OCR_PREFIX = "This image contains text: "


@dataclass(frozen=True)
class TaskEnding:
    """Final prompt line selecting the application.

    ``kind`` is one of the :data:`DEFAULT_ENDINGS` keys, ``"vqa"`` (``text`` is
    the question) or ``"custom"`` (``text`` is rendered verbatim). ``table``
    overrides the built-in suffixes per kind.
    """

    kind: str = "describe"
    text: str = None

    @classmethod
    def vqa(cls, question):
        return cls("vqa", question)

    @classmethod
    def custom(cls, text):
        return cls("custom", text)

    def render(self, table=None):
        if self.kind in ("vqa", "custom"):
            out = (self.text or "").strip()
        else:
            endings = {**DEFAULT_ENDINGS, **(table or {})}
            if self.kind not in endings:
                raise InvalidInput(f"unknown task ending {self.kind!r}")
            out = endings[self.kind].strip()
        if not out:
            raise InvalidInput(f"task ending {self.kind!r} renders empty")
        return out


@dataclass(frozen=True)
class ClueAblation:
    """Which clue blocks enter the prompt (all by default).

    ``caption=False`` removes the captioner entirely: the global caption block
    and the caption prefix of every region line.
    """

    regions: bool = True
    caption: bool = True
    tags: bool = True

    @classmethod
    def named(cls, name):
        try:
            return _ABLATIONS[str(name).strip().lower()]
        except KeyError as exc:
            raise InvalidInput(f"unknown ablation {name!r}; choose from {', '.join(_ABLATIONS)}") from exc


_ABLATIONS = {
    "full": ClueAblation(),
    "no-regions": ClueAblation(regions=False),
    "no-caption": ClueAblation(caption=False),
    "tags-only": ClueAblation(regions=False, caption=False),
}


@dataclass(frozen=True)
class SizeThresholds:
    large: float = 0.25
    moderate: float = 0.05


@dataclass(frozen=True)
class SynthesisRequest:
    prompt: str
    params: SamplingParams
    include_caption: bool


# ----------------------------------------------------------------------
# Box phrasing
# ----------------------------------------------------------------------
def _cell(coord, extent):
    """Grid cell of a center coordinate: [0,1/3) -> 0, [1/3,2/3) -> 1, [2/3,1] -> 2.

    Compared as ``3 * coord`` against ``extent`` so pixel boundaries are exact.
    """
    if 3.0 * coord < extent:
        return 0
    if 3.0 * coord < 2.0 * extent:
        return 1
    return 2


def bucket_location(box, image_dims):
    """Location phrase from the box center on a 3x3 grid."""
    width, height = image_dims
    if box.area <= 0:
        raise InvalidInput("box has no area")
    cx, cy = box.center
    return _GRID[_cell(cy, float(height))][_cell(cx, float(width))]


def bucket_size(box, image_dims, thresholds=None):
    """Size phrase from the fraction of the image the box covers."""
    t = thresholds or SizeThresholds()
    width, height = image_dims
    f = box.area / (float(width) * float(height))
    if f >= t.large:
        return SizeClass.LARGE
    if f >= t.moderate:
        return SizeClass.MODERATE
    return SizeClass.SMALL


# ----------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------
def region_line(region, image_dims, thresholds=None, with_caption=True):
    loc = bucket_location(region.box, image_dims).value
    size = bucket_size(region.box, image_dims, thresholds).value
    body = (f"{region.head_tag}, is at {loc} of the image and is {size} in the image. "
            f"Attribute: {region.attribute}")
    if with_caption and region.caption:
        return f"{region.caption.rstrip('.')}. {body}"
    return body


def serialize(clues, ending=None, include_caption=True, ablation=None, thresholds=None, endings=None):
    """Render the prompt for ``clues``; byte-deterministic."""
    ending = ending or TaskEnding()
    ab = ablation or ClueAblation()
    dims = (clues.width, clues.height)
    blocks = []
    if ab.regions and clues.regions:
        lines = [OBJECTS_HEADER] + [region_line(r, dims, thresholds, ab.caption) for r in clues.regions]
        blocks.append("\n".join(lines))
    if clues.ocr_text:
        blocks.append(OCR_PREFIX + " ".join(clues.ocr_text.split()))
    if ab.caption and include_caption and clues.caption:
        blocks.append(f"{CAPTION_HEADER}\n{clues.caption}")
    if ab.tags and clues.tags:
        blocks.append(f"{TAGS_HEADER}\n{TAGS_PREFIX}{', '.join(clues.tag_names)}")
    blocks.append(ending.render(endings))
    return "\n\n".join(blocks)


def synthesis_plan(clues, ending=None, num_candidates=40, params=None, **serialize_kwargs):
    """K generation requests: half with the caption block, half without.

    Without a caption both halves render the same caption-free prompt.
    ``num_candidates == 1`` yields a single request with the caption.
    """
    k = int(num_candidates)
    if k < 1 or (k > 1 and k % 2):
        raise InvalidInput(f"K must be 1 or an even number >= 2, got {k}")
    params = params or SamplingParams()
    with_cap = serialize(clues, ending, include_caption=True, **serialize_kwargs)
    if k == 1:
        return [SynthesisRequest(with_cap, params, bool(clues.caption))]
    without = serialize(clues, ending, include_caption=False, **serialize_kwargs)
    has_caption = bool(clues.caption) and with_cap != without
    half = k // 2
    return ([SynthesisRequest(with_cap, params, has_caption) for _ in range(half)]
            + [SynthesisRequest(without, params, False) for _ in range(half)])
