"""Data model for the structured visual clues of one image.

``VisualClues`` is the hand-off between extraction and prompt synthesis and
round-trips through JSON, so clues written by hand (e.g. human-extracted
objects and attributes) can be fed to the same prompt code.
"""

from dataclasses import dataclass, field

from .errors import InvalidInput


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixels; origin top-left, y grows downward."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    score: float = 1.0

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidInput(f"degenerate box {self.as_list()}")
        if not (0.0 <= self.score <= 1.0):
            raise InvalidInput(f"box score {self.score} outside [0, 1]")

    @classmethod
    def full_frame(cls, width, height, score=1.0):
        return cls(0.0, 0.0, float(width), float(height), score)

    @property
    def width(self):
        return self.x_max - self.x_min

    @property
    def height(self):
        return self.y_max - self.y_min

    @property
    def area(self):
        return self.width * self.height

    @property
    def center(self):
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    def as_list(self):
        return [self.x_min, self.y_min, self.x_max, self.y_max]

    def is_full_frame(self, width, height):
        return self.x_min <= 0 and self.y_min <= 0 and self.x_max >= width and self.y_max >= height

    def union(self, other):
        """Smallest box covering both boxes; keeps the lower of the two scores."""
        return BoundingBox(
            min(self.x_min, other.x_min),
            min(self.y_min, other.y_min),
            max(self.x_max, other.x_max),
            max(self.y_max, other.y_max),
            min(self.score, other.score),
        )

    @staticmethod
    def clamped(coords, width, height, score=1.0):
        """Clamp raw ``[x0, y0, x1, y1]`` to the frame; None if no area is left."""
        x0, y0, x1, y1 = (float(c) for c in coords[:4])
        x0, x1 = max(0.0, min(x0, x1)), min(float(width), max(x0, x1))
        y0, y1 = max(0.0, min(y0, y1)), min(float(height), max(y0, y1))
        if x1 - x0 <= 0 or y1 - y0 <= 0:
            return None
        return BoundingBox(x0, y0, x1, y1, min(1.0, max(0.0, float(score))))

    def to_dict(self):
        return {"box": self.as_list(), "score": self.score}

    @classmethod
    def from_dict(cls, d):
        x0, y0, x1, y1 = d["box"]
        return cls(float(x0), float(y0), float(x1), float(y1), float(d.get("score", 1.0)))


@dataclass
class RegionDescription:
    """Local description of one selected box: (box, attribute, tags, caption)."""

    box: BoundingBox
    attribute: str
    tags: list = field(default_factory=list)
    caption: str = None
    tag_scores: list = field(default_factory=list)
    attribute_score: float = None

    @property
    def head_tag(self):
        """Noun phrase used in the prompt: best tag, else the attribute."""
        return self.tags[0] if self.tags else self.attribute

    def to_dict(self):
        return {
            "box": self.box.to_dict(),
            "attribute": self.attribute,
            "attribute_score": self.attribute_score,
            "tags": [[t, s] for t, s in zip(self.tags, self.tag_scores)],
            "caption": self.caption,
        }

    @classmethod
    def from_dict(cls, d):
        pairs = d.get("tags") or []
        tags, scores = [], []
        for p in pairs:
            if isinstance(p, str):
                tags.append(p)
                scores.append(None)
            else:
                tags.append(p[0])
                scores.append(p[1])
        return cls(
            box=BoundingBox.from_dict(d["box"]),
            attribute=d["attribute"],
            tags=tags,
            caption=d.get("caption") or None,
            tag_scores=scores,
            attribute_score=d.get("attribute_score"),
        )


@dataclass
class VisualClues:
    """Global tags and caption plus the per-region quadruples of one image.

    ``tags`` holds ``(tag, score)`` pairs sorted by descending score.
    ``width``/``height`` are the image frame, needed to phrase box locations.
    """

    image_id: str
    width: int
    height: int
    tags: list = field(default_factory=list)
    caption: str = None
    regions: list = field(default_factory=list)
    ocr_text: str = None

    @property
    def tag_names(self):
        return [t for t, _ in self.tags]

    def validate(self, max_tags=None):
        if self.width <= 0 or self.height <= 0:
            raise InvalidInput(f"image frame {self.width}x{self.height} has no area")
        if max_tags is not None and len(self.tags) > max_tags:
            raise InvalidInput(f"{len(self.tags)} tags exceed M={max_tags}")
        scores = [s for _, s in self.tags if s is not None]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise InvalidInput("tags must be sorted by descending score")
        for r in self.regions:
            b = r.box
            if b.x_min < 0 or b.y_min < 0 or b.x_max > self.width or b.y_max > self.height:
                raise InvalidInput(f"region box {b.as_list()} outside the image frame")
        return self

    def to_dict(self):
        return {
            "image_id": self.image_id,
            "width": self.width,
            "height": self.height,
            "tags": [[t, s] for t, s in self.tags],
            "caption": self.caption,
            "ocr_text": self.ocr_text,
            "regions": [r.to_dict() for r in self.regions],
        }

    @classmethod
    def from_dict(cls, d):
        tags = []
        for t in d.get("tags") or []:
            tags.append((t, None) if isinstance(t, str) else (t[0], t[1]))
        return cls(
            image_id=str(d["image_id"]),
            width=int(d["width"]),
            height=int(d["height"]),
            tags=tags,
            caption=d.get("caption") or None,
            regions=[RegionDescription.from_dict(r) for r in d.get("regions") or []],
            ocr_text=d.get("ocr_text") or None,
        )
