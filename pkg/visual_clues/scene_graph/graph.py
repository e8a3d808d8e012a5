import json
from dataclasses import dataclass, field

from ..errors import InvalidInput
from ..utils import normalize_text

KIND_BY_ARITY = {1: "object", 2: "attribute", 3: "relation"}


@dataclass(frozen=True, order=True)
class SemanticTuple:
    """(object), (object, attribute) or (object, relation, subject)."""

    values: tuple

    def __post_init__(self):
        if len(self.values) not in KIND_BY_ARITY:
            raise InvalidInput(f"tuple arity must be 1, 2 or 3, got {len(self.values)}")
        if any(not v for v in self.values):
            raise InvalidInput(f"tuple has an empty component: {self.values}")

    @classmethod
    def of(cls, *components):
        return cls(tuple(normalize_text(c) for c in components))

    @property
    def arity(self):
        return len(self.values)

    @property
    def kind(self):
        return KIND_BY_ARITY[self.arity]

    def __str__(self):
        return "(" + ", ".join(self.values) + ")"


@dataclass
class SceneGraph:
    """Objects, attributes and relations; strings lowercased and space-normalized.

    Lists may repeat entries (one per region for generated graphs);
    :func:`tuples` deduplicates. Attribute and relation endpoints missing from
    ``objects`` are appended on construction.
    """

    objects: list = field(default_factory=list)
    attributes: list = field(default_factory=list)
    relations: list = field(default_factory=list)
    provenance: dict = None

    def __post_init__(self):
        self.objects = [normalize_text(o) for o in self.objects]
        self.attributes = [(normalize_text(o), normalize_text(a)) for o, a in self.attributes]
        self.relations = [(normalize_text(o), normalize_text(r), normalize_text(s))
                          for o, r, s in self.relations]
        for parts in [*self.attributes, *self.relations]:
            if any(not p for p in parts):
                raise InvalidInput(f"scene graph element has an empty component: {parts}")
        known = set(self.objects)
        if any(not o for o in self.objects):
            raise InvalidInput("scene graph object is empty")
        for o in [a[0] for a in self.attributes] + [x for r in self.relations for x in (r[0], r[2])]:
            if o not in known:
                self.objects.append(o)
                known.add(o)

    def to_dict(self):
        return {
            "objects": list(self.objects),
            "attributes": [list(a) for a in self.attributes],
            "relations": [list(r) for r in self.relations],
        }

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(
                objects=list(d.get("objects") or []),
                attributes=[tuple(a) for a in d.get("attributes") or []],
                relations=[tuple(r) for r in d.get("relations") or []],
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed scene graph: {exc}") from exc

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def tuples(graph):
    """Set of semantic tuples of ``graph`` (objects, attributes, relations)."""
    out = {SemanticTuple.of(o) for o in graph.objects}
    out.update(SemanticTuple.of(o, a) for o, a in graph.attributes)
    out.update(SemanticTuple.of(o, r, s) for o, r, s in graph.relations)
    return out
