"""Region-based scene-graph baseline.

Every selected region becomes one object (nearest object name) with one
attribute (nearest attribute). Every unordered region pair gets one relation:
the union box of the pair is embedded, matched against the relation
vocabulary, and the direction is the phrasing whose text embedding lies
closer to the union box embedding.
"""

import logging

import numpy as np

from ..errors import InvalidInput
from ..extraction import select_regions
from .graph import SceneGraph

LOG = logging.getLogger(__name__)


def _argmax_entry(vocab, emb):
    return vocab[int(np.argmax(vocab.scores(emb)))]


def baseline_regions(extractor, image):
    """``(region_emb, box)`` pairs selected the way clue extraction selects them."""
    boxes = extractor.propose_regions(image)
    embs = extractor.gateway.embed_regions(image, boxes)
    keep = select_regions(embs, extractor.tag_vocab, extractor.params.beta)
    return [(embs[j], boxes[j]) for j in keep]


def naive_baseline_graph(regions, object_vocab, attr_vocab, rel_vocab, gateway, image):
    if not regions:
        raise InvalidInput("the baseline needs at least one region")

    names = [_argmax_entry(object_vocab, emb) for emb, _ in regions]
    attributes = [(name, _argmax_entry(attr_vocab, emb)) for name, (emb, _) in zip(names, regions)]

    pairs = [(i, j) for i in range(len(regions)) for j in range(i + 1, len(regions))]
    relations = []
    if pairs:
        unions = [regions[i][1].union(regions[j][1]) for i, j in pairs]
        union_embs = gateway.embed_regions(image, unions)
        phrasings = []
        for (i, j), emb in zip(pairs, union_embs):
            rel = _argmax_entry(rel_vocab, emb)
            phrasings.append((names[i], rel, names[j]))
        texts = [t for o1, r, o2 in phrasings for t in (f"{o1} {r} {o2}", f"{o2} {r} {o1}")]
        text_embs = gateway.embed_texts(texts)
        for k, ((o1, r, o2), emb) in enumerate(zip(phrasings, union_embs)):
            forward = gateway.similarity(text_embs[2 * k], emb)
            backward = gateway.similarity(text_embs[2 * k + 1], emb)
            relations.append((o1, r, o2) if forward >= backward else (o2, r, o1))

    LOG.debug("baseline graph: %d objects, %d relations", len(names), len(relations))
    return SceneGraph(objects=names, attributes=attributes, relations=relations)
