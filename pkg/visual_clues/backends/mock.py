"""Deterministic offline backend.

Every output is a pure function of ``(seed, input)``:

- text encoder: sum of seeded per-token Gaussian vectors (lowercased ``\\w+``
  tokens), normalized by the gateway;
- image encoder: the image (or crop) is mapped by a seeded hash to a few
  concepts from :data:`MOCK_CONCEPTS`, embedded like text plus a seeded noise
  term, so tags naming those concepts score well above 0.2;
- captioner: ``"mock caption <short-hash>"``;
- detector: a fixed box list per image hash;
- language model: template sentences built from the prompt's tags.
"""

import re
from functools import lru_cache

import numpy as np

from ..utils import seeded_rng, short_hash
from .base import ModelBackend

MOCK_CONCEPTS = (
    "dog", "cat", "man", "woman", "child", "horse", "car", "bus", "bicycle", "train",
    "tree", "grass", "sky", "cloud", "street", "building", "bridge", "table", "cup",
    "coffee", "donut", "plate", "chair", "wave", "surfboard", "beach", "snow",
    "umbrella", "clock", "flower", "bench", "window",
    "red", "blue", "green", "white", "black", "wooden", "glazed", "sunny",
)
CONCEPTS_PER_IMAGE = 3
DETECTIONS_PER_IMAGE = 12
NOISE_WEIGHT = 0.5

_TOKEN = re.compile(r"\w+")
_ABOUT = re.compile(r"^This image is about (.+)$", re.MULTILINE)
_LONG_ANSWER = re.compile(r"^Long answer: (.+)$", re.MULTILINE)

_TEMPLATES = (
    "This image shows {a}.",
    "There is {a} next to {b}.",
    "The scene features {a} and {b}.",
    "In the background we can see {b}.",
    "It looks like a {mood} day.",
    "Everyone seems to enjoy the {a}.",
)
_MOODS = ("beautiful", "quiet", "busy", "cold", "bright")


class MockBackend(ModelBackend):
    kind = "mock"

    def __init__(self, seed=0, dim=512):
        self.seed = int(seed)
        self.dim = int(dim)
        self._token_vector = lru_cache(maxsize=65536)(self._token_vector_uncached)

    def endpoint(self, capability):
        return f"mock(seed={self.seed}):{capability}"

    # ------------------------------------------------------------------
    # Encoders
    # ------------------------------------------------------------------
    def _token_vector_uncached(self, token):
        return seeded_rng(self.seed, "token", token).standard_normal(self.dim)

    def _text_vector(self, text):
        tokens = _TOKEN.findall(str(text).lower())
        if not tokens:
            return seeded_rng(self.seed, "text", str(text)).standard_normal(self.dim)
        return np.sum([self._token_vector(t) for t in tokens], axis=0)

    def embed_texts(self, texts):
        return [self._text_vector(t).tolist() for t in texts]

    @staticmethod
    def _box_key(box):
        return None if box is None else tuple(round(float(c), 2) for c in box[:4])

    def image_concepts(self, image, box=None):
        """Concepts the mock 'sees' in an image or crop."""
        rng = seeded_rng(self.seed, "concepts", image.digest, self._box_key(box))
        idx = rng.choice(len(MOCK_CONCEPTS), size=CONCEPTS_PER_IMAGE, replace=False)
        return [MOCK_CONCEPTS[i] for i in sorted(idx)]

    def _image_vector(self, image, box):
        v = self._text_vector(" ".join(self.image_concepts(image, box)))
        noise = seeded_rng(self.seed, "image-noise", image.digest, self._box_key(box))
        return v + NOISE_WEIGHT * noise.standard_normal(self.dim)

    def embed_image(self, image, boxes=None):
        if boxes is None:
            return [self._image_vector(image, None).tolist()]
        return [self._image_vector(image, b).tolist() for b in boxes]

    # ------------------------------------------------------------------
    # Captioner / detector
    # ------------------------------------------------------------------
    def caption(self, image, boxes=None):
        if boxes is None:
            return [f"mock caption {short_hash(self.seed, image.digest, None)}"]
        return [f"mock caption {short_hash(self.seed, image.digest, self._box_key(b))}" for b in boxes]

    def detect(self, image):
        rng = seeded_rng(self.seed, "detect", image.digest)
        w, h = float(image.width), float(image.height)
        out = []
        for _ in range(DETECTIONS_PER_IMAGE):
            bw = rng.uniform(0.08, 0.7) * w
            bh = rng.uniform(0.08, 0.7) * h
            x0 = rng.uniform(0.0, w - bw)
            y0 = rng.uniform(0.0, h - bh)
            out.append([x0, y0, x0 + bw, y0 + bh, float(rng.uniform(0.05, 1.0))])
        out.sort(key=lambda b: -b[4])
        return out

    # ------------------------------------------------------------------
    # Language model
    # ------------------------------------------------------------------
    def _phrases(self, prompt):
        m = _ABOUT.search(prompt)
        if m:
            phrases = [p.strip() for p in m.group(1).split(",") if p.strip()]
            if phrases:
                return phrases
        words = [t for t in _TOKEN.findall(prompt.lower()) if t.isalpha() and len(t) > 3]
        return words or ["something"]

    def _short_answer(self, prompt, index):
        answers = _LONG_ANSWER.findall(prompt)
        words = _TOKEN.findall(answers[-1]) if answers else ["unknown"]
        rng = seeded_rng(self.seed, "short", prompt, index)
        # Answers tend to sit at the end of the long answer.
        return f"{words[-1] if rng.uniform() < 0.8 else words[0]}."

    def _paragraph(self, prompt, index):
        rng = seeded_rng(self.seed, "complete", prompt, index)
        phrases = self._phrases(prompt)
        n_sentences = int(rng.integers(2, 5))
        sentences = []
        for _ in range(n_sentences):
            tpl = _TEMPLATES[int(rng.integers(len(_TEMPLATES)))]
            a = phrases[int(rng.integers(len(phrases)))]
            b = phrases[int(rng.integers(len(phrases)))]
            mood = _MOODS[int(rng.integers(len(_MOODS)))]
            sentences.append(tpl.format(a=a, b=b, mood=mood))
        return " ".join(sentences)

    def complete(self, prompt, n, temperature, frequency_penalty, max_tokens):
        if prompt.rstrip().endswith("Short answer:"):
            return [self._short_answer(prompt, i) for i in range(n)]
        return [self._paragraph(prompt, i) for i in range(n)]
