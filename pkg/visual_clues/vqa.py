"""Visual question answering from visual clues.

Generative protocol: the clue prompt ends with the question, the model's long
answer is shortened by a fixed two-shot reformat prompt, and the short answer
is compared with the ground truth. Discriminative protocol: the short answer
is replaced by the nearest training answer in text-embedding space.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .config import SamplingParams
from .errors import InvalidInput, ParseError, VisualCluesError
from .images import ImageRef, resolve_image
from .prompting import TaskEnding, serialize
from .utils import normalize_text
from .vocabulary import Vocabulary, read_entries

LOG = logging.getLogger(__name__)

MODES = ("generative", "discriminative")

REFORMAT_EXAMPLES = (
    "Question: What is this bird called?\n"
    "Long answer: The bird in this image is called a cockatoo.\n"
    "Short answer: Cockatoo.",
    "Question: Is the chair on the left or on the right of the desk?\n"
    "Long answer: The chair is on the left of the desk.\n"
    "Short answer: Left.",
)


@dataclass
class VqaItem:
    image_id: str
    question: str
    ground_truth: str
    long_answer: str = None
    short_answer: str = None
    final_answer: str = None
    error: str = None

    def __post_init__(self):
        if not str(self.question or "").strip():
            raise InvalidInput(f"item for image {self.image_id!r} has an empty question")

    def answer_for(self, mode):
        if mode == "generative":
            return self.short_answer
        if mode == "discriminative":
            return self.final_answer
        raise InvalidInput(f"mode must be one of {MODES}, got {mode!r}")

    def to_dict(self):
        return asdict(self)


def load_vqa_items(path):
    """Read a JSONL dataset of ``{"image", "question", "answer"}`` objects."""
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                items.append(VqaItem(str(row["image"]), str(row["question"]), str(row["answer"])))
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(f"bad VQA item: {exc}", line=lineno) from exc
    return items


class AnswerIndex(Vocabulary):
    """Unique training-set answers with their text embeddings."""

    @classmethod
    def from_answers(cls, answers, gateway):
        unique, seen = [], set()
        for a in answers:
            key = normalize_text(a)
            if key and key not in seen:
                seen.add(key)
                unique.append(str(a).strip())
        if not unique:
            raise InvalidInput("answer index is empty")
        return cls.build(unique, gateway)

    @classmethod
    def load(cls, path, gateway):
        return cls.from_answers(read_entries(path), gateway)

    def nearest(self, query):
        scores = self.scores(query)
        best = np.flatnonzero(scores == scores.max())
        return min(self.entries[i] for i in best)


# ----------------------------------------------------------------------
# Protocol steps
# ----------------------------------------------------------------------
def answer_question(clues, question, gateway, params=None, **serialize_kwargs):
    """Long answer: one completion of the clue prompt ending in the question."""
    if not str(question or "").strip():
        raise InvalidInput("question must not be empty")
    prompt = serialize(clues, TaskEnding.vqa(question), **serialize_kwargs)
    return gateway.complete(prompt, params, n=1)[0].strip()


def reformat_prompt(question, long_answer):
    live = f"Question: {question.strip()}\nLong answer: {long_answer.strip()}\nShort answer:"
    return "\n\n".join([*REFORMAT_EXAMPLES, live])


def reformat_answer(question, long_answer, gateway, temperature=0.0):
    if not str(question or "").strip() or not str(long_answer or "").strip():
        raise InvalidInput("question and long answer must be non-empty")
    base = gateway.sampling
    params = SamplingParams(temperature, base.frequency_penalty, base.max_tokens)
    out = gateway.complete(reformat_prompt(question, long_answer), params, n=1)[0]
    lines = [ln.strip() for ln in out.splitlines() if ln.strip()]
    return lines[0].rstrip(".").strip() if lines else ""


def discriminative_answer(short_answer, index, gateway):
    """Training answer nearest to ``short_answer``; ties go to the smallest string."""
    if index is None or len(index) == 0:
        raise InvalidInput("answer index is empty")
    if not str(short_answer or "").strip():
        # Nothing to embed; every entry is equally (un)likely.
        return min(index.entries)
    return index.nearest(gateway.embed_text(short_answer))


def score_accuracy(items, mode):
    """Fraction of items whose answer equals the ground truth, case-insensitively."""
    items = list(items)
    if mode not in MODES:
        raise InvalidInput(f"mode must be one of {MODES}, got {mode!r}")
    if not items:
        raise InvalidInput("no items to score")
    hits = 0
    for item in items:
        answer = item.answer_for(mode)
        if answer is None:
            raise InvalidInput(f"item for image {item.image_id!r} has no {mode} answer")
        hits += normalize_text(answer) == normalize_text(item.ground_truth)
    return hits / len(items)


# ----------------------------------------------------------------------
# Dataset driver
# ----------------------------------------------------------------------
class VqaEvaluator:
    """Answers every item of a dataset; images are looked up by id in ``images_dir``."""

    def __init__(self, extractor, images_dir, answer_index=None, reformat_temperature=0.0,
                 parallelism=4, **serialize_kwargs):
        self.extractor = extractor
        self.gateway = extractor.gateway
        self.images_dir = images_dir
        self.answer_index = answer_index
        self.reformat_temperature = float(reformat_temperature)
        self.parallelism = max(1, int(parallelism))
        self.serialize_kwargs = serialize_kwargs
        self._clues = {}

    def _clues_for(self, image_id):
        # Questions share images; extraction runs once per image.
        if image_id not in self._clues:
            image = ImageRef.load(resolve_image(self.images_dir, image_id), image_id)
            self._clues[image_id] = self.extractor.extract(image)
        return self._clues[image_id]

    def answer(self, item, clues):
        item.long_answer = answer_question(clues, item.question, self.gateway,
                                           **self.serialize_kwargs)
        item.short_answer = ""
        if item.long_answer:
            item.short_answer = reformat_answer(item.question, item.long_answer, self.gateway,
                                                self.reformat_temperature)
        if self.answer_index is not None:
            item.final_answer = discriminative_answer(item.short_answer, self.answer_index,
                                                      self.gateway)
        return item

    def run(self, items):
        items = list(items)
        if not items:
            raise InvalidInput("VQA dataset is empty")
        for image_id in dict.fromkeys(i.image_id for i in items):
            try:
                self._clues_for(image_id)
            except VisualCluesError as exc:
                LOG.warning("image %s: %s", image_id, exc)
                self._clues[image_id] = exc

        def _one(item):
            clues = self._clues[item.image_id]
            if isinstance(clues, Exception):
                item.error = str(clues)
                return item
            try:
                return self.answer(item, clues)
            except VisualCluesError as exc:
                LOG.warning("question on %s failed: %s", item.image_id, exc)
                item.error = str(exc)
                return item

        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            return list(pool.map(_one, items))
