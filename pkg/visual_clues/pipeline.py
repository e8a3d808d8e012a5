import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BackendError, ConfigError, InvalidInput, VisualCluesError, run_stage
from .extraction import ClueExtractor, ExtractionParams
from .images import ImageRef
from .prompting import ClueAblation, SizeThresholds, TaskEnding, synthesis_plan
from .selection import WITH_CAPTION, WITHOUT_CAPTION, CandidateJudge, best_index
from .utils import short_hash
from .vocabulary import Vocabulary

LOG = logging.getLogger(__name__)

STAGES = ("extract", "synthesize", "select", "filter")


@dataclass
class RunRecord:
    """Everything produced for one image by a describe run.

    ``candidates`` holds the non-empty generated paragraphs in request order
    with their image similarities; ``selected`` indexes into it and
    ``final_text`` is the filtered sentence list of that paragraph.
    """

    image_id: str
    clues: object = None
    prompts: list = field(default_factory=list)
    candidates: list = field(default_factory=list)
    selected: int = None
    final_text: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    dropped_empty: int = 0
    error: str = None

    @property
    def ok(self):
        return self.error is None

    @classmethod
    def failed(cls, image_id, error, timings=None):
        return cls(image_id=image_id, error=str(error), timings=dict(timings or {}))

    def to_dict(self):
        """JSON view; timings are excluded so identical runs serialize identically."""
        if not self.ok:
            return {"image_id": self.image_id, "error": self.error}
        return {
            "image_id": self.image_id,
            "clues": self.clues.to_dict(),
            "prompts": list(self.prompts),
            "candidates": [c.to_dict() for c in self.candidates],
            "selected": self.selected,
            "dropped_empty": self.dropped_empty,
            "final_text": list(self.final_text),
            "description": " ".join(self.final_text),
        }


class _StageClock:
    def __init__(self):
        self.timings = {}
        self._t0 = time.perf_counter()

    def lap(self, stage):
        now = time.perf_counter()
        self.timings[stage] = round((now - self._t0) * 1000.0, 3)
        self._t0 = now


def vocabulary_cache_path(cfg, vocab_path):
    """Embedding cache file for ``vocab_path`` under the active backend; None without a cache dir."""
    if cfg.cache_dir is None:
        return None
    b = cfg.backend
    tag = short_hash(b.kind, b.seed, sorted(b.endpoints.items()), b.dim)
    return Path(cfg.cache_dir) / f"{Path(vocab_path).stem}.{tag}.emb"


def load_vocabulary(cfg, vocab_path, gateway, what):
    if vocab_path is None:
        raise ConfigError(f"no {what} vocabulary configured")
    return Vocabulary.load(vocab_path, gateway, vocabulary_cache_path(cfg, vocab_path))


class DescribePipeline:
    """Image -> visual clues -> K candidates -> best paragraph -> filtered text.

    Responsibilities
    ----------------
    - Extract clues, or take supplied clues and only embed the image.
    - Request the K candidates; requests sharing a prompt go out as one
      completion call with ``n`` set to the number of such requests.
    - Select the best paragraph and filter its sentences.
    - Run a corpus on a thread pool capped by ``parallelism`` while keeping
      the input order, recording per-image failures instead of aborting.
    """

    def __init__(self, extractor, judge, ending=None, num_candidates=40, sampling=None,
                 parallelism=4, ablation=None, thresholds=None, endings=None):
        self.extractor = extractor
        self.gateway = extractor.gateway
        self.judge = judge
        self.ending = ending or TaskEnding()
        self.num_candidates = int(num_candidates)
        self.sampling = sampling or self.gateway.sampling
        self.parallelism = max(1, int(parallelism))
        self.serialize_kwargs = {"ablation": ablation, "thresholds": thresholds, "endings": endings}

    @classmethod
    def from_config(cls, cfg, gateway):
        tag_vocab = load_vocabulary(cfg, cfg.tag_vocab_path, gateway, "tag")
        attr_vocab = load_vocabulary(cfg, cfg.attr_vocab_path, gateway, "attribute")
        extractor = ClueExtractor(gateway, tag_vocab, attr_vocab, ExtractionParams.from_config(cfg))
        return cls(
            extractor,
            CandidateJudge(gateway, cfg.gamma),
            ending=cfg.task_ending(),
            num_candidates=cfg.num_candidates,
            sampling=cfg.sampling,
            parallelism=cfg.parallelism,
            ablation=ClueAblation.named(cfg.ablation),
            thresholds=SizeThresholds(cfg.large_fraction, cfg.moderate_fraction),
            endings=cfg.endings,
        )

    # ------------------------------------------------------------------
    def _generate(self, plan):
        groups = {}
        for req in plan:
            groups.setdefault(req.prompt, []).append(req)
        texts, sources = [], []
        for prompt, reqs in groups.items():
            out = self.gateway.complete(prompt, self.sampling, n=len(reqs))
            texts.extend(out)
            sources.extend(r.include_caption for r in reqs)
        return list(groups), texts, sources

    def describe(self, image, clues=None, ocr_text=None):
        """Run the whole framework on one image; raises on failure.

        ``ocr_text`` is precomputed scene text for extraction; supplied clues
        already carry their own.
        """
        clock = _StageClock()
        if clues is None:
            clues, image_emb = self.extractor.extract_with_embedding(image, ocr_text=ocr_text)
        else:
            if clues.image_id != image.image_id:
                raise InvalidInput(f"clues for {clues.image_id!r} supplied for image {image.image_id!r}")
            clues.validate()
            image_emb = run_stage("embed_image", self.gateway.embed_image, image)
        clock.lap("extract")

        plan = synthesis_plan(clues, self.ending, self.num_candidates, self.sampling,
                              **self.serialize_kwargs)
        prompts, texts, with_caption = run_stage("complete", self._generate, plan)
        clock.lap("synthesize")

        kept = [(t.strip(), WITH_CAPTION if c else WITHOUT_CAPTION)
                for t, c in zip(texts, with_caption) if t.strip()]
        if not kept:
            raise BackendError("language model returned only empty completions", stage="complete",
                               endpoint=self.gateway.backend.endpoint("complete"))
        if len(kept) < len(texts):
            LOG.info("%s: dropped %d empty completions", image.image_id, len(texts) - len(kept))

        candidates = run_stage("select", self.judge.score_candidates, image_emb,
                               [t for t, _ in kept], [s for _, s in kept])
        selected = best_index([c.similarity for c in candidates])
        clock.lap("select")
        final_text = run_stage("filter", self.judge.refine, image_emb, candidates[selected])
        clock.lap("filter")

        return RunRecord(
            image_id=image.image_id,
            clues=clues,
            prompts=prompts,
            candidates=candidates,
            selected=selected,
            final_text=final_text,
            timings=clock.timings,
            dropped_empty=len(texts) - len(kept),
        )

    def describe_path(self, path, clues_by_id=None, ocr_by_id=None):
        """Like :meth:`describe` but never raises on per-image problems."""
        image_id = Path(path).stem
        try:
            image = ImageRef.load(path)
            clues = (clues_by_id or {}).get(image.image_id)
            if clues_by_id is not None and clues is None:
                raise InvalidInput(f"no supplied clues for image {image.image_id!r}")
            return self.describe(image, clues, ocr_text=(ocr_by_id or {}).get(image.image_id))
        except VisualCluesError as exc:
            LOG.warning("image %s failed: %s", image_id, exc)
            return RunRecord.failed(image_id, exc)

    def run(self, paths, clues_by_id=None, ocr_by_id=None):
        """Describe every image; records come back in input order."""
        paths = list(paths)
        if not paths:
            return []
        with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
            records = list(pool.map(lambda p: self.describe_path(p, clues_by_id, ocr_by_id), paths))
        failed = sum(1 for r in records if not r.ok)
        LOG.info("described %d images (%d failed)", len(records), failed)
        return records
