import configparser
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends.base import CAPABILITIES
from .errors import ConfigError, InvalidInput

WIRE_PATHS = {
    "embed_text": "/v1/embed_text",
    "embed_image": "/v1/embed_image",
    "caption": "/v1/caption",
    "detect": "/v1/detect",
    "complete": "/v1/complete",
}


@dataclass(frozen=True)
class SamplingParams:
    """Language-model sampling knobs (defaults from the candidate synthesis setup)."""

    temperature: float = 0.8
    frequency_penalty: float = 0.5
    max_tokens: int = 100


@dataclass
class BackendConfig:
    """Where and how to reach the model backends.

    ``kind`` is ``"remote"`` or ``"mock"``; ``seed`` only matters for mocks.
    ``endpoints`` maps each capability to a URL; :meth:`with_base_url` fills
    all of them from the wire-protocol paths.
    """

    kind: str = "mock"
    seed: int = 0
    endpoints: dict = field(default_factory=dict)
    timeout_ms: float = 30000.0
    max_in_flight: int = 8
    dim: int = 512
    bearer_token: str = None

    @classmethod
    def mock(cls, seed=0, dim=512):
        return cls(kind="mock", seed=int(seed), dim=int(dim))

    @classmethod
    def with_base_url(cls, base_url, **kwargs):
        base = str(base_url).rstrip("/")
        return cls(kind="remote", endpoints={c: base + p for c, p in WIRE_PATHS.items()}, **kwargs)

    def validate(self):
        if self.kind not in ("remote", "mock"):
            raise ConfigError(f"backend kind must be 'remote' or 'mock', got {self.kind!r}")
        if not self.timeout_ms > 0:
            raise ConfigError("timeout_ms must be > 0")
        if int(self.max_in_flight) < 1:
            raise ConfigError("max_in_flight must be >= 1")
        if int(self.dim) < 1:
            raise ConfigError("embedding dimension must be >= 1")
        if self.kind == "remote":
            missing = [c for c in CAPABILITIES if not self.endpoints.get(c)]
            if missing:
                raise ConfigError(f"remote backend lacks endpoints for: {', '.join(missing)}")
        return self


class RunConfig:
    """Central configuration object.

    Every numerical knob of a corpus run lives here, so a config snapshot next
    to the outputs is enough to reproduce them. Defaults are the published
    defaults of the framework (5 tags, 0.2 thresholds, 40 candidates, top-100
    proposals, boxes under 1/400 of the image dropped).

    Paths are :class:`pathlib.Path` or None. When loaded from a file, relative
    paths are resolved against the file's directory.
    """

    def __init__(self, backend=None):
        self.backend = backend or BackendConfig()

        # ----------------
        # Vocabularies
        # ----------------
        self.tag_vocab_path = None
        self.attr_vocab_path = None
        self.object_vocab_path = None
        self.relation_vocab_path = None
        # Directory for embedding caches (one file per vocabulary); None disables.
        self.cache_dir = None

        # ----------------
        # Visual clue extraction
        # ----------------
        self.max_tags = 5
        self.beta = 0.2
        self.nms_iou = 0.5
        self.nms_keep = 100
        self.min_area_fraction = 1.0 / 400.0
        self.with_region_captions = True

        # ----------------
        # Prompt synthesis
        # ----------------
        self.large_fraction = 0.25
        self.moderate_fraction = 0.05
        self.task = "describe"
        self.custom_ending = None
        self.endings = {}
        # Per-task tag count; the ads variant describes a single product.
        self.task_max_tags = {"ads": 1}
        self.ablation = "full"
        self.num_candidates = 40
        self.sampling = SamplingParams()

        # ----------------
        # Candidate selection
        # ----------------
        self.gamma = 0.2

        # ----------------
        # Evaluation
        # ----------------
        self.lexicon_path = None
        self.answer_index_path = None
        self.images_dir = None
        self.reformat_temperature = 0.0
        self.spipe_average = "macro"

        # ----------------
        # Execution / output
        # ----------------
        self.output_path = None
        self.parallelism = 4
        self.log_level = "WARNING"
        self.numpy_seed = 42

    # ------------------------------------------------------------------
    @property
    def effective_max_tags(self):
        return int(self.task_max_tags.get(self.task, self.max_tags))

    def task_ending(self):
        """The configured :class:`TaskEnding` (custom text wins over ``task``)."""
        from .prompting import TaskEnding  # prompting imports config

        return TaskEnding.custom(self.custom_ending) if self.custom_ending else TaskEnding(self.task)

    def validate(self, require_files=True):
        """Check documented ranges; raise :class:`ConfigError` on the first problem."""
        self.backend.validate()
        if int(self.max_tags) < 1:
            raise ConfigError("max_tags (M) must be >= 1")
        for name in ("beta", "gamma"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [-1, 1], got {v}")
        if not 0.0 < self.nms_iou <= 1.0:
            raise ConfigError("nms_iou must lie in (0, 1]")
        if int(self.nms_keep) < 1:
            raise ConfigError("nms_keep must be >= 1")
        if not 0.0 < self.min_area_fraction < 1.0:
            raise ConfigError("min_area_fraction must lie in (0, 1)")
        if not 0.0 < self.moderate_fraction < self.large_fraction <= 1.0:
            raise ConfigError("size thresholds must satisfy 0 < moderate < large <= 1")
        k = int(self.num_candidates)
        if k < 1 or (k > 1 and k % 2):
            raise ConfigError("num_candidates (K) must be 1 or an even number >= 2")
        if int(self.parallelism) < 1:
            raise ConfigError("parallelism must be >= 1")
        if self.spipe_average not in ("macro", "micro"):
            raise ConfigError("spipe_average must be 'macro' or 'micro'")
        if self.sampling.max_tokens < 1:
            raise ConfigError("max_tokens must be >= 1")
        self._validate_prompt_settings()
        if require_files:
            for name in ("tag_vocab_path", "attr_vocab_path", "object_vocab_path",
                         "relation_vocab_path", "lexicon_path", "answer_index_path"):
                p = getattr(self, name)
                if p is not None and not Path(p).is_file():
                    raise ConfigError(f"{name} points to a missing file: {p}")
            if self.images_dir is not None and not Path(self.images_dir).is_dir():
                raise ConfigError(f"images_dir is not a directory: {self.images_dir}")
        return self

    def _validate_prompt_settings(self):
        from .prompting import ClueAblation

        try:
            self.task_ending().render(self.endings)
            ClueAblation.named(self.ablation)
        except InvalidInput as exc:
            raise ConfigError(str(exc)) from exc

    def apply_global_settings(self):
        """Apply global settings (log level + numpy RNG seed)."""
        logging.getLogger("visual_clues").setLevel(str(self.log_level).upper())
        np.random.seed(self.numpy_seed)

    def snapshot(self):
        """JSON-serializable view of the config (paths as strings, no secrets)."""
        d = {}
        for k, v in self.__dict__.items():
            if k == "backend":
                d[k] = {
                    "kind": v.kind, "seed": v.seed, "endpoints": dict(v.endpoints),
                    "timeout_ms": v.timeout_ms, "max_in_flight": v.max_in_flight, "dim": v.dim,
                }
            elif k == "sampling":
                d[k] = {"temperature": v.temperature, "frequency_penalty": v.frequency_penalty,
                        "max_tokens": v.max_tokens}
            elif isinstance(v, Path):
                d[k] = str(v)
            elif isinstance(v, (int, float, str, bool, dict)) or v is None:
                d[k] = v
        return d

    # ------------------------------------------------------------------
    # File loading
    # ------------------------------------------------------------------
    @classmethod
    def from_file(cls, path):
        """Load an INI-style config file.

        Sections: ``[backend]``, ``[vocab]``, ``[data]``, ``[params]``, ``[task]``,
        ``[endings]``, ``[output]``. Unknown keys are rejected so typos surface.
        """
        path = Path(path)
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

        base = path.resolve().parent
        cfg = cls()
        try:
            cfg._load_backend(parser)
            cfg._load_paths(parser, "vocab", base, {
                "tags": "tag_vocab_path", "attributes": "attr_vocab_path",
                "objects": "object_vocab_path", "relations": "relation_vocab_path",
                "cache_dir": "cache_dir",
            })
            cfg._load_paths(parser, "data", base, {
                "lexicon": "lexicon_path", "answers": "answer_index_path", "images": "images_dir",
            })
            cfg._load_params(parser)
            cfg._load_task(parser)
            cfg._load_paths(parser, "output", base, {"path": "output_path"})
            if parser.has_section("output"):
                sec = parser["output"]
                cfg.parallelism = sec.getint("parallelism", cfg.parallelism)
                cfg.log_level = sec.get("log_level", cfg.log_level)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}: {exc}") from exc
        return cfg

    def _load_backend(self, parser):
        if not parser.has_section("backend"):
            return
        sec = parser["backend"]
        _reject_unknown(sec, {"kind", "seed", "base_url", "timeout_ms", "max_in_flight", "dim",
                              "bearer_token", *(f"{c}_url" for c in CAPABILITIES)})
        kind = sec.get("kind", "remote" if "base_url" in sec else "mock")
        common = dict(
            seed=sec.getint("seed", 0),
            timeout_ms=sec.getfloat("timeout_ms", 30000.0),
            max_in_flight=sec.getint("max_in_flight", 8),
            dim=sec.getint("dim", 512),
            bearer_token=sec.get("bearer_token") or None,
        )
        if "base_url" in sec:
            backend = BackendConfig.with_base_url(sec["base_url"], **common)
            backend.kind = kind
        else:
            backend = BackendConfig(kind=kind, **common)
        for c in CAPABILITIES:
            if f"{c}_url" in sec:
                backend.endpoints[c] = sec[f"{c}_url"]
        self.backend = backend

    def _load_paths(self, parser, section, base, mapping):
        if not parser.has_section(section):
            return
        sec = parser[section]
        extra = {"parallelism", "log_level"} if section == "output" else set()
        _reject_unknown(sec, set(mapping) | extra)
        for key, attr in mapping.items():
            if key in sec and sec[key].strip():
                p = Path(sec[key].strip())
                setattr(self, attr, p if p.is_absolute() else base / p)

    def _load_params(self, parser):
        if not parser.has_section("params"):
            return
        sec = parser["params"]
        floats = ("beta", "gamma", "nms_iou", "large_fraction", "moderate_fraction",
                  "reformat_temperature")
        ints = ("max_tags", "nms_keep", "num_candidates", "numpy_seed")
        _reject_unknown(sec, set(floats) | set(ints) | {
            "min_area_fraction", "with_region_captions", "temperature", "frequency_penalty",
            "max_tokens", "spipe_average"})
        for k in floats:
            if k in sec:
                setattr(self, k, sec.getfloat(k))
        for k in ints:
            if k in sec:
                setattr(self, k, sec.getint(k))
        if "min_area_fraction" in sec:
            self.min_area_fraction = _parse_fraction(sec["min_area_fraction"])
        if "with_region_captions" in sec:
            self.with_region_captions = sec.getboolean("with_region_captions")
        if "spipe_average" in sec:
            self.spipe_average = sec["spipe_average"].strip().lower()
        self.sampling = SamplingParams(
            temperature=sec.getfloat("temperature", self.sampling.temperature),
            frequency_penalty=sec.getfloat("frequency_penalty", self.sampling.frequency_penalty),
            max_tokens=sec.getint("max_tokens", self.sampling.max_tokens),
        )

    def _load_task(self, parser):
        if parser.has_section("task"):
            sec = parser["task"]
            _reject_unknown(sec, {"kind", "ending", "ablation"} | {f"max_tags_{k}" for k in _TASK_KEYS})
            self.task = sec.get("kind", self.task).strip().lower()
            self.custom_ending = sec.get("ending", self.custom_ending)
            self.ablation = sec.get("ablation", self.ablation).strip().lower()
            for key in sec:
                if key.startswith("max_tags_"):
                    self.task_max_tags[key[len("max_tags_"):]] = sec.getint(key)
        if parser.has_section("endings"):
            self.endings = {k.strip().lower(): v.strip() for k, v in parser["endings"].items()}


_TASK_KEYS = ("describe", "story", "ads", "social", "textbook", "vqa", "custom")


def _reject_unknown(section, allowed):
    unknown = sorted(set(section.keys()) - set(allowed))
    if unknown:
        raise ConfigError(f"[{section.name}] unknown keys: {', '.join(unknown)}")


def _parse_fraction(text):
    """Accept ``0.0025`` as well as ``1/400``."""
    text = str(text).strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)
