import io
import os
import struct
import sys
import zlib
from pathlib import Path

import numpy as np
import pytest
from PIL import Image, ImageDraw

# Allow running tests without installing the package.
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if BASE_DIR not in sys.path:
    sys.path.insert(0, BASE_DIR)

from visual_clues.backends import MockBackend  # noqa: E402
from visual_clues.config import RunConfig  # noqa: E402
from visual_clues.gateway import ModelGateway  # noqa: E402
from visual_clues.images import ImageRef  # noqa: E402
from visual_clues.vocabulary import Vocabulary, read_entries  # noqa: E402

FIXTURES = Path(BASE_DIR) / "tests" / "fixtures"
MOCK_SEED = 7
DIM = 512


GOLDENS = FIXTURES / "goldens"


def check_golden(name, text):
    """Compare ``text`` byte-for-byte with ``tests/fixtures/goldens/<name>``.

    A missing golden (or ``VISUAL_CLUES_REGEN_GOLDENS=1``) writes the file and
    skips; commit it so later runs compare against it.
    """
    path = GOLDENS / name
    if os.environ.get("VISUAL_CLUES_REGEN_GOLDENS") == "1" or not path.is_file():
        GOLDENS.mkdir(parents=True, exist_ok=True)
        path.write_bytes(text.encode("utf-8"))
        pytest.skip(f"wrote golden {path.name}")
    assert path.read_bytes() == text.encode("utf-8")


def png_bytes(seed, width=96, height=64):
    """Small RGB PNG with a few rectangles; different seeds give different bytes."""
    rng = np.random.default_rng(seed)
    im = Image.new("RGB", (width, height), tuple(int(c) for c in rng.integers(0, 256, 3)))
    draw = ImageDraw.Draw(im)
    for _ in range(3):
        x0, y0 = int(rng.integers(0, width - 1)), int(rng.integers(0, height - 1))
        x1, y1 = int(rng.integers(x0 + 1, width + 1)), int(rng.integers(y0 + 1, height + 1))
        draw.rectangle([x0, y0, x1, y1], fill=tuple(int(c) for c in rng.integers(0, 256, 3)))
    buf = io.BytesIO()
    im.save(buf, format="PNG")
    return buf.getvalue()


def oversized_png_bytes(width=20000, height=20000):
    """PNG header declaring a frame far beyond Pillow's pixel limit, no pixel data."""
    def chunk(kind, payload):
        body = kind + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    ihdr = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr) + chunk(b"IEND", b"")


def write_corpus(directory, n=5):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(n):
        p = directory / f"img{i}.png"
        p.write_bytes(png_bytes(i, width=80 + 16 * i, height=60 + 8 * i))
        paths.append(p)
    return paths


def write_config(directory, extra=""):
    """Copy of the fixture config with absolute vocabulary paths."""
    text = (FIXTURES / "run.ini").read_text(encoding="utf-8")
    for name in ("tags.txt", "attributes.txt", "objects.txt", "relations.txt",
                 "lexicon.tsv", "answers.txt"):
        text = text.replace(f"= {name}", f"= {(FIXTURES / name).as_posix()}")
    path = Path(directory) / "run.ini"
    path.write_text(text + extra, encoding="utf-8")
    return path


@pytest.fixture
def gateway():
    return ModelGateway(MockBackend(seed=MOCK_SEED, dim=DIM), dim=DIM)


@pytest.fixture
def image():
    return ImageRef.from_bytes("img0", png_bytes(0, width=640, height=480))


@pytest.fixture
def tag_vocab(gateway):
    return Vocabulary.build(read_entries(FIXTURES / "tags.txt"), gateway)


@pytest.fixture
def attr_vocab(gateway):
    return Vocabulary.build(read_entries(FIXTURES / "attributes.txt"), gateway)


@pytest.fixture
def corpus_dir(tmp_path):
    write_corpus(tmp_path / "images")
    return tmp_path / "images"


@pytest.fixture
def run_config(tmp_path, corpus_dir):
    cfg = RunConfig.from_file(write_config(tmp_path))
    cfg.images_dir = corpus_dir
    return cfg
