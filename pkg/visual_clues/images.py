import base64
import hashlib
import io
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image, UnidentifiedImageError

from .errors import InvalidInput

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp", ".gif", ".webp", ".tif", ".tiff")


@dataclass(frozen=True)
class ImageRef:
    """Encoded image bytes plus the decoded frame size.

    Backends receive the original bytes (base64 on the wire); the frame size is
    needed locally for clamping boxes and phrasing locations.
    """

    image_id: str
    data: bytes = field(repr=False)
    width: int
    height: int

    @classmethod
    def from_bytes(cls, image_id, data):
        try:
            with Image.open(io.BytesIO(data)) as im:
                im.load()
                width, height = im.size
        except (UnidentifiedImageError, Image.DecompressionBombError, OSError, ValueError,
                SyntaxError, EOFError) as exc:
            raise InvalidInput(f"cannot decode image {image_id!r}: {exc}") from exc
        if width <= 0 or height <= 0:
            raise InvalidInput(f"image {image_id!r} has no pixels")
        return cls(str(image_id), bytes(data), int(width), int(height))

    @classmethod
    def load(cls, path, image_id=None):
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise InvalidInput(f"cannot read image {path}: {exc}") from exc
        return cls.from_bytes(image_id or path.stem, data)

    @property
    def digest(self):
        return hashlib.sha256(self.data).hexdigest()

    def b64(self):
        return base64.b64encode(self.data).decode("ascii")


def list_images(source):
    """Resolve ``--images``: a directory (sorted by name) or a text list of paths."""
    source = Path(source)
    if source.is_dir():
        return sorted(p for p in source.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not source.is_file():
        raise InvalidInput(f"no images at {source}")
    base = source.parent
    paths = []
    for line in source.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        p = Path(line)
        paths.append(p if p.is_absolute() else base / p)
    return paths


def resolve_image(directory, image_id):
    """Path of ``<directory>/<image_id>.<suffix>``; first known suffix wins."""
    directory = Path(directory)
    for suffix in IMAGE_SUFFIXES:
        for name in (f"{image_id}{suffix}", f"{image_id}{suffix.upper()}"):
            if (directory / name).is_file():
                return directory / name
    raise InvalidInput(f"no image file for id {image_id!r} in {directory}")
