import pytest

from visual_clues.errors import InvalidInput
from visual_clues.images import ImageRef, list_images, resolve_image

from conftest import oversized_png_bytes, png_bytes


def test_from_bytes_reads_frame_size():
    ref = ImageRef.from_bytes("a", png_bytes(0, width=40, height=30))
    assert (ref.width, ref.height) == (40, 30)
    assert len(ref.digest) == 64


@pytest.mark.parametrize("data", [b"", b"not an image", png_bytes(1)[:40], oversized_png_bytes()])
def test_undecodable_bytes_are_invalid_input(data):
    with pytest.raises(InvalidInput, match="cannot decode image 'x'"):
        ImageRef.from_bytes("x", data)


def test_list_and_resolve(tmp_path):
    (tmp_path / "b.png").write_bytes(png_bytes(0))
    (tmp_path / "a.png").write_bytes(png_bytes(1))
    (tmp_path / "notes.txt").write_text("skip me", encoding="utf-8")
    assert [p.name for p in list_images(tmp_path)] == ["a.png", "b.png"]
    assert resolve_image(tmp_path, "b").name == "b.png"
    with pytest.raises(InvalidInput):
        resolve_image(tmp_path, "c")
    with pytest.raises(InvalidInput):
        list_images(tmp_path / "missing")
