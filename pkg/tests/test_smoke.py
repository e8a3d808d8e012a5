import os
import sys

# Allow running tests without installing the package.
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if BASE_DIR not in sys.path:
    sys.path.insert(0, BASE_DIR)

from visual_clues import DescribePipeline, ModelGateway, RunConfig  # noqa: E402
from visual_clues.scene_graph import SceneGraph, spipe  # noqa: E402

from conftest import write_config, write_corpus  # noqa: E402


def test_smoke_run(tmp_path):
    """Basic smoke test: load config, extract clues, generate, select, filter.

    This is not a test of description quality; it checks that the code runs
    end-to-end on the mock backend without exploding.
    """
    cfg = RunConfig.from_file(write_config(tmp_path))
    cfg.cache_dir = tmp_path / "cache"
    cfg.validate()
    cfg.apply_global_settings()

    paths = write_corpus(tmp_path / "images", n=3)
    gateway = ModelGateway.from_config(cfg.backend, cfg.sampling)
    pipeline = DescribePipeline.from_config(cfg, gateway)
    records = pipeline.run(paths)

    assert [r.image_id for r in records] == ["img0", "img1", "img2"]
    for r in records:
        assert r.ok, r.error
        assert len(r.clues.tags) <= cfg.max_tags
        assert len(r.candidates) == cfg.num_candidates
        assert r.final_text
        assert set(r.timings) == {"extract", "synthesize", "select", "filter"}
        assert -1.0 <= r.candidates[r.selected].similarity <= 1.0

    # Second pipeline reuses the vocabulary embedding caches.
    assert len(list((tmp_path / "cache").glob("*.emb"))) == 2
    again = DescribePipeline.from_config(cfg, gateway).run(paths)
    assert [r.to_dict() for r in again] == [r.to_dict() for r in records]

    g = SceneGraph(objects=["dog"], relations=[("dog", "on", "couch")])
    assert spipe(g, g).f1 == 1.0
