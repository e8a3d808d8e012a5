import json

import pytest

from visual_clues.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, main

from conftest import FIXTURES, oversized_png_bytes, write_config, write_corpus


def read_rows(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def config_with_images(tmp_path, images):
    path = write_config(tmp_path)
    text = path.read_text(encoding="utf-8").replace("[data]\n", f"[data]\nimages = {images.as_posix()}\n")
    path.write_text(text, encoding="utf-8")
    return path


# ----------------------------------------------------------------------
# describe
# ----------------------------------------------------------------------
def test_describe_is_reproducible(tmp_path, corpus_dir):
    cfg = write_config(tmp_path)
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run / "out.jsonl"
        code = main(["describe", "--config", str(cfg), "--images", str(corpus_dir),
                     "--out", str(out), "--seed", "7"])
        assert code == EXIT_OK
        outs.append(out)
    assert outs[0].read_bytes() == outs[1].read_bytes()

    rows = read_rows(outs[0])
    assert [r["image_id"] for r in rows] == [f"img{i}" for i in range(5)]
    for r in rows:
        assert len(r["candidates"]) == 6
        assert r["description"] == " ".join(r["final_text"])
        assert 0 <= r["selected"] < len(r["candidates"])
    assert (tmp_path / "a" / "out.jsonl.timings.csv").is_file()
    assert (tmp_path / "a" / "config_snapshot.json").is_file()


def test_describe_parallelism_does_not_change_output(tmp_path, corpus_dir):
    cfg = write_config(tmp_path)
    serial, pooled = tmp_path / "serial.jsonl", tmp_path / "pooled.jsonl"
    main(["describe", "--config", str(cfg), "--images", str(corpus_dir), "--out", str(serial),
          "--parallelism", "1"])
    main(["describe", "--config", str(cfg), "--images", str(corpus_dir), "--out", str(pooled),
          "--parallelism", "4"])
    assert serial.read_bytes() == pooled.read_bytes()


def test_describe_empty_directory(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    out = tmp_path / "out.jsonl"
    code = main(["describe", "--config", str(write_config(tmp_path)), "--images", str(empty),
                 "--out", str(out)])
    assert code == EXIT_OK
    assert out.read_text(encoding="utf-8") == ""


def test_describe_reports_corrupt_images(tmp_path, corpus_dir):
    (corpus_dir / "img9.png").write_bytes(b"not a png at all")
    out = tmp_path / "out.jsonl"
    code = main(["describe", "--config", str(write_config(tmp_path)), "--images", str(corpus_dir),
                 "--out", str(out)])
    assert code == EXIT_PARTIAL
    rows = read_rows(out)
    assert len(rows) == 6
    errors = [r for r in rows if "error" in r]
    assert [r["image_id"] for r in errors] == ["img9"]


def test_describe_survives_oversized_images(tmp_path, corpus_dir):
    (corpus_dir / "huge.png").write_bytes(oversized_png_bytes())
    out = tmp_path / "out.jsonl"
    code = main(["describe", "--config", str(write_config(tmp_path)), "--images", str(corpus_dir),
                 "--out", str(out)])
    assert code == EXIT_PARTIAL
    rows = read_rows(out)
    (bad,) = [r for r in rows if "error" in r]
    assert bad["image_id"] == "huge"
    assert sorted(r["image_id"] for r in rows if "error" not in r) == [f"img{i}" for i in range(5)]


def test_describe_with_supplied_clues(tmp_path):
    images = tmp_path / "images"
    write_corpus(images, n=1)
    clues = json.loads((FIXTURES / "donut_clues.json").read_text(encoding="utf-8"))
    clues.update(image_id="img0", width=80, height=60, regions=[])
    clues_path = tmp_path / "clues.jsonl"
    clues_path.write_text(json.dumps(clues) + "\n", encoding="utf-8")
    out = tmp_path / "out.jsonl"
    code = main(["describe", "--config", str(write_config(tmp_path)), "--images", str(images),
                 "--clues", str(clues_path), "--out", str(out), "--ablation", "no-caption"])
    assert code == EXIT_OK
    (row,) = read_rows(out)
    assert row["clues"]["tags"] == clues["tags"]
    assert all("Caption:" not in p for p in row["prompts"])


def test_bad_config_exits_with_one(tmp_path, corpus_dir):
    bad = tmp_path / "bad.ini"
    bad.write_text("[params]\nnum_candidates = 3\n", encoding="utf-8")
    assert main(["describe", "--config", str(bad), "--images", str(corpus_dir),
                 "--out", str(tmp_path / "o.jsonl")]) == EXIT_CONFIG
    unknown = tmp_path / "unknown.ini"
    unknown.write_text("[params]\nkay = 3\n", encoding="utf-8")
    assert main(["describe", "--config", str(unknown), "--images", str(corpus_dir)]) == EXIT_CONFIG


def test_describe_passes_scene_text_to_extraction(tmp_path, corpus_dir):
    ocr = tmp_path / "ocr.jsonl"
    ocr.write_text(json.dumps({"id": "img1", "text": "OPEN  24\nHOURS"}) + "\n", encoding="utf-8")
    out = tmp_path / "out.jsonl"
    code = main(["describe", "--config", str(write_config(tmp_path)), "--images", str(corpus_dir),
                 "--ocr", str(ocr), "--out", str(out)])
    assert code == EXIT_OK
    rows = {r["image_id"]: r for r in read_rows(out)}
    assert rows["img1"]["clues"]["ocr_text"] == "OPEN  24\nHOURS"
    assert all("This image contains text: OPEN 24 HOURS" in p for p in rows["img1"]["prompts"])
    assert rows["img0"]["clues"]["ocr_text"] is None
    assert not any("This image contains text:" in p for p in rows["img0"]["prompts"])


def test_describe_rejects_malformed_ocr_file(tmp_path, corpus_dir):
    ocr = tmp_path / "ocr.jsonl"
    ocr.write_text('{"id": "img1"}\n', encoding="utf-8")
    code = main(["describe", "--config", str(write_config(tmp_path)), "--images", str(corpus_dir),
                 "--ocr", str(ocr), "--out", str(tmp_path / "out.jsonl")])
    assert code == EXIT_CONFIG


def test_unknown_task_stops_before_any_image(tmp_path, corpus_dir, monkeypatch):
    from visual_clues.pipeline import DescribePipeline

    def fail(*args, **kwargs):
        raise AssertionError("no image should be described")

    monkeypatch.setattr(DescribePipeline, "describe_path", fail)
    out = tmp_path / "out.jsonl"
    code = main(["describe", "--config", str(write_config(tmp_path)), "--images", str(corpus_dir),
                 "--out", str(out), "--task", "stroy"])
    assert code == EXIT_CONFIG
    assert not out.exists()
    bad_kind = write_config(tmp_path)
    text = bad_kind.read_text(encoding="utf-8").replace("kind = describe", "kind = vqa")
    bad_kind.write_text(text, encoding="utf-8")
    assert main(["describe", "--config", str(bad_kind), "--images", str(corpus_dir),
                 "--out", str(out)]) == EXIT_CONFIG


# ----------------------------------------------------------------------
# spipe
# ----------------------------------------------------------------------
def write_graphs(path, graphs):
    path.write_text("".join(json.dumps({"id": k, **g}) + "\n" for k, g in graphs.items()),
                    encoding="utf-8")
    return path


GRAPHS = {
    "a": {"objects": ["man", "snowboard"], "attributes": [["snowboard", "blue"]],
          "relations": [["man", "in front of", "snowboard"]]},
    "b": {"objects": ["couch", "dog"], "attributes": [], "relations": [["dog", "on", "couch"]]},
}


def test_spipe_identical_graphs(tmp_path, capsys):
    cands = write_graphs(tmp_path / "c.jsonl", GRAPHS)
    refs = write_graphs(tmp_path / "r.jsonl", GRAPHS)
    out = tmp_path / "report" / "spipe.json"
    code = main(["spipe", "--candidates", str(cands), "--references", str(refs),
                 "--lexicon", str(FIXTURES / "lexicon.tsv"), "--out", str(out), "--label", "ours"])
    assert code == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["corpus"] == {"f1": 100.0, "precision": 100.0, "recall": 100.0}
    assert (tmp_path / "report" / "spipe.items.csv").is_file()
    printed = capsys.readouterr().out.splitlines()
    assert printed[0].split() == ["Method", "F-score", "Precision", "Recall"]
    assert printed[1].split() == ["ours", "100.0", "100.0", "100.0"]


def test_spipe_reads_conllu_directories(tmp_path):
    cands, refs = tmp_path / "cands", tmp_path / "refs"
    cands.mkdir()
    refs.mkdir()
    (cands / "x.conllu").write_text((FIXTURES / "snowboard.conllu").read_text(encoding="utf-8"),
                                    encoding="utf-8")
    (refs / "x.json").write_text(json.dumps(GRAPHS["a"] | {"attributes": [["snowboard", "blue"],
                                                                            ["man", "sitting"]]}),
                                 encoding="utf-8")
    out = tmp_path / "spipe.json"
    assert main(["spipe", "--candidates", str(cands), "--references", str(refs),
                 "--out", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["corpus"]["f1"] == 100.0


def test_spipe_id_mismatch(tmp_path, capsys):
    cands = write_graphs(tmp_path / "c.jsonl", GRAPHS)
    refs = write_graphs(tmp_path / "r.jsonl", {"a": GRAPHS["a"]})
    assert main(["spipe", "--candidates", str(cands), "--references", str(refs)]) == EXIT_CONFIG
    assert "b" in capsys.readouterr().err


def test_spipe_bad_input(tmp_path):
    cands = tmp_path / "c.jsonl"
    cands.write_text('{"id": "a", "objects": ["x"]}\n{broken\n', encoding="utf-8")
    assert main(["spipe", "--candidates", str(cands), "--references", str(cands)]) == EXIT_CONFIG
    assert main(["spipe", "--candidates", str(tmp_path / "none"), "--references", str(cands)]) == EXIT_CONFIG


def test_spipe_rejects_duplicate_ids(tmp_path, capsys):
    cands = tmp_path / "c.jsonl"
    cands.write_text("".join(json.dumps({"id": "a", **g}) + "\n" for g in GRAPHS.values()),
                     encoding="utf-8")
    refs = write_graphs(tmp_path / "r.jsonl", {"a": GRAPHS["a"]})
    assert main(["spipe", "--candidates", str(cands), "--references", str(refs)]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "duplicate id 'a'" in err and "line 2" in err


# ----------------------------------------------------------------------
# vqa / baseline
# ----------------------------------------------------------------------
@pytest.mark.parametrize("mode", ["generative", "discriminative"])
def test_vqa_modes(tmp_path, corpus_dir, capsys, mode):
    cfg = config_with_images(tmp_path, corpus_dir)
    out = tmp_path / f"{mode}.jsonl"
    code = main(["vqa", "--config", str(cfg), "--data", str(FIXTURES / "vqa.jsonl"),
                 "--mode", mode, "--out", str(out)])
    assert code == EXIT_OK
    rows = read_rows(out)
    assert len(rows) == 4
    assert all(r["short_answer"] is not None and r["error"] is None for r in rows)
    if mode == "discriminative":
        answers = set((FIXTURES / "answers.txt").read_text(encoding="utf-8").split("\n")) - {""}
        assert all(r["final_answer"] in answers for r in rows)
    assert mode in capsys.readouterr().out


def test_vqa_needs_images(tmp_path):
    code = main(["vqa", "--config", str(write_config(tmp_path)), "--data", str(FIXTURES / "vqa.jsonl"),
                 "--mode", "generative"])
    assert code == EXIT_CONFIG


def test_baseline(tmp_path, corpus_dir):
    out = tmp_path / "graphs.jsonl"
    code = main(["baseline", "--config", str(write_config(tmp_path)), "--images", str(corpus_dir),
                 "--out", str(out)])
    rows = read_rows(out)
    assert [r["id"] for r in rows] == [f"img{i}" for i in range(5)]
    assert code == (EXIT_PARTIAL if any("error" in r for r in rows) else EXIT_OK)
    for r in rows:
        if "error" in r:
            continue
        n = len(r["attributes"])
        assert n >= 1
        assert len(r["relations"]) == n * (n - 1) // 2
