"""Command-line entry point: ``describe``, ``spipe``, ``vqa`` and ``baseline``.

Exit codes: 0 success, 1 configuration or input error, 2 partial failure
(some images or questions failed; the others were still written).
"""

import argparse
import logging
import sys
from pathlib import Path

from .clues import VisualClues
from .config import BackendConfig, RunConfig
from .errors import ConfigError, InvalidInput, ParseError, VisualCluesError
from .gateway import ModelGateway
from .images import ImageRef, list_images
from .pipeline import DescribePipeline, load_vocabulary
from .reporting import (
    format_spipe_table,
    maybe_plot_spipe_scores,
    maybe_plot_stage_timings,
    read_jsonl,
    save_config_snapshot,
    save_dataframe,
    save_json,
    save_records,
    spipe_frame,
    spipe_report,
    write_jsonl,
)
from .scene_graph import (
    SceneGraph,
    SynonymLexicon,
    baseline_regions,
    breakdown_frame,
    corpus_scores,
    graph_from_parses,
    ingest_dependencies,
    naive_baseline_graph,
    spipe,
)
from .vqa import AnswerIndex, VqaEvaluator, load_vqa_items, score_accuracy

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARTIAL = 2


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------
def _load_config(args):
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    if getattr(args, "seed", None) is not None:
        cfg.backend = BackendConfig.mock(args.seed, dim=cfg.backend.dim)
    if getattr(args, "ablation", None):
        cfg.ablation = args.ablation
    if getattr(args, "task", None):
        cfg.task = args.task
    if getattr(args, "parallelism", None):
        cfg.parallelism = args.parallelism
    if getattr(args, "verbose", False):
        cfg.log_level = "DEBUG"
    cfg.validate()
    cfg.apply_global_settings()
    return cfg


def _read_clues(path):
    rows = read_jsonl(path)
    try:
        clues = [VisualClues.from_dict(r) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: bad visual clues record: {exc}") from exc
    return {c.image_id: c for c in clues}


def _read_ocr(path):
    """``{"id": ..., "text": ...}`` per line: precomputed scene text by image id."""
    texts = {}
    for lineno, row in enumerate(read_jsonl(path), start=1):
        item_id = row.get("id", row.get("image_id"))
        text = row.get("text", row.get("ocr_text"))
        if item_id is None or not isinstance(text, str):
            raise ParseError(f"{path}: OCR record needs an id and a text", line=lineno)
        texts[str(item_id)] = text
    return texts


def _read_graph_dir(directory):
    """``<id>.json`` scene graphs and ``<id>.conllu`` parses of a directory."""
    graphs = {}
    for p in sorted(Path(directory).iterdir()):
        if p.suffix == ".json":
            graphs[p.stem] = SceneGraph.load(p)
        elif p.suffix == ".conllu":
            graphs[p.stem] = graph_from_parses(ingest_dependencies(p.read_text(encoding="utf-8")))
    return graphs


def _read_graph_jsonl(path):
    """One object per line with ``id`` and either graph fields or ``conllu`` text."""
    graphs = {}
    for lineno, row in enumerate(read_jsonl(path), start=1):
        item_id = row.get("id", row.get("image_id"))
        if item_id is None:
            raise ParseError(f"{path}: record without an id", line=lineno)
        if str(item_id) in graphs:
            raise ParseError(f"{path}: duplicate id {item_id!r}", line=lineno)
        if "conllu" in row:
            graphs[str(item_id)] = graph_from_parses(ingest_dependencies(row["conllu"]))
        else:
            graphs[str(item_id)] = SceneGraph.from_dict(row)
    return graphs


def read_graphs(source):
    source = Path(source)
    if source.is_dir():
        return _read_graph_dir(source)
    if source.is_file():
        return _read_graph_jsonl(source)
    raise InvalidInput(f"no scene graphs at {source}")


# ----------------------------------------------------------------------
# Sub-commands
# ----------------------------------------------------------------------
def cmd_describe(args):
    cfg = _load_config(args)
    out = Path(args.out or cfg.output_path or "describe.jsonl")
    paths = list_images(args.images)
    clues_by_id = _read_clues(args.clues) if args.clues else None
    ocr_by_id = _read_ocr(args.ocr) if args.ocr else None

    print(f"--- describe: {len(paths)} images, K={cfg.num_candidates}, task={cfg.task} ---")
    gateway = ModelGateway.from_config(cfg.backend, cfg.sampling)
    try:
        pipeline = DescribePipeline.from_config(cfg, gateway)
        records = pipeline.run(paths, clues_by_id, ocr_by_id)
    finally:
        gateway.close()

    jsonl_path, timings_path = save_records(records, out)
    save_config_snapshot(cfg, out.parent)
    if args.plots:
        maybe_plot_stage_timings(records, out.parent)

    failed = [r for r in records if not r.ok]
    for r in records:
        status = "ERROR " + r.error if not r.ok else " ".join(r.final_text)[:70]
        print(f"{r.image_id:<20} | {status}")
    print(f"\nSaved: {jsonl_path} ({len(records) - len(failed)} ok, {len(failed)} failed)")
    print(f"Saved: {timings_path}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_spipe(args):
    lexicon = SynonymLexicon.load(args.lexicon) if args.lexicon else None
    candidates = read_graphs(args.candidates)
    references = read_graphs(args.references)

    missing_refs = sorted(set(candidates) - set(references))
    missing_cands = sorted(set(references) - set(candidates))
    if missing_refs or missing_cands:
        if missing_refs:
            print(f"no reference graph for: {', '.join(missing_refs)}", file=sys.stderr)
        if missing_cands:
            print(f"no candidate graph for: {', '.join(missing_cands)}", file=sys.stderr)
        return EXIT_CONFIG

    item_scores = [(i, spipe(candidates[i], references[i], lexicon)) for i in sorted(candidates)]
    scores = [s for _, s in item_scores]
    corpus = corpus_scores(scores, args.average)
    breakdown = breakdown_frame(scores, args.average)

    rows = [(args.label, corpus)] + [(f"  {kind}", corpus_scores(
        [s.breakdown[kind] for s in scores], args.average)) for kind in breakdown.index]
    print(format_spipe_table(rows))

    if args.out:
        out = Path(args.out)
        save_json(spipe_report(item_scores, corpus, breakdown, args.average), out)
        save_dataframe(spipe_frame(item_scores), out.parent, out.stem + ".items.csv")
        if args.plots:
            maybe_plot_spipe_scores(breakdown, out.parent)
        print(f"\nSaved: {out}")
    return EXIT_OK


def cmd_vqa(args):
    cfg = _load_config(args)
    if cfg.images_dir is None:
        raise ConfigError("vqa needs [data] images")
    items = load_vqa_items(args.data)
    if not items:
        raise InvalidInput(f"{args.data}: VQA dataset is empty")

    gateway = ModelGateway.from_config(cfg.backend, cfg.sampling)
    try:
        pipeline = DescribePipeline.from_config(cfg, gateway)
        index = None
        if args.mode == "discriminative":
            if cfg.answer_index_path is None:
                raise ConfigError("discriminative mode needs [data] answers")
            index = AnswerIndex.load(cfg.answer_index_path, gateway)
        evaluator = VqaEvaluator(pipeline.extractor, cfg.images_dir, index,
                                 reformat_temperature=cfg.reformat_temperature,
                                 parallelism=cfg.parallelism, **pipeline.serialize_kwargs)
        items = evaluator.run(items)
    finally:
        gateway.close()

    answered = [i for i in items if i.error is None]
    failed = len(items) - len(answered)
    accuracy = score_accuracy(answered, args.mode) if answered else 0.0
    print(f"{'MODE':<15} | {'ITEMS':>6} | {'FAILED':>6} | {'ACCURACY':>8}")
    print("-" * 46)
    print(f"{args.mode:<15} | {len(items):>6} | {failed:>6} | {100 * accuracy:>8.2f}")

    if args.out:
        write_jsonl([i.to_dict() for i in items], args.out)
        print(f"\nSaved: {args.out}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_baseline(args):
    cfg = _load_config(args)
    paths = list_images(args.images)
    gateway = ModelGateway.from_config(cfg.backend, cfg.sampling)
    rows, failed = [], 0
    try:
        pipeline = DescribePipeline.from_config(cfg, gateway)
        objects = load_vocabulary(cfg, cfg.object_vocab_path, gateway, "object")
        relations = load_vocabulary(cfg, cfg.relation_vocab_path, gateway, "relation")
        for path in paths:
            try:
                image = ImageRef.load(path)
                regions = baseline_regions(pipeline.extractor, image)
                graph = naive_baseline_graph(regions, objects, pipeline.extractor.attr_vocab,
                                             relations, gateway, image)
                rows.append({"id": image.image_id, **graph.to_dict()})
            except VisualCluesError as exc:
                LOG.warning("baseline on %s failed: %s", path, exc)
                rows.append({"id": Path(path).stem, "error": str(exc)})
                failed += 1
    finally:
        gateway.close()

    out = Path(args.out)
    write_jsonl(rows, out)
    print(f"Saved: {out} ({len(rows) - failed} graphs, {failed} failed)")
    return EXIT_PARTIAL if failed else EXIT_OK


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------
def build_parser():
    parser = argparse.ArgumentParser(prog="visual_clues",
                                     description="Visual-clue paragraph captioning toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def _model_args(p):
        p.add_argument("--config", required=True, help="INI run configuration")
        p.add_argument("--seed", type=int, default=None, help="use mock backends with this seed")
        p.add_argument("--parallelism", type=int, default=None)

    p = sub.add_parser("describe", help="describe a corpus of images")
    _model_args(p)
    p.add_argument("--images", required=True, help="image directory or list file")
    p.add_argument("--out", default=None, help="output JSONL")
    p.add_argument("--clues", default=None, help="JSONL of visual clues to use instead of extraction")
    p.add_argument("--ocr", default=None, help="JSONL of {id, text} scene text passed to extraction")
    p.add_argument("--ablation", default=None, choices=["full", "no-regions", "no-caption", "tags-only"])
    p.add_argument("--task", default=None, help="task ending kind (describe, story, ads, ...)")
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("spipe", help="score candidate scene graphs against references")
    p.add_argument("--candidates", required=True, help="JSONL file or directory of graphs / parses")
    p.add_argument("--references", required=True, help="directory or JSONL of reference graphs")
    p.add_argument("--lexicon", default=None, help="word<TAB>synsets file")
    p.add_argument("--out", default=None, help="report JSON")
    p.add_argument("--average", default="macro", choices=["macro", "micro"])
    p.add_argument("--label", default="candidate")
    p.add_argument("--plots", action="store_true")
    p.set_defaults(func=cmd_spipe)

    p = sub.add_parser("vqa", help="answer and score a VQA dataset")
    _model_args(p)
    p.add_argument("--data", required=True, help="JSONL of {image, question, answer}")
    p.add_argument("--mode", required=True, choices=["generative", "discriminative"])
    p.add_argument("--out", default=None, help="per-item answers JSONL")
    p.set_defaults(func=cmd_vqa)

    p = sub.add_parser("baseline", help="region-based scene graphs for a corpus")
    _model_args(p)
    p.add_argument("--images", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, ParseError, InvalidInput, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
