import json
from pathlib import Path

import pandas as pd

from .errors import ParseError


def ensure_dir(path):
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def write_jsonl(rows, path):
    """Write one JSON object per line (sorted keys, UTF-8, trailing newline per row)."""
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    return path


def save_json(obj, path):
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=float)
    return path


def read_jsonl(path):
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except ValueError as exc:
                raise ParseError(f"{path}: invalid JSON", line=lineno) from exc
    return rows


def save_records(records, out_path):
    """Save describe records as JSONL plus a ``<out>.timings.csv`` sidecar.

    Returns ``(jsonl_path, timings_path)``.
    """
    out_path = Path(out_path)
    write_jsonl([r.to_dict() for r in records], out_path)
    rows = [{"image_id": r.image_id, "ok": r.ok, **r.timings} for r in records]
    timings_path = out_path.with_name(out_path.name + ".timings.csv")
    pd.DataFrame(rows).to_csv(timings_path, index=False)
    return out_path, timings_path


def save_dataframe(df, output_dir, filename):
    """Save a DataFrame to CSV inside ``output_dir``."""
    out = ensure_dir(output_dir)
    p = out / filename
    df.to_csv(p, index=False)
    return p


def save_config_snapshot(cfg, output_dir):
    """Persist the config next to the outputs (reproducibility)."""
    out = ensure_dir(output_dir)
    path = out / "config_snapshot.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(cfg.snapshot(), f, indent=2, sort_keys=True)
    return path


# ----------------------------------------------------------------------
# SPIPE tables
# ----------------------------------------------------------------------
def spipe_frame(item_scores):
    """Per-item DataFrame from ``[(item_id, SpipeScore), ...]``."""
    return pd.DataFrame([{"id": i, **s.as_row()} for i, s in item_scores])


def format_spipe_table(rows):
    """Fixed-width ``F-score Precision Recall`` table, percent with one decimal.

    ``rows`` is a list of ``(label, SpipeScore)``.
    """
    width = max([len("Method")] + [len(str(label)) for label, _ in rows])
    lines = [f"{'Method':<{width}}  {'F-score':>7}  {'Precision':>9}  {'Recall':>6}"]
    for label, s in rows:
        lines.append(f"{label:<{width}}  {100 * s.f1:>7.1f}  {100 * s.precision:>9.1f}  {100 * s.recall:>6.1f}")
    return "\n".join(lines)


def spipe_report(item_scores, corpus, breakdown, average):
    """Report dict written by ``spipe --out``."""
    return {
        "average": average,
        "corpus": {k: round(100 * getattr(corpus, k), 1) for k in ("f1", "precision", "recall")},
        "by_kind": {
            kind: {k: round(100 * float(row[k]), 1) for k in ("f1", "precision", "recall")}
            for kind, row in breakdown.iterrows()
        },
        "items": [{"id": i, **s.as_row()} for i, s in item_scores],
    }


# ----------------------------------------------------------------------
# Figures
# ----------------------------------------------------------------------
def maybe_plot_spipe_scores(breakdown, output_dir, filename="spipe_by_kind.png"):
    """Bar chart of F-score per tuple class.

    If matplotlib is not available, this function does nothing.
    """
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception:
        return None

    fig = plt.figure()
    ax = fig.add_subplot(111)
    ax.bar(list(breakdown.index), 100 * breakdown["f1"].values)
    ax.set_ylabel("F-score (%)")
    fig.tight_layout()

    out = ensure_dir(Path(output_dir) / "figures")
    p = out / filename
    fig.savefig(p, dpi=200)
    plt.close(fig)
    return p


def maybe_plot_stage_timings(records, output_dir, filename="stage_timings.png"):
    """Mean milliseconds per pipeline stage over the successful records."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception:
        return None

    df = pd.DataFrame([r.timings for r in records if r.ok and r.timings])
    if df.empty:
        return None
    means = df.mean()

    fig = plt.figure()
    ax = fig.add_subplot(111)
    ax.bar(list(means.index), means.values)
    ax.set_ylabel("Mean time (ms)")
    fig.tight_layout()

    out = ensure_dir(Path(output_dir) / "figures")
    p = out / filename
    fig.savefig(p, dpi=200)
    plt.close(fig)
    return p
