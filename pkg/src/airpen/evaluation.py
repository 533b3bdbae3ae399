"""Metrics, confusion matrices, latency benchmarks, comparison reports.

The report path writes three artifacts per run: an aligned text table
to stdout, a tab-delimited report.tsv + report.json, and matplotlib
figures (per-model confusion heatmaps and a macro-F1 bar chart).
"""
from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .classifiers import ClassifierModel
from .errors import InvalidArgumentError, ModelError
from .gestures import CLASS_NAMES, GestureClass

UNCLASSIFIED_COL = len(CLASS_NAMES)  # confusion matrices are (10, 11)


def confusion(decisions) -> np.ndarray:
    """Tally (true class, decision) pairs; None decisions -> last column."""
    decisions = list(decisions)
    if not decisions:
        raise InvalidArgumentError("cannot tally an empty decision list")
    cm = np.zeros((len(CLASS_NAMES), len(CLASS_NAMES) + 1), dtype=np.int64)
    for true_cls, decision in decisions:
        col = UNCLASSIFIED_COL if decision is None else int(decision)
        cm[int(true_cls), col] += 1
    return cm


@dataclass(frozen=True)
class MetricsReport:
    precision: np.ndarray  # per class
    recall: np.ndarray
    f1: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    # F1 of the macro precision/recall pair, emitted alongside the
    # canonical mean-of-per-class-F1 aggregation.
    macro_f1_harmonic: float
    accuracy_excluding_unclassified: float
    accuracy_overall: float

    def as_dict(self):
        return {
            "per_class": {
                name: {"precision": float(self.precision[i]),
                       "recall": float(self.recall[i]),
                       "f1": float(self.f1[i])}
                for i, name in enumerate(CLASS_NAMES)
            },
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "macro_f1_harmonic": self.macro_f1_harmonic,
            "accuracy_excluding_unclassified": self.accuracy_excluding_unclassified,
            "accuracy_overall": self.accuracy_overall,
        }


def metrics(cm: np.ndarray) -> MetricsReport:
    cm = np.asarray(cm)
    if cm.shape != (len(CLASS_NAMES), len(CLASS_NAMES) + 1):
        raise InvalidArgumentError(f"confusion matrix must be 10x11, got {cm.shape}")
    classified = cm[:, :UNCLASSIFIED_COL]
    if classified.sum() == 0:
        raise ModelError("all decisions are Unclassified; metrics undefined")
    tp = np.diag(classified).astype(np.float64)
    predicted = classified.sum(axis=0).astype(np.float64)
    actual = cm.sum(axis=1).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / predicted, 0.0)
        recall = np.where(actual > 0, tp / actual, 0.0)
        denom = precision + recall
        f1 = np.where(denom > 0, 2 * precision * recall / np.where(denom > 0, denom, 1), 0.0)
    mp = float(precision.mean())
    mr = float(recall.mean())
    harm = 0.0 if mp + mr == 0 else 2 * mp * mr / (mp + mr)
    return MetricsReport(
        precision=precision, recall=recall, f1=f1,
        macro_precision=mp, macro_recall=mr, macro_f1=float(f1.mean()),
        macro_f1_harmonic=float(harm),
        accuracy_excluding_unclassified=float(tp.sum() / classified.sum()),
        accuracy_overall=float(tp.sum() / cm.sum()),
    )


def evaluate_decisions(model: ClassifierModel, samples, threshold: float | None = None):
    """(true, decision) pairs for every sample; threshold None = raw argmax."""
    from .streaming import decide
    pairs = []
    for s in samples:
        pred = model.predict(s.trajectory)
        if threshold is None:
            pairs.append((s.label, pred.argmax_class))
        else:
            pairs.append((s.label, decide(pred, threshold)))
    return pairs


@dataclass(frozen=True)
class LatencyReport:
    mean_ms: float
    p50_ms: float
    p95_ms: float
    max_ms: float

    def as_dict(self):
        return {"mean_ms": self.mean_ms, "p50_ms": self.p50_ms,
                "p95_ms": self.p95_ms, "max_ms": self.max_ms}


def benchmark_latency(model: ClassifierModel, testset, repeats: int = 30) -> LatencyReport:
    """Wall-clock per single-trajectory prediction; one warm-up excluded."""
    if repeats < 10:
        raise InvalidArgumentError("repeats must be >= 10")
    if not testset:
        raise InvalidArgumentError("empty test set")
    from .trajectory import preprocess
    norms = [preprocess(s.trajectory, model.preprocess_cfg.smooth_window,
                        model.preprocess_cfg.L) for s in testset]
    model.predict(norms[0])  # warm-up
    times = []
    for r in range(repeats):
        norm = norms[r % len(norms)]
        t0 = time.perf_counter()
        model.predict(norm)
        times.append((time.perf_counter() - t0) * 1000.0)
    arr = np.asarray(times)
    return LatencyReport(float(arr.mean()), float(np.percentile(arr, 50)),
                         float(np.percentile(arr, 95)), float(arr.max()))


def _confusion_figure(cm: np.ndarray, kind: str, path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(7, 5.5))
    im = ax.imshow(cm, cmap="Blues")
    ax.set_xticks(range(len(CLASS_NAMES) + 1),
                  CLASS_NAMES + ["Unclassified"], rotation=60, ha="right", fontsize=7)
    ax.set_yticks(range(len(CLASS_NAMES)), CLASS_NAMES, fontsize=7)
    ax.set_xlabel("decision")
    ax.set_ylabel("true class")
    ax.set_title(f"{kind} confusion")
    for i in range(cm.shape[0]):
        for j in range(cm.shape[1]):
            if cm[i, j]:
                ax.text(j, i, str(cm[i, j]), ha="center", va="center", fontsize=6,
                        color="white" if cm[i, j] > cm.max() / 2 else "black")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _f1_figure(rows: list[dict], path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 4))
    kinds = [r["kind"] for r in rows]
    ax.bar(kinds, [r["macro_f1"] for r in rows], color="#3b6ea5")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("macro F1")
    ax.set_title("classifier comparison")
    for i, r in enumerate(rows):
        ax.text(i, r["macro_f1"] + 0.01, f"{r['macro_f1']:.3f}", ha="center", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


REPORT_COLUMNS = ("kind", "macro_precision", "macro_recall", "macro_f1",
                  "macro_f1_harmonic", "accuracy", "mean_latency_ms")


def compare_report(models: dict[str, ClassifierModel], dataset,
                   out_dir: str | None = None, repeats: int = 30):
    """One row per model over dataset.test; returns (text table, rows).

    With out_dir set, also writes report.tsv, report.json, a confusion
    heatmap per model and the macro-F1 comparison figure.
    """
    rows = []
    matrices = {}
    for kind, model in models.items():
        if model is None:
            raise ModelError(f"model {kind!r} is not trained")
        cm = confusion(evaluate_decisions(model, dataset.test))
        rep = metrics(cm)
        lat = benchmark_latency(model, dataset.test, repeats)
        matrices[kind] = cm
        rows.append({
            "kind": kind,
            "macro_precision": rep.macro_precision,
            "macro_recall": rep.macro_recall,
            "macro_f1": rep.macro_f1,
            "macro_f1_harmonic": rep.macro_f1_harmonic,
            "accuracy": rep.accuracy_overall,
            "mean_latency_ms": lat.mean_ms,
            "latency": lat.as_dict(),
            "metrics": rep.as_dict(),
        })

    header = f"{'model':<10}{'prec':>8}{'rec':>8}{'F1':>8}{'F1(hm)':>8}{'acc':>8}{'ms':>9}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(f"{r['kind']:<10}{r['macro_precision']:>8.3f}{r['macro_recall']:>8.3f}"
                     f"{r['macro_f1']:>8.3f}{r['macro_f1_harmonic']:>8.3f}"
                     f"{r['accuracy']:>8.3f}{r['mean_latency_ms']:>9.2f}")
    text = "\n".join(lines)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.tsv"), "w") as fh:
            fh.write("\t".join(REPORT_COLUMNS) + "\n")
            for r in rows:
                fh.write("\t".join(repr(r[c]) if not isinstance(r[c], str) else r[c]
                                   for c in REPORT_COLUMNS) + "\n")
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            json.dump(rows, fh, indent=2)
        for kind, cm in matrices.items():
            _confusion_figure(cm, kind, os.path.join(out_dir, f"confusion_{kind}.png"))
        _f1_figure(rows, os.path.join(out_dir, "f1_comparison.png"))
    return text, rows
