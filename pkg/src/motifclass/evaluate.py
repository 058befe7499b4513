"""Classification metrics and diagnostic analyses.

Gold labels enter the pipeline only here (via CorpusStore.gold_labels).
Micro-F1 is globally aggregated and equals accuracy for single-label
classification; Macro-F1 is the unweighted mean of per-class F1, where a
class with no gold and no predicted instances contributes 0.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import PipelineError

PSEUDO_CURVE_CUTOFFS = (50, 100, 200, 1000)


def confusion_matrix(predictions: list[str], golds: list[str],
                     labels: list[str]) -> dict[str, dict[str, int]]:
    if len(predictions) != len(golds):
        raise PipelineError("predictions and golds must have the same length")
    if not predictions:
        raise PipelineError("cannot evaluate an empty prediction set")
    known = set(labels)
    for g in golds:
        if g not in known:
            raise PipelineError(f"gold label {g!r} is not a declared category")
    matrix = {g: {p: 0 for p in labels} for g in labels}
    for pred, gold in zip(predictions, golds):
        matrix[gold][pred] += 1
    return matrix


def per_class_metrics(matrix: dict[str, dict[str, int]]) -> dict[str, dict[str, float]]:
    labels = list(matrix)
    out = {}
    for label in labels:
        tp = matrix[label][label]
        fn = sum(matrix[label][p] for p in labels) - tp
        fp = sum(matrix[g][label] for g in labels) - tp
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn > 0 else 0.0
        out[label] = {"precision": precision, "recall": recall, "f1": f1,
                      "support": tp + fn}
    return out


def micro_macro_f1(predictions: list[str], golds: list[str],
                   labels: list[str]) -> tuple[float, float]:
    matrix = confusion_matrix(predictions, golds, labels)
    per_class = per_class_metrics(matrix)
    correct = sum(matrix[l][l] for l in labels)
    micro = correct / len(predictions)
    macro = sum(m["f1"] for m in per_class.values()) / len(labels)
    return micro, macro


def pseudo_accuracy(retrieved: dict[str, list[tuple[str, int]]],
                    golds: dict[str, str],
                    cutoffs: tuple[int, ...] = PSEUDO_CURVE_CUTOFFS) -> dict:
    """Fraction of retrieved documents whose pseudo label matches gold,
    overall and at per-category size cutoffs."""
    def accuracy_at(k: int | None):
        total = correct = 0
        for label in sorted(retrieved):
            docs = retrieved[label] if k is None else retrieved[label][:k]
            for did, _score in docs:
                if did in golds:
                    total += 1
                    correct += golds[did] == label
        return (correct / total) if total else None, total

    overall, n_total = accuracy_at(None)
    curve = []
    for k in cutoffs:
        acc, n = accuracy_at(k)
        curve.append({"per_category_size": k, "accuracy": acc, "n": n})
    return {"accuracy": overall, "n": n_total, "curve": curve}


def pattern_proportions(indicative_sets: dict[str, list[str]],
                        pattern_of: dict[str, str]) -> dict:
    """Per-category and overall fraction of selected instances per pattern.

    indicative_sets: label -> selected instance ids;
    pattern_of: instance id -> pattern id.
    """
    patterns = sorted(set(pattern_of.values()))
    per_category = {}
    for label in sorted(indicative_sets):
        members = indicative_sets[label]
        if not members:
            raise PipelineError(f"category {label!r} has an empty indicative set")
        counts = {p: 0 for p in patterns}
        for iid in members:
            counts[pattern_of[iid]] += 1
        per_category[label] = {p: counts[p] / len(members) for p in patterns}
    overall = {p: sum(per_category[l][p] for l in per_category) / len(per_category)
               for p in patterns}
    return {"per_category": per_category, "overall": overall}


def build_report(predictions: dict[str, str], golds: dict[str, str],
                 labels: list[str],
                 retrieved: dict[str, list[tuple[str, int]]] | None = None,
                 indicative: dict[str, list[str]] | None = None,
                 pattern_of: dict[str, str] | None = None) -> dict:
    doc_ids = sorted(golds)
    pred_list = [predictions[d] for d in doc_ids]
    gold_list = [golds[d] for d in doc_ids]
    matrix = confusion_matrix(pred_list, gold_list, labels)
    per_class = per_class_metrics(matrix)
    micro, macro = micro_macro_f1(pred_list, gold_list, labels)
    report = {
        "n_documents": len(doc_ids),
        "micro_f1": micro,
        "macro_f1": macro,
        "per_class": per_class,
        "confusion_matrix": matrix,
    }
    if retrieved is not None:
        report["pseudo_accuracy"] = pseudo_accuracy(retrieved, golds)
    if indicative is not None and pattern_of is not None:
        report["pattern_proportions"] = pattern_proportions(indicative, pattern_of)
    return report


def write_report_json(report: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, sort_keys=True, indent=2)
        f.write("\n")


def report_markdown(report: dict) -> str:
    lines = [
        "## Classification report",
        "",
        f"Documents evaluated: {report['n_documents']}",
        "",
        "| Metric | Value |",
        "|---|---|",
        f"| Micro-F1 | {report['micro_f1']:.3f} |",
        f"| Macro-F1 | {report['macro_f1']:.3f} |",
        "",
        "| Class | Precision | Recall | F1 | Support |",
        "|---|---|---|---|---|",
    ]
    for label in sorted(report["per_class"]):
        m = report["per_class"][label]
        lines.append(f"| {label} | {m['precision']:.3f} | {m['recall']:.3f} "
                     f"| {m['f1']:.3f} | {m['support']} |")
    props = report.get("pattern_proportions")
    if props:
        patterns = sorted(props["overall"])
        lines += ["", "## Selected-instance pattern proportions", "",
                  "| Category | " + " | ".join(patterns) + " |",
                  "|---|" + "---|" * len(patterns)]
        for label in sorted(props["per_category"]):
            row = props["per_category"][label]
            lines.append(f"| {label} | " +
                         " | ".join(f"{row[p]:.3f}" for p in patterns) + " |")
        lines.append("| overall | " +
                     " | ".join(f"{props['overall'][p]:.3f}" for p in patterns) + " |")
    return "\n".join(lines) + "\n"


def pseudo_curve_csv(report: dict) -> str:
    """Fig.-style per-size retrieval accuracy curve as CSV text."""
    pa = report.get("pseudo_accuracy")
    rows = ["per_category_size,accuracy,n"]
    if pa:
        for pt in pa["curve"]:
            acc = "" if pt["accuracy"] is None else f"{pt['accuracy']:.6f}"
            rows.append(f"{pt['per_category_size']},{acc},{pt['n']}")
    return "\n".join(rows) + "\n"
