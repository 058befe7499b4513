"""Category-indicative motif instance selection.

For each category the Term instance of its surface name is always a member.
All other instances compete by cosine similarity to the name embedding, but
must first pass the specificity filter kappa_m >= eta * kappa_name. Ties in
cosine break lexicographically by instance id.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import CategorySpec
from .embedding.model import EmbeddingModel
from .errors import ConfigError, PipelineError
from .motifs import MotifInstanceIndex, term_instance_id

log = logging.getLogger(__name__)

BUCKET_EDGES = (0.0, 1.0, 2.0, 3.0, 4.0)


@dataclass
class SelectionConfig:
    size: int = 50
    eta: float = 2.0

    def validate(self) -> None:
        if self.size < 1:
            raise ConfigError("selection size must be >= 1")
        if self.eta <= 1.0:
            raise ConfigError("eta must be > 1")


@dataclass
class IndicativeSet:
    label_id: str
    members: list[tuple[str, float]]  # (instance_id, cosine to the name); name first

    @property
    def member_ids(self) -> list[str]:
        return [iid for iid, _ in self.members]


def select_indicative(model: EmbeddingModel, index: MotifInstanceIndex,
                      category: CategorySpec, config: SelectionConfig,
                      apply_filter: bool = True) -> IndicativeSet:
    """Rank by cosine under the specificity filter.

    apply_filter=False (no-specificity ablation) ranks by cosine alone.
    """
    config.validate()
    name_id = term_instance_id(category.name_term)
    if name_id not in model:
        raise PipelineError(
            f"category {category.label_id!r}: name instance {name_id!r} is not embedded")
    name_vec = model.instance_vector(name_id)
    kappa_name = model.kappa(name_id)
    threshold = config.eta * kappa_name if apply_filter else -np.inf

    # Vectors are unit norm, so cosine is a plain dot product.
    cosines = model.instance_vectors @ name_vec
    candidates = []
    for iid in model.instance_ids:
        if iid == name_id:
            continue
        row = model.instance_row(iid)
        if model.kappas[row] >= threshold:
            candidates.append((iid, float(cosines[row])))
    candidates.sort(key=lambda p: (-p[1], p[0]))

    members = [(name_id, 1.0)] + candidates[:config.size - 1]
    if len(members) < config.size:
        log.warning("category %s: only %d of %d indicative instances pass the "
                    "specificity filter", category.label_id, len(members), config.size)
    return IndicativeSet(category.label_id, members)


def specificity_buckets(model: EmbeddingModel, category: CategorySpec,
                        eta: float = 2.0, top_k: int = 3,
                        bucket_edges: tuple[float, ...] = BUCKET_EDGES) -> dict:
    """Partition all instances by kappa_m / kappa_name into left-closed
    buckets; list the top-k by cosine within each."""
    name_id = term_instance_id(category.name_term)
    if name_id not in model:
        raise PipelineError(f"category name instance {name_id!r} is not embedded")
    name_vec = model.instance_vector(name_id)
    kappa_name = model.kappa(name_id)
    if kappa_name <= 0:
        raise PipelineError(
            f"category {category.label_id!r} has zero specificity; ratios undefined")
    cosines = model.instance_vectors @ name_vec

    buckets: list[dict] = []
    edges = list(bucket_edges) + [np.inf]
    for lo, hi in zip(edges[:-1], edges[1:]):
        buckets.append({
            "lower": lo,
            "upper": None if np.isinf(hi) else hi,
            "selected": lo >= eta,
            "top": [],
            "count": 0,
        })

    per_bucket: list[list[tuple[str, float]]] = [[] for _ in buckets]
    for iid in model.instance_ids:
        if iid == name_id:
            continue
        row = model.instance_row(iid)
        ratio = float(model.kappas[row]) / kappa_name
        for b, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
            if lo <= ratio < hi:
                per_bucket[b].append((iid, float(cosines[row])))
                break

    for b, items in enumerate(per_bucket):
        items.sort(key=lambda p: (-p[1], p[0]))
        buckets[b]["count"] = len(items)
        buckets[b]["top"] = items[:top_k]
    return {"label_id": category.label_id, "kappa_name": kappa_name,
            "eta": eta, "buckets": buckets}


def dump_selections_tsv(sets: list[IndicativeSet], model: EmbeddingModel,
                        categories: list[CategorySpec], path: str | Path) -> None:
    kappa_name = {c.label_id: model.kappa(term_instance_id(c.name_term))
                  for c in categories}
    with open(path, "w", encoding="utf-8") as f:
        f.write("label\trank\tinstance_id\tcosine\tkappa_ratio\n")
        for s in sets:
            kn = kappa_name[s.label_id]
            for rank, (iid, cos) in enumerate(s.members, start=1):
                ratio = model.kappa(iid) / kn if kn > 0 else float("nan")
                f.write(f"{s.label_id}\t{rank}\t{iid}\t{cos:.6f}\t{ratio:.4f}\n")


def bucket_report_markdown(report: dict) -> str:
    """Render one category's bucket report as a Markdown table."""
    lines = [
        f"### {report['label_id']} (kappa_name = {report['kappa_name']:.3f})",
        "",
        "| kappa range | selected | instances |",
        "|---|---|---|",
    ]
    for b in report["buckets"]:
        hi = "inf" if b["upper"] is None else f"{b['upper']:g}"
        rng = f"[{b['lower']:g}, {hi})"
        sel = "yes" if b["selected"] else "Not Selected"
        tops = ", ".join(f"{iid} ({cos:.2f})" for iid, cos in b["top"]) or "-"
        lines.append(f"| {rng} | {sel} | {tops} |")
    return "\n".join(lines) + "\n"
