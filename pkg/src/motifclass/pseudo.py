"""Pseudo-labeled training data: retrieval of real documents and generation
of synthetic token sequences.

Retrieval scores a document for a category by counting how many of the
category's indicative instances appear in it, then keeps the top documents
that score positively for exactly one category. Generation samples a
document direction from vMF around the category name embedding, then draws
tokens i.i.d. from a softmax restricted to the direction's nearest-neighbor
pool.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import CategorySpec, CorpusStore
from .embedding.model import EmbeddingModel
from .errors import ConfigError, PipelineError
from .motifs import MotifInstanceIndex, term_instance_id
from .selection import IndicativeSet
from .vmf import sample_vmf

log = logging.getLogger(__name__)


@dataclass
class PseudoConfig:
    n_retrieved: int = 50
    n_generated: int = 50
    generated_length: int | None = None  # default: mean corpus length, capped
    generated_length_cap: int = 200
    generation_kappa: float | None = None  # default: learned kappa of the name
    neighbor_pool: int = 50

    def validate(self) -> None:
        if self.n_retrieved < 0 or self.n_generated < 0:
            raise ConfigError("pseudo set sizes must be >= 0")
        if self.n_retrieved == 0 and self.n_generated == 0:
            raise ConfigError("at least one of retrieved/generated must be positive")
        if self.neighbor_pool < 1:
            raise ConfigError("neighbor pool size must be >= 1")


@dataclass
class PseudoDocument:
    label_id: str
    tokens: list[str]  # instance ids (metadata and/or Term instances)
    provenance: str    # "retrieved" or "generated"
    doc_id: str | None = None   # retrieved only
    score: int | None = None    # retrieved only
    sample_index: int | None = None  # generated only


@dataclass
class PseudoLabeledSet:
    label_id: str
    documents: list[PseudoDocument] = field(default_factory=list)


def score(doc_id: str, indicative: IndicativeSet, index: MotifInstanceIndex) -> int:
    """Number of the category's indicative instances appearing in the document."""
    return sum(1 for iid in indicative.member_ids if doc_id in index.docs_of(iid))


def retrieve(corpus: CorpusStore, index: MotifInstanceIndex,
             sets: list[IndicativeSet], size: int) -> dict[str, list[tuple[str, int]]]:
    """Top-`size` documents per category among those scoring positively for
    that category and zero for every other. Returns label -> [(doc_id, score)]."""
    doc_ids = corpus.doc_ids
    scores = {s.label_id: {d: 0 for d in doc_ids} for s in sets}
    for s in sets:
        table = scores[s.label_id]
        for iid in s.member_ids:
            for did in index.docs_of(iid):
                table[did] += 1

    out: dict[str, list[tuple[str, int]]] = {}
    labels = [s.label_id for s in sets]
    for label in labels:
        eligible = []
        for did in doc_ids:
            sc = scores[label][did]
            if sc > 0 and all(scores[l2][did] == 0 for l2 in labels if l2 != label):
                eligible.append((did, sc))
        eligible.sort(key=lambda p: (-p[1], p[0]))
        if len(eligible) < size:
            log.warning("category %s: only %d of %d documents retrievable",
                        label, len(eligible), size)
        out[label] = eligible[:size]
    return out


def _mean_length(corpus: CorpusStore) -> int:
    lengths = [len(d.terms) for d in corpus.documents()]
    return int(round(sum(lengths) / len(lengths))) if lengths else 1


def generate(model: EmbeddingModel, category: CategorySpec,
             config: PseudoConfig, rng: np.random.Generator,
             corpus: CorpusStore | None = None) -> list[PseudoDocument]:
    """Generate `n_generated` synthetic documents for one category."""
    name_id = term_instance_id(category.name_term)
    if name_id not in model:
        raise PipelineError(f"category name instance {name_id!r} is not embedded")
    mu = model.instance_vector(name_id)
    kappa = config.generation_kappa
    if kappa is None:
        kappa = model.kappa(name_id)
    length = config.generated_length
    if length is None:
        mean_len = _mean_length(corpus) if corpus is not None else config.generated_length_cap
        length = min(mean_len, config.generated_length_cap)
    length = max(length, 1)
    pool_size = min(config.neighbor_pool, len(model.instance_ids))
    ids = np.array(model.instance_ids)

    docs = []
    for k in range(config.n_generated):
        e_d = sample_vmf(mu, kappa, rng)
        sims = model.instance_vectors @ e_d
        # Deterministic top pool: sort by (-similarity, instance_id).
        order = np.lexsort((ids, -sims))[:pool_size]
        logits = sims[order]
        probs = np.exp(logits - logits.max())
        probs /= probs.sum()
        picks = rng.choice(pool_size, size=length, p=probs)
        tokens = [str(ids[order[p]]) for p in picks]
        docs.append(PseudoDocument(category.label_id, tokens, "generated",
                                   sample_index=k))
    return docs


def assemble_training_set(retrieved: dict[str, list[tuple[str, int]]],
                          generated: dict[str, list[PseudoDocument]],
                          corpus: CorpusStore, index: MotifInstanceIndex,
                          categories: list[CategorySpec]) -> dict[str, PseudoLabeledSet]:
    """Union of retrieved and generated documents per category.

    Retrieved documents are stored as token sequences of instance ids:
    metadata instances first (schema order), then Term tokens, mirroring the
    classifier's input contract.
    """
    from .classifier.features import build_input_sequence  # cycle-free import

    out: dict[str, PseudoLabeledSet] = {}
    for cat in categories:
        pset = PseudoLabeledSet(cat.label_id)
        for did, sc in retrieved.get(cat.label_id, []):
            tokens = build_input_sequence(corpus[did], corpus.schema)
            pset.documents.append(PseudoDocument(cat.label_id, tokens, "retrieved",
                                                 doc_id=did, score=sc))
        pset.documents.extend(generated.get(cat.label_id, []))
        if not pset.documents:
            raise PipelineError(
                f"category {cat.label_id!r} has no pseudo training documents")
        out[cat.label_id] = pset
    return out


def dump_jsonl(sets: dict[str, PseudoLabeledSet], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for label in sorted(sets):
            for doc in sets[label].documents:
                obj = {"label": doc.label_id, "provenance": doc.provenance,
                       "tokens": doc.tokens}
                if doc.provenance == "retrieved":
                    obj["doc_id"] = doc.doc_id
                    obj["score"] = doc.score
                else:
                    obj["sample_index"] = doc.sample_index
                f.write(json.dumps(obj, sort_keys=True) + "\n")


def load_jsonl(path: str | Path) -> dict[str, PseudoLabeledSet]:
    sets: dict[str, PseudoLabeledSet] = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            doc = PseudoDocument(obj["label"], obj["tokens"], obj["provenance"],
                                 doc_id=obj.get("doc_id"), score=obj.get("score"),
                                 sample_index=obj.get("sample_index"))
            sets.setdefault(doc.label_id, PseudoLabeledSet(doc.label_id)) \
                .documents.append(doc)
    return sets
