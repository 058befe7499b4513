"""Joint training loop over the document and context branches.

Positive pairs are materialized once:

* document branch: every (instance, document) co-occurrence from the index;
* context branch: every ordered (center term, context term) pair within the
  window, over each document's original token positions (infrequent tokens
  are absent from the index and simply leave gaps in the window).

Each SGD step picks a branch with probability proportional to its pair
count, draws one positive pair uniformly and the negatives from the 3/4-power
noise distribution of that branch (documents weighted by how many motif
instances they contain; terms by corpus occurrence count). The learning rate
decays linearly to 1/100 of its initial value. Sampling streams are drawn in
numpy chunks and handed to the selected kernel backend, so runs are
reproducible for a fixed seed regardless of backend.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..corpus import CorpusStore
from ..motifs import MotifInstanceIndex, term_instance_id
from . import kernels
from .model import EmbeddingModel, TrainConfig, init_model

log = logging.getLogger(__name__)

CHUNK_STEPS = 65536


@dataclass
class TrainingPairs:
    doc_center: np.ndarray   # instance rows
    doc_target: np.ndarray   # document rows
    ctxt_center: np.ndarray  # Term instance rows
    ctxt_target: np.ndarray  # Term instance rows
    doc_noise_cdf: np.ndarray
    ctxt_noise_rows: np.ndarray
    ctxt_noise_cdf: np.ndarray

    @property
    def n_doc(self) -> int:
        return len(self.doc_center)

    @property
    def n_ctxt(self) -> int:
        return len(self.ctxt_center)


def build_pairs(index: MotifInstanceIndex, corpus: CorpusStore,
                model: EmbeddingModel, window: int) -> TrainingPairs:
    doc_center, doc_target = [], []
    for iid in model.instance_ids:
        mi = model.instance_row(iid)
        for did in sorted(index.docs_of(iid)):
            doc_center.append(mi)
            doc_target.append(model.doc_row(did))

    ctxt_center, ctxt_target = [], []
    term_occurrences: Counter[int] = Counter()
    for did in model.doc_ids:
        doc = corpus[did]
        rows = []
        for token in doc.terms:
            tid = term_instance_id(token)
            rows.append(model.instance_row(tid) if tid in model else -1)
        n = len(rows)
        for i, ri in enumerate(rows):
            if ri < 0:
                continue
            term_occurrences[ri] += 1
            for j in range(max(0, i - window), min(n, i + window + 1)):
                if j != i and rows[j] >= 0:
                    ctxt_center.append(ri)
                    ctxt_target.append(rows[j])

    # Document noise: #motif(d)^{3/4}.
    doc_weights = np.array(
        [len(index.instances_of(did)) for did in model.doc_ids], dtype=np.float64)
    doc_weights **= 0.75
    total = doc_weights.sum()
    doc_cdf = np.cumsum(doc_weights) / total if total > 0 else np.ones(len(doc_weights))

    # Context noise: term occurrence count^{3/4}, over Term instances only.
    ctxt_rows = np.array(sorted(term_occurrences), dtype=np.int64)
    if len(ctxt_rows):
        w = np.array([term_occurrences[r] for r in ctxt_rows], dtype=np.float64) ** 0.75
        ctxt_cdf = np.cumsum(w) / w.sum()
    else:
        ctxt_cdf = np.ones(0)

    return TrainingPairs(
        np.array(doc_center, dtype=np.int64), np.array(doc_target, dtype=np.int64),
        np.array(ctxt_center, dtype=np.int64), np.array(ctxt_target, dtype=np.int64),
        doc_cdf, ctxt_rows, ctxt_cdf)


def train_joint(index: MotifInstanceIndex, corpus: CorpusStore,
                config: TrainConfig, model: EmbeddingModel | None = None) -> EmbeddingModel:
    """Train (or continue training) the joint embedding model."""
    config.validate()
    if model is None:
        model = init_model(index, corpus.doc_ids, config)
    pairs = build_pairs(index, corpus, model, config.window)
    n_pairs = pairs.n_doc + pairs.n_ctxt
    total_steps = config.epochs * n_pairs
    if total_steps == 0:
        return model
    p_doc = pairs.n_doc / n_pairs
    log.info("training: %d doc pairs, %d ctxt pairs, %d steps, backend=%s",
             pairs.n_doc, pairs.n_ctxt, total_steps, kernels.BACKEND)

    rng = np.random.default_rng([config.seed, 0xE2B])
    lr0 = config.learning_rate
    done = 0
    while done < total_steps:
        m = min(CHUNK_STEPS, total_steps - done)
        branch = (rng.random(m) < p_doc).astype(np.uint8)
        if pairs.n_ctxt == 0:
            branch[:] = 1
        elif pairs.n_doc == 0:
            branch[:] = 0
        pick = rng.random(m)
        u_neg = rng.random((m, config.negatives))

        centers = np.empty(m, dtype=np.int64)
        targets = np.empty(m, dtype=np.int64)
        negs = np.empty((m, config.negatives), dtype=np.int64)

        is_doc = branch == 1
        if is_doc.any():
            idx = (pick[is_doc] * pairs.n_doc).astype(np.int64)
            centers[is_doc] = pairs.doc_center[idx]
            targets[is_doc] = pairs.doc_target[idx]
            negs[is_doc] = np.searchsorted(pairs.doc_noise_cdf, u_neg[is_doc])
        is_ctxt = ~is_doc
        if is_ctxt.any():
            idx = (pick[is_ctxt] * pairs.n_ctxt).astype(np.int64)
            centers[is_ctxt] = pairs.ctxt_center[idx]
            targets[is_ctxt] = pairs.ctxt_target[idx]
            negs[is_ctxt] = pairs.ctxt_noise_rows[
                np.searchsorted(pairs.ctxt_noise_cdf, u_neg[is_ctxt])]

        steps = done + np.arange(m, dtype=np.float64)
        lrs = lr0 * np.maximum(1.0 - steps / total_steps, 0.01)

        kernels.run_steps(model.instance_vectors, model.doc_vectors, model.kappas,
                          branch, centers, targets, negs, lrs,
                          freeze_kappa=config.freeze_kappa)
        done += m

    model.check_invariants()
    return model
