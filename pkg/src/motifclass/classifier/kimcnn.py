"""Kim-style convolutional text classifier, implemented in plain numpy.

Architecture: embedding lookup -> per-width 1-D convolution + ReLU +
max-over-time pooling -> feature concatenation -> linear softmax head. At
these sizes (tens of thousands of parameters) hand-written forward/backward
passes are fast enough and keep the package free of deep-learning framework
dependencies. Trained with plain mini-batch SGD on the mean negative
log-likelihood; the learning rate halves when the epoch loss plateaus.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..corpus import CorpusSchema, Document
from ..embedding.model import EmbeddingModel
from ..errors import ConfigError, PipelineError
from ..pseudo import PseudoLabeledSet
from .features import build_input_sequence

log = logging.getLogger(__name__)

PAD = "<pad>"
UNK = "<unk>"


@dataclass
class ClassifierConfig:
    filter_widths: tuple[int, ...] = (2, 3, 4, 5)
    feature_maps: int = 20
    max_seq_length: int = 200
    batch_size: int = 256
    epochs: int = 40
    learning_rate: float = 0.1
    plateau_patience: int = 3
    plateau_tol: float = 1e-4
    train_embeddings: bool = True
    seed: int = 0

    def validate(self) -> None:
        if not self.filter_widths or min(self.filter_widths) < 1:
            raise ConfigError("filter widths must be >= 1")
        if max(self.filter_widths) > self.max_seq_length:
            raise ConfigError("filter width exceeds max sequence length")
        if self.feature_maps < 1:
            raise ConfigError("feature maps per width must be >= 1")
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ConfigError("invalid training hyperparameters")


class KimCNN:
    """Trainable classifier state: vocab, embedding table, kernels, head."""

    def __init__(self, config: ClassifierConfig, vocab: dict[str, int],
                 labels: list[str], dim: int, params: dict[str, np.ndarray]):
        self.config = config
        self.vocab = vocab          # token -> row; includes PAD (0) and UNK (1)
        self.labels = list(labels)  # softmax output order
        self.dim = dim
        self.params = params        # "emb", "K{w}", "b{w}", "W", "b"

    # ---------------------------------------------------------------- setup

    @classmethod
    def initialize(cls, embed_model: EmbeddingModel, labels: list[str],
                   config: ClassifierConfig,
                   rng: np.random.Generator) -> "KimCNN":
        config.validate()
        dim = embed_model.dim
        vocab = {PAD: 0, UNK: 1}
        emb = np.zeros((2 + len(embed_model.instance_ids), dim))
        emb[1] = rng.standard_normal(dim) * 0.01
        for iid in embed_model.instance_ids:
            vocab[iid] = len(vocab)
            emb[vocab[iid]] = embed_model.instance_vector(iid)
        params: dict[str, np.ndarray] = {"emb": emb}
        fm = config.feature_maps
        for w in config.filter_widths:
            bound = np.sqrt(6.0 / (w * dim + fm))
            params[f"K{w}"] = rng.uniform(-bound, bound, size=(w, dim, fm))
            params[f"b{w}"] = np.zeros(fm)
        n_feat = fm * len(config.filter_widths)
        bound = np.sqrt(6.0 / (n_feat + len(labels)))
        params["W"] = rng.uniform(-bound, bound, size=(n_feat, len(labels)))
        params["b"] = np.zeros(len(labels))
        return cls(config, vocab, labels, dim, params)

    def encode(self, tokens: list[str]) -> np.ndarray:
        ids = [self.vocab.get(t, 1) for t in tokens[:self.config.max_seq_length]]
        min_len = max(self.config.filter_widths)
        if len(ids) < min_len:
            ids.extend([0] * (min_len - len(ids)))
        return np.array(ids, dtype=np.int64)

    @staticmethod
    def pad_batch(seqs: list[np.ndarray]) -> np.ndarray:
        t_max = max(len(s) for s in seqs)
        batch = np.zeros((len(seqs), t_max), dtype=np.int64)
        for i, s in enumerate(seqs):
            batch[i, :len(s)] = s
        return batch

    # -------------------------------------------------------------- forward

    def _forward(self, ids: np.ndarray):
        """Returns (probs, cache) for a (B, T) id batch."""
        emb = self.params["emb"]
        x = emb[ids]  # (B, T, dim)
        b_sz, t_len, _ = x.shape
        pooled_parts, cache_parts = [], []
        for w in self.config.filter_widths:
            k = self.params[f"K{w}"]
            p_len = t_len - w + 1
            conv = np.broadcast_to(self.params[f"b{w}"],
                                   (b_sz, p_len, k.shape[2])).copy()
            for o in range(w):
                conv += x[:, o:o + p_len, :] @ k[o]
            act = np.maximum(conv, 0.0)
            argmax = act.argmax(axis=1)  # (B, F)
            pooled = np.take_along_axis(act, argmax[:, None, :], axis=1)[:, 0, :]
            pooled_parts.append(pooled)
            cache_parts.append((w, p_len, argmax, pooled))
        feat = np.concatenate(pooled_parts, axis=1)
        logits = feat @ self.params["W"] + self.params["b"]
        logits -= logits.max(axis=1, keepdims=True)
        expl = np.exp(logits)
        probs = expl / expl.sum(axis=1, keepdims=True)
        return probs, (ids, x, cache_parts, feat)

    def predict_proba_tokens(self, token_lists: list[list[str]]) -> np.ndarray:
        out = []
        bs = self.config.batch_size
        seqs = [self.encode(toks) for toks in token_lists]
        for i in range(0, len(seqs), bs):
            ids = self.pad_batch(seqs[i:i + bs])
            probs, _ = self._forward(ids)
            out.append(probs)
        return np.concatenate(out, axis=0)

    def predict(self, doc: Document, schema: CorpusSchema) -> tuple[str, np.ndarray]:
        tokens = build_input_sequence(doc, schema, self.config.max_seq_length)
        probs = self.predict_proba_tokens([tokens])[0]
        return self.labels[int(np.argmax(probs))], probs

    # ------------------------------------------------------------- backward

    def loss_and_grads(self, ids: np.ndarray, y: np.ndarray):
        """Mean NLL over the batch plus gradients for every parameter."""
        probs, (ids, x, cache_parts, feat) = self._forward(ids)
        b_sz = ids.shape[0]
        loss = float(-np.log(probs[np.arange(b_sz), y] + 1e-300).mean())

        dlogits = probs.copy()
        dlogits[np.arange(b_sz), y] -= 1.0
        dlogits /= b_sz
        grads = {
            "W": feat.T @ dlogits,
            "b": dlogits.sum(axis=0),
        }
        dfeat = dlogits @ self.params["W"].T
        dx = np.zeros_like(x)
        fm = self.config.feature_maps
        for part, (w, p_len, argmax, pooled) in enumerate(cache_parts):
            dpooled = dfeat[:, part * fm:(part + 1) * fm] * (pooled > 0.0)
            dconv = np.zeros((b_sz, p_len, fm))
            np.put_along_axis(dconv, argmax[:, None, :], dpooled[:, None, :], axis=1)
            k = self.params[f"K{w}"]
            dk = np.zeros_like(k)
            for o in range(w):
                xo = x[:, o:o + p_len, :]
                dk[o] = np.tensordot(xo, dconv, axes=([0, 1], [0, 1]))
                dx[:, o:o + p_len, :] += dconv @ k[o].T
            grads[f"K{w}"] = dk
            grads[f"b{w}"] = dconv.sum(axis=(0, 1))

        demb = np.zeros_like(self.params["emb"])
        np.add.at(demb, ids, dx)
        demb[0] = 0.0  # pad row stays fixed at zero
        if not self.config.train_embeddings:
            unk_grad = demb[1].copy()
            demb[:] = 0.0
            demb[1] = unk_grad  # unknown vector trains even when frozen
        grads["emb"] = demb
        return loss, grads

    # ------------------------------------------------------------- training

    def fit(self, token_lists: list[list[str]], labels: list[str],
            rng: np.random.Generator) -> list[float]:
        """Mini-batch SGD; returns per-epoch mean losses."""
        y = np.array([self.labels.index(l) for l in labels], dtype=np.int64)
        seqs = [self.encode(toks) for toks in token_lists]
        n = len(seqs)
        lr = self.config.learning_rate
        best = np.inf
        stall = 0
        history = []
        for epoch in range(self.config.epochs):
            order = rng.permutation(n)
            total = 0.0
            for start in range(0, n, self.config.batch_size):
                sel = order[start:start + self.config.batch_size]
                ids = self.pad_batch([seqs[i] for i in sel])
                loss, grads = self.loss_and_grads(ids, y[sel])
                if not np.isfinite(loss):
                    raise PipelineError(
                        f"NaN/inf loss at epoch {epoch}, batch {start // self.config.batch_size}: "
                        f"lr={lr}, batch_size={len(sel)}")
                for name, g in grads.items():
                    self.params[name] -= lr * g
                total += loss * len(sel)
            mean_loss = total / n
            history.append(mean_loss)
            if mean_loss < best - self.config.plateau_tol:
                best = mean_loss
                stall = 0
            else:
                stall += 1
                if stall >= self.config.plateau_patience:
                    lr *= 0.5
                    stall = 0
                    log.info("epoch %d: plateau, lr -> %g", epoch, lr)
        return history

    # ---------------------------------------------------------- persistence

    def save(self, path: str | Path) -> None:
        header = {
            "config": {
                "filter_widths": list(self.config.filter_widths),
                "feature_maps": self.config.feature_maps,
                "max_seq_length": self.config.max_seq_length,
                "batch_size": self.config.batch_size,
                "epochs": self.config.epochs,
                "learning_rate": self.config.learning_rate,
                "plateau_patience": self.config.plateau_patience,
                "plateau_tol": self.config.plateau_tol,
                "train_embeddings": self.config.train_embeddings,
                "seed": self.config.seed,
            },
            "labels": self.labels,
            "dim": self.dim,
            "vocab": self.vocab,
        }
        arrays = {name: arr for name, arr in self.params.items()}
        with open(path, "wb") as f:
            np.savez(f, header=np.frombuffer(
                json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8),
                **arrays)

    @classmethod
    def load(cls, path: str | Path) -> "KimCNN":
        data = np.load(path)
        header = json.loads(bytes(data["header"]).decode("utf-8"))
        cfg = header["config"]
        config = ClassifierConfig(
            filter_widths=tuple(cfg["filter_widths"]),
            feature_maps=cfg["feature_maps"], max_seq_length=cfg["max_seq_length"],
            batch_size=cfg["batch_size"], epochs=cfg["epochs"],
            learning_rate=cfg["learning_rate"],
            plateau_patience=cfg["plateau_patience"], plateau_tol=cfg["plateau_tol"],
            train_embeddings=cfg["train_embeddings"], seed=cfg["seed"])
        params = {name: data[name] for name in data.files if name != "header"}
        return cls(config, header["vocab"], header["labels"], header["dim"], params)


def train_classifier(pseudo_sets: dict[str, PseudoLabeledSet],
                     embed_model: EmbeddingModel, config: ClassifierConfig,
                     rng: np.random.Generator) -> KimCNN:
    """Train a KimCNN on the pseudo-labeled sets (all categories required)."""
    labels = sorted(pseudo_sets)
    for label in labels:
        if not pseudo_sets[label].documents:
            raise PipelineError(f"category {label!r} has no pseudo documents")
    model = KimCNN.initialize(embed_model, labels, config, rng)
    token_lists, y = [], []
    for label in labels:
        for doc in pseudo_sets[label].documents:
            token_lists.append(doc.tokens)
            y.append(label)
    model.fit(token_lists, y, rng)
    return model
