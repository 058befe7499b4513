"""Joint embedding model: unit-sphere vectors plus per-instance specificity.

Every frequent motif instance and every document gets one row. Instance rows
additionally carry a nonnegative specificity scalar (the vMF concentration
of documents around the instance direction).
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..motifs import MotifInstanceIndex

log = logging.getLogger(__name__)

_MAGIC = b"MCEMB01\n"


def project_to_sphere(v: np.ndarray, rng: np.random.Generator | None = None) -> np.ndarray:
    """Return v / ||v||; a zero vector is re-randomized (and logged)."""
    norm = float(np.linalg.norm(v))
    if norm > 0.0:
        return v / norm
    log.warning("projecting zero vector: re-randomizing on the sphere")
    rng = rng if rng is not None else np.random.default_rng()
    fresh = rng.standard_normal(v.shape[0])
    return fresh / np.linalg.norm(fresh)


def clamp_kappa(kappa: float) -> float:
    """Nonnegativity constraint on the specificity scalar."""
    return kappa if kappa > 0.0 else 0.0


@dataclass
class TrainConfig:
    dim: int = 100
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0
    deterministic: bool = True
    freeze_kappa: bool = False  # no-specificity ablation: keep all kappas at 1

    def validate(self) -> None:
        if self.dim < 2:
            raise ConfigError("embedding dim must be >= 2 (vMF needs a sphere)")
        if self.window < 1:
            raise ConfigError("context window must be >= 1")
        if self.negatives < 1:
            raise ConfigError("negatives per positive must be >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ConfigError("learning rate must be positive")


class EmbeddingModel:
    """Unit vectors for instances and documents, specificity per instance."""

    def __init__(self, dim: int, instance_ids: list[str], doc_ids: list[str],
                 instance_vectors: np.ndarray, doc_vectors: np.ndarray,
                 kappas: np.ndarray):
        self.dim = dim
        self.instance_ids = list(instance_ids)
        self.doc_ids = list(doc_ids)
        self.instance_vectors = instance_vectors
        self.doc_vectors = doc_vectors
        self.kappas = kappas
        self._inst_row = {iid: i for i, iid in enumerate(self.instance_ids)}
        self._doc_row = {did: i for i, did in enumerate(self.doc_ids)}

    def __contains__(self, instance_id: str) -> bool:
        return instance_id in self._inst_row

    def instance_row(self, instance_id: str) -> int:
        return self._inst_row[instance_id]

    def doc_row(self, doc_id: str) -> int:
        return self._doc_row[doc_id]

    def instance_vector(self, instance_id: str) -> np.ndarray:
        return self.instance_vectors[self._inst_row[instance_id]]

    def doc_vector(self, doc_id: str) -> np.ndarray:
        return self.doc_vectors[self._doc_row[doc_id]]

    def kappa(self, instance_id: str) -> float:
        return float(self.kappas[self._inst_row[instance_id]])

    def check_invariants(self, tol: float = 1e-6) -> None:
        for mat in (self.instance_vectors, self.doc_vectors):
            if mat.size:
                norms = np.linalg.norm(mat, axis=1)
                if not np.all(np.abs(norms - 1.0) <= tol):
                    raise AssertionError("embedding vector off the unit sphere")
        if self.kappas.size and not np.all(self.kappas >= 0.0):
            raise AssertionError("negative specificity")

    def save(self, path: str | Path) -> None:
        """Binary dump: magic, dim, counts, then (id, kappa, vector) entries."""
        with open(path, "wb") as f:
            f.write(_MAGIC)
            f.write(struct.pack("<iii", self.dim, len(self.instance_ids),
                                len(self.doc_ids)))
            for i, iid in enumerate(self.instance_ids):
                raw = iid.encode("utf-8")
                f.write(struct.pack("<I", len(raw)))
                f.write(raw)
                f.write(struct.pack("<d", float(self.kappas[i])))
                f.write(self.instance_vectors[i].astype("<f8").tobytes())
            for i, did in enumerate(self.doc_ids):
                raw = did.encode("utf-8")
                f.write(struct.pack("<I", len(raw)))
                f.write(raw)
                f.write(self.doc_vectors[i].astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingModel":
        with open(path, "rb") as f:
            if f.read(len(_MAGIC)) != _MAGIC:
                raise ValueError(f"{path}: not an embedding model file")
            dim, n_inst, n_doc = struct.unpack("<iii", f.read(12))
            inst_ids, doc_ids = [], []
            inst_vecs = np.empty((n_inst, dim))
            doc_vecs = np.empty((n_doc, dim))
            kappas = np.empty(n_inst)
            for i in range(n_inst):
                (ln,) = struct.unpack("<I", f.read(4))
                inst_ids.append(f.read(ln).decode("utf-8"))
                (kappas[i],) = struct.unpack("<d", f.read(8))
                inst_vecs[i] = np.frombuffer(f.read(8 * dim), dtype="<f8")
            for i in range(n_doc):
                (ln,) = struct.unpack("<I", f.read(4))
                doc_ids.append(f.read(ln).decode("utf-8"))
                doc_vecs[i] = np.frombuffer(f.read(8 * dim), dtype="<f8")
        return cls(dim, inst_ids, doc_ids, inst_vecs, doc_vecs, kappas)

    def export_tsv(self, path: str | Path) -> None:
        """Human-inspectable export: id, kappa, vector components."""
        with open(path, "w", encoding="utf-8") as f:
            for i, iid in enumerate(self.instance_ids):
                vec = "\t".join(repr(x) for x in self.instance_vectors[i].tolist())
                f.write(f"{iid}\t{float(self.kappas[i])!r}\t{vec}\n")
            for i, did in enumerate(self.doc_ids):
                vec = "\t".join(repr(x) for x in self.doc_vectors[i].tolist())
                f.write(f"doc:{did}\t\t{vec}\n")


def init_model(index: MotifInstanceIndex, doc_ids: list[str],
               config: TrainConfig) -> EmbeddingModel:
    """Fresh model: uniform directions on the sphere, all kappas at 1."""
    config.validate()
    if len(index) == 0:
        raise ConfigError("cannot initialize a model from an empty motif index")
    rng = np.random.default_rng(config.seed)
    instance_ids = sorted(index.instance_ids)
    inst = rng.standard_normal((len(instance_ids), config.dim))
    inst /= np.linalg.norm(inst, axis=1, keepdims=True)
    docs = rng.standard_normal((len(doc_ids), config.dim))
    docs /= np.linalg.norm(docs, axis=1, keepdims=True)
    kappas = np.ones(len(instance_ids))
    return EmbeddingModel(config.dim, instance_ids, list(doc_ids), inst, docs, kappas)
