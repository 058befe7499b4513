"""Joint embedding and specificity learning on the unit sphere."""

from .kernels import BACKEND, available_backends
from .model import (EmbeddingModel, TrainConfig, clamp_kappa, init_model,
                    project_to_sphere)
from .objective import sampled_grads, sampled_loss, sgd_step_ctxt, sgd_step_doc
from .train import build_pairs, train_joint

__all__ = [
    "BACKEND", "EmbeddingModel", "TrainConfig", "available_backends",
    "build_pairs", "clamp_kappa", "init_model", "project_to_sphere",
    "sampled_grads", "sampled_loss", "sgd_step_ctxt", "sgd_step_doc",
    "train_joint",
]
