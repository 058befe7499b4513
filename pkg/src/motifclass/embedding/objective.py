"""Negative-sampling objective and its analytic gradients.

One sampled objective covers both branches of the joint loss: a center
vector (the motif instance), one positive target, a handful of negative
targets, and the center's specificity scalar. In the document branch the
targets are document vectors; in the context branch they are other Term
instance vectors. We minimize

    L = -log sigmoid(kappa * c.t) - sum_j log sigmoid(-kappa * c.n_j)

with sigmoid arguments clipped to [-CLIP, CLIP] for numerical safety.
"""

from __future__ import annotations

import numpy as np

from .model import EmbeddingModel, clamp_kappa, project_to_sphere

CLIP = 30.0


def _log_sigmoid(z: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -z)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def sampled_loss(center: np.ndarray, target: np.ndarray, negatives: np.ndarray,
                 kappa: float) -> float:
    """Value of the sampled negative-sampling loss (clipped)."""
    z_pos = np.clip(kappa * center @ target, -CLIP, CLIP)
    z_neg = np.clip(kappa * negatives @ center, -CLIP, CLIP)
    return float(-_log_sigmoid(z_pos) - _log_sigmoid(-z_neg).sum())


def sampled_grads(center: np.ndarray, target: np.ndarray, negatives: np.ndarray,
                  kappa: float):
    """Analytic partials of :func:`sampled_loss`.

    Returns (g_center, g_target, g_negatives, g_kappa). The clip makes the
    gradient exactly zero where the argument saturates, matching finite
    differences of the clipped loss.
    """
    dot_pos = float(center @ target)
    z_pos = kappa * dot_pos
    coef_pos = (_sigmoid(np.clip(z_pos, -CLIP, CLIP)) - 1.0) * (abs(z_pos) < CLIP)

    dots_neg = negatives @ center
    z_neg = kappa * dots_neg
    coef_neg = _sigmoid(np.clip(z_neg, -CLIP, CLIP)) * (np.abs(z_neg) < CLIP)

    g_center = coef_pos * kappa * target + kappa * (coef_neg @ negatives)
    g_target = coef_pos * kappa * center
    g_negatives = coef_neg[:, None] * (kappa * center)[None, :]
    g_kappa = coef_pos * dot_pos + float(coef_neg @ dots_neg)
    return g_center, g_target, g_negatives, g_kappa


def _apply_step(center: np.ndarray, target: np.ndarray, negatives: np.ndarray,
                kappa: float, lr: float, freeze_kappa: bool):
    """One descent step on the sampled loss; projects and clamps afterwards."""
    g_c, g_t, g_n, g_k = sampled_grads(center, target, negatives, kappa)
    center_new = project_to_sphere(center - lr * g_c)
    target_new = project_to_sphere(target - lr * g_t)
    negs_new = negatives - lr * g_n
    for j in range(negs_new.shape[0]):
        negs_new[j] = project_to_sphere(negs_new[j])
    kappa_new = kappa if freeze_kappa else clamp_kappa(kappa - lr * g_k)
    return center_new, target_new, negs_new, kappa_new


def sgd_step_doc(model: EmbeddingModel, instance_id: str, pos_doc_id: str,
                 neg_doc_ids: list[str], lr: float,
                 freeze_kappa: bool = False) -> None:
    """In-place update for one (instance, document) positive pair."""
    mi = model.instance_row(instance_id)
    di = model.doc_row(pos_doc_id)
    nis = [model.doc_row(d) for d in neg_doc_ids]
    c, t, n, k = _apply_step(model.instance_vectors[mi], model.doc_vectors[di],
                             model.doc_vectors[nis].copy(), float(model.kappas[mi]),
                             lr, freeze_kappa)
    model.doc_vectors[di] = t
    for row, vec in zip(nis, n):
        model.doc_vectors[row] = vec
    model.instance_vectors[mi] = c
    model.kappas[mi] = k


def sgd_step_ctxt(model: EmbeddingModel, instance_id: str, pos_instance_id: str,
                  neg_instance_ids: list[str], lr: float,
                  freeze_kappa: bool = False) -> None:
    """In-place update for one (term, context term) positive pair."""
    mi = model.instance_row(instance_id)
    ti = model.instance_row(pos_instance_id)
    nis = [model.instance_row(m) for m in neg_instance_ids]
    c, t, n, k = _apply_step(model.instance_vectors[mi], model.instance_vectors[ti],
                             model.instance_vectors[nis].copy(),
                             float(model.kappas[mi]), lr, freeze_kappa)
    model.instance_vectors[ti] = t
    for row, vec in zip(nis, n):
        model.instance_vectors[row] = vec
    model.instance_vectors[mi] = c
    model.kappas[mi] = k
