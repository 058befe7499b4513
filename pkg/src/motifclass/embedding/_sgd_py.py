"""Pure-numpy SGD kernel: the fallback backend.

Processes a pre-sampled batch of steps sequentially, mutating the embedding
arrays in place. The compiled backend in ``_sgd_cy.pyx`` implements the same
update in the same order; both consume identical pre-drawn sampling streams,
so they agree up to float rounding.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_CLIP = 30.0


def run_steps(inst_vecs: np.ndarray, doc_vecs: np.ndarray, kappas: np.ndarray,
              branch: np.ndarray, centers: np.ndarray, targets: np.ndarray,
              negatives: np.ndarray, lrs: np.ndarray,
              freeze_kappa: bool = False) -> None:
    """Apply one SGD step per row of the batch arrays.

    branch[i] == 1 selects the document branch (targets/negatives index
    doc_vecs); 0 selects the context branch (they index inst_vecs). A
    negative equal to the positive target (or, in the context branch, to the
    center itself) is skipped.
    """
    n_steps, n_neg = negatives.shape
    for i in range(n_steps):
        c = centers[i]
        t = targets[i]
        lr = lrs[i]
        tmat = doc_vecs if branch[i] else inst_vecs
        cv = inst_vecs[c].copy()
        kappa = float(kappas[c])

        tv = tmat[t]
        dot_pos = float(cv @ tv)
        z = kappa * dot_pos
        coef = (_sigmoid(_clip(z)) - 1.0) if abs(z) < _CLIP else 0.0
        g_kappa = coef * dot_pos
        g_center = (coef * kappa) * tv
        tmat[t] = _renorm(tv - (lr * coef * kappa) * cv)

        for j in range(n_neg):
            nidx = negatives[i, j]
            if nidx == t or (not branch[i] and nidx == c):
                continue
            nv = tmat[nidx]
            dot_n = float(cv @ nv)
            zn = kappa * dot_n
            coefn = _sigmoid(_clip(zn)) if abs(zn) < _CLIP else 0.0
            g_kappa += coefn * dot_n
            g_center = g_center + (coefn * kappa) * nv
            tmat[nidx] = _renorm(nv - (lr * coefn * kappa) * cv)

        inst_vecs[c] = _renorm(cv - lr * g_center)
        if not freeze_kappa:
            kappas[c] = max(kappa - lr * g_kappa, 0.0)


def _sigmoid(z: float) -> float:
    return 1.0 / (1.0 + math.exp(-z))


def _clip(z: float) -> float:
    return _CLIP if z > _CLIP else (-_CLIP if z < -_CLIP else z)


def _renorm(v: np.ndarray) -> np.ndarray:
    norm = math.sqrt(float(v @ v))
    if norm > 1e-12:
        return v / norm
    return v
