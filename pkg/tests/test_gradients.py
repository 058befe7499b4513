"""Analytic gradients of the negative-sampling objective vs central finite
differences. The FD oracle differentiates sampled_loss directly and never
touches the analytic code path."""

import numpy as np
import pytest

from motifclass.embedding.objective import sampled_grads, sampled_loss


def unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def fd_grads(center, target, negs, kappa, eps=1e-5):
    """Central finite differences of the sampled loss in every coordinate."""
    def loss(c, t, n, k):
        return sampled_loss(c, t, n, k)

    g_c = np.zeros_like(center)
    for i in range(center.size):
        dc = np.zeros_like(center)
        dc[i] = eps
        g_c[i] = (loss(center + dc, target, negs, kappa)
                  - loss(center - dc, target, negs, kappa)) / (2 * eps)
    g_t = np.zeros_like(target)
    for i in range(target.size):
        dt = np.zeros_like(target)
        dt[i] = eps
        g_t[i] = (loss(center, target + dt, negs, kappa)
                  - loss(center, target - dt, negs, kappa)) / (2 * eps)
    g_n = np.zeros_like(negs)
    for j in range(negs.shape[0]):
        for i in range(negs.shape[1]):
            dn = np.zeros_like(negs)
            dn[j, i] = eps
            g_n[j, i] = (loss(center, target, negs + dn, kappa)
                         - loss(center, target, negs - dn, kappa)) / (2 * eps)
    g_k = (loss(center, target, negs, kappa + eps)
           - loss(center, target, negs, kappa - eps)) / (2 * eps)
    return g_c, g_t, g_n, g_k


def max_rel_error(analytic, numeric):
    scale = np.maximum(np.abs(numeric), 1e-3)
    return float(np.max(np.abs(analytic - numeric) / scale))


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("dim,n_neg", [(8, 5), (16, 3)])
def test_gradients_match_finite_differences(seed, dim, n_neg):
    rng = np.random.default_rng(seed)
    center = unit(rng, dim)
    target = unit(rng, dim)
    negs = np.stack([unit(rng, dim) for _ in range(n_neg)])
    kappa = float(rng.uniform(0.2, 4.0))

    g_c, g_t, g_n, g_k = sampled_grads(center, target, negs, kappa)
    f_c, f_t, f_n, f_k = fd_grads(center, target, negs, kappa)
    assert max_rel_error(g_c, f_c) < 1e-4
    assert max_rel_error(g_t, f_t) < 1e-4
    assert max_rel_error(g_n, f_n) < 1e-4
    assert max_rel_error(np.array([g_k]), np.array([f_k])) < 1e-4


def test_kappa_gradient_sign_with_aligned_pair():
    # One positive, no negatives, center == target: the loss gradient in
    # kappa is sigma(kappa) - 1 < 0, so gradient descent increases kappa.
    dim = 6
    v = np.ones(dim) / np.sqrt(dim)
    negs = np.zeros((0, dim))
    kappa = 1.0
    _, _, _, g_k = sampled_grads(v, v, negs, kappa)
    expected = 1.0 / (1.0 + np.exp(-kappa)) - 1.0
    assert g_k == pytest.approx(expected)
    assert g_k < 0


def test_clip_saturates_gradient():
    dim = 4
    v = np.ones(dim) / 2.0
    # kappa large enough that kappa * cos > 30: clipped, zero gradient.
    g_c, g_t, g_n, g_k = sampled_grads(v, v, np.zeros((0, dim)), 100.0)
    assert np.all(g_c == 0) and np.all(g_t == 0) and g_k == 0


def test_loss_decreases_along_negative_gradient():
    rng = np.random.default_rng(42)
    center, target = unit(rng, 10), unit(rng, 10)
    negs = np.stack([unit(rng, 10) for _ in range(4)])
    kappa = 1.5
    l0 = sampled_loss(center, target, negs, kappa)
    g_c, g_t, g_n, g_k = sampled_grads(center, target, negs, kappa)
    step = 1e-3
    l1 = sampled_loss(center - step * g_c, target - step * g_t,
                      negs - step * g_n, kappa - step * g_k)
    assert l1 < l0
