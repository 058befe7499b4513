"""Exact von Mises-Fisher sampling on the unit sphere.

Uses the tangent-normal decomposition: draw the coordinate t = mu.x along
the mean direction by Wood's (1994) rejection envelope, draw a uniform
direction on the orthogonal (dim-2)-sphere, and combine. kappa = 0 reduces
to the uniform distribution on the sphere.
"""

from __future__ import annotations

import numpy as np


def sample_uniform_sphere(dim: int, rng: np.random.Generator,
                          size: int | None = None) -> np.ndarray:
    n = 1 if size is None else size
    x = rng.standard_normal((n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return x[0] if size is None else x


def _sample_marginal_t(kappa: float, dim: int, rng: np.random.Generator,
                       n: int) -> np.ndarray:
    """Draw n values of t = mu.x with density proportional to
    exp(kappa*t) (1-t^2)^{(dim-3)/2} on [-1, 1]."""
    m = dim - 1
    b = m / (np.sqrt(4.0 * kappa * kappa + m * m) + 2.0 * kappa)
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + m * np.log(1.0 - x0 * x0)
    out = np.empty(n)
    filled = 0
    while filled < n:
        todo = n - filled
        z = rng.beta(m / 2.0, m / 2.0, size=todo)
        t = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        u = rng.random(todo)
        accept = kappa * t + m * np.log(1.0 - x0 * t) - c >= np.log(u)
        good = t[accept]
        out[filled:filled + len(good)] = good
        filled += len(good)
    return out


def sample_vmf(mu: np.ndarray, kappa: float, rng: np.random.Generator,
               size: int | None = None) -> np.ndarray:
    """Draw from vMF(. | mu, kappa) on the sphere carrying mu.

    Returns one vector for size=None, otherwise a (size, dim) array.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if abs(np.linalg.norm(mu) - 1.0) > 1e-6:
        raise ValueError("mean direction must be a unit vector")
    dim = mu.shape[0]
    if dim < 2:
        raise ValueError("vMF requires dim >= 2")
    if kappa < 0:
        raise ValueError("concentration must be nonnegative")
    n = 1 if size is None else size
    if kappa == 0.0:
        samples = sample_uniform_sphere(dim, rng, n)
        return samples[0] if size is None else samples

    t = _sample_marginal_t(kappa, dim, rng, n)
    # Uniform directions orthogonal to mu: project Gaussians off mu.
    v = rng.standard_normal((n, dim))
    v -= np.outer(v @ mu, mu)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    samples = t[:, None] * mu[None, :] + np.sqrt(1.0 - t * t)[:, None] * v
    samples /= np.linalg.norm(samples, axis=1, keepdims=True)
    return samples[0] if size is None else samples
