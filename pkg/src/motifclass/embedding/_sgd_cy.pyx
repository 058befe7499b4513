# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SGD kernel. Mirrors _sgd_py.run_steps exactly, step for step."""

import numpy as np

from libc.math cimport exp, sqrt

BACKEND = "cython"

cdef double CLIP = 30.0


cdef inline double _sigmoid(double z) nogil:
    return 1.0 / (1.0 + exp(-z))


cdef inline void _renorm(double* v, Py_ssize_t dim) nogil:
    cdef double norm = 0.0
    cdef Py_ssize_t q
    for q in range(dim):
        norm += v[q] * v[q]
    norm = sqrt(norm)
    if norm > 1e-12:
        for q in range(dim):
            v[q] /= norm


def run_steps(double[:, ::1] inst_vecs, double[:, ::1] doc_vecs,
              double[::1] kappas, const unsigned char[::1] branch,
              const long long[::1] centers, const long long[::1] targets,
              const long long[:, ::1] negatives, const double[::1] lrs,
              bint freeze_kappa=False):
    cdef Py_ssize_t n_steps = negatives.shape[0]
    cdef Py_ssize_t n_neg = negatives.shape[1]
    cdef Py_ssize_t dim = inst_vecs.shape[1]
    cdef Py_ssize_t i, j, q
    cdef long long c, t, nidx
    cdef bint is_doc
    cdef double lr, kappa, dot_pos, dot_n, z, zn, coef, coefn, g_kappa, scale
    cdef double* inst_base = &inst_vecs[0, 0]
    cdef double* doc_base = &doc_vecs[0, 0] if doc_vecs.shape[0] > 0 else inst_base
    cdef double* tbase
    cdef double* tv
    cdef double* nv

    cv_buf = np.empty(dim, dtype=np.float64)
    gc_buf = np.empty(dim, dtype=np.float64)
    cdef double[::1] cv_mv = cv_buf
    cdef double[::1] gc_mv = gc_buf
    cdef double* cv = &cv_mv[0]
    cdef double* gc = &gc_mv[0]

    with nogil:
        for i in range(n_steps):
            c = centers[i]
            t = targets[i]
            lr = lrs[i]
            is_doc = branch[i]
            tbase = doc_base if is_doc else inst_base
            for q in range(dim):
                cv[q] = inst_base[c * dim + q]
            kappa = kappas[c]

            tv = tbase + t * dim
            dot_pos = 0.0
            for q in range(dim):
                dot_pos += cv[q] * tv[q]
            z = kappa * dot_pos
            if z < CLIP and z > -CLIP:
                coef = _sigmoid(z) - 1.0
            else:
                coef = 0.0
            g_kappa = coef * dot_pos
            for q in range(dim):
                gc[q] = coef * kappa * tv[q]
            scale = lr * coef * kappa
            for q in range(dim):
                tv[q] -= scale * cv[q]
            _renorm(tv, dim)

            for j in range(n_neg):
                nidx = negatives[i, j]
                if nidx == t or (not is_doc and nidx == c):
                    continue
                nv = tbase + nidx * dim
                dot_n = 0.0
                for q in range(dim):
                    dot_n += cv[q] * nv[q]
                zn = kappa * dot_n
                if zn < CLIP and zn > -CLIP:
                    coefn = _sigmoid(zn)
                else:
                    coefn = 0.0
                g_kappa += coefn * dot_n
                for q in range(dim):
                    gc[q] += coefn * kappa * nv[q]
                scale = lr * coefn * kappa
                for q in range(dim):
                    nv[q] -= scale * cv[q]
                _renorm(nv, dim)

            for q in range(dim):
                inst_base[c * dim + q] = cv[q] - lr * gc[q]
            _renorm(inst_base + c * dim, dim)
            if not freeze_kappa:
                kappa -= lr * g_kappa
                kappas[c] = kappa if kappa > 0.0 else 0.0
