#!/usr/bin/env python3
"""Benchmark the SGD kernel backends (compiled vs pure python).

Runs identical pre-drawn sampling streams through both `run_steps`
implementations and reports steps/second and the speedup. The workload
mirrors training: mixed document/context branches, 5 negatives per step,
linearly decaying learning rates.

Usage: python benchmarks/bench_sgd.py [--steps N] [--dim D] [--repeats R]
"""

import argparse
import time

import numpy as np

from motifclass.embedding import _sgd_py
from motifclass.embedding.kernels import available_backends, get_backend


def make_workload(rng, n_steps, n_inst, n_doc, dim, n_neg=5):
    inst = rng.standard_normal((n_inst, dim))
    inst /= np.linalg.norm(inst, axis=1, keepdims=True)
    docs = rng.standard_normal((n_doc, dim))
    docs /= np.linalg.norm(docs, axis=1, keepdims=True)
    kappas = rng.uniform(0.1, 3.0, n_inst)

    branch = (rng.random(n_steps) < 0.5).astype(np.uint8)
    centers = rng.integers(0, n_inst, n_steps).astype(np.int64)
    targets = np.where(branch == 1,
                       rng.integers(0, n_doc, n_steps),
                       rng.integers(0, n_inst, n_steps)).astype(np.int64)
    negs = np.where(branch[:, None] == 1,
                    rng.integers(0, n_doc, (n_steps, n_neg)),
                    rng.integers(0, n_inst, (n_steps, n_neg))).astype(np.int64)
    lrs = 0.025 * np.maximum(1.0 - np.arange(n_steps) / n_steps, 0.01)
    state = (inst, docs, kappas)
    stream = (branch, centers, targets, negs, lrs)
    return state, stream


def bench(run_steps, state, stream, repeats):
    best = float("inf")
    for _ in range(repeats):
        inst, docs, kappas = (a.copy() for a in state)
        t0 = time.perf_counter()
        run_steps(inst, docs, kappas, *stream)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--dim", type=int, default=100)
    ap.add_argument("--instances", type=int, default=5_000)
    ap.add_argument("--documents", type=int, default=2_000)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    state, stream = make_workload(rng, args.steps, args.instances,
                                  args.documents, args.dim)

    print(f"workload: {args.steps} steps, dim={args.dim}, "
          f"{args.instances} instances, {args.documents} documents, "
          f"best of {args.repeats}")

    # Keep the python run short; extrapolating its rate is accurate enough.
    py_steps = min(args.steps, 20_000)
    py_state, py_stream = state, tuple(a[:py_steps] for a in stream)
    t_py = bench(_sgd_py.run_steps, py_state, py_stream, args.repeats)
    rate_py = py_steps / t_py
    print(f"python : {rate_py:12,.0f} steps/s  "
          f"({t_py:.3f}s for {py_steps} steps)")

    if "cython" not in available_backends():
        print("cython : not built (pip install -e . with a C compiler)")
        return
    cy = get_backend("cython")
    t_cy = bench(cy.run_steps, state, stream, args.repeats)
    rate_cy = args.steps / t_cy
    print(f"cython : {rate_cy:12,.0f} steps/s  "
          f"({t_cy:.3f}s for {args.steps} steps)")
    print(f"speedup: {rate_cy / rate_py:.1f}x")


if __name__ == "__main__":
    main()
