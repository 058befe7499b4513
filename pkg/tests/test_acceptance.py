"""Acceptance gate: ten end-to-end correctness criteria with explicit
tolerances and runtime budgets.

Each test prints a single ``criterion N (<name>): PASS`` line (visible with
``pytest -s``); under ``pytest -v`` the test name itself is the pass/fail
line. Oracles here are re-derived independently of the implementation:
finite differences for gradients, Bessel ratios and numeric CDFs for the
directional sampler, and explicit nested loops for enumeration, retrieval,
selection, and F1.

Criterion 10 (full-scale reproduction on external datasets) is documented,
not asserted: the run only executes when the user supplies the datasets, and
the reference numbers live in README.md as external targets.
"""

import json
import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import special, stats

from motifclass.corpus import CategorySpec
from motifclass.embedding import TrainConfig, train_joint
from motifclass.embedding.model import EmbeddingModel
from motifclass.embedding.objective import sampled_grads, sampled_loss
from motifclass.embedding.train import build_pairs, init_model
from motifclass.evaluate import micro_macro_f1, pseudo_accuracy
from motifclass.motifs import enumerate_instances
from motifclass.pipeline import PipelineConfig, run_stage
from motifclass.pseudo import retrieve
from motifclass.selection import IndicativeSet, SelectionConfig, select_indicative
from motifclass.synth import (SynthConfig, generate_broad_narrow_corpus,
                              generate_two_cluster_corpus, write_demo_dataset)
from motifclass.vmf import sample_vmf

from conftest import random_corpus
from test_motifs import brute_force_instances
from test_pseudo import make_sets, oracle_retrieve
from test_selection import oracle_select
from test_vmf import bessel_mean_resultant, marginal_cdf


class Budget:
    """Wall-clock budget: enter, do the work, then call check()."""

    def __init__(self, seconds):
        self.limit = seconds
        self.t0 = time.perf_counter()

    def check(self):
        elapsed = time.perf_counter() - self.t0
        assert elapsed < self.limit, (
            f"runtime {elapsed:.1f}s exceeds the {self.limit}s budget")


def passed(n, name):
    print(f"criterion {n} ({name}): PASS")


def unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


# --------------------------------------------------------------- criterion 1

def test_01_gradient_oracle():
    """Analytic gradients of 100 random sampled objectives match central
    finite differences to max relative error < 1e-4.

    The document and context branches share the same sampled objective (one
    positive, k negatives, specificity-scaled cosine); they differ only in
    which embedding table the target row comes from, so one oracle covers
    both. Targets here are drawn as documents would be (free unit vectors),
    and the negative count varies as the context branch's table does.
    """
    budget = Budget(10)
    worst = 0.0
    eps = 1e-5
    for seed in range(100):
        rng = np.random.default_rng(seed)
        dim = int(rng.choice([4, 8, 16]))
        n_neg = int(rng.integers(1, 8))
        center = unit(rng, dim)
        target = unit(rng, dim)
        negs = np.stack([unit(rng, dim) for _ in range(n_neg)])
        kappa = float(rng.uniform(0.05, 6.0))

        g_c, g_t, g_n, g_k = sampled_grads(center, target, negs, kappa)

        def fd(setter, base, get):
            grad = np.zeros_like(base, dtype=float)
            flat = grad.ravel()
            bflat = base.ravel()
            for i in range(bflat.size):
                orig = bflat[i]
                bflat[i] = orig + eps
                hi = sampled_loss(center, target, negs, kappa)
                bflat[i] = orig - eps
                lo = sampled_loss(center, target, negs, kappa)
                bflat[i] = orig
                flat[i] = (hi - lo) / (2 * eps)
            return grad

        f_c = fd(None, center, None)
        f_t = fd(None, target, None)
        f_n = fd(None, negs, None)
        f_k = (sampled_loss(center, target, negs, kappa + eps)
               - sampled_loss(center, target, negs, kappa - eps)) / (2 * eps)

        for analytic, numeric in ((g_c, f_c), (g_t, f_t), (g_n, f_n),
                                  (np.array([g_k]), np.array([f_k]))):
            scale = np.maximum(np.abs(numeric), 1e-3)
            worst = max(worst, float(np.max(np.abs(analytic - numeric) / scale)))
    assert worst < 1e-4, f"max relative gradient error {worst:.2e}"
    budget.check()
    passed(1, "gradient oracle")


# --------------------------------------------------------------- criterion 2

def test_02_sphere_and_kappa_invariants_after_100k_steps():
    """After >= 100,000 SGD steps every vector is unit-norm to 1e-6 and
    every specificity is nonnegative."""
    budget = Budget(60)
    corpus, schema, _ = generate_two_cluster_corpus(0)
    index = enumerate_instances(corpus, schema.candidate_patterns,
                                schema.min_freq)
    probe = init_model(index, corpus.doc_ids, TrainConfig(dim=16, seed=0))
    pairs = build_pairs(index, corpus, probe, window=5)
    n_pairs = pairs.n_doc + pairs.n_ctxt
    epochs = -(-100_000 // n_pairs)  # ceil: guarantee >= 100k steps
    assert epochs * n_pairs >= 100_000

    model = train_joint(index, corpus,
                        TrainConfig(dim=16, epochs=epochs, seed=0))
    for mat in (model.instance_vectors, model.doc_vectors):
        norms = np.linalg.norm(mat, axis=1)
        assert np.all(np.abs(norms - 1.0) <= 1e-6)
    assert np.all(model.kappas >= 0.0)
    budget.check()
    passed(2, "sphere/kappa invariants after 100k steps")


# --------------------------------------------------------------- criterion 3

def test_03_vmf_sampler_against_bessel_and_ks():
    """At dimension 100 and kappa in {0, 10, 50, 500}, 10,000 draws match
    the Bessel-ratio mean resultant length within 0.02 and the numeric
    t-marginal CDF with KS statistic < 0.02."""
    budget = Budget(30)
    dim, n = 100, 10_000
    rng = np.random.default_rng(0)
    mu = unit(rng, dim)
    grid = np.linspace(-1 + 1e-9, 1 - 1e-9, 20_001)
    for kappa in (0.0, 10.0, 50.0, 500.0):
        draws = np.stack([sample_vmf(mu, kappa, rng) for _ in range(n)])
        t = draws @ mu
        # The Bessel ratio is 0/0 at kappa=0; the limit (uniform sphere) is 0.
        expected = bessel_mean_resultant(dim, kappa) if kappa > 0 else 0.0
        assert abs(float(t.mean()) - expected) < 0.02, f"kappa={kappa}"
        cdf_vals = marginal_cdf(dim, kappa, grid)
        result = stats.kstest(t, lambda q: np.interp(q, grid, cdf_vals))
        assert result.statistic < 0.02, f"kappa={kappa}: KS={result.statistic}"
    budget.check()
    passed(3, "vMF sampler vs Bessel/KS oracles")


# --------------------------------------------------------------- criterion 4

def test_04_enumeration_and_retrieval_match_brute_force(paper_schema):
    """On 20 random corpora of <= 100 documents, enumeration, scoring, and
    retrieval ranking equal nested-loop oracles exactly."""
    budget = Budget(30)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n_docs = int(rng.integers(20, 101))
        corpus = random_corpus(rng, n_docs, paper_schema)
        min_freq = int(rng.integers(1, 4))

        index = enumerate_instances(corpus, paper_schema.candidate_patterns,
                                    min_freq)
        expected = brute_force_instances(
            corpus, paper_schema.candidate_patterns, min_freq)
        got = {iid: set(index.docs_of(iid)) for iid in index.instance_ids}
        assert got == expected, f"enumeration mismatch at seed {seed}"

        iids = sorted(index.instance_ids)
        rng.shuffle(iids)
        third = max(1, len(iids) // 3)
        sets = make_sets({"A": iids[:third], "B": iids[third:2 * third]})
        for size in (3, 25, 10_000):
            assert retrieve(corpus, index, sets, size) == \
                oracle_retrieve(corpus, index, sets, size), \
                f"retrieval mismatch at seed {seed}, size {size}"
    budget.check()
    passed(4, "enumeration/retrieval brute-force equality")


# --------------------------------------------------------------- criterion 5

def test_05_specificity_ordering_broad_vs_narrow():
    """A venue spanning two topical clusters ends with lower specificity than
    one confined to a single cluster in at least 9 of 10 seeded runs."""
    budget = Budget(300)
    wins = 0
    for seed in range(10):
        corpus, schema, broad_id, narrow_id = generate_broad_narrow_corpus(seed)
        index = enumerate_instances(corpus, schema.candidate_patterns,
                                    schema.min_freq)
        model = train_joint(index, corpus,
                            TrainConfig(dim=32, epochs=10, seed=seed))
        wins += model.kappa(narrow_id) > model.kappa(broad_id)
    assert wins >= 9, f"narrow beat broad in only {wins}/10 runs"
    budget.check()
    passed(5, f"specificity ordering ({wins}/10 seeds)")


# --------------------------------------------------------------- criterion 6

def test_06_selection_matches_oracle_on_1000_candidate_sets():
    """Filter-then-rank equals the brute-force oracle on 1,000 randomized
    candidate sets, including exact eta-boundary admission and id
    tie-breaking."""
    budget = Budget(5)
    cat = CategorySpec("c", "name")
    name_id = "Term[name]"
    for trial in range(1000):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(3, 40))
        ids = [name_id] + [f"Term[t{i}]" for i in range(n)]
        dim = 6
        vecs = rng.standard_normal((len(ids), dim))
        # Plant cosine ties: give some instances identical directions.
        for _ in range(int(rng.integers(0, 4))):
            i, j = rng.integers(1, len(ids), size=2)
            vecs[i] = vecs[j]
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        kappas = rng.uniform(0.1, 5.0, len(ids))
        eta = float(rng.uniform(1.05, 3.0))
        # Plant exact-boundary specificities: kappa == eta * kappa_name.
        for _ in range(int(rng.integers(0, 3))):
            kappas[int(rng.integers(1, len(ids)))] = eta * kappas[0]
        model = EmbeddingModel(dim, ids, [], vecs, np.zeros((0, dim)),
                               kappas.astype(float))
        size = int(rng.integers(1, n + 5))
        got = select_indicative(model, None, cat,
                                SelectionConfig(size=size, eta=eta))
        assert got.member_ids == oracle_select(model, name_id, size, eta), \
            f"selection mismatch at trial {trial}"
    budget.check()
    passed(6, "selection filter/rank oracle")


# --------------------------------------------------------------- criterion 7

ACCEPTANCE_PIPELINE = {
    "min_freq": 5,
    "seed": 0,
    "embedding": {"dim": 64, "epochs": 8},
    "selection": {"size": 2, "eta": 1.1},
    "pseudo": {"n_retrieved": 50, "n_generated": 50,
               "generation_kappa": 500.0},
    "classifier": {"filter_widths": [2, 3, 4], "feature_maps": 32,
                   "epochs": 100, "batch_size": 32},
}


def test_07_end_to_end_synthetic_classification(tmp_path):
    """On the bundled 5-category, 2,000-document planted corpus, the full
    pipeline with 50 retrieved + 50 generated documents per category reaches
    Micro-F1 >= 0.90 and Macro-F1 >= 0.88 and beats the no-higher-order and
    no-specificity ablations by >= 0.02 Micro-F1."""
    budget = Budget(900)
    data = tmp_path / "data"
    write_demo_dataset(data, SynthConfig())  # 5 categories x 400 documents

    reports = {}
    for mode in ("full", "no-higher-order", "no-specificity"):
        cfg = dict(ACCEPTANCE_PIPELINE,
                   corpus=str(data / "corpus.jsonl"),
                   categories=str(data / "categories.json"),
                   patterns=str(data / "patterns.txt"),
                   workdir=str(tmp_path / mode),
                   ablation=mode)
        reports[mode] = run_stage("all", PipelineConfig.from_dict(cfg))

    full = reports["full"]
    assert full["micro_f1"] >= 0.90, f"micro_f1={full['micro_f1']:.3f}"
    assert full["macro_f1"] >= 0.88, f"macro_f1={full['macro_f1']:.3f}"
    for mode in ("no-higher-order", "no-specificity"):
        margin = full["micro_f1"] - reports[mode]["micro_f1"]
        assert margin >= 0.02, f"margin over {mode} is {margin:.3f}"
    budget.check()
    passed(7, "end-to-end synthetic classification "
              f"(micro={full['micro_f1']:.3f}, macro={full['macro_f1']:.3f})")


# --------------------------------------------------------------- criterion 8

def test_08_metric_correctness():
    """Micro/macro F1 equal hand-computed values on 50 random confusion
    matrices to 1e-12, and 800 correct of 1,000 retrieved gives pseudo-label
    accuracy exactly 0.80."""
    budget = Budget(10)
    for seed in range(50):
        rng = np.random.default_rng(seed)
        labels = [f"c{i}" for i in range(int(rng.integers(2, 7)))]
        n = int(rng.integers(1, 120))
        gold = [labels[i] for i in rng.integers(len(labels), size=n)]
        pred = [labels[i] for i in rng.integers(len(labels), size=n)]
        micro, macro = micro_macro_f1(pred, gold, labels)

        acc = sum(p == g for p, g in zip(pred, gold)) / n
        assert abs(micro - acc) <= 1e-12
        f1s = []
        for l in labels:
            tp = sum(p == g == l for p, g in zip(pred, gold))
            fp = sum(p == l != g for p, g in zip(pred, gold))
            fn = sum(g == l != p for p, g in zip(pred, gold))
            f1s.append(2 * tp / (2 * tp + fp + fn) if tp + fp + fn else 0.0)
        assert abs(macro - sum(f1s) / len(f1s)) <= 1e-12

    golds, retrieved = {}, {"x": [], "y": []}
    for i in range(500):
        for lab, other in (("x", "y"), ("y", "x")):
            did = f"{lab}{i}"
            retrieved[lab].append((did, 1))
            golds[did] = lab if i < 400 else other
    out = pseudo_accuracy(retrieved, golds)
    assert out["n"] == 1000 and out["accuracy"] == 0.80
    budget.check()
    passed(8, "metric correctness")


# --------------------------------------------------------------- criterion 9

def test_09_deterministic_reports(tmp_path):
    """Two pipeline runs with identical config and seed write byte-identical
    report.json files."""
    budget = Budget(300)
    data = tmp_path / "data"
    write_demo_dataset(data, SynthConfig(n_categories=3, docs_per_category=60,
                                         seed=7))
    blobs = []
    for sub in ("r1", "r2"):
        cfg = PipelineConfig.from_dict({
            "corpus": str(data / "corpus.jsonl"),
            "categories": str(data / "categories.json"),
            "patterns": str(data / "patterns.txt"),
            "workdir": str(tmp_path / sub),
            "min_freq": 3, "seed": 0,
            "embedding": {"dim": 16, "epochs": 2},
            "selection": {"size": 5, "eta": 1.5},
            "pseudo": {"n_retrieved": 10, "n_generated": 5,
                       "generated_length": 20, "neighbor_pool": 20},
            "classifier": {"filter_widths": [2, 3], "feature_maps": 4,
                           "epochs": 4, "batch_size": 32}})
        run_stage("all", cfg)
        blobs.append((tmp_path / sub / "report.json").read_bytes())
    assert blobs[0] == blobs[1]
    budget.check()
    passed(9, "byte-identical reports")


# -------------------------------------------------------------- criterion 10

README = Path(__file__).resolve().parent.parent / "README.md"


def test_10a_full_scale_targets_documented_not_asserted():
    """The external full-scale reference numbers are recorded in the README
    as targets, explicitly marked as not asserted by the test suite."""
    text = README.read_text(encoding="utf-8")
    for number in ("0.571", "0.501", "0.689", "0.670"):
        assert number in text, f"reference value {number} missing from README"
    assert "not asserted" in text
    passed(10, "full-scale targets documented")


@pytest.mark.skipif("MOTIFCLASS_FULLSCALE_DIR" not in os.environ,
                    reason="full-scale datasets are user-supplied; set "
                           "MOTIFCLASS_FULLSCALE_DIR to a directory with "
                           "corpus.jsonl/categories.json/patterns.txt to run")
def test_10b_full_scale_pipeline_completes(tmp_path):
    """Optional: with a user-supplied full-scale dataset in the documented
    JSONL format, the pipeline completes end to end. Reference scores are
    printed for comparison against the documented external targets; they are
    not asserted."""
    data = Path(os.environ["MOTIFCLASS_FULLSCALE_DIR"])
    cfg = PipelineConfig.from_dict({
        "corpus": str(data / "corpus.jsonl"),
        "categories": str(data / "categories.json"),
        "patterns": str(data / "patterns.txt"),
        "workdir": str(tmp_path / "fullscale")})
    report = run_stage("all", cfg)
    print(f"full-scale run: micro_f1={report['micro_f1']:.3f} "
          f"macro_f1={report['macro_f1']:.3f} (reference targets are "
          "documented in README.md and not asserted)")
    passed(10, "full-scale pipeline completes")
