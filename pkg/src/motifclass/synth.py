"""Deterministic synthetic corpora with planted category structure.

The main generator plants exactly the signals the pipeline is built to
exploit:

* each category splits into subtopics with disjoint vocabularies, so the
  category name term (which spans all subtopics) is the only text-level
  signal covering the whole category;
* each venue serves two neighboring categories, split by year, so Venue
  alone is ambiguous but Venue-Year is category-indicative;
* each author publishes in two neighboring categories, so Author alone is
  ambiguous but the Author-Author pair pins the category;
* name terms occasionally leak into other categories' documents, so a
  classifier that keys only on name tokens mislabels the leaked documents.

Higher-order motif instances (Venue-Year, Author-Author) are thus the only
clean whole-category indicators besides the name itself, which is what the
full pipeline exploits and the ablations lose.

A smaller broad-vs-narrow generator plants one venue spread over two topical
clusters and one confined to a single cluster, for specificity-ordering
checks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import (CategorySpec, CorpusSchema, CorpusStore, Document,
                     parse_patterns)


@dataclass
class SynthConfig:
    n_categories: int = 5
    docs_per_category: int = 400
    doc_length: int = 30
    n_subtopics: int = 8
    terms_per_subtopic: int = 6
    n_stopwords: int = 30
    seed: int = 7
    p_name: float = 0.04           # own-category rate for the name term
    p_name_leak: float = 0.002     # per-foreign-name leak rate into other categories
    p_subtopic: float = 0.72
    p_planted_venue: float = 0.85


def _schema() -> CorpusSchema:
    schema = CorpusSchema(metadata_types=["Venue", "Author", "Year"], min_freq=5)
    schema.candidate_patterns = parse_patterns(
        ["Venue-Year", "Author-Author", "Term"], schema)
    return schema


def generate_synthetic_corpus(config: SynthConfig = SynthConfig()):
    """Returns (CorpusStore, categories, schema). Gold labels included."""
    rng = np.random.default_rng(config.seed)
    n_cat = config.n_categories
    categories = [CategorySpec(f"cat{c}", f"topic{c}") for c in range(n_cat)]
    schema = _schema()

    sub_vocab = {(c, s): [f"w{c}_{s}_{k}" for k in range(config.terms_per_subtopic)]
                 for c in range(n_cat) for s in range(config.n_subtopics)}
    stopwords = [f"the{k}" for k in range(config.n_stopwords)]
    p_leak_any = config.p_name_leak * (n_cat - 1)

    docs: list[Document] = []
    gold: dict[str, str] = {}
    idx = 0
    for c in range(n_cat):
        prv = (c - 1) % n_cat
        for _ in range(config.docs_per_category):
            doc_id = f"d{idx:05d}"
            idx += 1
            s = int(rng.integers(config.n_subtopics))
            # Venue conf{c} serves cat c in 2010 and cat c+1 in 2011, so the
            # Venue-Year combination is category-indicative while Venue alone
            # is not.
            if rng.random() < config.p_planted_venue:
                if rng.random() < 0.8:
                    venue, year = f"conf{c}", "2010"
                else:
                    venue, year = f"conf{prv}", "2011"
            else:
                venue = f"misc{rng.integers(3)}"
                year = str(2010 + rng.integers(2))
            # Author a{c} publishes in categories c and c+1; the pair
            # (a{c-1}, a{c}) only ever appears in category c.
            authors = (f"a{prv}", f"a{c}")

            tokens = []
            for _ in range(config.doc_length):
                r = rng.random()
                if r < config.p_name:
                    tokens.append(categories[c].name_term)
                elif r < config.p_name + p_leak_any:
                    other = int(rng.integers(n_cat - 1))
                    other = other if other < c else other + 1
                    tokens.append(categories[other].name_term)
                elif r < config.p_name + p_leak_any + config.p_subtopic:
                    tokens.append(sub_vocab[(c, s)][rng.integers(config.terms_per_subtopic)])
                else:
                    tokens.append(stopwords[rng.integers(config.n_stopwords)])

            docs.append(Document(doc_id, tuple(tokens), {
                "Venue": (venue,), "Author": authors, "Year": (year,)}))
            gold[doc_id] = categories[c].label_id

    return CorpusStore(docs, schema, gold), categories, schema


def generate_broad_narrow_corpus(seed: int, n_docs_per_cluster: int = 250,
                                 doc_length: int = 20):
    """Two topical clusters; venue 'vbroad' spans both, 'vnarrow' only one.

    'vbroad' appears on every document and 'vnarrow' on every cluster-0
    document, so both get many updates but only the narrow venue's contexts
    are topically coherent.

    Returns (CorpusStore, schema, 'Venue[vbroad]', 'Venue[vnarrow]').
    """
    rng = np.random.default_rng(seed)
    schema = CorpusSchema(metadata_types=["Venue"], min_freq=2)
    schema.candidate_patterns = parse_patterns(["Venue", "Term"], schema)
    vocab = {0: [f"x{k}" for k in range(20)], 1: [f"y{k}" for k in range(20)]}
    docs = []
    idx = 0
    for cluster in (0, 1):
        for _ in range(n_docs_per_cluster):
            venues = ["vbroad"]
            if cluster == 0:
                venues.append("vnarrow")
            tokens = tuple(vocab[cluster][rng.integers(20)]
                           for _ in range(doc_length))
            docs.append(Document(f"d{idx:04d}", tokens, {"Venue": tuple(venues)}))
            idx += 1
    return CorpusStore(docs, schema), schema, "Venue[vbroad]", "Venue[vnarrow]"


def generate_two_cluster_corpus(seed: int, n_docs_per_cluster: int = 60,
                                doc_length: int = 20):
    """Two disjoint venue+term groups; returns (store, schema, cluster_terms)."""
    rng = np.random.default_rng(seed)
    schema = CorpusSchema(metadata_types=["Venue"], min_freq=2)
    schema.candidate_patterns = parse_patterns(["Venue", "Term"], schema)
    vocab = {0: [f"x{k}" for k in range(15)], 1: [f"y{k}" for k in range(15)]}
    docs = []
    idx = 0
    for cluster in (0, 1):
        for _ in range(n_docs_per_cluster):
            tokens = tuple(vocab[cluster][rng.integers(15)]
                           for _ in range(doc_length))
            docs.append(Document(f"d{idx:04d}", tokens,
                                 {"Venue": (f"v{cluster}",)}))
            idx += 1
    return CorpusStore(docs, schema), schema, vocab


def write_demo_dataset(workdir: str | Path, config: SynthConfig = SynthConfig()):
    """Write corpus.jsonl / categories.json / patterns.txt for the CLI."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    store, categories, schema = generate_synthetic_corpus(config)
    corpus_path = workdir / "corpus.jsonl"
    store.to_jsonl(corpus_path)
    categories_path = workdir / "categories.json"
    with open(categories_path, "w", encoding="utf-8") as f:
        json.dump([{"label": c.label_id, "name": c.name_term} for c in categories],
                  f, indent=2)
        f.write("\n")
    patterns_path = workdir / "patterns.txt"
    with open(patterns_path, "w", encoding="utf-8") as f:
        f.write("# metadata motif patterns\n")
        for p in schema.candidate_patterns:
            f.write(p.pattern_id + "\n")
    return corpus_path, categories_path, patterns_path
