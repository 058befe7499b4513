import numpy as np
import pytest

from motifclass.corpus import CorpusSchema, CorpusStore, Document, parse_patterns


@pytest.fixture
def paper_schema():
    schema = CorpusSchema(metadata_types=["Venue", "Author", "Year"], min_freq=1)
    schema.candidate_patterns = parse_patterns(
        ["Venue", "Author", "Year", "Venue-Year", "Venue-Author",
         "Author-Author", "Author-Year", "Term"], schema)
    return schema


@pytest.fixture
def doc1():
    # The running example: one EMNLP 2016 paper with three authors.
    return Document(
        "d1",
        tuple("cultural shift or linguistic drift".split()),
        {"Venue": ("EMNLP",), "Year": ("2016",),
         "Author": ("W. Hamilton", "J. Leskovec", "D. Jurafsky")},
    )


def random_corpus(rng: np.random.Generator, n_docs: int, schema: CorpusSchema,
                  vocab_size: int = 12, n_values: int = 4,
                  doc_length: int = 8) -> CorpusStore:
    """Small random corpus for oracle comparisons."""
    docs = []
    for i in range(n_docs):
        terms = tuple(f"t{rng.integers(vocab_size)}" for _ in range(doc_length))
        metadata = {}
        for mtype in schema.metadata_types:
            k = int(rng.integers(0, 4 if mtype == "Author" else 2))
            values = sorted({f"{mtype[0].lower()}{rng.integers(n_values)}"
                             for _ in range(k)})
            if values:
                metadata[mtype] = tuple(values)
        docs.append(Document(f"d{i}", terms, metadata))
    return CorpusStore(docs, schema)
