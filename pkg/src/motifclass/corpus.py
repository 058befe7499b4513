"""Corpus, category, and motif-pattern ingestion.

The corpus arrives as UTF-8 JSON Lines: one object per line with keys
``id`` (string), ``text`` (whitespace-tokenized string, phrases joined by
underscores), ``metadata`` (object mapping a metadata type to an array of
instance value strings), and optionally ``label``. Gold labels are kept in
a separate store accessible only through :meth:`CorpusStore.gold_labels`;
no training stage touches them.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import CorpusError

TERM_TYPE = "Term"


@dataclass(frozen=True)
class MotifPattern:
    """A type-level motif shape, e.g. Venue-Year or Author-Author.

    The implicit Document node is omitted; ``node_types`` is the multiset of
    metadata types (sorted, so Year-Venue and Venue-Year canonicalize to the
    same pattern). Text is modeled as the single-node Term pattern.
    """

    node_types: tuple[str, ...]

    def __post_init__(self):
        if not self.node_types:
            raise CorpusError("motif pattern must have at least one node type")
        object.__setattr__(self, "node_types", tuple(sorted(self.node_types)))

    @property
    def pattern_id(self) -> str:
        return "-".join(self.node_types)

    @property
    def is_term(self) -> bool:
        return self.node_types == (TERM_TYPE,)


TERM_PATTERN = MotifPattern((TERM_TYPE,))


@dataclass(frozen=True)
class CategorySpec:
    label_id: str
    name_term: str


@dataclass
class CorpusSchema:
    """Declared metadata types plus the candidate motif patterns to mine."""

    metadata_types: list[str]
    min_freq: int = 5
    candidate_patterns: list[MotifPattern] = field(default_factory=list)

    def __post_init__(self):
        if self.min_freq < 1:
            raise CorpusError("min_freq must be a positive integer")
        if len(set(self.metadata_types)) != len(self.metadata_types):
            raise CorpusError("duplicate metadata type in schema")
        if TERM_TYPE in self.metadata_types:
            raise CorpusError(f"'{TERM_TYPE}' is reserved and cannot be a metadata type")
        # Text is always modeled as a motif.
        if TERM_PATTERN not in self.candidate_patterns:
            self.candidate_patterns.append(TERM_PATTERN)


@dataclass(frozen=True)
class Document:
    """One corpus document: token sequence plus typed metadata instance sets.

    Metadata values keep their input order (the classifier's input-sequence
    builder relies on it) but are unique within a type.
    """

    doc_id: str
    terms: tuple[str, ...]
    metadata: Mapping[str, tuple[str, ...]]

    def metadata_values(self, mtype: str) -> tuple[str, ...]:
        return self.metadata.get(mtype, ())


class CorpusStore:
    """Immutable, validated view of a parsed corpus.

    Gold labels are quarantined: they live in a private map and are only
    reachable through :meth:`gold_labels`, which the evaluation stage alone
    should call.
    """

    def __init__(self, documents: Iterable[Document], schema: CorpusSchema,
                 gold: Mapping[str, str] | None = None):
        self.schema = schema
        self._docs: dict[str, Document] = {}
        for doc in documents:
            if doc.doc_id in self._docs:
                raise CorpusError(f"duplicate document id {doc.doc_id!r}")
            self._docs[doc.doc_id] = doc
        self._gold = dict(gold or {})
        # Document frequency per term (counted once per document).
        self._vocab = Counter()
        for doc in self._docs.values():
            self._vocab.update(set(doc.terms))

    def __len__(self) -> int:
        return len(self._docs)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def __getitem__(self, doc_id: str) -> Document:
        return self._docs[doc_id]

    @property
    def doc_ids(self) -> list[str]:
        return list(self._docs)

    def documents(self) -> Iterator[Document]:
        return iter(self._docs.values())

    def term_doc_freq(self, term: str) -> int:
        return self._vocab.get(term, 0)

    @property
    def vocabulary(self) -> Mapping[str, int]:
        """Term -> document frequency."""
        return self._vocab

    def gold_labels(self) -> dict[str, str]:
        """Evaluation-only access to gold labels (doc_id -> label_id)."""
        return dict(self._gold)

    def has_gold(self) -> bool:
        return bool(self._gold)

    def to_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            for doc in self._docs.values():
                obj = {
                    "id": doc.doc_id,
                    "text": " ".join(doc.terms),
                    "metadata": {t: list(v) for t, v in doc.metadata.items()},
                }
                if doc.doc_id in self._gold:
                    obj["label"] = self._gold[doc.doc_id]
                f.write(json.dumps(obj, sort_keys=True) + "\n")


def _parse_document(obj: dict, schema: CorpusSchema, lineno: int) -> tuple[Document, str | None]:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: expected a JSON object")
    try:
        doc_id = obj["id"]
        text = obj["text"]
    except KeyError as e:
        raise CorpusError(f"line {lineno}: missing required key {e.args[0]!r}") from None
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusError(f"line {lineno}: 'id' must be a nonempty string")
    terms = tuple(text.split()) if isinstance(text, str) else ()
    if not terms:
        raise CorpusError(f"line {lineno}: document {doc_id!r} has empty text")
    metadata: dict[str, tuple[str, ...]] = {}
    for mtype, values in (obj.get("metadata") or {}).items():
        if mtype not in schema.metadata_types:
            raise CorpusError(
                f"line {lineno}: metadata type {mtype!r} not declared in schema")
        seen: list[str] = []
        for v in values:
            if not isinstance(v, str):
                raise CorpusError(f"line {lineno}: metadata value for {mtype!r} must be a string")
            if v not in seen:
                seen.append(v)
        metadata[mtype] = tuple(seen)
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise CorpusError(f"line {lineno}: 'label' must be a string")
    return Document(doc_id, terms, metadata), label


def parse_corpus(path: str | Path, schema: CorpusSchema) -> CorpusStore:
    """Parse a JSONL corpus file into a validated store."""
    docs: list[Document] = []
    gold: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"line {lineno}: malformed JSON ({e.msg})") from None
            doc, label = _parse_document(obj, schema, lineno)
            docs.append(doc)
            if label is not None:
                gold[doc.doc_id] = label
    return CorpusStore(docs, schema, gold)


def parse_categories(path: str | Path) -> list[CategorySpec]:
    """Parse the category file: a JSON array of {"label": ..., "name": ...}."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, list) or not data:
        raise CorpusError("category file must be a nonempty JSON array")
    specs = []
    for entry in data:
        try:
            specs.append(CategorySpec(entry["label"], entry["name"]))
        except (KeyError, TypeError):
            raise CorpusError("each category needs 'label' and 'name' keys") from None
    labels = [s.label_id for s in specs]
    names = [s.name_term for s in specs]
    if len(set(labels)) != len(labels):
        raise CorpusError("category label ids must be pairwise distinct")
    if len(set(names)) != len(names):
        raise CorpusError("category name terms must be pairwise distinct")
    return specs


def validate_categories(categories: list[CategorySpec], store: CorpusStore) -> None:
    """Each category name must be a frequent vocabulary term.

    Names are matched exactly (no lowercasing or normalization).
    """
    for cat in categories:
        freq = store.term_doc_freq(cat.name_term)
        if freq < store.schema.min_freq:
            raise CorpusError(
                f"category {cat.label_id!r}: name term {cat.name_term!r} occurs in "
                f"{freq} documents, below min_freq={store.schema.min_freq}")


def parse_patterns(specs: Iterable[str], schema: CorpusSchema) -> list[MotifPattern]:
    """Canonicalize pattern specs like "Venue-Year"; duplicates collapse."""
    patterns: list[MotifPattern] = []
    for spec in specs:
        spec = spec.strip()
        if not spec:
            raise CorpusError("empty motif pattern spec")
        types = spec.split("-")
        for t in types:
            if t != TERM_TYPE and t not in schema.metadata_types:
                raise CorpusError(f"unknown metadata type {t!r} in pattern {spec!r}")
        if TERM_TYPE in types and len(types) > 1:
            raise CorpusError(f"pattern {spec!r}: Term cannot combine with metadata types")
        pattern = MotifPattern(tuple(types))
        if pattern not in patterns:
            patterns.append(pattern)
    return patterns


def parse_pattern_file(path: str | Path, schema: CorpusSchema) -> list[MotifPattern]:
    """Read patterns from a text file, one per line; '#' starts a comment."""
    specs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                specs.append(line)
    return parse_patterns(specs, schema)
