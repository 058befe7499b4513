"""Frequent motif instance enumeration and instance<->document indexes.

Motif patterns are stars around a single Document node, so enumeration is
just value combinations per document: for each pattern, every combination of
distinct metadata values realized by a document yields one candidate
instance. Instances appearing in fewer than ``min_freq`` documents are
discarded. Document frequency counts a document once however many times a
term occurs in it.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations, product
from pathlib import Path
from typing import Iterable

from .corpus import TERM_TYPE, CorpusStore, Document, MotifPattern

#: Cap on per-document combinations for one pattern, to bound the pair
#: explosion on documents with very many values of one type.
MAX_COMBOS_PER_DOC = 100


def make_instance_id(bindings: Iterable[tuple[str, str]]) -> str:
    """Canonical id: bindings sorted by (type, value), "Type[val]-Type[val]"."""
    return "-".join(f"{t}[{v}]" for t, v in sorted(bindings))


@dataclass(frozen=True)
class MotifInstance:
    """A motif pattern with concrete values bound, e.g. Venue[EMNLP]-Year[2016]."""

    instance_id: str
    pattern: MotifPattern
    bindings: tuple[tuple[str, str], ...]
    doc_freq: int = 0

    @property
    def pattern_id(self) -> str:
        return self.pattern.pattern_id

    @property
    def is_term(self) -> bool:
        return self.pattern.is_term

    @property
    def term(self) -> str:
        if not self.is_term:
            raise ValueError(f"{self.instance_id} is not a Term instance")
        return self.bindings[0][1]


def term_instance_id(term: str) -> str:
    return f"{TERM_TYPE}[{term}]"


def appears_in(instance: MotifInstance, doc: Document) -> bool:
    """True iff the document contains every bound value of the instance.

    Term bindings match against the token list; metadata bindings against the
    document's instance sets (an Author-Author instance needs both authors).
    """
    for mtype, value in instance.bindings:
        if mtype == TERM_TYPE:
            if value not in doc.terms:
                return False
        elif value not in doc.metadata_values(mtype):
            return False
    return True


def _doc_combinations(doc: Document, pattern: MotifPattern,
                      max_combos: int) -> list[tuple[tuple[str, str], ...]]:
    """All bindings of `pattern` realized by `doc`, in canonical order."""
    if pattern.is_term:
        return [((TERM_TYPE, t),) for t in sorted(set(doc.terms))]
    # Group the (sorted) node types by multiplicity; within a type the bound
    # values are distinct and stored sorted, making e.g. Author-Author pairs
    # unordered.
    per_type: list[list[tuple[tuple[str, str], ...]]] = []
    seen_types: dict[str, int] = {}
    for t in pattern.node_types:
        seen_types[t] = seen_types.get(t, 0) + 1
    for mtype in sorted(seen_types):
        k = seen_types[mtype]
        values = sorted(doc.metadata_values(mtype))
        if len(values) < k:
            return []
        per_type.append([tuple((mtype, v) for v in combo)
                         for combo in combinations(values, k)])
    out = []
    for parts in product(*per_type):
        out.append(tuple(b for part in parts for b in part))
        if len(out) >= max_combos:
            break
    return out


class MotifInstanceIndex:
    """Bidirectional index between frequent motif instances and documents."""

    def __init__(self, instances: dict[str, MotifInstance],
                 by_doc: dict[str, set[str]], by_instance: dict[str, set[str]]):
        self.instances = instances
        self.by_doc = by_doc
        self.by_instance = by_instance

    def __len__(self) -> int:
        return len(self.instances)

    def __contains__(self, instance_id: str) -> bool:
        return instance_id in self.instances

    def __getitem__(self, instance_id: str) -> MotifInstance:
        return self.instances[instance_id]

    @property
    def instance_ids(self) -> list[str]:
        return list(self.instances)

    def docs_of(self, instance_id: str) -> set[str]:
        return self.by_instance.get(instance_id, set())

    def instances_of(self, doc_id: str) -> set[str]:
        return self.by_doc.get(doc_id, set())

    def term_instance_ids(self) -> list[str]:
        return [i for i, m in self.instances.items() if m.is_term]

    def dump_tsv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("instance_id\tpattern_id\tdoc_freq\n")
            for iid in sorted(self.instances):
                m = self.instances[iid]
                f.write(f"{iid}\t{m.pattern_id}\t{m.doc_freq}\n")


def enumerate_instances(corpus: CorpusStore, patterns: list[MotifPattern],
                        min_freq: int,
                        max_combos_per_doc: int = MAX_COMBOS_PER_DOC) -> MotifInstanceIndex:
    """Enumerate all motif instances with document frequency >= min_freq."""
    if min_freq < 1:
        raise ValueError("min_freq must be >= 1")
    candidates: dict[str, tuple[MotifPattern, tuple[tuple[str, str], ...]]] = {}
    doc_hits: dict[str, set[str]] = defaultdict(set)
    for doc in corpus.documents():
        for pattern in patterns:
            for bindings in _doc_combinations(doc, pattern, max_combos_per_doc):
                iid = make_instance_id(bindings)
                if iid not in candidates:
                    candidates[iid] = (pattern, bindings)
                doc_hits[iid].add(doc.doc_id)

    instances: dict[str, MotifInstance] = {}
    by_instance: dict[str, set[str]] = {}
    by_doc: dict[str, set[str]] = defaultdict(set)
    for iid in sorted(candidates):
        docs = doc_hits[iid]
        if len(docs) < min_freq:
            continue
        pattern, bindings = candidates[iid]
        instances[iid] = MotifInstance(iid, pattern, bindings, doc_freq=len(docs))
        by_instance[iid] = set(docs)
        for d in docs:
            by_doc[d].add(iid)
    return MotifInstanceIndex(instances, dict(by_doc), by_instance)
