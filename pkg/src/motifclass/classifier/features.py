"""Input sequence construction for the classifier.

A real document becomes: its metadata instance tokens first (types in schema
declaration order, values in original order), then its text tokens as Term
instance ids. Generated pseudo documents already arrive as mixed instance-id
sequences.
"""

from __future__ import annotations

from ..corpus import CorpusSchema, Document
from ..motifs import term_instance_id


def build_input_sequence(doc: Document, schema: CorpusSchema,
                         max_length: int | None = None) -> list[str]:
    tokens = []
    for mtype in schema.metadata_types:
        for value in doc.metadata_values(mtype):
            tokens.append(f"{mtype}[{value}]")
    tokens.extend(term_instance_id(t) for t in doc.terms)
    if max_length is not None:
        tokens = tokens[:max_length]
    return tokens
