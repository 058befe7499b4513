"""MotifClass: weakly supervised, metadata-aware text classification.

Pipeline: mine frequent motif instances from documents with metadata, learn
joint unit-sphere embeddings with per-instance specificity, select
category-indicative instances from category names alone, build pseudo
training data by retrieval and generation, then train and evaluate a small
convolutional classifier.
"""

__version__ = "0.1.0"

from .embedding.kernels import BACKEND

__all__ = ["BACKEND", "__version__"]
