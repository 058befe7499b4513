"""Convolutional text classifier trained on pseudo-labeled sequences."""

from .features import build_input_sequence
from .kimcnn import PAD, UNK, ClassifierConfig, KimCNN, train_classifier

__all__ = ["PAD", "UNK", "ClassifierConfig", "KimCNN", "build_input_sequence",
           "train_classifier"]
