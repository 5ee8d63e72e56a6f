"""Automatic evaluation: transfer accuracy, content preservation, fluency, probes."""

from .classifier import CNNClassifier, CNNConfig, LexiconClassifier, train_style_classifier, transfer_accuracy
from .kn import KNModel, kn_log_likelihood, train_kn_lm
from .metrics import cosine_content_similarity, word_overlap
from .probe import ProbeResult, export_latents, latent_probe, pca_project, probe_all

__all__ = [
    "CNNClassifier", "CNNConfig", "LexiconClassifier", "train_style_classifier",
    "transfer_accuracy", "KNModel", "kn_log_likelihood", "train_kn_lm",
    "cosine_content_similarity", "word_overlap", "ProbeResult", "export_latents",
    "latent_probe", "pca_project", "probe_all",
]
