"""Disentangled style/content autoencoders for text and non-parallel style transfer."""

__version__ = "0.1.0"
