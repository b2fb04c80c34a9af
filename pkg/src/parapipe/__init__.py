"""Toolkit for turning decaying, ID-distributed social media datasets into
persistent training sets: normalization, paraphrase candidate generation,
trigram-similarity filtering, corpus splitting, and evaluation arithmetic."""

__version__ = "0.1.0"
