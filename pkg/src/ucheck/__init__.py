"""Empirical assessment of whether a covariate set suffices for confounding adjustment."""

__version__ = "0.1.0"
