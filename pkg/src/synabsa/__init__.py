"""Syntax-guided pipeline for explainable multimodal aspect-based sentiment analysis."""

__version__ = "0.1.0"
