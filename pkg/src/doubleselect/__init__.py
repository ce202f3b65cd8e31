"""Inference on a treatment effect after selecting among many controls."""

__version__ = "0.1.0"
