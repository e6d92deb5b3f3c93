"""Hybrid autoencoder/transformer models for RF baseband tasks."""

__version__ = "0.1.0"
