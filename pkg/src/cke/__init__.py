"""Causal knowledge extraction from scholarly text.

Subpackages cover the full pipeline: corpus cleaning and hypothesis-candidate
mining, feature construction, a shallow embedding-averaging classifier,
linear causality baselines, per-word explanations, a bi-LSTM entity tagger,
evaluation utilities with a synthetic-corpus generator, and the annotation
service that collects the human labels everything trains on.
"""

__version__ = "0.1.0"
