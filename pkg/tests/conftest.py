from __future__ import annotations

import numpy as np
import pytest

from cke import embedding_classifier as ec
from cke import evaluation as ev

PAPER_EXAMPLE = "H1. Commitment configuration is positively associated with firm performance."
MASKING_EXAMPLE = "Playing music causes better concentration."


@pytest.fixture(scope="session")
def synth_small() -> ev.SyntheticCorpus:
    return ev.generate_synthetic(seed=42, n_per_class=60)


@pytest.fixture(scope="session")
def hypothesis_model(synth_small):
    """Model-4 settings (uni-grams, lr 0.3, dim 120, negative sampling)."""
    train_set, test_set = ev.stratified_split(
        ev._as_token_dataset(synth_small.hypothesis), ev.SplitSpec(seed=42)
    )
    cfg = ec.ClassifierConfig(ngram_order=1, learning_rate=0.3, dim=120, seed=42)
    model = ec.train(train_set, cfg)
    return model, train_set, test_set


def rel_err(analytic: float, numeric: float, floor: float = 1e-3) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def central_difference(fn, arr: np.ndarray, index, eps: float = 1e-5) -> float:
    orig = arr[index]
    arr[index] = orig + eps
    up = fn()
    arr[index] = orig - eps
    down = fn()
    arr[index] = orig
    return (up - down) / (2 * eps)
