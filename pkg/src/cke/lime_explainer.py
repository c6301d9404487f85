"""Local surrogate explanations: perturb a sentence by dropping words, score
every variant with the black-box classifier, and fit a weighted ridge model
on word-presence indicators. The fitted weights say how much each word pushed
the prediction."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import ClassifierError, EmptyInput

__all__ = ["Perturbation", "Explanation", "perturb_sentence", "explain"]

KEEP_PROBABILITY = 0.5
KERNEL_WIDTH = 0.25
DEFAULT_RIDGE = 1e-6
DEFAULT_SAMPLES = 500


@dataclass(frozen=True)
class Perturbation:
    kept_mask: tuple[bool, ...]
    variant_text: str


@dataclass
class Explanation:
    word_weights: list[tuple[str, int, float]]  # (word, position, weight), |weight| desc
    intercept: float
    n_samples: int
    classifier_label: str
    seed: int | None = None

    def weight_for(self, position: int) -> float:
        for _, pos, w in self.word_weights:
            if pos == position:
                return w
        raise KeyError(position)

    def to_dict(self) -> dict:
        return {
            "label": self.classifier_label,
            "intercept": self.intercept,
            "weights": [
                {"word": w, "position": p, "weight": wt} for w, p, wt in self.word_weights
            ],
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _variant(words: list[str], mask) -> str:
    return " ".join(w for w, keep in zip(words, mask) if keep)


def perturb_sentence(words: list[str], n_samples: int, seed: int) -> list[Perturbation]:
    """Bernoulli(0.5) keep-masks, seeded. Sample 0 is always the full sentence
    and the empty mask is rejected and resampled."""
    if not words:
        raise EmptyInput("cannot perturb an empty sentence")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    rng = np.random.default_rng(seed)
    k = len(words)
    out = [Perturbation(tuple([True] * k), _variant(words, [True] * k))]
    while len(out) < n_samples:
        mask = rng.random(k) < KEEP_PROBABILITY
        if not mask.any():
            continue
        out.append(Perturbation(tuple(bool(m) for m in mask), _variant(words, mask)))
    return out


def _exhaustive_masks(k: int):
    for combo in itertools.product([True, False], repeat=k):
        if any(combo):
            yield combo


def _fit_weighted_ridge(Z: np.ndarray, y: np.ndarray, pi: np.ndarray, ridge: float):
    n, k = Z.shape
    A = np.hstack([np.ones((n, 1)), Z])
    Aw = A * pi[:, None]
    G = Aw.T @ A
    G[1:, 1:] += ridge * np.eye(k)
    rhs = Aw.T @ y
    try:
        beta = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        beta, *_ = np.linalg.lstsq(G, rhs, rcond=None)
    return float(beta[0]), beta[1:]


def explain(
    classifier,
    sentence: str,
    n_samples: int = DEFAULT_SAMPLES,
    seed: int = 42,
    *,
    label: str = "",
    ridge: float = DEFAULT_RIDGE,
    exhaustive: bool = False,
) -> Explanation:
    """Fit the per-word surrogate for one sentence.

    `classifier` maps a text variant to a real score for the explained label.
    Samples are weighted by exp(-(1 - kept_fraction)^2 / 0.25^2), so variants
    close to the original sentence dominate the fit. With `exhaustive=True`
    all 2^k - 1 nonempty keep-masks are used instead of sampling.
    """
    words = sentence.split()
    if not words:
        raise EmptyInput("empty sentence")
    k = len(words)
    if exhaustive:
        masks = [tuple(m) for m in _exhaustive_masks(k)]
        perturbations = [Perturbation(m, _variant(words, m)) for m in masks]
    else:
        perturbations = perturb_sentence(words, n_samples, seed)

    Z = np.array([p.kept_mask for p in perturbations], dtype=np.float64)
    y = np.empty(len(perturbations))
    for i, p in enumerate(perturbations):
        try:
            y[i] = float(classifier(p.variant_text))
        except Exception as exc:
            raise ClassifierError(f"classifier failed on variant {i}: {exc}") from exc
    kept_fraction = Z.mean(axis=1)
    pi = np.exp(-((1.0 - kept_fraction) ** 2) / KERNEL_WIDTH**2)

    intercept, weights = _fit_weighted_ridge(Z, y, pi, ridge)
    ranked = sorted(
        ((words[j], j, float(weights[j])) for j in range(k)),
        key=lambda t: (-abs(t[2]), t[1]),
    )
    return Explanation(
        word_weights=ranked,
        intercept=intercept,
        n_samples=len(perturbations),
        classifier_label=label,
        seed=None if exhaustive else seed,
    )
