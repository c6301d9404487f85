"""Logistic regression and linear SVM over sparse or dense feature vectors,
fit by deterministic full-batch (sub)gradient descent."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateDataset, DimensionMismatch
from .features import SparseVector

__all__ = [
    "LinearModel",
    "Prediction",
    "train_logistic",
    "train_linear_svm",
    "predict_linear",
    "stack_features",
]

LOGISTIC = "logistic"
HINGE = "hinge"


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    kind: str
    l2: float


@dataclass(frozen=True)
class Prediction:
    label: int
    score: float
    probability: float | None = None


def stack_features(X, dim: int | None = None):
    """Stack SparseVectors into CSR (or dense rows into a 2-D array).

    `dim` fixes the feature-space width; inferred from the data when omitted.
    """
    if not X:
        raise DegenerateDataset("no feature vectors")
    if isinstance(X[0], SparseVector):
        if dim is None:
            dim = 1 + max((max(v.indices) for v in X if v.indices), default=-1)
        indptr = [0]
        indices: list[int] = []
        values: list[float] = []
        for v in X:
            if v.indices and v.indices[-1] >= dim:
                raise DimensionMismatch(f"index {v.indices[-1]} outside dim {dim}")
            indices.extend(v.indices)
            values.extend(v.values)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.array(values), np.array(indices, dtype=np.int64), np.array(indptr)),
            shape=(len(X), dim),
        )
    M = np.asarray(X, dtype=np.float64)
    if dim is not None and M.shape[1] != dim:
        raise DimensionMismatch(f"dense width {M.shape[1]} != dim {dim}")
    return M


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ez = np.exp(x[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_two_classes(y: np.ndarray):
    if len(np.unique(y)) < 2:
        raise DegenerateDataset("training data contains a single class")


def logistic_objective(M, y01: np.ndarray, w: np.ndarray, b: float, l2: float):
    """Mean cross-entropy plus (l2/2)*||w||^2, with gradients for w and b."""
    n = M.shape[0]
    scores = np.asarray(M @ w).ravel() + b
    # log(1 + exp(-z*s)) computed stably
    z = np.where(y01 > 0.5, 1.0, -1.0)
    m = -z * scores
    loss = float(np.mean(np.logaddexp(0.0, m))) + 0.5 * l2 * float(w @ w)
    resid = _sigmoid(scores) - y01
    grad_w = np.asarray(M.T @ resid).ravel() / n + l2 * w
    grad_b = float(resid.mean())
    return loss, grad_w, grad_b


def hinge_objective(M, y01: np.ndarray, w: np.ndarray, b: float, l2: float):
    """Mean hinge loss plus (l2/2)*||w||^2 with a subgradient."""
    n = M.shape[0]
    z = np.where(y01 > 0.5, 1.0, -1.0)
    scores = np.asarray(M @ w).ravel() + b
    margins = 1.0 - z * scores
    active = margins > 0
    loss = float(margins[active].sum()) / n + 0.5 * l2 * float(w @ w)
    coef = np.where(active, -z, 0.0)
    grad_w = np.asarray(M.T @ coef).ravel() / n + l2 * w
    grad_b = float(coef.mean())
    return loss, grad_w, grad_b


def _descend(M, y01, objective, l2, epochs, lr, kind) -> LinearModel:
    w = np.zeros(M.shape[1])
    b = 0.0
    for _ in range(epochs):
        _, gw, gb = objective(M, y01, w, b, l2)
        w -= lr * gw
        b -= lr * gb
    return LinearModel(weights=w, bias=float(b), kind=kind, l2=l2)


def train_logistic(
    X, y, l2: float = 1e-4, epochs: int = 500, lr: float = 0.5,
    seed: int = 42, dim: int | None = None,
) -> LinearModel:
    """Full-batch gradient descent on L2-regularized logistic loss.

    Initialization is zero, so the fit is deterministic regardless of seed;
    the seed argument is kept for interface symmetry with the SGD trainers.
    """
    M = stack_features(X, dim)
    y01 = np.asarray(y, dtype=np.float64)
    _check_two_classes(y01)
    return _descend(M, y01, logistic_objective, l2, epochs, lr, LOGISTIC)


def train_linear_svm(
    X, y, c: float = 1e-4, epochs: int = 500, lr: float = 0.5,
    seed: int = 42, dim: int | None = None,
) -> LinearModel:
    """Subgradient descent on L2-regularized hinge loss (c = ridge strength)."""
    M = stack_features(X, dim)
    y01 = np.asarray(y, dtype=np.float64)
    _check_two_classes(y01)
    return _descend(M, y01, hinge_objective, c, epochs, lr, HINGE)


def predict_linear(model: LinearModel, x) -> Prediction:
    """Raw margin w.x + b; logistic models also report the sigmoid probability.

    Positive label on score > 0 (equivalently probability > 0.5).
    """
    if isinstance(x, SparseVector):
        if x.indices and x.indices[-1] >= len(model.weights):
            raise DimensionMismatch(
                f"index {x.indices[-1]} outside weight dim {len(model.weights)}"
            )
        score = float(model.weights[list(x.indices)] @ np.asarray(x.values)) if x.indices else 0.0
    else:
        xv = np.asarray(x, dtype=np.float64)
        if xv.shape != model.weights.shape:
            raise DimensionMismatch(f"x shape {xv.shape} != weights {model.weights.shape}")
        score = float(model.weights @ xv)
    score += model.bias
    if model.kind == LOGISTIC:
        prob = float(_sigmoid(np.array([score]))[0])
        return Prediction(label=int(prob > 0.5), score=score, probability=prob)
    return Prediction(label=int(score > 0), score=score)
