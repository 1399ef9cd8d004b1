"""Segmentation and regression losses as standalone evaluable metrics.

Masks are scored with a pixel-summed binary cross entropy and a Dice overlap
loss; distances with mean squared error. The combined objective is an
importance-weighted sum of the logarithms of the component losses, so each
component is clamped away from zero before the log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, EmptyInput, LengthMismatch, ShapeMismatch

EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    """Importance weight per component loss (BCE, Dice, MSE)."""

    alpha: tuple[float, ...] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not self.alpha or any(a <= 0 for a in self.alpha):
            raise ValueError(f"all loss weights must be positive, got {self.alpha}")


@dataclass(frozen=True)
class LabelPair:
    """Ground truth for one goal pair: a binary region mask and the true distance."""

    mask: object  # RegionMask (or array-like)
    distance: float

    def __post_init__(self):
        values = _values(self.mask)
        if not np.isin(values, (0.0, 1.0)).all():
            raise ValueError("label masks must be binary")
        if not (math.isfinite(self.distance) and self.distance >= 0):
            raise ValueError(f"label distance must be finite and >= 0, got {self.distance}")


def _values(mask) -> np.ndarray:
    return np.asarray(getattr(mask, "values", mask), dtype=np.float64)


def _paired(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    a, b = _values(y), _values(yhat)
    if a.shape != b.shape:
        raise ShapeMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    return a, b


def bce_loss(y, yhat) -> float:
    """Pixel-summed binary cross entropy of a prediction against a binary label.

    Predicted values are clamped to [EPS, 1-EPS] before the logs.
    """
    a, b = _paired(y, yhat)
    bc = np.clip(b, EPS, 1.0 - EPS)
    return float(-(a * np.log(bc) + (1.0 - a) * np.log(1.0 - bc)).sum())


def dice_loss(y, yhat) -> float:
    """One minus the Dice overlap coefficient, with squared-magnitude denominator."""
    a, b = _paired(y, yhat)
    intersection = float((a * b).sum())
    denom = float((a * a).sum() + (b * b).sum())
    if denom == 0.0:
        raise DegenerateInput("both masks are all-zero; Dice denominator vanishes")
    return 1.0 - 2.0 * intersection / denom


def mse_loss(c, chat) -> float:
    """Mean squared error between true and estimated distances."""
    a = np.asarray(c, dtype=np.float64)
    b = np.asarray(chat, dtype=np.float64)
    if a.shape != b.shape:
        raise LengthMismatch(f"distance sequences differ in length: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise EmptyInput("distance sequences must be nonempty")
    return float(np.mean((a - b) ** 2))


def total_loss(losses, weights: LossWeights | None = None) -> float:
    """Importance-weighted sum of log component losses; components clamped to >= EPS."""
    weights = weights or LossWeights()
    vals = tuple(float(v) for v in losses)
    if len(vals) != len(weights.alpha):
        raise LengthMismatch(
            f"{len(vals)} component losses but {len(weights.alpha)} weights"
        )
    return float(sum(a * math.log(max(v, EPS)) for a, v in zip(weights.alpha, vals)))


def score_predictions(labels, predictions, weights: LossWeights | None = None):
    """Score one prediction set against labels over their shared goal pairs.

    Both arguments are ExternalEstimator-like objects exposing ``distances``
    and ``masks`` dicts keyed by (i, j). Returns (rows, aggregate): one
    (i, j, bce, dice, squared_error) row per pair, and an aggregate dict with
    mean BCE, mean Dice, the MSE over all pair distances, and the combined
    log-weighted total of those three.
    """
    weights = weights or LossWeights()
    keys = sorted(labels.distances.keys())
    missing = [k for k in keys if k not in predictions.distances]
    if missing:
        raise LengthMismatch(f"predictions lack labeled pairs {missing}")
    rows = []
    c_true, c_est = [], []
    for i, j in keys:
        label = LabelPair(labels.masks[(i, j)], labels.distances[(i, j)])
        l1 = bce_loss(label.mask, predictions.masks[(i, j)])
        l2 = dice_loss(label.mask, predictions.masks[(i, j)])
        err = (label.distance - predictions.distances[(i, j)]) ** 2
        rows.append((i, j, l1, l2, err))
        c_true.append(label.distance)
        c_est.append(predictions.distances[(i, j)])
    l1_mean = float(np.mean([r[2] for r in rows]))
    l2_mean = float(np.mean([r[3] for r in rows]))
    l3 = mse_loss(c_true, c_est)
    aggregate = {
        "bce_mean": l1_mean,
        "dice_mean": l2_mean,
        "mse": l3,
        "total": total_loss((l1_mean, l2_mean, l3), weights),
    }
    return rows, aggregate
