"""Depth-map error metrics: RMSE, Object RMSE and the weighted Object Loss.

All metrics evaluate originally-defined pixels only; the scanned object is
what matters, so filled background regions never contribute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DefinitionMap, DepthMap, ObjectMap


@dataclass(frozen=True)
class LossWeights:
    """Per-pixel weights: full attention on the object, a trickle on the
    background."""

    object_weight: float = 1.0
    background_weight: float = 0.01

    def __post_init__(self) -> None:
        if not (self.object_weight > 0 and self.background_weight > 0):
            raise ValueError("weights must be positive")
        if self.object_weight < self.background_weight:
            raise ValueError("object_weight must be >= background_weight")


def _diff(pred: DepthMap, gt: DepthMap, mask: np.ndarray) -> np.ndarray:
    if pred.shape != gt.shape:
        raise ValueError(f"pred shape {pred.shape} != gt shape {gt.shape}")
    d = pred.data[mask].astype(np.float64) - gt.data[mask].astype(np.float64)
    if not np.isfinite(d).all():
        raise ValueError("undefined depth values inside the evaluation mask")
    return d


def rmse(pred: DepthMap, gt: DepthMap, definition: DefinitionMap) -> float:
    """Root mean squared error over defined pixels, in millimeters."""
    if definition.shape != gt.shape:
        raise ValueError("definition shape does not match depth maps")
    mask = definition.as_bool()
    if not mask.any():
        raise ValueError("no defined pixels to evaluate")
    d = _diff(pred, gt, mask)
    return float(np.sqrt(np.mean(d * d)))


def object_rmse(
    pred: DepthMap,
    gt: DepthMap,
    object_map: ObjectMap,
    definition: DefinitionMap,
) -> float:
    """RMSE restricted to defined object pixels, in millimeters."""
    if definition.shape != gt.shape or object_map.shape != gt.shape:
        raise ValueError("mask shapes do not match depth maps")
    mask = definition.as_bool() & object_map.as_bool()
    if not mask.any():
        raise ValueError("no defined object pixels to evaluate")
    d = _diff(pred, gt, mask)
    return float(np.sqrt(np.mean(d * d)))


def object_loss(
    pred: DepthMap,
    gt: DepthMap,
    object_map: ObjectMap,
    definition: DefinitionMap,
    weights: LossWeights = LossWeights(),
) -> float:
    """Weighted L1 error over defined pixels, normalized by the weight sum
    so a uniform error of e millimeters always scores e."""
    if definition.shape != gt.shape or object_map.shape != gt.shape:
        raise ValueError("mask shapes do not match depth maps")
    mask = definition.as_bool()
    if not mask.any():
        raise ValueError("no defined pixels to evaluate")
    d = np.abs(_diff(pred, gt, mask))
    w = np.where(
        object_map.as_bool()[mask], weights.object_weight, weights.background_weight
    ).astype(np.float64)
    return float(np.sum(w * d) / np.sum(w))
