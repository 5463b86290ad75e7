"""Weighted L1 object loss.

Object pixels get full weight, background pixels a small one, and the sum
is normalized by the total weight so a uniform error of e millimeters
scores e. The validity mask restricts which pixels participate; training
on filled maps passes an all-ones mask (dropping undefined regions from
the loss destabilizes training, which is what the filling avoids).
"""

from __future__ import annotations

import torch

OBJECT_WEIGHT = 1.0
BACKGROUND_WEIGHT = 0.01


def object_loss(
    pred: torch.Tensor,
    target: torch.Tensor,
    object_map: torch.Tensor,
    valid: torch.Tensor | None = None,
    object_weight: float = OBJECT_WEIGHT,
    background_weight: float = BACKGROUND_WEIGHT,
) -> torch.Tensor:
    """Sum(w * |pred - target|) / Sum(w) over valid pixels."""
    weights = torch.where(
        object_map > 0.5,
        torch.as_tensor(object_weight, dtype=pred.dtype, device=pred.device),
        torch.as_tensor(background_weight, dtype=pred.dtype, device=pred.device),
    )
    if valid is not None:
        weights = weights * valid
    total = weights.sum()
    if total <= 0:
        raise ValueError("object loss needs at least one valid pixel")
    return (weights * (pred - target).abs()).sum() / total
