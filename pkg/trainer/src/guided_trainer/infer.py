"""Inference: refine one sample's LR depth and write the prediction PFM."""

from __future__ import annotations

import numpy as np
import torch

from .data import load_sample
from .formats import SampleFiles, nn_upsample, write_pfm
from .train import load_checkpoint

MIN_DEPTH_MM = 0.1  # PFM treats 0.0 as undefined; keep predictions positive


def predict(model, sample: SampleFiles) -> np.ndarray:
    loaded = load_sample(sample)
    model.eval()
    with torch.no_grad():
        pred = model(
            torch.from_numpy(loaded.pre_up[None, None]),
            torch.from_numpy(loaded.intensity[None, None]),
        )
    out = pred[0, 0].numpy().astype(np.float32)
    return np.maximum(out, np.float32(MIN_DEPTH_MM))


def infer(checkpoint_path, sample_dir, out_path) -> np.ndarray:
    """Run the checkpointed model on a prepared sample and write the HR
    prediction as PFM (fully defined, consumable by the pipeline's
    evaluate command)."""
    model, config = load_checkpoint(checkpoint_path)
    sample = SampleFiles(sample_dir)
    if sample.scale != config.scale:
        raise ValueError(
            f"sample scale {sample.scale} != checkpoint scale {config.scale}"
        )
    out = predict(model, sample)
    if not np.isfinite(out).all():
        raise ValueError("prediction contains non-finite values")
    write_pfm(out_path, out)
    return out


def nn_baseline(sample_dir, out_path) -> np.ndarray:
    """Write the nearest-neighbor pre-expansion as a baseline prediction."""
    sample = SampleFiles(sample_dir)
    lr = sample.lr_depth()
    if np.isnan(lr).any():
        raise ValueError(f"{sample.dir}: LR depth contains undefined pixels")
    out = nn_upsample(lr, sample.scale).astype(np.float32)
    write_pfm(out_path, out)
    return out
