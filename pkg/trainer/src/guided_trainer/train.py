"""Training loop: Adam on the weighted object loss over random crops."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from .data import CropSampler, full_tensors, load_sample, split_corpus
from .loss import BACKGROUND_WEIGHT, OBJECT_WEIGHT, object_loss
from .model import GuidedUpsampler


@dataclass
class TrainConfig:
    learning_rate: float = 5e-4
    epochs: int = 200
    batch_size: int = 16
    steps_per_epoch: int = 12
    crop: int = 64
    channels: int = 24
    scale: int = 4
    object_weight: float = OBJECT_WEIGHT
    background_weight: float = BACKGROUND_WEIGHT
    split_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.split_fraction < 1.0:
            raise ValueError("split_fraction must lie in (0, 1)")


def save_checkpoint(path, model: GuidedUpsampler, config: TrainConfig) -> None:
    """Atomic write: the file is either the old or the new checkpoint."""
    path = Path(path)
    payload = {
        "state_dict": model.state_dict(),
        "config": asdict(config),
        "config_json": json.dumps(asdict(config), sort_keys=True),
    }
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            torch.save(payload, f)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> tuple[GuidedUpsampler, TrainConfig]:
    payload = torch.load(path, map_location="cpu", weights_only=True)
    config = TrainConfig(**payload["config"])
    model = GuidedUpsampler(channels=config.channels)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, config


def train(
    corpus_dir,
    config: TrainConfig,
    checkpoint_path,
    curve_path=None,
) -> dict:
    """Train on the corpus' train split; write a checkpoint and a loss
    curve. Returns a summary dict with the curve and split directories."""
    torch.manual_seed(config.seed)
    train_files, test_files = split_corpus(
        corpus_dir, config.split_fraction, config.seed
    )
    if not train_files:
        raise ValueError("train split is empty")
    train_samples = [load_sample(f) for f in train_files]
    for s in train_samples:
        if s.scale != config.scale:
            raise ValueError(
                f"{s.dir}: sample scale {s.scale} != config scale {config.scale}"
            )

    model = GuidedUpsampler(channels=config.channels)
    model.train()
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    sampler = CropSampler(train_samples, config.crop, config.seed)

    curve = []
    for epoch in range(config.epochs):
        losses = []
        for _ in range(config.steps_per_epoch):
            batch = sampler.batch(config.batch_size)
            optimizer.zero_grad()
            pred = model(batch["pre_up"], batch["intensity"])
            loss = object_loss(
                pred, batch["target"], batch["object_map"],
                object_weight=config.object_weight,
                background_weight=config.background_weight,
            )
            if not math.isfinite(loss.item()):
                raise RuntimeError(
                    f"loss became non-finite at epoch {epoch}; aborting"
                )
            loss.backward()
            optimizer.step()
            losses.append(loss.item())
        curve.append({"epoch": epoch, "train_loss": float(np.mean(losses))})

    model.eval()
    save_checkpoint(checkpoint_path, model, config)
    summary = {
        "curve": curve,
        "train_dirs": [str(f.dir) for f in train_files],
        "test_dirs": [str(f.dir) for f in test_files],
        "initial_loss": curve[0]["train_loss"],
        "final_loss": curve[-1]["train_loss"],
    }
    if curve_path is not None:
        with open(curve_path, "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2)
            f.write("\n")
    return summary


def validation_loss(model: GuidedUpsampler, files) -> float:
    """Mean full-image object loss over a list of SampleFiles."""
    model.eval()
    losses = []
    with torch.no_grad():
        for f in files:
            t = full_tensors(load_sample(f))
            pred = model(t["pre_up"], t["intensity"])
            losses.append(
                object_loss(pred, t["target"], t["object_map"]).item()
            )
    return float(np.mean(losses))
