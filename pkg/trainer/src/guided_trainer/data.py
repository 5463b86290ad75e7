"""Corpus loading, train/test split and crop sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .formats import SampleFiles, find_samples, nn_upsample


@dataclass
class LoadedSample:
    """All HR-resolution planes a training step needs, as float32 arrays."""

    pre_up: np.ndarray
    intensity: np.ndarray
    object_map: np.ndarray
    definition: np.ndarray
    target: np.ndarray
    scale: int
    dir: str


def load_sample(files: SampleFiles) -> LoadedSample:
    if not files.is_prepared():
        raise ValueError(f"{files.dir}: sample is not prepared (missing LR "
                         "depth or object map)")
    lr = files.lr_depth()
    if np.isnan(lr).any():
        raise ValueError(f"{files.dir}: LR depth contains undefined pixels")
    target = files.hr_depth()
    if np.isnan(target).any():
        raise ValueError(f"{files.dir}: HR depth contains undefined pixels")
    return LoadedSample(
        pre_up=nn_upsample(lr, files.scale),
        intensity=files.intensity(),
        object_map=files.object_map(),
        definition=files.definition(),
        target=target,
        scale=files.scale,
        dir=str(files.dir),
    )


def split_corpus(
    corpus_dir, split_fraction: float, seed: int
) -> tuple[list[SampleFiles], list[SampleFiles]]:
    """Deterministic shuffle split into (train, test)."""
    samples = find_samples(corpus_dir)
    order = np.random.default_rng(seed).permutation(len(samples))
    n_train = int(round(split_fraction * len(samples)))
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


class CropSampler:
    """Draws aligned random crops from preloaded samples."""

    def __init__(self, samples: list[LoadedSample], crop: int, seed: int) -> None:
        if not samples:
            raise ValueError("no training samples")
        self.samples = samples
        self.crop = crop
        self.rng = np.random.default_rng(seed)

    def batch(self, batch_size: int) -> dict[str, torch.Tensor]:
        pre, tex, obj, tgt = [], [], [], []
        for _ in range(batch_size):
            s = self.samples[self.rng.integers(len(self.samples))]
            h, w = s.target.shape
            size = min(self.crop, h, w)
            r = int(self.rng.integers(0, h - size + 1))
            c = int(self.rng.integers(0, w - size + 1))
            window = (slice(r, r + size), slice(c, c + size))
            pre.append(s.pre_up[window])
            tex.append(s.intensity[window])
            obj.append(s.object_map[window])
            tgt.append(s.target[window])
        to = lambda arrs: torch.from_numpy(np.stack(arrs)[:, None, :, :])
        return {
            "pre_up": to(pre),
            "intensity": to(tex),
            "object_map": to(obj),
            "target": to(tgt),
        }


def full_tensors(sample: LoadedSample) -> dict[str, torch.Tensor]:
    to = lambda a: torch.from_numpy(a[None, None, :, :])
    return {
        "pre_up": to(sample.pre_up),
        "intensity": to(sample.intensity),
        "object_map": to(sample.object_map),
        "target": to(sample.target),
    }
