"""Compact guided depth-upsampling trainer for prepared sample corpora."""

from .loss import object_loss
from .model import GuidedUpsampler
from .train import TrainConfig, load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"

__all__ = [
    "GuidedUpsampler",
    "TrainConfig",
    "load_checkpoint",
    "object_loss",
    "save_checkpoint",
    "train",
]
