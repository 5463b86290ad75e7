"""Compact two-branch guided upsampler.

The depth branch refines the nearest-neighbor pre-expanded LR depth map;
the texture branch extracts edge structure from the HR intensity image and
merges into the depth branch. A residual connection adds the predicted
correction onto the pre-expanded depth, and the final layer is zero-
initialized so the untrained network is the identity on its input depth.
"""

from __future__ import annotations

import torch
import torch.nn as nn

DEPTH_SCALE = 50.0  # mm; conditions the depth-branch input


def conv3(cin: int, cout: int) -> nn.Conv2d:
    return nn.Conv2d(cin, cout, kernel_size=3, padding=1)


class GuidedUpsampler(nn.Module):
    def __init__(self, channels: int = 24) -> None:
        super().__init__()
        c = channels
        self.texture = nn.Sequential(
            conv3(1, c), nn.ReLU(inplace=True),
            conv3(c, c), nn.ReLU(inplace=True),
        )
        self.depth = nn.Sequential(
            conv3(1, c), nn.ReLU(inplace=True),
            conv3(c, c), nn.ReLU(inplace=True),
        )
        self.merge = nn.Sequential(
            conv3(2 * c, c), nn.ReLU(inplace=True),
            conv3(c, c), nn.ReLU(inplace=True),
            conv3(c, c), nn.ReLU(inplace=True),
        )
        self.head = conv3(c, 1)
        # Identity at init: the residual starts at exactly zero.
        nn.init.zeros_(self.head.weight)
        nn.init.zeros_(self.head.bias)

    def forward(self, pre_up: torch.Tensor, intensity: torch.Tensor) -> torch.Tensor:
        """pre_up and intensity are (N, 1, H, W); returns refined depth in
        the same units (millimeters)."""
        center = pre_up.mean(dim=(2, 3), keepdim=True)
        d = (pre_up - center) / DEPTH_SCALE
        feats = torch.cat([self.depth(d), self.texture(intensity)], dim=1)
        residual = self.head(self.merge(feats)) * DEPTH_SCALE
        return pre_up + residual
