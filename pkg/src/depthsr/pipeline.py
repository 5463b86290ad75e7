"""End-to-end sample preparation and evaluation used by the CLI.

prepare_sample runs the stage chain on one sample: re-mask by the stored
definition map, fill holes, augment the texture, downsample the filled map
and extract the object map. Re-running it on its own output reproduces the
same bytes because every stage keys off the definition map, not the
current hole pattern.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import io as dio
from .core import DepthMap, Sample, definition_map
from .geom import (
    OutlierParams,
    color_by_distance,
    nn_distances,
    remove_outliers,
    unproject,
)
from .metrics import LossWeights, object_loss, object_rmse, rmse
from .prep import FillConfig, augment_texture, classify_holes, downsample, fill_depth
from .scene import PlaneSearchConfig, ground_plane, object_map
from .upsample import remask

PathLike = Union[str, Path]


@dataclass(frozen=True)
class PipelineConfig:
    """Flat bundle of every stage parameter, JSON-round-trippable.

    background values of None mean "compute from the dataset" (maximum
    defined depth / intensity over all input samples).
    """

    scale: int = 4
    tau: float = 5.0
    background_value_depth: Optional[float] = None
    background_value_intensity: Optional[float] = None
    connectivity: int = 4
    grid_w: int = 20
    grid_h: int = 20
    near_mean_fraction: float = 0.05
    far_fraction: float = 0.02
    epsilon: float = 3.0
    k_neighbors: int = 20
    std_ratio: float = 2.0
    object_weight: float = 1.0
    background_weight: float = 0.01
    color_threshold: float = 2.0

    def plane_config(self) -> PlaneSearchConfig:
        return PlaneSearchConfig(
            grid_w=self.grid_w,
            grid_h=self.grid_h,
            near_mean_fraction=self.near_mean_fraction,
            far_fraction=self.far_fraction,
            object_margin_epsilon=self.epsilon,
        )

    def fill_config(self, bg_depth: float, bg_intensity: float) -> FillConfig:
        return FillConfig(
            background_value_depth=bg_depth,
            background_value_intensity=bg_intensity,
            connectivity=self.connectivity,
        )

    def outlier_params(self) -> OutlierParams:
        return OutlierParams(k_neighbors=self.k_neighbors, std_ratio=self.std_ratio)

    def loss_weights(self) -> LossWeights:
        return LossWeights(
            object_weight=self.object_weight,
            background_weight=self.background_weight,
        )

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        known = {k: v for k, v in overrides.items() if k in asdict(self)}
        unknown = set(overrides) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **known)

    @classmethod
    def from_json(cls, path: PathLike) -> "PipelineConfig":
        with open(path, encoding="utf-8") as f:
            return cls().with_overrides(json.load(f))


def find_sample_dirs(root: PathLike) -> list[Path]:
    """A sample dir itself, or its immediate children that are sample dirs."""
    root = Path(root)
    if (root / dio.META_FILE).exists():
        return [root]
    if not root.is_dir():
        raise FileNotFoundError(f"no such directory: {root}")
    dirs = sorted(p for p in root.iterdir() if (p / dio.META_FILE).exists())
    if not dirs:
        raise FileNotFoundError(f"no sample directories under {root}")
    return dirs


def ensure_definition(dir_path: PathLike) -> None:
    """Write definition.png from the depth holes when it is missing (the
    first pipeline stage for raw captures)."""
    d = Path(dir_path)
    if (d / dio.DEFINITION_FILE).exists():
        return
    depth = dio.read_pfm(d / dio.DEPTH_HR_FILE)
    dio.write_definition_png(d / dio.DEFINITION_FILE, definition_map(depth))


def dataset_background_values(dirs: list[Path]) -> tuple[float, float]:
    """Maximum defined depth and maximum defined-pixel intensity over the
    whole dataset; used as the background fill constants."""
    max_depth = 0.0
    max_intensity = 0.0
    for d in dirs:
        ensure_definition(d)
        depth = dio.read_pfm(Path(d) / dio.DEPTH_HR_FILE)
        intensity = dio.read_intensity_png(Path(d) / dio.INTENSITY_FILE)
        definition = dio.read_definition_png(Path(d) / dio.DEFINITION_FILE)
        mask = definition.as_bool()
        masked_depth = depth.data[mask & np.isfinite(depth.data)]
        if masked_depth.size:
            max_depth = max(max_depth, float(masked_depth.max()))
        masked_int = intensity.data[mask]
        if masked_int.size:
            max_intensity = max(max_intensity, float(masked_int.max()))
    if max_depth <= 0:
        raise ValueError("dataset has no defined depth pixels")
    return max_depth, max_intensity


def prepare_sample(
    sample: Sample,
    config: PipelineConfig,
    background_depth: float,
    background_intensity: float,
) -> Sample:
    """Run fill, texture augmentation, downsampling and object-map
    extraction on one sample."""
    fill_cfg = config.fill_config(background_depth, background_intensity)
    masked = remask(sample.hr_depth, sample.definition)
    labeling = classify_holes(sample.definition, config.connectivity)
    filled = fill_depth(masked, labeling, fill_cfg)
    augmented = augment_texture(
        sample.intensity, sample.definition, labeling, fill_cfg
    )
    lr = downsample(filled, config.scale, config.tau)
    plane = ground_plane(filled, sample.intrinsics, config.plane_config())
    omap = object_map(
        filled, sample.definition, plane, sample.intrinsics, config.epsilon
    )
    return Sample(
        hr_depth=filled,
        intensity=augmented,
        definition=sample.definition,
        intrinsics=sample.intrinsics,
        scale=config.scale,
        object_map=omap,
        lr_depth=lr,
        metadata=sample.metadata,
    )


def prepare_dir(
    dir_path: PathLike,
    config: PipelineConfig,
    background_depth: float,
    background_intensity: float,
) -> None:
    ensure_definition(dir_path)
    sample = dio.read_sample(dir_path)
    prepared = prepare_sample(sample, config, background_depth, background_intensity)
    dio.write_sample(prepared, dir_path)


def evaluate_prediction(
    pred: DepthMap,
    sample: Sample,
    config: PipelineConfig = PipelineConfig(),
    pcl_path: Optional[PathLike] = None,
    distances_path: Optional[PathLike] = None,
    symmetric: bool = False,
) -> dict:
    """Metrics for a prediction against a prepared sample; optionally also
    point-cloud distances and a distance-colored PLY."""
    if pred.shape != sample.hr_depth.shape:
        raise ValueError(
            f"prediction shape {pred.shape} != sample HR shape "
            f"{sample.hr_depth.shape}"
        )
    if sample.object_map is None:
        raise ValueError("sample has no object map; run prepare first")
    masked = remask(pred, sample.definition)
    result = {
        "rmse": rmse(masked, sample.hr_depth, sample.definition),
        "object_rmse": object_rmse(
            masked, sample.hr_depth, sample.object_map, sample.definition
        ),
        "object_loss": object_loss(
            masked,
            sample.hr_depth,
            sample.object_map,
            sample.definition,
            config.loss_weights(),
        ),
    }
    if pcl_path is not None:
        pred_cloud = unproject(masked, sample.definition, sample.intrinsics)
        gt_cloud = unproject(
            remask(sample.hr_depth, sample.definition),
            sample.definition,
            sample.intrinsics,
        )
        clean, removed = remove_outliers(pred_cloud, config.outlier_params())
        stats = nn_distances(clean, gt_cloud, symmetric=symmetric)
        colors = color_by_distance(stats, config.color_threshold)
        n_colored = len(clean)
        dio.write_ply(pcl_path, clean.with_colors(colors[:n_colored]))
        if distances_path is not None:
            dio.write_distances_json(distances_path, stats.per_point)
            result["distances"] = str(distances_path)
        result.update(
            {
                "hausdorff": {
                    "min": stats.min, "max": stats.max, "mean": stats.mean
                },
                "removed_count": removed,
                "removed_fraction": removed / len(pred_cloud),
                "ply": str(pcl_path),
            }
        )
    return result
