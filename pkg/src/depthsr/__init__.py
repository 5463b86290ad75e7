"""Depth-map super-resolution data pipeline and evaluation toolkit."""

from .core import (
    CameraIntrinsics,
    DefinitionMap,
    DepthMap,
    IntensityMap,
    ObjectMap,
    Sample,
    definition_map,
)
from .geom import (
    DistanceStats,
    OutlierParams,
    PointCloud,
    color_by_distance,
    nn_distances,
    remove_outliers,
    unproject,
)
from .metrics import LossWeights, object_loss, object_rmse, rmse
from .prep import (
    FillConfig,
    HoleLabeling,
    augment_texture,
    classify_holes,
    downsample,
    fill_depth,
)
from .scene import (
    Plane,
    PlaneSearchConfig,
    fit_plane,
    grid_reduce,
    ground_plane,
    object_map,
    select_plane_vertices,
)
from .synth import ObjectPose, SceneConfig, generate_scene, gt_object_mask
from .upsample import remask, upsample_bicubic, upsample_nn

__version__ = "0.1.0"

__all__ = [
    "CameraIntrinsics",
    "DefinitionMap",
    "DepthMap",
    "DistanceStats",
    "FillConfig",
    "HoleLabeling",
    "IntensityMap",
    "LossWeights",
    "ObjectMap",
    "ObjectPose",
    "OutlierParams",
    "Plane",
    "PlaneSearchConfig",
    "PointCloud",
    "Sample",
    "SceneConfig",
    "augment_texture",
    "classify_holes",
    "color_by_distance",
    "definition_map",
    "downsample",
    "fill_depth",
    "fit_plane",
    "generate_scene",
    "grid_reduce",
    "ground_plane",
    "gt_object_mask",
    "nn_distances",
    "object_loss",
    "object_map",
    "object_rmse",
    "remask",
    "remove_outliers",
    "rmse",
    "select_plane_vertices",
    "unproject",
    "upsample_bicubic",
    "upsample_nn",
]
