"""Two-stream video VAE-GAN with recall chaining.

Videos are float64 arrays shaped [frames, height, width, channels] with
pixels in [-1, 1].
"""

import json

from ._core import (
    Model,
    RgError,
    config_json,
    decompose,
    drift_dataset,
    frechet_distance,
    fvd_ratio,
    inception_score,
    load_dataset,
    read_kv_report,
    read_video,
    reconstruct,
    reconstruct_from_reference,
    segmentwise_scores,
    shapes_dataset,
    stitch,
    stitched_length,
    write_video,
)


def default_config(**overrides):
    """The run configuration as a dict, with overrides applied."""
    return json.loads(config_json("", {k: json.dumps(v) for k, v in overrides.items()}))


__all__ = [
    "Model",
    "RgError",
    "config_json",
    "decompose",
    "default_config",
    "drift_dataset",
    "frechet_distance",
    "fvd_ratio",
    "inception_score",
    "load_dataset",
    "read_kv_report",
    "read_video",
    "reconstruct",
    "reconstruct_from_reference",
    "segmentwise_scores",
    "shapes_dataset",
    "stitch",
    "stitched_length",
    "write_video",
]
