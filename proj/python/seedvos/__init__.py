"""Primary-object video segmentation from dense per-frame features."""

import json

from ._seedvos import (
    SeedvosError,
    assign_regions,
    bottleneck_distances,
    boundary_measure,
    candidate_points,
    crf_refine,
    decode_tensor,
    edge_map,
    encode_tensor,
    load_mask,
    load_tensor,
    region_similarity,
    sample_diverse_seeds,
    save_mask,
    save_tensor,
    set_max_threads,
    similarity,
    synthesize,
)
from . import _seedvos


def default_config():
    return json.loads(_seedvos.default_config())


def segment(manifest, config=None, mode="unsupervised"):
    """Segment the sequence described by `manifest`.

    `config` is a dict with the same keys as the CLI config file; missing
    keys keep their defaults.
    """
    result = _seedvos.segment(str(manifest), json.dumps(config or {}), mode)
    result["config"] = json.loads(result["config"])
    return result


__all__ = [
    "SeedvosError",
    "assign_regions",
    "bottleneck_distances",
    "boundary_measure",
    "candidate_points",
    "crf_refine",
    "decode_tensor",
    "default_config",
    "edge_map",
    "encode_tensor",
    "load_mask",
    "load_tensor",
    "region_similarity",
    "sample_diverse_seeds",
    "save_mask",
    "save_tensor",
    "segment",
    "set_max_threads",
    "similarity",
    "synthesize",
]
