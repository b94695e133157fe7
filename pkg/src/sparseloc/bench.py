"""Single-threaded throughput benchmark: project + filter + estimate.

Builds a fixed synthetic cloud around a directional target, then times
the hot path end to end: array projection of every point, box filtering,
and pose estimation from the kept points.  Reported numbers are the
median and minimum of the repeat runs after a warmup pass.
"""

from __future__ import annotations

import time
from dataclasses import replace

from .detection import NdcBox, normalize_box
from .camera import CameraRig, project_cloud_arrays
from .cloud import PointCloud
from .locator import LocatorConfig, estimate_pose, filter_in_box_arrays
from .simulator import SimulatedScene, default_scene_spec

__all__ = ["build_benchmark_inputs", "run_benchmark"]


def build_benchmark_inputs(
    n_points: int = 10_000, seed: int = 11
) -> tuple[PointCloud, CameraRig, NdcBox]:
    """A cloud of n_points (target plus clutter), a camera, and its box."""
    base = default_scene_spec(seed)
    target_n = max(4, n_points // 2)
    spec = replace(
        base,
        target=replace(base.target, n_points=target_n),
        clutter=replace(base.clutter, n_points=n_points - target_n),
        trajectory=base.trajectory[:1],
    )
    scene = SimulatedScene(spec)
    detection = scene.oracle_detector().detect(0)[0]
    return scene.cloud, spec.trajectory[0], normalize_box(detection.box)


def run_benchmark(
    n_points: int = 10_000, repeats: int = 30, threshold_n: int = 30
) -> dict:
    """Time the project/filter/estimate chain; all times in milliseconds."""
    cloud, rig, box = build_benchmark_inputs(n_points)
    cfg = LocatorConfig(threshold_n=threshold_n)

    def once() -> tuple[float, int]:
        start = time.perf_counter()
        ndc, indices = project_cloud_arrays(cloud.positions, rig)
        kept = filter_in_box_arrays(ndc, indices, box, cloud, 0)
        estimate_pose(kept, cfg)
        return (time.perf_counter() - start) * 1e3, len(kept)

    _, in_box = once()  # warmup, also reports the kept count
    times = sorted(once()[0] for _ in range(repeats))
    return {
        "n_points": len(cloud),
        "in_box": in_box,
        "repeats": repeats,
        "median_ms": times[len(times) // 2],
        "min_ms": times[0],
        "max_ms": times[-1],
    }
