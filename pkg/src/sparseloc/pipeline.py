"""Frame-by-frame orchestration: project, detect, filter, accumulate.

Both input modes reduce to the same loop over a FrameSource: files mode
serves the full cloud at every frame, simulate mode serves the growing
discovered prefix of a synthetic scene.  The pose is estimated once, at
the first frame where the accumulated landmark count reaches the
threshold; later frames still accumulate so the metrics cover the whole
trajectory.  Frames with no usable detection contribute nothing but never
reset the accumulated state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .camera import CameraRig, NdcPoint, project_cloud_arrays
from .cloud import PointCloud
from .detection import Detection, Detector, NdcBox, normalize_box, select_detection
from .errors import InsufficientDataError
from .locator import (
    FilteredSet,
    LocatorConfig,
    TargetPose,
    accumulate,
    estimate_pose,
    filter_in_box_arrays,
    ready,
)
from .render import render_debug_svg
from .simulator import SceneSpec, SimulatedScene

__all__ = [
    "FrameSource",
    "FilesSource",
    "SimulateSource",
    "FrameRecord",
    "PipelineResult",
    "run_pipeline",
    "build_report",
    "pose_errors",
    "clutter_fraction",
]


class FrameSource(Protocol):
    """What the locator can see at each frame."""

    def frame_count(self) -> int: ...

    def rig(self, frame_id: int) -> CameraRig: ...

    def cloud_at(self, frame_id: int) -> PointCloud: ...

    def detections(self, frame_id: int) -> list[Detection]: ...


class FilesSource:
    """Static full cloud, one camera per frame, detections from a file."""

    def __init__(
        self, cloud: PointCloud, cameras: list[CameraRig], detector: Detector
    ) -> None:
        self._cloud = cloud
        self._cameras = cameras
        self._detector = detector

    def frame_count(self) -> int:
        return len(self._cameras)

    def rig(self, frame_id: int) -> CameraRig:
        return self._cameras[frame_id]

    def cloud_at(self, frame_id: int) -> PointCloud:
        return self._cloud

    def detections(self, frame_id: int) -> list[Detection]:
        return self._detector.detect(frame_id)


class SimulateSource:
    """Growing discovered map of a synthetic scene, oracle detections."""

    def __init__(self, scene: SimulatedScene) -> None:
        self.scene = scene
        self._detector = scene.oracle_detector()

    @classmethod
    def from_spec(cls, spec: SceneSpec) -> "SimulateSource":
        return cls(SimulatedScene(spec))

    def frame_count(self) -> int:
        return len(self.scene.spec.trajectory)

    def rig(self, frame_id: int) -> CameraRig:
        return self.scene.spec.trajectory[frame_id]

    def cloud_at(self, frame_id: int) -> PointCloud:
        return self.scene.visible_cloud(frame_id)

    def detections(self, frame_id: int) -> list[Detection]:
        return self._detector.detect(frame_id)


@dataclass(frozen=True)
class FrameRecord:
    """Per-frame metrics row."""

    frame_id: int
    detected: bool
    projected: int
    in_box: int
    accumulated: int

    def to_dict(self) -> dict:
        return {
            "frame": self.frame_id,
            "detected": self.detected,
            "projected": self.projected,
            "in_box": self.in_box,
            "accumulated": self.accumulated,
        }


@dataclass(frozen=True)
class PipelineResult:
    """Everything a front end needs to report one run.

    `estimate_state` is the accumulated set the pose was computed from
    (None when the threshold was never reached); `state` keeps growing
    after the estimate because later frames still feed the metrics.
    """

    pose: TargetPose | None
    estimate_frame: int | None
    frames: list[FrameRecord]
    state: FilteredSet
    estimate_state: FilteredSet | None
    svg: str | None

    @property
    def max_accumulated(self) -> int:
        return len(self.state)


def run_pipeline(
    source: FrameSource,
    cfg: LocatorConfig,
    want_svg: bool = False,
) -> PipelineResult:
    """Run every frame in order; estimate once at first threshold crossing.

    Raises DegenerateCloudError if the threshold is met but the points are
    coincident; a never-reached threshold is reported via pose=None, not
    an exception, so the caller can show how far accumulation got.
    """
    state = FilteredSet.empty()
    frames: list[FrameRecord] = []
    pose: TargetPose | None = None
    estimate_frame: int | None = None
    estimate_state: FilteredSet | None = None
    svg: str | None = None

    for f in range(source.frame_count()):
        cloud = source.cloud_at(f)
        selected = select_detection(source.detections(f), cfg.class_label)
        projected_n = 0
        in_box = 0
        box_ndc: NdcBox | None = None
        ndc = np.empty((0, 3))
        indices = np.empty(0, dtype=np.int64)
        if selected is not None and len(cloud) > 0:
            ndc, indices = project_cloud_arrays(cloud.positions, source.rig(f))
            projected_n = len(ndc)
            box_ndc = normalize_box(selected.box)
            fresh = filter_in_box_arrays(ndc, indices, box_ndc, cloud, f)
            in_box = len(fresh)
            state = accumulate(state, fresh)
        frames.append(
            FrameRecord(
                frame_id=f,
                detected=selected is not None,
                projected=projected_n,
                in_box=in_box,
                accumulated=len(state),
            )
        )
        if pose is None and ready(state, cfg):
            pose = estimate_pose(state, cfg)
            estimate_frame = f
            estimate_state = state
            if want_svg:
                points = [
                    NdcPoint(float(r[0]), float(r[1]), float(r[2]), int(i))
                    for r, i in zip(ndc, indices)
                ]
                kept = _in_box_sources(ndc, indices, box_ndc)
                svg = render_debug_svg(f, points, box_ndc, kept)

    return PipelineResult(
        pose=pose,
        estimate_frame=estimate_frame,
        frames=frames,
        state=state,
        estimate_state=estimate_state,
        svg=svg,
    )


def _in_box_sources(
    ndc: np.ndarray, indices: np.ndarray, box: NdcBox | None
) -> list[int]:
    if box is None or len(ndc) == 0:
        return []
    keep = (
        (ndc[:, 0] >= box.x_min)
        & (ndc[:, 0] <= box.x_max)
        & (ndc[:, 1] >= box.y_min)
        & (ndc[:, 1] <= box.y_max)
        & (ndc[:, 2] >= -1.0)
        & (ndc[:, 2] <= 1.0)
    )
    return [int(i) for i in indices[keep]]


def build_report(
    result: PipelineResult,
    cfg: LocatorConfig,
    scene: SimulatedScene | None = None,
) -> dict:
    """Plain-data summary of a run, shared by CLI metrics and the service.

    In simulate mode (scene given) the report adds errors against the
    scene's ground truth and the clutter share of the accumulated set.
    """
    report = {
        "threshold_n": cfg.threshold_n,
        "class": cfg.class_label,
        "estimate_frame": result.estimate_frame,
        "max_accumulated": result.max_accumulated,
        "frames": [r.to_dict() for r in result.frames],
        "pose": result.pose.to_dict() if result.pose is not None else None,
        "simulate": None,
    }
    if scene is not None and result.pose is not None:
        errors = pose_errors(result.pose, scene.truth_pose)
        assert result.estimate_state is not None
        report["simulate"] = {
            "center_error_m": errors["center_error_m"],
            "axis_error_deg": errors["axis_error_deg"],
            "clutter_fraction": clutter_fraction(result.estimate_state, scene.target_count),
            "truth_center": list(scene.truth_pose.center),
            "truth_axis": list(scene.truth_pose.axes[0]),
        }
    return report


def pose_errors(pose: TargetPose, truth: TargetPose) -> dict:
    """Center distance and principal-axis angle between estimate and truth.

    The axis angle folds the sign ambiguity: it is measured between lines,
    not directed vectors.
    """
    c_err = math.dist(pose.center, truth.center)
    dot = abs(pose.axes[0].dot(truth.axes[0]))
    ax_err = math.degrees(math.acos(min(1.0, dot)))
    return {"center_error_m": c_err, "axis_error_deg": ax_err}


def clutter_fraction(state: FilteredSet, target_count: int) -> float:
    """Share of accumulated landmarks whose ids are clutter ids."""
    if len(state) == 0:
        raise InsufficientDataError("no accumulated landmarks")
    return float(np.count_nonzero(state.ids >= target_count)) / len(state)
