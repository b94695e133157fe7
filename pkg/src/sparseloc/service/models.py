"""Request and response schemas for the HTTP service.

Field names and order mirror the file formats and the pipeline report, so
a client can round-trip payloads between files and the API without
renaming anything ("class" stays "class" via an alias).
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field

from ..camera import CameraRig
from ..cloud import PointCloud
from ..detection import Detection, PixelBox
from ..fileio import camera_from_obj
from ..locator import LocatorConfig

import numpy as np

__all__ = [
    "PointModel",
    "CameraModel",
    "DetectionModel",
    "ConfigModel",
    "LocateRequest",
    "SimulateRequest",
    "NdcPointModel",
    "NdcBoxModel",
    "RenderRequest",
    "FramePayload",
    "PoseModel",
    "FrameRecordModel",
    "SimulateStatsModel",
    "ReportModel",
    "LocateResponse",
    "SessionCreated",
    "SessionFrameResponse",
]


class PointModel(BaseModel):
    id: int
    x: float
    y: float
    z: float


def points_to_cloud(points: list[PointModel]) -> PointCloud:
    ids = np.asarray([p.id for p in points], dtype=np.int64)
    pos = np.asarray([(p.x, p.y, p.z) for p in points], dtype=np.float64).reshape(
        len(points), 3
    )
    return PointCloud(ids, pos)


class CameraModel(BaseModel):
    camera_to_world: list[float] = Field(min_length=16, max_length=16)
    fov_y_deg: float
    aspect: float
    near: float
    far: float

    def to_rig(self, where: str = "camera") -> CameraRig:
        return camera_from_obj(self.model_dump(), where)


class DetectionModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    frame: int
    class_label: str = Field(alias="class")
    confidence: float = 1.0
    box_px: tuple[float, float, float, float]
    image_size: tuple[float, float]

    def to_detection(self, frame_id: int | None = None) -> Detection:
        return Detection(
            frame_id=self.frame if frame_id is None else frame_id,
            box=PixelBox(
                x_min=self.box_px[0],
                y_min=self.box_px[1],
                x_max=self.box_px[2],
                y_max=self.box_px[3],
                image_width=self.image_size[0],
                image_height=self.image_size[1],
                class_label=self.class_label,
                confidence=self.confidence,
            ),
        )


class ConfigModel(BaseModel):
    threshold_n: int = 30
    class_label: str = "target"
    isotropy_ratio: float = 1.2
    sign_policy: Literal["largest", "align-prev"] = "largest"

    def to_config(self) -> LocatorConfig:
        return LocatorConfig(
            threshold_n=self.threshold_n,
            class_label=self.class_label,
            isotropy_ratio=self.isotropy_ratio,
            sign_policy=self.sign_policy,
        )


class LocateRequest(BaseModel):
    points: list[PointModel]
    cameras: list[CameraModel] = Field(min_length=1)
    detections: list[DetectionModel] = []
    config: ConfigModel = ConfigModel()
    want_svg: bool = False


class SimulateRequest(BaseModel):
    spec: dict[str, Any]
    config: ConfigModel = ConfigModel()
    want_svg: bool = False


class NdcPointModel(BaseModel):
    x: float
    y: float
    z: float = 0.0
    source_index: int = 0


class NdcBoxModel(BaseModel):
    x_min: float
    y_min: float
    x_max: float
    y_max: float


class RenderRequest(BaseModel):
    frame_id: int = 0
    points: list[NdcPointModel] = []
    box: NdcBoxModel | None = None
    filtered: list[int] = []


class FramePayload(BaseModel):
    """One step of a live session: the map snapshot and this frame's boxes."""

    camera: CameraModel
    points: list[PointModel]
    detections: list[DetectionModel] = []


class PoseModel(BaseModel):
    center: tuple[float, float, float]
    axes: tuple[
        tuple[float, float, float],
        tuple[float, float, float],
        tuple[float, float, float],
    ]
    eigenvalues: tuple[float, float, float]
    point_count: int
    isotropy_flag: bool


class FrameRecordModel(BaseModel):
    frame: int
    detected: bool
    projected: int
    in_box: int
    accumulated: int


class SimulateStatsModel(BaseModel):
    center_error_m: float
    axis_error_deg: float
    clutter_fraction: float
    truth_center: tuple[float, float, float]
    truth_axis: tuple[float, float, float]


class ReportModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    threshold_n: int
    class_label: str = Field(alias="class")
    estimate_frame: int | None
    max_accumulated: int
    frames: list[FrameRecordModel]
    pose: PoseModel | None
    simulate: SimulateStatsModel | None = None


class LocateResponse(BaseModel):
    report: ReportModel
    svg: str | None = None


class SessionCreated(BaseModel):
    session_id: str


class SessionFrameResponse(BaseModel):
    frame: int
    accumulated: int
    ready: bool
    pose: PoseModel | None
