"""2D detections and their conversion from pixel space to NDC.

The object detector itself is a pluggable seam, not a network: boxes
arrive either from a recorded detections file (FileDetector) or from the
simulator's ground truth (OracleDetector).  Pixel space has its origin at
the top-left with y down; NDC has its origin at the center with y up, so
the conversion flips the vertical axis and swaps the y bounds.

Boundary convention: a point exactly on a box edge counts as inside
(closed boxes), which keeps filtering deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, Sequence

from .camera import CULL_EPS, CameraRig, ndc_matrix
from .errors import InvalidBoxError, InvalidInputError
from .linalg3 import Mat4, Vec3, transform_point

__all__ = [
    "PixelBox",
    "NdcBox",
    "Detection",
    "Detector",
    "FileDetector",
    "OracleDetector",
    "normalize_box",
    "denormalize_box",
    "pixel_to_ndc",
    "ndc_to_pixel",
    "select_detection",
]


@dataclass(frozen=True)
class PixelBox:
    """Axis-aligned detection box in image pixels (origin top-left, y down)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float
    image_width: float
    image_height: float
    class_label: str = ""
    confidence: float = 1.0

    def __post_init__(self) -> None:
        vals = (self.x_min, self.y_min, self.x_max, self.y_max,
                self.image_width, self.image_height, self.confidence)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidBoxError("pixel box values must be finite")
        if not (0.0 <= self.x_min < self.x_max <= self.image_width):
            raise InvalidBoxError(
                f"need 0 <= x_min < x_max <= width, got [{self.x_min}, {self.x_max}] "
                f"in width {self.image_width}"
            )
        if not (0.0 <= self.y_min < self.y_max <= self.image_height):
            raise InvalidBoxError(
                f"need 0 <= y_min < y_max <= height, got [{self.y_min}, {self.y_max}] "
                f"in height {self.image_height}"
            )
        if not (0.0 <= self.confidence <= 1.0):
            raise InvalidBoxError(f"confidence must lie in [0, 1], got {self.confidence}")

    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def contains(self, x_px: float, y_px: float) -> bool:
        return self.x_min <= x_px <= self.x_max and self.y_min <= y_px <= self.y_max


@dataclass(frozen=True)
class NdcBox:
    """Axis-aligned box in NDC (origin center, y up)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x_min, self.y_min, self.x_max, self.y_max)):
            raise InvalidBoxError("NDC box values must be finite")
        if not (-1.0 <= self.x_min < self.x_max <= 1.0):
            raise InvalidBoxError(f"need -1 <= x_min < x_max <= 1, got [{self.x_min}, {self.x_max}]")
        if not (-1.0 <= self.y_min < self.y_max <= 1.0):
            raise InvalidBoxError(f"need -1 <= y_min < y_max <= 1, got [{self.y_min}, {self.y_max}]")

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class Detection:
    """A pixel box bound to the frame it was detected in."""

    frame_id: int
    box: PixelBox

    def __post_init__(self) -> None:
        if self.frame_id < 0:
            raise InvalidInputError(f"frame_id must be >= 0, got {self.frame_id}")


def pixel_to_ndc(x_px: float, y_px: float, width: float, height: float) -> tuple[float, float]:
    """Map a pixel coordinate to NDC (vertical flip included)."""
    return 2.0 * x_px / width - 1.0, 1.0 - 2.0 * y_px / height


def ndc_to_pixel(x: float, y: float, width: float, height: float) -> tuple[float, float]:
    """Inverse of pixel_to_ndc."""
    return (x + 1.0) / 2.0 * width, (1.0 - y) / 2.0 * height


def normalize_box(b: PixelBox) -> NdcBox:
    """Convert a pixel-space box to NDC.

    The vertical flip turns the pixel y_max into the NDC y_min and vice
    versa, so min < max is preserved on both axes.
    """
    x_min, y_from_max = pixel_to_ndc(b.x_min, b.y_max, b.image_width, b.image_height)
    x_max, y_from_min = pixel_to_ndc(b.x_max, b.y_min, b.image_width, b.image_height)
    return NdcBox(x_min=x_min, y_min=y_from_max, x_max=x_max, y_max=y_from_min)


def denormalize_box(
    b: NdcBox, width: float, height: float, class_label: str = "", confidence: float = 1.0
) -> PixelBox:
    """Convert an NDC box back to pixel space (round-trip inverse of normalize_box)."""
    x_min, y_max_px = ndc_to_pixel(b.x_min, b.y_min, width, height)
    x_max, y_min_px = ndc_to_pixel(b.x_max, b.y_max, width, height)
    return PixelBox(
        x_min=x_min, y_min=y_min_px, x_max=x_max, y_max=y_max_px,
        image_width=width, image_height=height,
        class_label=class_label, confidence=confidence,
    )


class Detector(Protocol):
    """Seam standing in for the object detection network."""

    def detect(self, frame_id: int) -> list[Detection]:
        ...


class FileDetector:
    """Replays detections recorded in a detections file.

    The record list is indexed by frame once at construction; detect() is
    pure afterwards.  Within a frame, file order is preserved (it breaks
    selection ties).
    """

    def __init__(self, detections: Sequence[Detection]) -> None:
        index: dict[int, list[Detection]] = {}
        for det in detections:
            index.setdefault(det.frame_id, []).append(det)
        self._by_frame = index

    def detect(self, frame_id: int) -> list[Detection]:
        return list(self._by_frame.get(frame_id, ()))


class OracleDetector:
    """Ground-truth detector: the pixel hull of the target's bounding volume.

    Projects the 8 corners of the target's oriented bounding volume (which
    covers every generated target point, noise included) through the
    frame's camera and returns their axis-aligned pixel hull, clipped to
    the image, with confidence 1.0.  Frames where any corner falls at or
    behind the camera, or where the hull misses the image, yield no
    detection.
    """

    def __init__(
        self,
        corners: Sequence[Vec3],
        trajectory: Sequence[CameraRig],
        image_size: tuple[int, int],
        class_label: str,
    ) -> None:
        if len(corners) != 8:
            raise InvalidInputError(f"expected 8 bounding-volume corners, got {len(corners)}")
        self._corners = tuple(corners)
        self._trajectory = tuple(trajectory)
        self._image_size = image_size
        self._class_label = class_label

    def detect(self, frame_id: int) -> list[Detection]:
        if not (0 <= frame_id < len(self._trajectory)):
            return []
        rig = self._trajectory[frame_id]
        matrix = ndc_matrix(rig)
        width, height = self._image_size
        xs: list[float] = []
        ys: list[float] = []
        for corner in self._corners:
            # Containment of the projected volume only holds with every
            # corner strictly in front of the camera, so bail otherwise.
            ndc = project_to_ndc_unclipped(corner, matrix)
            if ndc is None:
                return []
            x_px, y_px = ndc_to_pixel(ndc[0], ndc[1], width, height)
            xs.append(x_px)
            ys.append(y_px)
        x_min = max(0.0, min(xs))
        x_max = min(float(width), max(xs))
        y_min = max(0.0, min(ys))
        y_max = min(float(height), max(ys))
        if not (x_min < x_max and y_min < y_max):
            return []
        box = PixelBox(
            x_min=x_min, y_min=y_min, x_max=x_max, y_max=y_max,
            image_width=float(width), image_height=float(height),
            class_label=self._class_label, confidence=1.0,
        )
        return [Detection(frame_id=frame_id, box=box)]


def project_to_ndc_unclipped(p: Vec3, matrix: Mat4) -> tuple[float, float, float] | None:
    """Projection without the cube containment cull (corners may overhang)."""
    clip, w = transform_point(matrix, p)
    if w <= CULL_EPS:
        return None
    return clip.x / w, clip.y / w, clip.z / w


def select_detection(detections: Sequence[Detection], class_label: str) -> Detection | None:
    """Pick the box the locator should consume for one frame.

    Highest confidence among boxes matching the class label; ties broken
    by larger area, then by earlier position in the input order.
    """
    best: Detection | None = None
    best_key: tuple[float, float, int] | None = None
    for order, det in enumerate(detections):
        if det.box.class_label != class_label:
            continue
        key = (-det.box.confidence, -det.box.area(), order)
        if best_key is None or key < best_key:
            best, best_key = det, key
    return best
