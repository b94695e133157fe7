"""Target localization from box-filtered landmarks.

The chain is: keep the world points whose NDC projections fall inside the
detection box, merge those filtered sets across frames by landmark id
until a start threshold is met, then recover the target's center as the
centroid and its orientation as the principal axes of the point
covariance.  All of the pose math runs on WORLD coordinates; NDC is used
for box membership only.

Background points that happen to project into the box are kept (there is
no depth segmentation), which is a documented accuracy limitation.

Eigenvector signs are inherently ambiguous, so a canonical sign policy
plus a right-handedness repair makes the returned axes deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .cloud import PointCloud
from .detection import NdcBox
from .errors import DegenerateCloudError, InsufficientDataError, InvalidInputError
from .linalg3 import EigenTriple, SymMatrix3, Vec3, svd_right3, sym_eigen3

__all__ = [
    "FilteredSet",
    "DataMatrix",
    "LocatorConfig",
    "TargetPose",
    "filter_in_box",
    "filter_in_box_arrays",
    "accumulate",
    "ready",
    "centroid",
    "center_data",
    "covariance",
    "canonicalize_axes",
    "estimate_pose",
]

SignPolicy = Literal["largest", "align-prev"]


@dataclass(frozen=True)
class LocatorConfig:
    """Knobs for accumulation and pose estimation."""

    threshold_n: int = 30
    class_label: str = "target"
    isotropy_ratio: float = 1.2
    sign_policy: SignPolicy = "largest"

    def __post_init__(self) -> None:
        if self.threshold_n < 4:
            raise InvalidInputError(f"threshold_n must be >= 4, got {self.threshold_n}")
        if not self.isotropy_ratio > 1.0:
            raise InvalidInputError(f"isotropy_ratio must exceed 1, got {self.isotropy_ratio}")
        if self.sign_policy not in ("largest", "align-prev"):
            raise InvalidInputError(f"unknown sign policy {self.sign_policy!r}")


class FilteredSet:
    """World points whose projections fell inside the detection box.

    Deduplicated by landmark id; `frame_span` records the first and last
    frame that contributed (None while empty).
    """

    __slots__ = ("ids", "positions", "frame_span")

    def __init__(
        self,
        ids: Sequence[int],
        positions: np.ndarray,
        frame_span: tuple[int, int] | None,
    ) -> None:
        ids_arr = np.asarray(ids, dtype=np.int64)
        pos = np.asarray(positions, dtype=np.float64).reshape(len(ids_arr), 3)
        if len(np.unique(ids_arr)) != len(ids_arr):
            raise InvalidInputError("filtered set has duplicate landmark ids")
        if not np.isfinite(pos).all():
            raise InvalidInputError("filtered positions must be finite")
        self.ids = ids_arr
        self.positions = pos
        self.frame_span = frame_span

    @classmethod
    def empty(cls) -> "FilteredSet":
        return cls([], np.empty((0, 3)), None)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def points(self) -> list[Vec3]:
        return [Vec3(float(x), float(y), float(z)) for x, y, z in self.positions]


@dataclass(frozen=True)
class DataMatrix:
    """3xn matrix of mean-centered points, one column per point."""

    array: np.ndarray  # (3, n) float64

    def __post_init__(self) -> None:
        arr = self.array
        if arr.ndim != 2 or arr.shape[0] != 3:
            raise InvalidInputError("data matrix must have shape (3, n)")
        if arr.shape[1] < 2:
            raise InsufficientDataError(f"data matrix needs n >= 2 columns, got {arr.shape[1]}")
        if not np.isfinite(arr).all():
            raise InvalidInputError("data matrix entries must be finite")
        extent = float(np.abs(arr).max())
        row_means = np.abs(arr.mean(axis=1))
        if row_means.max() > 1e-9 * extent:
            raise InvalidInputError(
                "data matrix is not mean-centered (was the centroid used?)"
            )

    @property
    def n(self) -> int:
        return self.array.shape[1]

    @property
    def rows(self) -> np.ndarray:
        return self.array


@dataclass(frozen=True)
class TargetPose:
    """Estimated center and orientation of the target.

    `axes` are the principal directions in descending-variance order and
    form a right-handed orthonormal triple; `eigenvalues` are the matching
    variances in meters^2.  `isotropy_flag` marks clouds whose two leading
    variances are too close for the first axis to mean much (objects
    without a clear directivity).
    """

    center: Vec3
    axes: tuple[Vec3, Vec3, Vec3]
    eigenvalues: tuple[float, float, float]
    point_count: int
    isotropy_flag: bool

    def __post_init__(self) -> None:
        a1, a2, a3 = self.axes
        for v in self.axes:
            if abs(v.norm() - 1.0) > 1e-9:
                raise InvalidInputError("pose axes must be unit length")
        if (
            abs(a1.dot(a2)) > 1e-9
            or abs(a1.dot(a3)) > 1e-9
            or abs(a2.dot(a3)) > 1e-9
        ):
            raise InvalidInputError("pose axes must be orthogonal")
        if abs(a1.cross(a2).dot(a3) - 1.0) > 1e-9:
            raise InvalidInputError("pose axes must be right-handed (det +1)")
        l1, l2, l3 = self.eigenvalues
        if not (l1 >= l2 >= l3 >= -1e-12):
            raise InvalidInputError("eigenvalues must be descending and >= -1e-12")

    def to_dict(self) -> dict:
        return {
            "center": [self.center.x, self.center.y, self.center.z],
            "axes": [[a.x, a.y, a.z] for a in self.axes],
            "eigenvalues": list(self.eigenvalues),
            "point_count": self.point_count,
            "isotropy_flag": self.isotropy_flag,
        }


def filter_in_box_arrays(
    ndc: np.ndarray,
    source_indices: np.ndarray,
    box: NdcBox,
    cloud: PointCloud,
    frame_id: int = 0,
) -> FilteredSet:
    """Array-path box filter over the output of project_cloud_arrays.

    Membership is closed on all edges: x and y inside the box, z inside
    [-1, 1].  Input order is preserved.
    """
    if len(ndc) == 0:
        return FilteredSet([], np.empty((0, 3)), (frame_id, frame_id))
    keep = (
        (ndc[:, 0] >= box.x_min)
        & (ndc[:, 0] <= box.x_max)
        & (ndc[:, 1] >= box.y_min)
        & (ndc[:, 1] <= box.y_max)
        & (ndc[:, 2] >= -1.0)
        & (ndc[:, 2] <= 1.0)
    )
    picked = source_indices[keep]
    return FilteredSet(
        cloud.ids[picked], cloud.positions[picked], (frame_id, frame_id)
    )


def filter_in_box(
    projected, box: NdcBox, cloud, frame_id: int = 0
) -> FilteredSet:
    """Box filter over a list of projected NDC points.

    `cloud` supplies the world coordinates (a PointCloud or a sequence of
    Vec3, in which case positional indices act as landmark ids); every
    source_index must be valid for it.
    """
    if not isinstance(cloud, PointCloud):
        pos = np.asarray(cloud, dtype=np.float64).reshape(len(cloud), 3)
        cloud = PointCloud(np.arange(len(pos)), pos)
    if len(projected) == 0:
        return FilteredSet([], np.empty((0, 3)), (frame_id, frame_id))
    ndc = np.asarray([(p.x, p.y, p.z) for p in projected], dtype=np.float64)
    src = np.asarray([p.source_index for p in projected], dtype=np.int64)
    if src.min() < 0 or src.max() >= len(cloud):
        raise InvalidInputError("projected point references an index outside the cloud")
    return filter_in_box_arrays(ndc, src, box, cloud, frame_id)


def accumulate(state: FilteredSet, new: FilteredSet) -> FilteredSet:
    """Union by landmark id; a re-observed landmark takes its newest position.

    First-seen order is kept, so repeated accumulation stays deterministic.
    """
    if len(new) == 0:
        span = _merge_spans(state.frame_span, new.frame_span)
        return FilteredSet(state.ids, state.positions, span)
    merged: dict[int, tuple[float, float, float]] = {
        int(i): (float(p[0]), float(p[1]), float(p[2]))
        for i, p in zip(state.ids, state.positions)
    }
    for i, p in zip(new.ids, new.positions):
        merged[int(i)] = (float(p[0]), float(p[1]), float(p[2]))
    ids = list(merged.keys())
    pos = np.asarray(list(merged.values()), dtype=np.float64)
    return FilteredSet(ids, pos, _merge_spans(state.frame_span, new.frame_span))


def _merge_spans(
    a: tuple[int, int] | None, b: tuple[int, int] | None
) -> tuple[int, int] | None:
    if a is None:
        return b
    if b is None:
        return a
    return (min(a[0], b[0]), max(a[1], b[1]))


def ready(state: FilteredSet, cfg: LocatorConfig) -> bool:
    """Has the accumulated landmark count reached the start threshold?"""
    return len(state) >= cfg.threshold_n


def centroid(state: FilteredSet) -> Vec3:
    """Component-wise arithmetic mean of the filtered points."""
    if len(state) == 0:
        raise InsufficientDataError("centroid of an empty set")
    m = state.positions.mean(axis=0)
    return Vec3(float(m[0]), float(m[1]), float(m[2]))


def center_data(state: FilteredSet, c: Vec3) -> DataMatrix:
    """Subtract the center from every point; column i is P_i - C."""
    if len(state) < 2:
        raise InsufficientDataError(f"need at least 2 points to center, got {len(state)}")
    centered = state.positions - np.asarray(c, dtype=np.float64)
    return DataMatrix(np.ascontiguousarray(centered.T))


def covariance(x: DataMatrix) -> SymMatrix3:
    """Unbiased covariance of the centered columns: X X^T / (n - 1)."""
    a = x.array @ x.array.T / (x.n - 1)
    return SymMatrix3(
        float(a[0, 0]),
        float(0.5 * (a[0, 1] + a[1, 0])),
        float(0.5 * (a[0, 2] + a[2, 0])),
        float(a[1, 1]),
        float(0.5 * (a[1, 2] + a[2, 1])),
        float(a[2, 2]),
    )


def canonicalize_axes(
    raw: EigenTriple,
    cfg: LocatorConfig,
    previous: TargetPose | None = None,
) -> tuple[Vec3, Vec3, Vec3]:
    """Resolve the sign ambiguity of the eigenvector triple.

    "largest": flip each axis so its largest-magnitude component is
    positive (exact ties prefer x, then y, then z).  "align-prev": flip
    toward a non-negative dot product with the previous pose's matching
    axis, falling back to the largest rule when there is no previous pose.
    A final repair negates the third axis if the triple came out
    left-handed, so the result always has determinant +1.  Idempotent.
    """
    use_previous = cfg.sign_policy == "align-prev" and previous is not None
    axes: list[Vec3] = []
    for i, v in enumerate(raw.vectors):
        if use_previous:
            if v.dot(previous.axes[i]) < 0.0:
                v = v.neg()
        else:
            comps = (abs(v.x), abs(v.y), abs(v.z))
            lead = comps.index(max(comps))
            if v[lead] < 0.0:
                v = v.neg()
        axes.append(v)
    if axes[0].cross(axes[1]).dot(axes[2]) < 0.0:
        axes[2] = axes[2].neg()
    return (axes[0], axes[1], axes[2])


def estimate_pose(
    state: FilteredSet,
    cfg: LocatorConfig,
    previous: TargetPose | None = None,
    method: Literal["covariance", "svd"] = "covariance",
) -> TargetPose:
    """Center and principal axes of the accumulated filtered points.

    The default path eigendecomposes the covariance matrix; method="svd"
    takes the singular directions of the centered data matrix instead.
    The two agree to working precision and the tests hold them to it.
    """
    if not ready(state, cfg):
        raise InsufficientDataError(
            f"have {len(state)} points, threshold is {cfg.threshold_n}"
        )
    c = centroid(state)
    x = center_data(state, c)
    if method == "covariance":
        eig = sym_eigen3(covariance(x))
        values, vectors = eig.values, eig.vectors
    elif method == "svd":
        sig = svd_right3(x)
        values = tuple(s * s / (x.n - 1) for s in sig.sigma)
        vectors = sig.vectors
    else:
        raise InvalidInputError(f"unknown method {method!r}")

    scale = max(1.0, float(np.abs(state.positions).max()))
    if values[0] <= (1e-12 * scale) ** 2:
        raise DegenerateCloudError(
            "filtered points are coincident; no principal direction exists"
        )
    values = tuple(v if v > 0.0 else 0.0 for v in values)
    axes = canonicalize_axes(EigenTriple(values, vectors), cfg, previous)
    return TargetPose(
        center=c,
        axes=axes,
        eigenvalues=values,  # type: ignore[arg-type]
        point_count=len(state),
        isotropy_flag=values[0] <= cfg.isotropy_ratio * values[1],
    )
