"""Deterministic synthetic scenes with ground truth.

A scene is a directional target cloud (points on an ellipsoid surface,
rotated and translated, plus isotropic Gaussian noise), uniform background
clutter, and a camera trajectory.  Landmarks are revealed gradually along
a fixed pseudo-random discovery order, mimicking a sparse SLAM map that
grows over dozens of frames.  Everything is a pure function of the
SceneSpec, so fixtures regenerate bit-identically.

Pseudo-random recipe (frozen so committed fixtures stay valid and can be
reproduced in other languages):

* Uniforms come from the Mersenne Twister (MT19937) exactly as CPython's
  ``random.Random(seed).random()`` produces them; that stream is stable
  across CPython versions.
* Gaussians use the Box-Muller transform: draw u1, u2, redraw u1 while it
  is 0, then ``sqrt(-2 ln u1) * (cos, sin)(2 pi u2)`` yields a pair; pairs
  are consumed first-then-spare.
* Shuffles are an explicit Fisher-Yates walk from the top index down,
  picking ``j = min(i, int(random() * (i + 1)))``.

Draw order: target points, then clutter points, then one shuffle of all
landmark ids for the discovery order.

Target sampling is symmetry-balanced.  Directions come in groups of four
sharing one base direction u with even-parity sign flips (+++), (+--),
(-+-), (--+): within a group the coordinates AND all pairwise coordinate
products cancel exactly, so a noiseless sample has its centroid exactly at
the center and an exactly diagonal object-frame covariance, which is what
lets tests pin the noiseless estimate to the analytic truth at float
precision.  Counts not divisible by 4 fall back to an antithetic pair
and/or a lone point for the remainder, losing that exact cancellation.
Noise gaussians (three per point) are drawn even when noise_sigma is 0 so
a noiseless control shares its geometry with the noisy run of the same
seed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .camera import CameraRig, look_at, project_cloud_arrays
from .cloud import PointCloud
from .detection import OracleDetector, PixelBox, ndc_to_pixel
from .errors import InvalidInputError
from .linalg3 import Vec3
from .locator import TargetPose

__all__ = [
    "TargetSpec",
    "ClutterSpec",
    "SceneSpec",
    "SceneFrame",
    "SimulatedScene",
    "gen_target_cloud",
    "gen_frames",
    "build_scene",
    "orbit_trajectory",
    "rotation_axis_angle",
    "default_scene_spec",
]

_EVEN_PARITY_SIGNS = ((1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0))

Mat3Rows = tuple[tuple[float, float, float], tuple[float, float, float], tuple[float, float, float]]


class _GaussStream:
    """Box-Muller gaussians over a uniform source, one value per call."""

    __slots__ = ("_rng", "_spare")

    def __init__(self, rng: random.Random) -> None:
        self._rng = rng
        self._spare: float | None = None

    def draw(self) -> float:
        if self._spare is not None:
            value, self._spare = self._spare, None
            return value
        u1 = self._rng.random()
        while u1 <= 0.0:
            u1 = self._rng.random()
        u2 = self._rng.random()
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self._spare = radius * math.sin(angle)
        return radius * math.cos(angle)

    def triple(self) -> tuple[float, float, float]:
        return (self.draw(), self.draw(), self.draw())


def _fisher_yates(rng: random.Random, items: list[int]) -> list[int]:
    """In-place top-down Fisher-Yates using only rng.random()."""
    for i in range(len(items) - 1, 0, -1):
        j = min(i, int(rng.random() * (i + 1)))
        items[i], items[j] = items[j], items[i]
    return items


def _as_rotation(rows) -> Mat3Rows:
    r = tuple(tuple(float(v) for v in row) for row in rows)
    if len(r) != 3 or any(len(row) != 3 for row in r):
        raise InvalidInputError("rotation must be a 3x3 matrix")
    cols = [Vec3(r[0][k], r[1][k], r[2][k]) for k in range(3)]
    for a in range(3):
        for b in range(a, 3):
            want = 1.0 if a == b else 0.0
            if abs(cols[a].dot(cols[b]) - want) > 1e-9:
                raise InvalidInputError("rotation must be orthonormal within 1e-9")
    if abs(cols[0].cross(cols[1]).dot(cols[2]) - 1.0) > 1e-9:
        raise InvalidInputError("rotation must have determinant +1")
    return r  # type: ignore[return-value]


def rotation_axis_angle(axis: Vec3, angle_rad: float) -> Mat3Rows:
    """Rodrigues rotation matrix (rows) about a unit-normalized axis."""
    u = axis.normalized()
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    t = 1.0 - c
    return (
        (c + u.x * u.x * t, u.x * u.y * t - u.z * s, u.x * u.z * t + u.y * s),
        (u.y * u.x * t + u.z * s, c + u.y * u.y * t, u.y * u.z * t - u.x * s),
        (u.z * u.x * t - u.y * s, u.z * u.y * t + u.x * s, c + u.z * u.z * t),
    )


@dataclass(frozen=True)
class TargetSpec:
    """Ellipsoid-surface target: semi-axes `extents` in the rotated frame."""

    center: Vec3
    rotation: Mat3Rows
    extents: tuple[float, float, float]
    n_points: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "rotation", _as_rotation(self.rotation))
        e1, e2, e3 = self.extents
        if not (e1 >= e2 >= e3 > 0.0):
            raise InvalidInputError(f"extents must be descending and positive, got {self.extents}")
        if self.n_points < 1:
            raise InvalidInputError(f"target needs at least 1 point, got {self.n_points}")

    def axis_column(self, k: int) -> Vec3:
        r = self.rotation
        return Vec3(r[0][k], r[1][k], r[2][k])


@dataclass(frozen=True)
class ClutterSpec:
    """Uniform background points inside an axis-aligned world box."""

    n_points: int
    bounds_min: Vec3
    bounds_max: Vec3

    def __post_init__(self) -> None:
        if self.n_points < 0:
            raise InvalidInputError(f"clutter count must be >= 0, got {self.n_points}")
        for lo, hi in zip(self.bounds_min, self.bounds_max):
            if not lo < hi:
                raise InvalidInputError(
                    f"clutter bounds must satisfy min < max per axis, got {self.bounds_min}..{self.bounds_max}"
                )


@dataclass(frozen=True)
class SceneSpec:
    """Full recipe for one deterministic scene."""

    seed: int
    target: TargetSpec
    clutter: ClutterSpec
    noise_sigma: float
    trajectory: tuple[CameraRig, ...]
    image_size: tuple[int, int] = (640, 480)
    class_label: str = "target"
    discovery_rate: float = 0.1

    def __post_init__(self) -> None:
        object.__setattr__(self, "trajectory", tuple(self.trajectory))
        if self.noise_sigma < 0.0:
            raise InvalidInputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        w, h = self.image_size
        if w < 1 or h < 1:
            raise InvalidInputError(f"image_size must be positive, got {self.image_size}")
        if not (0.0 < self.discovery_rate <= 1.0):
            raise InvalidInputError(
                f"discovery_rate must lie in (0, 1], got {self.discovery_rate}"
            )


@dataclass(frozen=True)
class SceneFrame:
    """One step of the growing map: everything discovered so far."""

    frame_id: int
    rig: CameraRig
    visible_cloud: tuple[tuple[int, Vec3], ...]
    truth_box: PixelBox | None
    truth_pose: TargetPose


def gen_target_cloud(spec: SceneSpec) -> list[tuple[int, Vec3]]:
    """Sample the target: ids 0..n-1 with world positions.

    Points sit on the ellipsoid surface (unit directions scaled per axis
    by the extents, rotated, translated to the center) plus isotropic
    Gaussian noise.  See the module docstring for the exact draw order.
    """
    rng = random.Random(spec.seed)
    return _gen_target_points(spec, _GaussStream(rng))


def _gen_target_points(spec: SceneSpec, gauss: _GaussStream) -> list[tuple[int, Vec3]]:
    t = spec.target
    sigma = spec.noise_sigma
    out: list[tuple[int, Vec3]] = []
    remaining = t.n_points
    while remaining > 0:
        u = _unit_direction(gauss)
        if remaining >= 4:
            signs = _EVEN_PARITY_SIGNS
        elif remaining >= 2:
            signs = ((1.0, 1.0, 1.0), (-1.0, -1.0, -1.0))
        else:
            signs = ((1.0, 1.0, 1.0),)
        for s in signs:
            local = (
                t.extents[0] * (s[0] * u[0]),
                t.extents[1] * (s[1] * u[1]),
                t.extents[2] * (s[2] * u[2]),
            )
            noise = gauss.triple()
            out.append((len(out), _place(t, local, sigma, noise)))
        remaining -= len(signs)
    return out


def _unit_direction(gauss: _GaussStream) -> tuple[float, float, float]:
    while True:
        g = gauss.triple()
        norm = math.sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2])
        if norm > 1e-12:
            return (g[0] / norm, g[1] / norm, g[2] / norm)


def _place(
    t: TargetSpec,
    local: tuple[float, float, float],
    sigma: float,
    noise: tuple[float, float, float],
) -> Vec3:
    r = t.rotation
    return Vec3(
        t.center.x + r[0][0] * local[0] + r[0][1] * local[1] + r[0][2] * local[2] + sigma * noise[0],
        t.center.y + r[1][0] * local[0] + r[1][1] * local[1] + r[1][2] * local[2] + sigma * noise[1],
        t.center.z + r[2][0] * local[0] + r[2][1] * local[1] + r[2][2] * local[2] + sigma * noise[2],
    )


def _gen_clutter_points(spec: SceneSpec, rng: random.Random, first_id: int) -> list[tuple[int, Vec3]]:
    c = spec.clutter
    lo, hi = c.bounds_min, c.bounds_max
    out: list[tuple[int, Vec3]] = []
    for k in range(c.n_points):
        p = Vec3(
            lo.x + rng.random() * (hi.x - lo.x),
            lo.y + rng.random() * (hi.y - lo.y),
            lo.z + rng.random() * (hi.z - lo.z),
        )
        out.append((first_id + k, p))
    return out


class SimulatedScene:
    """Materialized scene: full cloud, ground truth, and per-frame views.

    `discovery_order` is the fixed permutation of all landmark ids; the
    map at frame f is the prefix of length `visible_counts[f]`.  The
    permuted id/position arrays are kept so prefix views are zero-copy.
    """

    __slots__ = (
        "spec",
        "cloud",
        "target_count",
        "obb_corners",
        "truth_pose",
        "discovery_order",
        "visible_counts",
        "_perm_ids",
        "_perm_positions",
        "_perm_cloud",
    )

    def __init__(self, spec: SceneSpec) -> None:
        rng = random.Random(spec.seed)
        gauss = _GaussStream(rng)
        target = _gen_target_points(spec, gauss)
        clutter = _gen_clutter_points(spec, rng, len(target))
        entries = target + clutter
        ids = np.asarray([i for i, _ in entries], dtype=np.int64)
        positions = np.asarray([(p.x, p.y, p.z) for _, p in entries], dtype=np.float64)

        order = _fisher_yates(rng, list(range(len(entries))))

        self.spec = spec
        self.cloud = PointCloud(ids, positions)
        self.target_count = len(target)
        self.obb_corners = _bounding_corners(spec.target, positions[: len(target)])
        self.truth_pose = _truth_pose(spec)
        self.discovery_order = tuple(order)
        self.visible_counts = _discovery_counts(
            len(entries), spec.discovery_rate, len(spec.trajectory)
        )
        perm = np.asarray(order, dtype=np.int64)
        self._perm_ids = ids[perm]
        self._perm_positions = np.ascontiguousarray(positions[perm])
        self._perm_cloud = PointCloud(self._perm_ids, self._perm_positions)

    def visible_arrays(self, frame_id: int) -> tuple[np.ndarray, np.ndarray]:
        """Zero-copy (ids, positions) of the map known at this frame."""
        n = self.visible_counts[frame_id]
        return self._perm_ids[:n], self._perm_positions[:n]

    def visible_cloud(self, frame_id: int) -> PointCloud:
        n = self.visible_counts[frame_id]
        return self._perm_cloud.take(n)

    def oracle_detector(self) -> OracleDetector:
        return OracleDetector(
            corners=self.obb_corners,
            trajectory=self.spec.trajectory,
            image_size=self.spec.image_size,
            class_label=self.spec.class_label,
        )

    def frame(self, frame_id: int) -> SceneFrame:
        ids, positions = self.visible_arrays(frame_id)
        rig = self.spec.trajectory[frame_id]
        visible = tuple(
            (int(i), Vec3(float(p[0]), float(p[1]), float(p[2])))
            for i, p in zip(ids, positions)
        )
        return SceneFrame(
            frame_id=frame_id,
            rig=rig,
            visible_cloud=visible,
            truth_box=self._truth_box(frame_id, ids, positions, rig),
            truth_pose=self.truth_pose,
        )

    def _truth_box(
        self, frame_id: int, ids: np.ndarray, positions: np.ndarray, rig: CameraRig
    ) -> PixelBox | None:
        """Pixel hull of the in-frustum discovered target points, +2px."""
        mask = ids < self.target_count
        if not mask.any():
            return None
        ndc, _ = project_cloud_arrays(positions[mask], rig)
        if len(ndc) == 0:
            return None
        width, height = self.spec.image_size
        xs, ys = zip(*(ndc_to_pixel(x, y, width, height) for x, y, _ in ndc))
        x_min = max(0.0, min(xs) - 2.0)
        x_max = min(float(width), max(xs) + 2.0)
        y_min = max(0.0, min(ys) - 2.0)
        y_max = min(float(height), max(ys) + 2.0)
        if not (x_min < x_max and y_min < y_max):
            return None
        return PixelBox(
            x_min=x_min, y_min=y_min, x_max=x_max, y_max=y_max,
            image_width=float(width), image_height=float(height),
            class_label=self.spec.class_label, confidence=1.0,
        )


def build_scene(spec: SceneSpec) -> SimulatedScene:
    return SimulatedScene(spec)


def gen_frames(spec: SceneSpec) -> list[SceneFrame]:
    """Every frame of the scene, in trajectory order."""
    if not spec.trajectory:
        raise InvalidInputError("scene trajectory is empty")
    scene = SimulatedScene(spec)
    return [scene.frame(f) for f in range(len(spec.trajectory))]


def _discovery_counts(total: int, rate: float, n_frames: int) -> tuple[int, ...]:
    """Cumulative discovered-landmark count per frame.

    Each frame reveals ceil(rate * remaining) of the not-yet-seen
    landmarks; the 1e-9 slack keeps float products like 0.1 * 500 from
    ceiling one past the intended integer.
    """
    counts: list[int] = []
    seen = 0
    for _ in range(n_frames):
        remaining = total - seen
        if remaining > 0:
            seen += min(remaining, max(1, math.ceil(rate * remaining - 1e-9)))
        counts.append(seen)
    return tuple(counts)


def _bounding_corners(target: TargetSpec, positions: np.ndarray) -> tuple[Vec3, ...]:
    """Corners of the oriented box that covers the generated points.

    Half-extents are the largest object-frame coordinate magnitudes of
    the actual (noisy) sample, so containment holds by construction.
    """
    r = np.asarray(target.rotation, dtype=np.float64)
    center = np.asarray(target.center, dtype=np.float64)
    local = (positions - center) @ r  # rows q_i = R^T (p_i - c)
    half = np.abs(local).max(axis=0)
    corners = []
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            for sz in (-1.0, 1.0):
                q = np.array([sx * half[0], sy * half[1], sz * half[2]])
                w = center + r @ q
                corners.append(Vec3(float(w[0]), float(w[1]), float(w[2])))
    return tuple(corners)


def _truth_pose(spec: SceneSpec) -> TargetPose:
    """Analytic pose: rotation columns and expected sample variances.

    For unit directions uniform on the sphere E[u_k^2] = 1/3, so the
    population variance along axis k is extents_k^2 / 3 + noise_sigma^2.
    """
    t = spec.target
    values = tuple(e * e / 3.0 + spec.noise_sigma**2 for e in t.extents)
    axes = (t.axis_column(0), t.axis_column(1), t.axis_column(2))
    if axes[0].cross(axes[1]).dot(axes[2]) < 0.0:
        axes = (axes[0], axes[1], axes[2].neg())
    return TargetPose(
        center=t.center,
        axes=axes,
        eigenvalues=values,  # type: ignore[arg-type]
        point_count=t.n_points,
        isotropy_flag=values[0] <= 1.2 * values[1],
    )


def orbit_trajectory(
    center: Vec3,
    radius: float,
    height: float,
    n_frames: int,
    fov_y_deg: float = 60.0,
    aspect: float = 4.0 / 3.0,
    near: float = 0.1,
    far: float = 200.0,
    start_deg: float = 0.0,
    sweep_deg: float = 360.0,
) -> tuple[CameraRig, ...]:
    """Cameras on a horizontal circle around `center`, all looking at it."""
    if n_frames < 1:
        raise InvalidInputError(f"trajectory needs at least 1 frame, got {n_frames}")
    if radius <= 0.0:
        raise InvalidInputError(f"orbit radius must be positive, got {radius}")
    rigs = []
    for k in range(n_frames):
        angle = math.radians(start_deg + sweep_deg * k / n_frames)
        eye = Vec3(
            center.x + radius * math.cos(angle),
            center.y + height,
            center.z + radius * math.sin(angle),
        )
        pose = look_at(eye, center)
        rigs.append(
            CameraRig(
                camera_to_world=pose,
                fov_y=math.radians(fov_y_deg),
                aspect=aspect,
                near=near,
                far=far,
            )
        )
    return tuple(rigs)


def default_scene_spec(seed: int = 11) -> SceneSpec:
    """The stock test scene: a 10x3x1 tilted ellipsoid in close clutter.

    Clutter count and bounds are calibrated so that with threshold 30 the
    accumulated set is roughly one fifth clutter when the estimate fires,
    and the slow discovery rate makes the threshold crossing take a few
    frames instead of happening immediately.
    """
    rotation = rotation_axis_angle(Vec3(0.3, 1.0, 0.2), 0.6)
    return SceneSpec(
        seed=seed,
        target=TargetSpec(
            center=Vec3(0.0, 0.0, 0.0),
            rotation=rotation,
            extents=(10.0, 3.0, 1.0),
            n_points=500,
        ),
        clutter=ClutterSpec(
            n_points=160,
            bounds_min=Vec3(-6.0, -6.0, -6.0),
            bounds_max=Vec3(6.0, 6.0, 6.0),
        ),
        noise_sigma=0.05,
        trajectory=orbit_trajectory(Vec3(0.0, 0.0, 0.0), 40.0, 10.0, 40),
        image_size=(640, 480),
        class_label="target",
        discovery_rate=0.02,
    )
