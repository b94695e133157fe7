"""World-to-NDC projection for a perspective camera.

Conventions (declared, since they pin every sign downstream):
- world and camera spaces are right-handed, y up
- the camera looks along -z in its own space
- NDC is the cube [-1, 1]^3 with z = -1 at the near plane and +1 at far
- matrices act on column vectors

A rig stores its pose as camera_to_world and inverts it on demand, so the
world-to-NDC chain is  project * ortho_normalize * camera_to_world^-1,
followed by the homogeneous divide.  Points with w <= 1e-9 (at or behind
the camera) and points outside the unit cube are culled; culling is a
normal outcome, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidCameraError
from .linalg3 import Mat4, Vec3, mat4_det, mat4_inverse, mat4_mul, transform_point

__all__ = [
    "CameraRig",
    "NdcPoint",
    "CULL_EPS",
    "projection_matrix",
    "view_matrix",
    "ndc_matrix",
    "project_to_ndc",
    "project_cloud",
    "project_cloud_arrays",
    "unproject_ndc",
    "look_at",
]

# Tolerance for the w > 0 test and for NDC cube containment.
CULL_EPS = 1e-9


@dataclass(frozen=True)
class CameraRig:
    """Camera pose in world space plus the perspective frustum parameters."""

    camera_to_world: Mat4
    fov_y: float  # radians
    aspect: float  # width / height
    near: float  # meters
    far: float  # meters

    def __post_init__(self) -> None:
        if not (0.0 < self.near < self.far):
            raise InvalidCameraError(f"need 0 < near < far, got {self.near}, {self.far}")
        if not (0.0 < self.fov_y < math.pi):
            raise InvalidCameraError(f"fov_y must lie in (0, pi), got {self.fov_y}")
        if not self.aspect > 0.0:
            raise InvalidCameraError(f"aspect must be positive, got {self.aspect}")
        if abs(mat4_det(self.camera_to_world)) <= 1e-12:
            raise InvalidCameraError("camera_to_world is singular")


class NdcPoint(NamedTuple):
    """A projected point in the NDC cube, remembering its cloud index."""

    x: float
    y: float
    z: float
    source_index: int


def projection_matrix(rig: CameraRig) -> Mat4:
    """Composite frustum-to-cube matrix (perspective squash, then ortho fit).

    The frustum is first squashed onto the near-plane box by the
    perspective factor, then that axis-aligned box is normalized to
    [-1, 1]^3 by the orthographic factor; the product is the familiar
    perspective projection matrix.
    """
    n, f = rig.near, rig.far
    top = n * math.tan(rig.fov_y / 2.0)
    right = top * rig.aspect
    persp_to_ortho = Mat4.from_rows([
        [n, 0.0, 0.0, 0.0],
        [0.0, n, 0.0, 0.0],
        [0.0, 0.0, n + f, n * f],
        [0.0, 0.0, -1.0, 0.0],
    ])
    ortho_to_ndc = Mat4.from_rows([
        [1.0 / right, 0.0, 0.0, 0.0],
        [0.0, 1.0 / top, 0.0, 0.0],
        [0.0, 0.0, -2.0 / (f - n), -(f + n) / (f - n)],
        [0.0, 0.0, 0.0, 1.0],
    ])
    return mat4_mul(ortho_to_ndc, persp_to_ortho)


def view_matrix(rig: CameraRig) -> Mat4:
    """World-to-camera transform: the inverse of the stored pose."""
    try:
        return mat4_inverse(rig.camera_to_world)
    except Exception as exc:
        raise InvalidCameraError(f"camera pose is not invertible: {exc}") from exc


def ndc_matrix(rig: CameraRig) -> Mat4:
    """Full world-to-clip matrix (divide by w still pending)."""
    return mat4_mul(projection_matrix(rig), view_matrix(rig))


def project_to_ndc(
    p: Vec3, rig: CameraRig, source_index: int = 0, matrix: Mat4 | None = None
) -> NdcPoint | None:
    """Project one world point; None when culled.

    Pass a precomputed ndc_matrix(rig) as `matrix` to amortize the rig
    inversion over many calls.
    """
    m = matrix if matrix is not None else ndc_matrix(rig)
    clip, w = transform_point(m, p)
    if w <= CULL_EPS:
        return None
    x, y, z = clip.x / w, clip.y / w, clip.z / w
    lim = 1.0 + CULL_EPS
    if abs(x) > lim or abs(y) > lim or abs(z) > lim:
        return None
    return NdcPoint(x, y, z, source_index)


def project_cloud_arrays(
    positions: np.ndarray, rig: CameraRig, matrix: Mat4 | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized projection of an (n, 3) position array.

    Returns (ndc, source_indices) for the surviving points, in input
    order; ndc is (m, 3).  Semantically identical to mapping
    project_to_ndc over the rows.
    """
    m = matrix if matrix is not None else ndc_matrix(rig)
    mat = np.asarray(m.rows(), dtype=np.float64)
    pts = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    clip = pts @ mat[:, :3].T + mat[:, 3]
    w = clip[:, 3]
    in_front = w > CULL_EPS
    ndc = clip[in_front, :3] / w[in_front, np.newaxis]
    inside = (np.abs(ndc) <= 1.0 + CULL_EPS).all(axis=1)
    indices = np.flatnonzero(in_front)[inside]
    return ndc[inside], indices


def project_cloud(
    cloud: Sequence[Vec3], rig: CameraRig, matrix: Mat4 | None = None
) -> list[NdcPoint]:
    """Project a whole cloud; culled points are omitted.

    Each survivor keeps its index into `cloud`, so the world coordinates
    stay recoverable (the pose math runs on world points, never on NDC).
    """
    if len(cloud) == 0:
        return []
    ndc, indices = project_cloud_arrays(
        np.asarray(cloud, dtype=np.float64), rig, matrix
    )
    return [
        NdcPoint(float(p[0]), float(p[1]), float(p[2]), int(i))
        for p, i in zip(ndc, indices)
    ]


def unproject_ndc(ndc: Vec3, rig: CameraRig) -> Vec3:
    """Map an NDC point back to world space through the inverse chain."""
    inv = mat4_inverse(ndc_matrix(rig))
    p, w = transform_point(inv, ndc)
    if abs(w) <= CULL_EPS:
        raise InvalidCameraError("unprojection hit w ~ 0")
    return Vec3(p.x / w, p.y / w, p.z / w)


def look_at(eye: Vec3, target: Vec3, up: Vec3 = Vec3(0.0, 1.0, 0.0)) -> Mat4:
    """Camera-to-world pose for a camera at `eye` looking at `target`.

    The camera -z axis points from eye toward target; `up` seeds the
    vertical direction and must not be parallel to the view direction.
    """
    forward = target.sub(eye)
    if forward.norm() <= 1e-12:
        raise InvalidCameraError("look_at eye and target coincide")
    forward = forward.normalized()
    right = forward.cross(up)
    if right.norm() <= 1e-9:
        raise InvalidCameraError("look_at up vector is parallel to the view direction")
    right = right.normalized()
    true_up = right.cross(forward)
    # Columns: camera x, y, z axes in world space, then the eye position.
    return Mat4.from_rows([
        [right.x, true_up.x, -forward.x, eye.x],
        [right.y, true_up.y, -forward.y, eye.y],
        [right.z, true_up.z, -forward.z, eye.z],
        [0.0, 0.0, 0.0, 1.0],
    ])
