"""Projection chain tests: conventions, culling, invertibility, equivariance."""

import math
import random

import numpy as np
import pytest

from sparseloc.camera import (
    CameraRig,
    look_at,
    ndc_matrix,
    project_cloud,
    project_cloud_arrays,
    project_to_ndc,
    projection_matrix,
    unproject_ndc,
    view_matrix,
)
from sparseloc.errors import InvalidCameraError
from sparseloc.linalg3 import Mat4, Vec3, mat4_mul, transform_point
from util import random_rotation


def unit_rig(pose: Mat4 | None = None) -> CameraRig:
    """fov 90 deg, square aspect, near 1, far 100 (the worked example rig)."""
    return CameraRig(
        camera_to_world=pose if pose is not None else Mat4.identity(),
        fov_y=math.pi / 2.0,
        aspect=1.0,
        near=1.0,
        far=100.0,
    )


def project_camera_space(rig: CameraRig, p: Vec3) -> tuple[float, float, float]:
    clip, w = transform_point(projection_matrix(rig), p)
    return clip.x / w, clip.y / w, clip.z / w


class TestProjectionMatrix:
    def test_near_plane_on_axis(self):
        assert project_camera_space(unit_rig(), Vec3(0, 0, -1)) == pytest.approx(
            (0.0, 0.0, -1.0), abs=1e-12
        )

    def test_far_plane_on_axis(self):
        assert project_camera_space(unit_rig(), Vec3(0, 0, -100)) == pytest.approx(
            (0.0, 0.0, 1.0), abs=1e-12
        )

    def test_frustum_right_edge(self):
        x, _, _ = project_camera_space(unit_rig(), Vec3(1, 0, -1))
        assert x == pytest.approx(1.0, abs=1e-12)

    def test_rig_validation(self):
        with pytest.raises(InvalidCameraError):
            CameraRig(Mat4.identity(), fov_y=math.pi / 2, aspect=1.0, near=2.0, far=1.0)
        with pytest.raises(InvalidCameraError):
            CameraRig(Mat4.identity(), fov_y=0.0, aspect=1.0, near=1.0, far=10.0)
        with pytest.raises(InvalidCameraError):
            CameraRig(Mat4.identity(), fov_y=math.pi / 2, aspect=-1.0, near=1.0, far=10.0)


class TestProjectToNdc:
    def test_identity_view_near_point(self):
        ndc = project_to_ndc(Vec3(0, 0, -1), unit_rig())
        assert ndc is not None
        assert (ndc.x, ndc.y, ndc.z) == pytest.approx((0.0, 0.0, -1.0), abs=1e-12)

    def test_point_behind_camera_culled(self):
        assert project_to_ndc(Vec3(0, 0, 5), unit_rig()) is None

    def test_translated_camera_consistency(self):
        pose = Mat4.translation(Vec3(0, 0, 5))
        ndc = project_to_ndc(Vec3(0, 0, 4), unit_rig(pose))
        assert ndc is not None
        assert (ndc.x, ndc.y, ndc.z) == pytest.approx((0.0, 0.0, -1.0), abs=1e-12)

    def test_outside_frustum_culled(self):
        assert project_to_ndc(Vec3(50, 0, -1), unit_rig()) is None

    def test_source_index_carried(self):
        ndc = project_to_ndc(Vec3(0, 0, -2), unit_rig(), source_index=42)
        assert ndc is not None and ndc.source_index == 42


class TestProjectCloud:
    def test_empty_cloud(self):
        assert project_cloud([], unit_rig()) == []

    def test_all_behind_camera(self):
        cloud = [Vec3(0, 0, 3), Vec3(1, 1, 9)]
        assert project_cloud(cloud, unit_rig()) == []

    def test_inverse_mapped_ndc_samples_all_survive(self):
        # construct guaranteed in-frustum points by unprojecting NDC draws
        rig = unit_rig(look_at(Vec3(4, 3, 8), Vec3(0, 0, 0)))
        rng = random.Random(42)
        world = []
        for _ in range(1000):
            ndc = Vec3(
                rng.uniform(-0.999, 0.999),
                rng.uniform(-0.999, 0.999),
                rng.uniform(-0.999, 0.999),
            )
            world.append(unproject_ndc(ndc, rig))
        out = project_cloud(world, rig)
        assert len(out) == 1000
        for p in out:
            assert max(abs(p.x), abs(p.y), abs(p.z)) <= 1.0 + 1e-9

    def test_containment_of_survivors(self):
        rng = random.Random(7)
        rig = unit_rig()
        cloud = [
            Vec3(rng.uniform(-30, 30), rng.uniform(-30, 30), rng.uniform(-150, 50))
            for _ in range(500)
        ]
        for p in project_cloud(cloud, rig):
            assert max(abs(p.x), abs(p.y), abs(p.z)) <= 1.0 + 1e-9

    def test_scalar_and_array_paths_agree(self):
        rng = random.Random(8)
        rig = unit_rig(look_at(Vec3(1, 2, 3), Vec3(0, 0, -5)))
        cloud = [
            Vec3(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-80, 10))
            for _ in range(400)
        ]
        matrix = ndc_matrix(rig)
        listed = project_cloud(cloud, rig)
        scalar = [
            q
            for i, p in enumerate(cloud)
            if (q := project_to_ndc(p, rig, source_index=i, matrix=matrix)) is not None
        ]
        assert len(listed) == len(scalar)
        for a, b in zip(listed, scalar):
            assert a.source_index == b.source_index
            assert (a.x, a.y, a.z) == pytest.approx((b.x, b.y, b.z), abs=1e-12)


class TestInvariants:
    def test_unproject_roundtrip(self):
        rig = unit_rig(look_at(Vec3(10, 5, -3), Vec3(0, 1, 0)))
        rng = random.Random(9)
        for _ in range(200):
            ndc_in = Vec3(
                rng.uniform(-0.99, 0.99),
                rng.uniform(-0.99, 0.99),
                rng.uniform(-0.99, 0.99),
            )
            world = unproject_ndc(ndc_in, rig)
            ndc_out = project_to_ndc(world, rig)
            assert ndc_out is not None
            scale = max(1.0, world.norm())
            back = unproject_ndc(Vec3(ndc_out.x, ndc_out.y, ndc_out.z), rig)
            assert back.sub(world).norm() <= 1e-6 * scale

    def test_depth_monotonicity(self):
        rig = unit_rig()
        z_prev = None
        for depth in (1.5, 3.0, 10.0, 40.0, 99.0):
            ndc = project_to_ndc(Vec3(0, 0, -depth), rig)
            assert ndc is not None
            if z_prev is not None:
                assert z_prev < ndc.z
            z_prev = ndc.z

    def test_view_consistency_under_rigid_motion(self):
        rng = random.Random(10)
        base_pose = look_at(Vec3(6, 2, 6), Vec3(0, 0, 0))
        rig = unit_rig(base_pose)
        cloud = [
            Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3))
            for _ in range(100)
        ]
        before = project_cloud(cloud, rig)
        for trial in range(20):
            rot = random_rotation(rng)
            t = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5))
            motion = Mat4.from_rows(
                [
                    [*rot[0], t.x],
                    [*rot[1], t.y],
                    [*rot[2], t.z],
                    [0.0, 0.0, 0.0, 1.0],
                ]
            )
            moved_rig = unit_rig(mat4_mul(motion, base_pose))
            moved_cloud = [
                (lambda q: Vec3(q[0].x, q[0].y, q[0].z))(transform_point(motion, p))
                for p in cloud
            ]
            after = project_cloud(moved_cloud, moved_rig)
            assert len(before) == len(after)
            for a, b in zip(before, after):
                assert a.source_index == b.source_index
                assert math.dist((a.x, a.y, a.z), (b.x, b.y, b.z)) <= 1e-9

    def test_view_matrix_is_pose_inverse(self):
        pose = look_at(Vec3(2, 4, 6), Vec3(1, 0, 0))
        rig = unit_rig(pose)
        product = mat4_mul(view_matrix(rig), pose)
        for r in range(4):
            for c in range(4):
                want = 1.0 if r == c else 0.0
                assert abs(product[r, c] - want) < 1e-9


class TestLookAt:
    def test_camera_looks_at_target(self):
        eye, target = Vec3(5, 2, 5), Vec3(0, 0, 0)
        rig = unit_rig(look_at(eye, target))
        ndc = project_to_ndc(target, rig)
        assert ndc is not None
        assert (ndc.x, ndc.y) == pytest.approx((0.0, 0.0), abs=1e-9)

    def test_degenerate_up_rejected(self):
        with pytest.raises(InvalidCameraError):
            look_at(Vec3(0, 5, 0), Vec3(0, 0, 0), up=Vec3(0, 1, 0))

    def test_coincident_eye_target_rejected(self):
        with pytest.raises(InvalidCameraError):
            look_at(Vec3(1, 1, 1), Vec3(1, 1, 1))


def test_project_cloud_arrays_shapes():
    rig = unit_rig()
    positions = np.asarray([[0.0, 0.0, -2.0], [0.0, 0.0, 5.0], [0.2, -0.1, -50.0]])
    ndc, indices = project_cloud_arrays(positions, rig)
    assert ndc.shape == (2, 3)
    assert indices.tolist() == [0, 2]
