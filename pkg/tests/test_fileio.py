"""Loader, writer, and deterministic-serialization tests."""

import json
import math

import numpy as np
import pytest

from sparseloc.camera import CameraRig, look_at
from sparseloc.cloud import PointCloud
from sparseloc.detection import Detection, PixelBox
from sparseloc.errors import InputFormatError
from sparseloc.fileio import (
    camera_from_obj,
    camera_to_obj,
    detection_to_obj,
    dump_json,
    fmt_float,
    load_cameras,
    load_cloud_csv,
    load_detections,
    load_scene_spec,
    write_cameras_dir,
    write_cloud_csv,
    write_detections_json,
    write_pose_json,
)
from sparseloc.linalg3 import Vec3
from sparseloc.simulator import default_scene_spec


def unit_rig() -> CameraRig:
    return CameraRig(
        camera_to_world=look_at(Vec3(0, 0, 5), Vec3(0, 0, 0)),
        fov_y=math.pi / 3,
        aspect=4.0 / 3.0,
        near=0.1,
        far=100.0,
    )


class TestFloatFormat:
    def test_round_trip_exact(self):
        import random

        rng = random.Random(17)
        for _ in range(2000):
            x = rng.uniform(-1e6, 1e6) * 10 ** rng.randrange(-12, 12)
            assert float(fmt_float(x)) == x

    def test_non_finite_rejected(self):
        with pytest.raises(InputFormatError):
            fmt_float(float("nan"))
        with pytest.raises(InputFormatError):
            fmt_float(float("inf"))

    def test_dump_json_compact_and_ordered(self):
        s = dump_json({"b": 1, "a": [1.5, True, None, "x"]})
        assert s == '{"b":1,"a":[1.5,true,null,"x"]}'

    def test_dump_json_numpy_values(self):
        s = dump_json({"v": np.float64(0.25), "n": np.int64(3)})
        assert s == '{"v":0.25,"n":3}'


class TestCameraIo:
    def test_round_trip(self, tmp_path):
        rig = unit_rig()
        p = tmp_path / "cam.json"
        p.write_text(dump_json(camera_to_obj(rig)))
        (loaded,) = load_cameras(p)
        assert loaded.camera_to_world.m == pytest.approx(
            rig.camera_to_world.m, abs=0.0
        )
        assert (loaded.fov_y, loaded.aspect, loaded.near, loaded.far) == (
            rig.fov_y,
            rig.aspect,
            rig.near,
            rig.far,
        )

    def test_array_file(self, tmp_path):
        objs = [camera_to_obj(unit_rig()) for _ in range(3)]
        p = tmp_path / "cams.json"
        p.write_text(json.dumps(objs))
        assert len(load_cameras(p)) == 3

    def test_directory_sorted(self, tmp_path):
        d = tmp_path / "cams"
        d.mkdir()
        paths = write_cameras_dir(d, [unit_rig()] * 4)
        assert [p.name for p in paths] == [
            "frame_00000.json",
            "frame_00001.json",
            "frame_00002.json",
            "frame_00003.json",
        ]
        assert len(load_cameras(d)) == 4

    def test_empty_directory_rejected(self, tmp_path):
        d = tmp_path / "cams"
        d.mkdir()
        with pytest.raises(InputFormatError):
            load_cameras(d)

    def test_malformed_names_path(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(InputFormatError) as e:
            load_cameras(p)
        assert "bad.json" in str(e.value)

    def test_missing_key_names_path(self, tmp_path):
        p = tmp_path / "cam.json"
        obj = camera_to_obj(unit_rig())
        del obj["fov_y_deg"]
        p.write_text(json.dumps(obj))
        with pytest.raises(InputFormatError) as e:
            load_cameras(p)
        assert "fov_y_deg" in str(e.value) and "cam.json" in str(e.value)

    def test_wrong_matrix_length(self):
        obj = camera_to_obj(unit_rig())
        obj["camera_to_world"] = obj["camera_to_world"][:15]
        with pytest.raises(InputFormatError):
            camera_from_obj(obj)


class TestCloudCsv:
    def test_round_trip(self, tmp_path):
        cloud = PointCloud([3, 1, 4], [[0.1, 0.2, 0.3], [1, 2, 3], [-4, 5, -6]])
        p = tmp_path / "cloud.csv"
        write_cloud_csv(p, cloud)
        loaded = load_cloud_csv(p)
        assert np.array_equal(loaded.ids, cloud.ids)
        assert np.array_equal(loaded.positions, cloud.positions)

    def test_header_strict(self, tmp_path):
        p = tmp_path / "cloud.csv"
        p.write_text("id,x,y,zz\n1,0,0,0\n")
        with pytest.raises(InputFormatError) as e:
            load_cloud_csv(p)
        assert "header" in str(e.value)

    def test_row_arity_and_line_number(self, tmp_path):
        p = tmp_path / "cloud.csv"
        p.write_text("id,x,y,z\n1,0,0\n")
        with pytest.raises(InputFormatError) as e:
            load_cloud_csv(p)
        assert "line 2" in str(e.value)

    def test_non_numeric_rejected(self, tmp_path):
        p = tmp_path / "cloud.csv"
        p.write_text("id,x,y,z\n1,0,oops,0\n")
        with pytest.raises(InputFormatError):
            load_cloud_csv(p)

    def test_non_finite_rejected(self, tmp_path):
        p = tmp_path / "cloud.csv"
        p.write_text("id,x,y,z\n1,0,nan,0\n")
        with pytest.raises(InputFormatError):
            load_cloud_csv(p)

    def test_blank_lines_skipped(self, tmp_path):
        p = tmp_path / "cloud.csv"
        p.write_text("id,x,y,z\n\n1,0.5,0,0\n\n2,1,1,1\n")
        assert len(load_cloud_csv(p)) == 2

    def test_duplicate_ids_rejected(self, tmp_path):
        p = tmp_path / "cloud.csv"
        p.write_text("id,x,y,z\n1,0,0,0\n1,1,1,1\n")
        with pytest.raises(InputFormatError):
            load_cloud_csv(p)


class TestDetectionsJson:
    def make(self, frame=0) -> Detection:
        return Detection(
            frame_id=frame,
            box=PixelBox(10, 20, 110, 220, 640, 480, class_label="target", confidence=0.9),
        )

    def test_round_trip(self, tmp_path):
        p = tmp_path / "det.json"
        write_detections_json(p, [self.make(0), self.make(2)])
        loaded = load_detections(p)
        assert [d.frame_id for d in loaded] == [0, 2]
        got = loaded[0].box
        assert (got.x_min, got.y_min, got.x_max, got.y_max) == (10, 20, 110, 220)
        assert got.class_label == "target" and got.confidence == 0.9

    def test_empty_array_is_valid(self, tmp_path):
        p = tmp_path / "det.json"
        p.write_text("[]")
        assert load_detections(p) == []

    def test_object_not_array_rejected(self, tmp_path):
        p = tmp_path / "det.json"
        p.write_text(json.dumps(detection_to_obj(self.make())))
        with pytest.raises(InputFormatError):
            load_detections(p)

    def test_missing_field_named(self, tmp_path):
        obj = detection_to_obj(self.make())
        del obj["box_px"]
        p = tmp_path / "det.json"
        p.write_text(json.dumps([obj]))
        with pytest.raises(InputFormatError) as e:
            load_detections(p)
        assert "box_px" in str(e.value)

    def test_bad_frame_type_rejected(self, tmp_path):
        obj = detection_to_obj(self.make())
        obj["frame"] = 1.5
        p = tmp_path / "det.json"
        p.write_text(json.dumps([obj]))
        with pytest.raises(InputFormatError):
            load_detections(p)


class TestSceneSpecJson:
    def test_committed_fixture_loads(self):
        spec = load_scene_spec("tests/fixtures/scene_e2e.json")
        assert spec == default_scene_spec()

    def test_orbit_optional_fields(self, tmp_path):
        data = json.loads(open("tests/fixtures/scene_e2e.json").read())
        data["trajectory"]["orbit"]["fov_y_deg"] = 45.0
        data["trajectory"]["orbit"]["frames"] = 3
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(data))
        spec = load_scene_spec(p)
        assert len(spec.trajectory) == 3
        assert spec.trajectory[0].fov_y == pytest.approx(math.radians(45.0))

    def test_explicit_camera_trajectory(self, tmp_path):
        data = json.loads(open("tests/fixtures/scene_e2e.json").read())
        data["trajectory"] = [camera_to_obj(unit_rig())]
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(data))
        assert len(load_scene_spec(p).trajectory) == 1

    def test_missing_target_named(self, tmp_path):
        data = json.loads(open("tests/fixtures/scene_e2e.json").read())
        del data["target"]
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(data))
        with pytest.raises(InputFormatError) as e:
            load_scene_spec(p)
        assert "target" in str(e.value)

    def test_defaults_applied(self, tmp_path):
        data = json.loads(open("tests/fixtures/scene_e2e.json").read())
        for k in ("image_size", "class", "discovery_rate"):
            data.pop(k, None)
        p = tmp_path / "spec.json"
        p.write_text(json.dumps(data))
        spec = load_scene_spec(p)
        assert spec.image_size == (640, 480)
        assert spec.class_label == "target"
        assert spec.discovery_rate == 0.1


class TestWriters:
    def test_pose_json_shape(self, tmp_path):
        from sparseloc.locator import LocatorConfig, estimate_pose
        from test_locator import fset  # reuse builder

        pts = [[float(i), float(i % 3), 0.1 * i] for i in range(10)]
        pose = estimate_pose(fset(pts), LocatorConfig(threshold_n=4))
        p = tmp_path / "pose.json"
        write_pose_json(p, pose)
        data = json.loads(p.read_text())
        assert set(data) == {
            "center", "axes", "eigenvalues", "point_count", "isotropy_flag",
        }
        assert len(data["axes"]) == 3 and len(data["axes"][0]) == 3
        assert data["point_count"] == 10
        # doubles survive the text round trip exactly
        assert data["center"] == [pose.center.x, pose.center.y, pose.center.z]
