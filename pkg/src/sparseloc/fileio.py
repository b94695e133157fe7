"""File formats: camera JSON, cloud CSV, detections JSON, scene spec JSON.

Every loader raises InputFormatError naming the offending path, never a
bare KeyError or ValueError, so the CLI can map any malformed input to
one exit code.  All numeric output goes through a single 17-significant-
digit formatter, which round-trips doubles exactly and keeps emitted
files byte-identical across runs.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .camera import CameraRig
from .cloud import PointCloud
from .detection import Detection, PixelBox
from .errors import InputFormatError, SparselocError
from .linalg3 import Mat4, Vec3
from .locator import TargetPose
from .simulator import ClutterSpec, SceneSpec, TargetSpec, orbit_trajectory

__all__ = [
    "fmt_float",
    "dump_json",
    "load_cameras",
    "load_cloud_csv",
    "load_detections",
    "load_scene_spec",
    "camera_from_obj",
    "scene_spec_from_obj",
    "camera_to_obj",
    "detection_to_obj",
    "write_pose_json",
    "write_metrics_json",
    "write_cloud_csv",
    "write_cameras_dir",
    "write_detections_json",
]


def fmt_float(x: float) -> str:
    """17 significant digits: enough to reparse the exact double."""
    if not math.isfinite(x):
        raise InputFormatError(f"cannot serialize non-finite number {x}")
    return f"{x:.17g}"


def dump_json(obj: Any) -> str:
    """Compact deterministic JSON with 17-significant-digit floats."""
    pieces: list[str] = []
    _dump(obj, pieces)
    return "".join(pieces)


def _dump(obj: Any, out: list[str]) -> None:
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if not isinstance(k, str):
                raise InputFormatError(f"JSON object keys must be strings, got {k!r}")
            if i:
                out.append(",")
            out.append(json.dumps(k))
            out.append(":")
            _dump(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)) or isinstance(obj, np.ndarray):
        items = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, v in enumerate(items):
            if i:
                out.append(",")
            _dump(v, out)
        out.append("]")
    else:
        raise InputFormatError(f"cannot serialize {type(obj).__name__} to JSON")


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON in {path}: {exc}") from exc


def _need(obj: dict, key: str, path: Any) -> Any:
    if not isinstance(obj, dict):
        raise InputFormatError(f"{path}: expected a JSON object, got {type(obj).__name__}")
    if key not in obj:
        raise InputFormatError(f"{path}: missing required field {key!r}")
    return obj[key]


def _floats(value: Any, count: int, what: str, path: Any) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != count:
        raise InputFormatError(f"{path}: {what} must be a list of {count} numbers")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise InputFormatError(f"{path}: {what} must contain only numbers, got {v!r}")
        f = float(v)
        if not math.isfinite(f):
            raise InputFormatError(f"{path}: {what} contains non-finite value {v!r}")
        out.append(f)
    return out


def _number(value: Any, what: str, path: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputFormatError(f"{path}: {what} must be a number, got {value!r}")
    f = float(value)
    if not math.isfinite(f):
        raise InputFormatError(f"{path}: {what} must be finite, got {value!r}")
    return f


def camera_from_obj(obj: Any, where: Any = "camera") -> CameraRig:
    """CameraRig from its JSON-object form; `where` names the source in errors."""
    return _camera_from_obj(obj, where)


def _camera_from_obj(obj: Any, path: Any) -> CameraRig:
    m = _floats(_need(obj, "camera_to_world", path), 16, "camera_to_world", path)
    fov_y_deg = _number(_need(obj, "fov_y_deg", path), "fov_y_deg", path)
    aspect = _number(_need(obj, "aspect", path), "aspect", path)
    near = _number(_need(obj, "near", path), "near", path)
    far = _number(_need(obj, "far", path), "far", path)
    try:
        return CameraRig(
            camera_to_world=Mat4(tuple(m)),
            fov_y=math.radians(fov_y_deg),
            aspect=aspect,
            near=near,
            far=far,
        )
    except SparselocError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc


def camera_to_obj(rig: CameraRig) -> dict:
    return {
        "camera_to_world": list(rig.camera_to_world.m),
        "fov_y_deg": math.degrees(rig.fov_y),
        "aspect": rig.aspect,
        "near": rig.near,
        "far": rig.far,
    }


def load_cameras(path: str | Path) -> list[CameraRig]:
    """One rig per frame, from a file (object or array) or a directory.

    A directory is read as its *.json files in sorted-name order, one
    camera object per file.
    """
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.json"))
        if not files:
            raise InputFormatError(f"{p}: camera directory contains no .json files")
        return [_camera_from_obj(_read_json(f), f) for f in files]
    data = _read_json(p)
    if isinstance(data, list):
        if not data:
            raise InputFormatError(f"{p}: camera array is empty")
        return [_camera_from_obj(obj, p) for obj in data]
    return [_camera_from_obj(data, p)]


def load_cloud_csv(path: str | Path) -> PointCloud:
    """Landmark cloud from CSV with the exact header id,x,y,z."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"cannot read {p}: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != ["id", "x", "y", "z"]:
        raise InputFormatError(f"{p}: first line must be the header 'id,x,y,z'")
    ids: list[int] = []
    positions: list[tuple[float, float, float]] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise InputFormatError(f"{p}: line {lineno}: expected 4 fields, got {len(row)}")
        try:
            ids.append(int(row[0]))
            xyz = (float(row[1]), float(row[2]), float(row[3]))
        except ValueError as exc:
            raise InputFormatError(f"{p}: line {lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in xyz):
            raise InputFormatError(f"{p}: line {lineno}: coordinates must be finite")
        positions.append(xyz)
    try:
        return PointCloud(
            np.asarray(ids, dtype=np.int64),
            np.asarray(positions, dtype=np.float64).reshape(len(ids), 3),
        )
    except SparselocError as exc:
        raise InputFormatError(f"{p}: {exc}") from exc


def load_detections(path: str | Path) -> list[Detection]:
    """Detections as a JSON array; an empty array is valid (no detections)."""
    p = Path(path)
    data = _read_json(p)
    if not isinstance(data, list):
        raise InputFormatError(f"{p}: detections file must be a JSON array")
    out: list[Detection] = []
    for i, obj in enumerate(data):
        where = f"detection #{i}"
        frame = _need(obj, "frame", p)
        if isinstance(frame, bool) or not isinstance(frame, int):
            raise InputFormatError(f"{p}: {where}: frame must be an integer")
        label = _need(obj, "class", p)
        if not isinstance(label, str):
            raise InputFormatError(f"{p}: {where}: class must be a string")
        confidence = _number(_need(obj, "confidence", p), f"{where}: confidence", p)
        box = _floats(_need(obj, "box_px", p), 4, f"{where}: box_px", p)
        size = _floats(_need(obj, "image_size", p), 2, f"{where}: image_size", p)
        try:
            out.append(
                Detection(
                    frame_id=frame,
                    box=PixelBox(
                        x_min=box[0], y_min=box[1], x_max=box[2], y_max=box[3],
                        image_width=size[0], image_height=size[1],
                        class_label=label, confidence=confidence,
                    ),
                )
            )
        except SparselocError as exc:
            raise InputFormatError(f"{p}: {where}: {exc}") from exc
    return out


def detection_to_obj(d: Detection) -> dict:
    b = d.box
    return {
        "frame": d.frame_id,
        "class": b.class_label,
        "confidence": b.confidence,
        "box_px": [b.x_min, b.y_min, b.x_max, b.y_max],
        "image_size": [int(b.image_width), int(b.image_height)],
    }


def load_scene_spec(path: str | Path) -> SceneSpec:
    """SceneSpec from its JSON mirror.

    `trajectory` is either an array of camera objects (same schema as the
    camera file) or the orbit shorthand {"orbit": {"center", "radius",
    "height", "frames", ...optional fov_y_deg/aspect/near/far/start_deg/
    sweep_deg}}.
    """
    p = Path(path)
    return scene_spec_from_obj(_read_json(p), p)


def scene_spec_from_obj(data: Any, p: Any = "scene spec") -> SceneSpec:
    """SceneSpec from its parsed JSON form; `p` names the source in errors."""
    seed = _need(data, "seed", p)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise InputFormatError(f"{p}: seed must be an integer")

    tgt = _need(data, "target", p)
    center = _floats(_need(tgt, "center", p), 3, "target.center", p)
    rot_rows = _need(tgt, "rotation", p)
    if not isinstance(rot_rows, list) or len(rot_rows) != 3:
        raise InputFormatError(f"{p}: target.rotation must be 3 rows of 3 numbers")
    rotation = tuple(tuple(_floats(row, 3, "target.rotation row", p)) for row in rot_rows)
    extents = _floats(_need(tgt, "extents", p), 3, "target.extents", p)
    n_points = _need(tgt, "n_points", p)
    if isinstance(n_points, bool) or not isinstance(n_points, int):
        raise InputFormatError(f"{p}: target.n_points must be an integer")

    clu = _need(data, "clutter", p)
    clutter_n = _need(clu, "n_points", p)
    if isinstance(clutter_n, bool) or not isinstance(clutter_n, int):
        raise InputFormatError(f"{p}: clutter.n_points must be an integer")
    bounds = _need(clu, "bounds", p)
    bmin = _floats(_need(bounds, "min", p), 3, "clutter.bounds.min", p)
    bmax = _floats(_need(bounds, "max", p), 3, "clutter.bounds.max", p)

    noise_sigma = _number(_need(data, "noise_sigma", p), "noise_sigma", p)
    trajectory = _load_trajectory(_need(data, "trajectory", p), p)

    image_size = (640, 480)
    if "image_size" in data:
        wh = _floats(data["image_size"], 2, "image_size", p)
        image_size = (int(wh[0]), int(wh[1]))
    class_label = data.get("class_label", "target")
    if not isinstance(class_label, str):
        raise InputFormatError(f"{p}: class_label must be a string")
    discovery_rate = 0.1
    if "discovery_rate" in data:
        discovery_rate = _number(data["discovery_rate"], "discovery_rate", p)

    try:
        return SceneSpec(
            seed=seed,
            target=TargetSpec(
                center=Vec3(*center),
                rotation=rotation,  # type: ignore[arg-type]
                extents=(extents[0], extents[1], extents[2]),
                n_points=n_points,
            ),
            clutter=ClutterSpec(
                n_points=clutter_n,
                bounds_min=Vec3(*bmin),
                bounds_max=Vec3(*bmax),
            ),
            noise_sigma=noise_sigma,
            trajectory=tuple(trajectory),
            image_size=image_size,
            class_label=class_label,
            discovery_rate=discovery_rate,
        )
    except SparselocError as exc:
        raise InputFormatError(f"{p}: {exc}") from exc


def _load_trajectory(value: Any, path: Any) -> list[CameraRig]:
    if isinstance(value, list):
        if not value:
            raise InputFormatError(f"{path}: trajectory array is empty")
        return [_camera_from_obj(obj, path) for obj in value]
    if isinstance(value, dict) and "orbit" in value:
        orbit = value["orbit"]
        center = _floats(_need(orbit, "center", path), 3, "orbit.center", path)
        frames = _need(orbit, "frames", path)
        if isinstance(frames, bool) or not isinstance(frames, int):
            raise InputFormatError(f"{path}: orbit.frames must be an integer")
        kwargs = {}
        for key in ("fov_y_deg", "aspect", "near", "far", "start_deg", "sweep_deg"):
            if key in orbit:
                kwargs[key] = _number(orbit[key], f"orbit.{key}", path)
        try:
            return list(
                orbit_trajectory(
                    center=Vec3(*center),
                    radius=_number(_need(orbit, "radius", path), "orbit.radius", path),
                    height=_number(_need(orbit, "height", path), "orbit.height", path),
                    n_frames=frames,
                    **kwargs,
                )
            )
        except SparselocError as exc:
            raise InputFormatError(f"{path}: {exc}") from exc
    raise InputFormatError(
        f"{path}: trajectory must be a camera array or an {{\"orbit\": ...}} object"
    )


def write_pose_json(path: str | Path, pose: TargetPose) -> None:
    Path(path).write_text(dump_json(pose.to_dict()) + "\n", encoding="utf-8")


def write_metrics_json(path: str | Path, metrics: dict) -> None:
    Path(path).write_text(dump_json(metrics) + "\n", encoding="utf-8")


def write_cloud_csv(path: str | Path, cloud: PointCloud) -> None:
    lines = ["id,x,y,z"]
    for i, p in cloud.pairs():
        lines.append(f"{i},{fmt_float(p.x)},{fmt_float(p.y)},{fmt_float(p.z)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_cameras_dir(dir_path: str | Path, trajectory: Sequence[CameraRig]) -> list[Path]:
    d = Path(dir_path)
    d.mkdir(parents=True, exist_ok=True)
    written = []
    for f, rig in enumerate(trajectory):
        p = d / f"frame_{f:05d}.json"
        p.write_text(dump_json(camera_to_obj(rig)) + "\n", encoding="utf-8")
        written.append(p)
    return written


def write_detections_json(path: str | Path, detections: Sequence[Detection]) -> None:
    Path(path).write_text(
        dump_json([detection_to_obj(d) for d in detections]) + "\n", encoding="utf-8"
    )
