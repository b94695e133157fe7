"""Command-line front door.

`sparseloc locate` (or bare flags, locate is implied) runs the batch
pipeline from files or from a scene spec and writes pose/metrics/SVG
outputs; `serve` starts the HTTP service; `emit-fixtures` materializes a
scene as the on-disk file formats; `bench` times the hot path.  By
default locate runs in-process; --server URL delegates the same request
to a running service so the CLI stays a thin client of one code path.

Exit codes: 0 success, 2 malformed or unusable input, 3 threshold never
reached, 4 degenerate cloud.  Output files are written only on exit 0.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .detection import FileDetector
from .errors import (
    DegenerateCloudError,
    InputFormatError,
    SparselocError,
)
from .fileio import (
    dump_json,
    load_cameras,
    load_cloud_csv,
    load_detections,
    load_scene_spec,
    write_cameras_dir,
    write_cloud_csv,
    write_detections_json,
    write_metrics_json,
)
from .locator import LocatorConfig
from .pipeline import FilesSource, SimulateSource, build_report, run_pipeline
from .simulator import SimulatedScene

__all__ = ["main", "build_parser"]

_SUBCOMMANDS = ("locate", "serve", "emit-fixtures", "bench")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparseloc",
        description="Locate a directional target from a sparse landmark cloud "
        "and per-frame detection boxes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    locate = sub.add_parser("locate", help="run the batch pipeline")
    locate.add_argument("--cloud", help="landmark cloud CSV (header id,x,y,z)")
    locate.add_argument("--cameras", help="camera JSON file, array, or directory")
    locate.add_argument("--detections", help="detections JSON array")
    locate.add_argument("--simulate", metavar="SPEC.json", help="scene spec JSON (replaces the three file inputs)")
    locate.add_argument("--class", dest="class_label", default="target", metavar="LABEL", help="detection class to follow (default: target)")
    locate.add_argument("--threshold", type=int, default=30, metavar="N", help="landmark count that triggers estimation (default: 30)")
    locate.add_argument("--sign-policy", choices=("largest", "align-prev"), default="largest", help="axis sign canonicalization policy")
    locate.add_argument("--isotropy-ratio", type=float, default=1.2, metavar="R", help="variance ratio under which the target counts as isotropic")
    locate.add_argument("--out", default="pose.json", metavar="POSE.json", help="pose output path (default: pose.json)")
    locate.add_argument("--svg", metavar="OUT.svg", help="debug render of the estimate frame")
    locate.add_argument("--metrics", metavar="METRICS.json", help="per-frame metrics output path")
    locate.add_argument("--continuous", action="store_true", help="reserved; not implemented")
    locate.add_argument("--server", metavar="URL", help="delegate to a running service instead of running in-process")
    locate.set_defaults(func=_cmd_locate)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)

    emit = sub.add_parser("emit-fixtures", help="write a scene as cloud/cameras/detections files")
    emit.add_argument("--simulate", metavar="SPEC.json", required=True, help="scene spec JSON")
    emit.add_argument("--out-dir", required=True, metavar="DIR")
    emit.set_defaults(func=_cmd_emit_fixtures)

    bench = sub.add_parser("bench", help="time project + filter + estimate")
    bench.add_argument("--points", type=int, default=10_000)
    bench.add_argument("--repeats", type=int, default=30)
    bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    if args and args[0] not in _SUBCOMMANDS and args[0] not in ("-h", "--help"):
        args = ["locate", *args]
    parser = build_parser()
    ns = parser.parse_args(args)
    try:
        return ns.func(ns)
    except DegenerateCloudError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SparselocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _cmd_locate(ns: argparse.Namespace) -> int:
    if ns.continuous:
        print("error: --continuous is reserved and not implemented", file=sys.stderr)
        return 2
    file_args = (ns.cloud, ns.cameras, ns.detections)
    if ns.simulate is not None:
        if any(a is not None for a in file_args):
            print("error: --simulate replaces --cloud/--cameras/--detections", file=sys.stderr)
            return 2
    elif not all(a is not None for a in file_args):
        print(
            "error: provide --cloud, --cameras and --detections together, or --simulate",
            file=sys.stderr,
        )
        return 2

    cfg = LocatorConfig(
        threshold_n=ns.threshold,
        class_label=ns.class_label,
        isotropy_ratio=ns.isotropy_ratio,
        sign_policy=ns.sign_policy,
    )
    if ns.server:
        report, svg = _locate_via_server(ns, cfg)
    else:
        report, svg = _locate_in_process(ns, cfg)

    if report["pose"] is None:
        print(
            f"error: accumulated {report['max_accumulated']} landmarks, "
            f"threshold is {cfg.threshold_n}; never enough to estimate",
            file=sys.stderr,
        )
        return 3

    Path(ns.out).write_text(dump_json(report["pose"]) + "\n", encoding="utf-8")
    if ns.metrics:
        metrics = {k: v for k, v in report.items() if k != "pose"}
        write_metrics_json(ns.metrics, metrics)
    if ns.svg:
        if svg is None:
            raise InputFormatError("service response carried no SVG render")
        Path(ns.svg).write_text(svg, encoding="utf-8")
    print(
        f"pose estimated at frame {report['estimate_frame']} "
        f"from {report['pose']['point_count']} landmarks -> {ns.out}"
    )
    return 0


def _locate_in_process(
    ns: argparse.Namespace, cfg: LocatorConfig
) -> tuple[dict, str | None]:
    if ns.simulate is not None:
        source: FilesSource | SimulateSource = SimulateSource.from_spec(
            load_scene_spec(ns.simulate)
        )
        scene = source.scene
    else:
        source = FilesSource(
            cloud=load_cloud_csv(ns.cloud),
            cameras=load_cameras(ns.cameras),
            detector=FileDetector(load_detections(ns.detections)),
        )
        scene = None
    result = run_pipeline(source, cfg, want_svg=ns.svg is not None)
    return build_report(result, cfg, scene), result.svg


def _locate_via_server(
    ns: argparse.Namespace, cfg: LocatorConfig
) -> tuple[dict, str | None]:
    import httpx

    from .fileio import camera_to_obj, detection_to_obj

    want_svg = ns.svg is not None
    if ns.simulate is not None:
        import json

        spec_text = Path(ns.simulate).read_text(encoding="utf-8")
        try:
            spec_obj = json.loads(spec_text)
        except json.JSONDecodeError as exc:
            raise InputFormatError(f"invalid JSON in {ns.simulate}: {exc}") from exc
        payload = {"spec": spec_obj, "config": _cfg_obj(cfg), "want_svg": want_svg}
        url = f"{ns.server.rstrip('/')}/simulate"
    else:
        cloud = load_cloud_csv(ns.cloud)
        cameras = load_cameras(ns.cameras)
        detections = load_detections(ns.detections)
        payload = {
            "points": [
                {"id": int(i), "x": p.x, "y": p.y, "z": p.z} for i, p in cloud.pairs()
            ],
            "cameras": [camera_to_obj(rig) for rig in cameras],
            "detections": [detection_to_obj(d) for d in detections],
            "config": _cfg_obj(cfg),
            "want_svg": want_svg,
        }
        url = f"{ns.server.rstrip('/')}/locate"
    try:
        response = httpx.post(url, json=payload, timeout=60.0)
    except httpx.HTTPError as exc:
        raise InputFormatError(f"cannot reach service at {ns.server}: {exc}") from exc
    if response.status_code == 409:
        body = response.json()
        return (
            {"pose": None, "max_accumulated": body.get("detail", {}).get("max_accumulated", 0)},
            None,
        )
    if response.status_code == 422:
        raise DegenerateCloudError(str(response.json().get("detail", "degenerate cloud")))
    if response.status_code != 200:
        raise InputFormatError(f"service error {response.status_code}: {response.text}")
    body = response.json()
    return body["report"], body.get("svg")


def _cfg_obj(cfg: LocatorConfig) -> dict:
    return {
        "threshold_n": cfg.threshold_n,
        "class_label": cfg.class_label,
        "isotropy_ratio": cfg.isotropy_ratio,
        "sign_policy": cfg.sign_policy,
    }


def _cmd_serve(ns: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=ns.host, port=ns.port)
    return 0


def _cmd_emit_fixtures(ns: argparse.Namespace) -> int:
    spec = load_scene_spec(ns.simulate)
    scene = SimulatedScene(spec)
    out = Path(ns.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_cloud_csv(out / "cloud.csv", scene.cloud)
    write_cameras_dir(out / "cameras", spec.trajectory)
    detector = scene.oracle_detector()
    detections = [d for f in range(len(spec.trajectory)) for d in detector.detect(f)]
    write_detections_json(out / "detections.json", detections)
    print(
        f"wrote {len(scene.cloud)} landmarks, {len(spec.trajectory)} cameras, "
        f"{len(detections)} detections to {out}"
    )
    return 0


def _cmd_bench(ns: argparse.Namespace) -> int:
    from .bench import run_benchmark

    print(dump_json(run_benchmark(n_points=ns.points, repeats=ns.repeats)))
    return 0


if __name__ == "__main__":
    sys.exit(main())
