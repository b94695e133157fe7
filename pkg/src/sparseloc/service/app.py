"""FastAPI application wrapping the locator pipeline.

Error mapping: malformed or semantically invalid inputs give 400,
a threshold never reached gives 409 (the run finished, the data just
never supported an estimate), and a degenerate cloud gives 422.  Batch
endpoints (/locate, /simulate) are stateless; /sessions hosts incremental
accumulation for live clients, re-estimating as new frames arrive so the
align-prev sign policy can keep axes temporally coherent.
"""

from __future__ import annotations

import itertools
import threading

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..detection import FileDetector, NdcBox, normalize_box, select_detection
from ..camera import NdcPoint, project_cloud_arrays
from ..errors import DegenerateCloudError, SparselocError
from ..fileio import scene_spec_from_obj
from ..locator import (
    FilteredSet,
    LocatorConfig,
    TargetPose,
    accumulate,
    estimate_pose,
    filter_in_box_arrays,
)
from ..pipeline import FilesSource, SimulateSource, build_report, run_pipeline
from ..render import render_debug_svg
from .models import (
    ConfigModel,
    FramePayload,
    LocateRequest,
    LocateResponse,
    PoseModel,
    RenderRequest,
    ReportModel,
    SessionCreated,
    SessionFrameResponse,
    SimulateRequest,
    points_to_cloud,
)

__all__ = ["create_app"]


class _Session:
    """Accumulation state for one live client."""

    def __init__(self, cfg: LocatorConfig) -> None:
        self.cfg = cfg
        self.state = FilteredSet.empty()
        self.pose: TargetPose | None = None
        self.next_frame = 0
        self.lock = threading.Lock()


def create_app() -> FastAPI:
    app = FastAPI(title="sparseloc", version=__version__)
    sessions: dict[str, _Session] = {}
    session_ids = itertools.count(1)
    sessions_lock = threading.Lock()

    @app.exception_handler(DegenerateCloudError)
    async def _degenerate(request: Request, exc: DegenerateCloudError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(SparselocError)
    async def _bad_input(request: Request, exc: SparselocError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/locate", response_model=LocateResponse)
    def locate(req: LocateRequest) -> LocateResponse:
        source = FilesSource(
            cloud=points_to_cloud(req.points),
            cameras=[c.to_rig(f"cameras[{i}]") for i, c in enumerate(req.cameras)],
            detector=FileDetector([d.to_detection() for d in req.detections]),
        )
        cfg = req.config.to_config()
        result = run_pipeline(source, cfg, want_svg=req.want_svg)
        _raise_if_not_ready(result.pose, result.max_accumulated, cfg)
        report = build_report(result, cfg)
        return LocateResponse(report=ReportModel.model_validate(report), svg=result.svg)

    @app.post("/simulate", response_model=LocateResponse)
    def simulate(req: SimulateRequest) -> LocateResponse:
        source = SimulateSource.from_spec(scene_spec_from_obj(req.spec, "spec"))
        cfg = req.config.to_config()
        result = run_pipeline(source, cfg, want_svg=req.want_svg)
        _raise_if_not_ready(result.pose, result.max_accumulated, cfg)
        report = build_report(result, cfg, source.scene)
        return LocateResponse(report=ReportModel.model_validate(report), svg=result.svg)

    @app.post("/render/svg")
    def render(req: RenderRequest) -> dict:
        box = None
        if req.box is not None:
            box = NdcBox(req.box.x_min, req.box.y_min, req.box.x_max, req.box.y_max)
        points = [NdcPoint(p.x, p.y, p.z, p.source_index) for p in req.points]
        return {"svg": render_debug_svg(req.frame_id, points, box, req.filtered)}

    @app.post("/sessions", response_model=SessionCreated)
    def create_session(config: ConfigModel) -> SessionCreated:
        session = _Session(config.to_config())
        with sessions_lock:
            sid = str(next(session_ids))
            sessions[sid] = session
        return SessionCreated(session_id=sid)

    @app.post("/sessions/{sid}/frames", response_model=SessionFrameResponse)
    def push_frame(sid: str, payload: FramePayload) -> SessionFrameResponse:
        session = _get_session(sessions, sid)
        with session.lock:
            frame_id = session.next_frame
            session.next_frame += 1
            cloud = points_to_cloud(payload.points)
            detections = [
                d.to_detection(frame_id) for d in payload.detections
            ]
            selected = select_detection(detections, session.cfg.class_label)
            if selected is not None and len(cloud) > 0:
                ndc, indices = project_cloud_arrays(
                    cloud.positions, payload.camera.to_rig("camera")
                )
                fresh = filter_in_box_arrays(
                    ndc, indices, normalize_box(selected.box), cloud, frame_id
                )
                session.state = accumulate(session.state, fresh)
            is_ready = len(session.state) >= session.cfg.threshold_n
            if is_ready:
                session.pose = estimate_pose(
                    session.state, session.cfg, previous=session.pose
                )
            pose = session.pose
        return SessionFrameResponse(
            frame=frame_id,
            accumulated=len(session.state),
            ready=is_ready,
            pose=PoseModel.model_validate(pose.to_dict()) if pose else None,
        )

    @app.get("/sessions/{sid}/pose", response_model=PoseModel)
    def session_pose(sid: str) -> PoseModel:
        session = _get_session(sessions, sid)
        with session.lock:
            pose = session.pose
            accumulated = len(session.state)
        if pose is None:
            raise HTTPException(
                status_code=409,
                detail={
                    "message": "threshold not reached",
                    "max_accumulated": accumulated,
                },
            )
        return PoseModel.model_validate(pose.to_dict())

    @app.delete("/sessions/{sid}")
    def delete_session(sid: str) -> dict:
        with sessions_lock:
            if sessions.pop(sid, None) is None:
                raise HTTPException(status_code=404, detail=f"no session {sid}")
        return {"deleted": sid}

    return app


def _get_session(sessions: dict[str, _Session], sid: str) -> _Session:
    session = sessions.get(sid)
    if session is None:
        raise HTTPException(status_code=404, detail=f"no session {sid}")
    return session


def _raise_if_not_ready(pose, max_accumulated: int, cfg: LocatorConfig) -> None:
    if pose is None:
        raise HTTPException(
            status_code=409,
            detail={
                "message": f"accumulated {max_accumulated} landmarks, "
                f"threshold is {cfg.threshold_n}",
                "max_accumulated": max_accumulated,
            },
        )
