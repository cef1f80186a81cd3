"""HTTP facade over the AHP engine and the pipeline.

Single-process service: judgment matrices are evaluated synchronously,
scenario runs execute on an internal single-worker queue so long runs never
block the evaluate endpoint. Configs may only reference files under the
configured data root.
"""
from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.responses import JSONResponse

from . import ahp, mcda, pipeline
from .config import ConfigError, ScenarioConfig, parse_config
from .grid import GridError
from .kriging import KrigingError
from .mcda import SuitabilityResult
from .reclass import RuleError


@dataclass
class SessionScenario:
    id: str
    config: ScenarioConfig
    status: str = "draft"  # draft -> running -> done | failed
    result: SuitabilityResult | None = None
    error: str | None = None
    workdir: Path | None = None


def _summary(s: SessionScenario) -> dict:
    out = {"id": s.id, "status": s.status}
    if s.status == "failed":
        out["error"] = s.error
    if s.status == "done" and s.result is not None:
        a = s.result.areas
        out["result"] = {
            "total_km2": a.total_km2,
            "total_exploitable_km2": a.total_exploitable_km2,
            "classes": {
                str(k): {
                    "label": mcda.CLASS_LABELS[k],
                    "full_km2": a.full_km2[k],
                    "exploitable_km2": a.exploitable_km2[k],
                    "full_pct": a.full_pct[k],
                    "exploitable_pct": a.exploitable_pct[k],
                    "gp_full_twh": s.result.gp_full_twh[k],
                    "gp_exploitable_twh": s.result.gp_exploitable_twh[k],
                }
                for k in sorted(a.full_km2)
            },
            "capacity_mw_per_km2": s.result.capacity_mw_per_km2,
        }
    return out


def create_app(data_root: Path, max_workers: int = 1) -> FastAPI:
    data_root = Path(data_root).resolve()
    app = FastAPI(title="solarsite service")
    sessions: dict[str, SessionScenario] = {}
    lock = threading.Lock()
    executor = ThreadPoolExecutor(max_workers=max_workers)

    @app.post("/api/ahp/evaluate")
    def evaluate_matrix(body: list[list[float | str]]):
        if not body or any(len(row) != len(body) for row in body):
            raise HTTPException(400, "body must be a square matrix (array of arrays)")
        if len(body) > ahp.MAX_N:
            raise HTTPException(413, f"matrix size {len(body)} exceeds the limit {ahp.MAX_N}")
        try:
            rows = [[ahp.parse_entry(e) for e in row] for row in body]
        except (ValueError, ZeroDivisionError) as e:
            raise HTTPException(400, f"unparseable matrix entry: {e}") from None
        try:
            w, report = ahp.evaluate(rows)
        except ahp.MatrixValidationError as e:
            raise HTTPException(400, detail=e.violations) from None
        # floats serialize with full precision (repr gives 17 significant digits)
        return {
            "weights": [float(x) for x in w],
            "lambda_max": report.lambda_max,
            "ci": report.ci,
            "ri": report.ri,
            "cr": report.cr,
            "consistent": report.consistent,
        }

    @app.post("/api/scenarios", status_code=201)
    def create_scenario(body: dict):
        try:
            config = parse_config(body)
            # validate references and weights now so bad configs fail at create
            pipeline.load_scenario(config, base_dir=data_root, data_root=data_root)
        except (ConfigError, ahp.AhpError, mcda.McdaError, GridError,
                KrigingError, RuleError) as e:
            raise HTTPException(422, str(e)) from None
        sid = uuid.uuid4().hex
        with lock:
            sessions[sid] = SessionScenario(sid, config)
        return {"id": sid}

    def _get(sid: str) -> SessionScenario:
        with lock:
            s = sessions.get(sid)
        if s is None:
            raise HTTPException(404, f"unknown scenario {sid}")
        return s

    def _execute(s: SessionScenario):
        try:
            workdir = data_root / "_runs" / s.id
            result = pipeline.run(s.config, workdir, base_dir=data_root,
                                  data_root=data_root)
            with lock:
                s.result = result
                s.workdir = workdir
                s.status = "done"
        except Exception as e:  # noqa: BLE001 - boundary, reported via status
            with lock:
                s.error = str(e)
                s.status = "failed"

    @app.post("/api/scenarios/{sid}/run", status_code=202)
    def run_scenario(sid: str):
        s = _get(sid)
        with lock:
            if s.status == "running":
                raise HTTPException(409, "run already in progress")
            if s.status == "done":
                raise HTTPException(409, "scenario already completed")
            s.status = "running"
        executor.submit(_execute, s)
        return {"id": sid, "status": "running"}

    @app.get("/api/scenarios/{sid}")
    def get_scenario(sid: str):
        return _summary(_get(sid))

    @app.get("/api/scenarios/{sid}/map")
    def get_map(sid: str):
        s = _get(sid)
        if s.status != "done" or s.result is None:
            raise HTTPException(404, f"scenario {sid} has no result (status {s.status})")
        return Response(pipeline.render_class_map(s.result.classes), media_type="image/png")

    @app.get("/api/scenarios/{sid}/sensitivity")
    def get_sensitivity(sid: str):
        s = _get(sid)
        if s.status != "done" or s.result is None:
            raise HTTPException(404, f"scenario {sid} has no result (status {s.status})")
        return {
            "rows": [
                {"excluded": r.excluded,
                 "delta_pct": {str(k): v for k, v in r.delta_pct.items()}}
                for r in s.result.sensitivity
            ]
        }

    return app
