"""HTTP JSON API over the engine and job manager.

Every error response is {"code": ..., "message": ...}; stack traces never
leave the process. The web console (if built) is served at /.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .engine import Engine
from .errors import EngineError
from .jobs import JobManager, JobNotFound, JobStateError, JobStatus, PipelineJob
from .model import Relation

DEFAULT_PAGE_SIZE = 1000


class QueryRequest(BaseModel):
    sql: str
    workers: Optional[int] = None


class ShortestPathsRequest(BaseModel):
    table: str
    src_col: str
    dst_col: str
    source: Union[int, str]
    weight_col: Optional[str] = None


class ComponentsRequest(BaseModel):
    table: str
    src_col: str
    dst_col: str
    weight_col: Optional[str] = None


class PipelineSubmit(BaseModel):
    ml_config: str
    db_config: str


def relation_json(relation: Relation, page_size: Optional[int] = None) -> dict:
    rows = relation.all_rows()
    total = len(rows)
    if page_size is not None:
        rows = rows[:page_size]
    return {
        "columns": [
            {"name": c.name, "type": c.ctype.value} for c in relation.schema.columns
        ],
        "rows": [list(row) for row in rows],
        "total_rows": total,
    }


def job_json(job: PipelineJob, page_size: int) -> dict:
    payload = {
        "id": job.id,
        "status": job.status.value,
        "submitted_at": job.submitted_at,
        "finished_at": job.finished_at,
        "error": job.error,
        "error_code": job.error_code,
        "result": None,
    }
    if job.status is JobStatus.SUCCEEDED and job.result is not None:
        body = relation_json(job.result.result, page_size)
        body["page_size"] = page_size
        body["branches_run"] = sorted(job.result.branches_run)
        body["timings_ms"] = job.result.timings_ms
        body["model_summary"] = job.result.model_summary
        payload["result"] = body
    return payload


def create_app(
    engine: Engine,
    jobs: Optional[JobManager] = None,
    frontend_dir: Optional[Path] = None,
    page_size: int = DEFAULT_PAGE_SIZE,
) -> FastAPI:
    app = FastAPI(title="polyquery", docs_url=None, redoc_url=None)
    jobs = jobs or JobManager(engine)

    @app.exception_handler(EngineError)
    async def engine_error_handler(_request: Request, exc: EngineError):
        status = 500
        if isinstance(exc, JobNotFound):
            status = 404
        elif isinstance(exc, JobStateError):
            status = 409
        elif isinstance(exc, EngineError):
            status = 400
        return JSONResponse(status_code=status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"code": "validation", "message": str(exc)})

    @app.exception_handler(Exception)
    async def internal_handler(_request: Request, _exc: Exception):
        return JSONResponse(
            status_code=500, content={"code": "internal", "message": "internal server error"}
        )

    @app.get("/tables")
    def list_tables():
        return {
            "tables": [
                {
                    "table_name": e.table_name,
                    "source_path": e.source_path,
                    "format": e.format,
                    "delimiter": e.delimiter,
                    "has_header": e.has_header,
                    "columns": [
                        {"name": c.name, "type": c.ctype.value} for c in e.schema.columns
                    ],
                }
                for e in engine.list_tables()
            ]
        }

    @app.post("/query")
    def run_query(request: QueryRequest):
        relation = engine.query(request.sql, workers=request.workers)
        return relation_json(relation)

    @app.post("/graph/shortest-paths")
    def graph_shortest_paths(request: ShortestPathsRequest):
        relation = engine.graph_shortest_paths(
            request.table,
            request.src_col,
            request.dst_col,
            request.source,
            weight_col=request.weight_col,
        )
        return relation_json(relation)

    @app.post("/graph/components")
    def graph_components(request: ComponentsRequest):
        relation = engine.graph_components(
            request.table, request.src_col, request.dst_col, weight_col=request.weight_col
        )
        return relation_json(relation)

    @app.post("/pipelines", status_code=201)
    def submit_pipeline(request: PipelineSubmit):
        job = jobs.submit(request.ml_config, request.db_config)
        return {"id": job.id, "status": job.status.value}

    @app.get("/pipelines/{job_id}")
    def get_pipeline(job_id: str):
        return job_json(jobs.get(job_id), page_size)

    @app.post("/pipelines/{job_id}/cancel")
    def cancel_pipeline(job_id: str):
        return job_json(jobs.cancel(job_id), page_size)

    @app.get("/pipelines/{job_id}/result.csv")
    def pipeline_csv(job_id: str):
        csv_text = jobs.export_csv(job_id)
        return Response(
            content=csv_text,
            media_type="text/csv",
            headers={"Content-Disposition": f'attachment; filename="{job_id}.csv"'},
        )

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=Path(frontend_dir), html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def console():
            return RedirectResponse(url="/ui/")

    return app
