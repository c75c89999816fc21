"""Stateless JSON-over-HTTP facade over the graph engine.

Every request is self-contained (graph text or JSON plus action
parameters) and every response is a pure function of the request, so any
number of workers can serve concurrently. Simulation and estimation stay
CLI-only to keep request latency bounded.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .actions import ACTIONS, run_action
from .errors import DswigError


def _error_response(status: int, payload: dict) -> JSONResponse:
    return JSONResponse(status_code=status, content={"ok": False, "error": payload})


def create_app(static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="dswig", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/api/health")
    async def health() -> dict:
        return {"ok": True}

    @app.get("/api/actions")
    async def actions_index() -> dict:
        return {"ok": True, "result": {"actions": sorted(ACTIONS)}}

    @app.post("/api/{action}")
    async def dispatch(action: str, request: Request):
        body = await request.body()
        try:
            params = json.loads(body or b"{}")
        except json.JSONDecodeError as exc:
            return _error_response(
                400,
                {
                    "code": "bad_json",
                    "message": exc.msg,
                    "location": {"line": exc.lineno, "col": exc.colno},
                },
            )
        if not isinstance(params, dict):
            return _error_response(400, {"code": "bad_request", "message": "body must be a JSON object"})
        if action not in ACTIONS:
            return _error_response(404, {"code": "unknown_action", "message": f"unknown action {action!r}"})
        try:
            result = run_action(action, params)
        except DswigError as exc:
            return _error_response(400, exc.to_json())
        except KeyError as exc:
            return _error_response(400, {"code": "bad_request", "message": f"missing parameter {exc}"})
        return {"ok": True, "result": result}

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(port: int = 8787, host: str = "127.0.0.1", static_dir: str | None = None) -> None:
    """Run the facade until interrupted."""
    import uvicorn

    uvicorn.run(create_app(static_dir), host=host, port=port, log_level="warning")
