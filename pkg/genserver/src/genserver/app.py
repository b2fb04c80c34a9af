"""HTTP surface. Two endpoints, manual validation.

The request body is parsed by hand instead of through a pydantic model:
clients expect every error as {"error": "<message>"} with a 4xx/5xx code,
and framework-generated validation responses use a different shape.
"""

import asyncio
import threading

from fastapi import FastAPI, Request
from fastapi.concurrency import run_in_threadpool
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .config import ServerConfig
from .stub import load_generator


class BadRequest(Exception):
    pass


def _field(body, name, default, kind, check, what):
    v = body.get(name, default)
    if v is None and name == "seed":
        return None
    # bool is an int subclass; reject it explicitly for integer fields
    if not isinstance(v, kind) or isinstance(v, bool):
        raise BadRequest(f"{name} must be {what}")
    if not check(v):
        raise BadRequest(f"{name} out of range: {v!r}")
    return v


def parse_generate_request(body, defaults):
    """Validate a /generate body, filling omitted fields from defaults."""
    if not isinstance(body, dict):
        raise BadRequest("request body must be a JSON object")
    text = body.get("text")
    if not isinstance(text, str) or not text.strip():
        raise BadRequest("text must be a non-empty string")
    num_return = _field(body, "num_return", defaults.num_return,
                        int, lambda v: v >= 1, "a positive integer")
    top_p = _field(body, "top_p", defaults.top_p,
                   (int, float), lambda v: 0.0 < v <= 1.0, "a number in (0, 1]")
    max_length = _field(body, "max_length", defaults.max_length,
                        int, lambda v: v >= 1, "a positive integer")
    seed = body.get("seed", defaults.seed)
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise BadRequest("seed must be an integer or null")
    return text, num_return, float(top_p), max_length, seed


def create_app(config: ServerConfig | None = None) -> FastAPI:
    config = config or ServerConfig()
    app = FastAPI(title="genserver", docs_url=None, redoc_url=None,
                  openapi_url=None)
    app.state.config = config
    app.state.generator = load_generator(config)
    # bounded request concurrency; the model itself is single-file behind a lock
    app.state.gate = asyncio.Semaphore(config.max_concurrent)
    app.state.model_lock = threading.Lock()

    @app.get("/health")
    async def health():
        return {"status": "ok"}

    @app.post("/generate")
    async def generate(request: Request):
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(status_code=400,
                                content={"error": "request body is not valid JSON"})
        try:
            text, num_return, top_p, max_length, seed = parse_generate_request(
                body, config.defaults
            )
        except BadRequest as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})

        def run():
            with app.state.model_lock:
                return app.state.generator.generate(
                    text, num_return, top_p, max_length, seed
                )

        async with app.state.gate:
            try:
                candidates = await run_in_threadpool(run)
            except Exception as exc:
                return JSONResponse(status_code=500,
                                    content={"error": f"generation failed: {exc}"})
        return {"candidates": candidates}

    @app.exception_handler(StarletteHTTPException)
    async def protocol_error(request, exc):
        # unknown paths, wrong methods: keep the error shape uniform
        return JSONResponse(status_code=exc.status_code,
                            content={"error": str(exc.detail)})

    return app
