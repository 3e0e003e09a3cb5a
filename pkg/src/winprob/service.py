"""Read-only HTTP prediction service on the standard-library server.

Exposes three JSON endpoints against one immutable model loaded at
startup:

    GET  /v1/health                     -> {"status": "ok", "model_type": ...}
    POST /v1/winprob   {GameState}      -> {"p_home": ..., "model_type": ...}
    POST /v1/whatif    {base, variants} -> base probability plus per-variant
                                           probabilities and deltas

The model never changes after startup, so concurrent requests need no
locking; reload happens by restarting the process.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .core import GameState
from .errors import SchemaError, ValidationError
from .models import load_model, predict

MAX_BODY_BYTES = 1 << 20
MAX_VARIANTS = 200


def _winprob_response(model, body: dict) -> dict:
    state = GameState.from_dict(body)
    return {"p_home": predict(model, state), "model_type": model.model_type}


def _whatif_response(model, body: dict) -> dict:
    if not isinstance(body, dict) or "base" not in body or "variants" not in body:
        raise SchemaError("body must carry 'base' and 'variants'")
    if not isinstance(body["variants"], list):
        raise SchemaError("'variants' must be a list of game states")
    if len(body["variants"]) > MAX_VARIANTS:
        raise ValidationError(f"at most {MAX_VARIANTS} variants per request")
    base = GameState.from_dict(body["base"])
    base_p = predict(model, base)
    variants = []
    for i, raw in enumerate(body["variants"]):
        try:
            p = predict(model, GameState.from_dict(raw))
        except (ValidationError, SchemaError) as exc:
            raise type(exc)(f"variants[{i}]: {exc}")
        variants.append({"p_home": p, "delta": p - base_p})
    return {"base_p_home": base_p, "variants": variants, "model_type": model.model_type}


class _Handler(BaseHTTPRequestHandler):
    server_version = "winprob"
    model = None  # bound per server in make_server

    def log_message(self, fmt, *args):  # quiet by default; tests capture status codes
        pass

    def _send(self, status: int, payload: dict) -> None:
        raw = json.dumps(payload, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)

    def _fail(self, status: int, message: str) -> None:
        self._send(status, {"error": {"message": message}})

    def _read_body(self) -> Optional[dict]:
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            self._fail(400, "bad Content-Length header")
            return None
        if length <= 0:
            self._fail(400, "request body required")
            return None
        if length > MAX_BODY_BYTES:
            self._fail(413, f"body exceeds {MAX_BODY_BYTES} bytes")
            return None
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            self._fail(400, f"invalid JSON: {exc}")
            return None
        if not isinstance(body, dict):
            self._fail(400, "request body must be a JSON object")
            return None
        return body

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, {"status": "ok", "model_type": self.model.model_type})
        elif self.path in ("/v1/winprob", "/v1/whatif"):
            self._fail(405, "use POST")
        else:
            self._fail(404, f"unknown path {self.path}")

    def do_POST(self):
        if self.path not in ("/v1/winprob", "/v1/whatif"):
            self._fail(404 if self.path != "/v1/health" else 405, f"no POST handler for {self.path}")
            return
        body = self._read_body()
        if body is None:
            return
        try:
            if self.path == "/v1/winprob":
                self._send(200, _winprob_response(self.model, body))
            else:
                self._send(200, _whatif_response(self.model, body))
        except (ValidationError, SchemaError) as exc:
            self._fail(400, str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            self._fail(500, f"internal error: {type(exc).__name__}")


def make_server(model, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    """Build (but do not start) the threaded server bound to the model."""
    handler = type("BoundHandler", (_Handler,), {"model": model})
    return ThreadingHTTPServer((host, port), handler)


def serve(model_path, host: str = "127.0.0.1", port: int = 8080) -> None:
    """Load the model and serve until interrupted; refuses to start when the
    model file is missing or malformed."""
    model = load_model(model_path)
    server = make_server(model, host, port)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
