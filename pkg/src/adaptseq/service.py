"""JSON-over-HTTP front end.

Endpoints::

    POST /students                   {"id": ..., "year": ...}  -> 201 profile
    GET  /students/{id}/plan?seed=N                             -> 200 SessionPlan
    POST /students/{id}/results      GameResult                 -> 200 TransitionReport
    GET  /students/{id}/profile                                 -> 200 profile

Errors come back as ``{"error": <code>, "message": ...}``.
"""

from __future__ import annotations

import json
import logging
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlsplit

from . import errors
from .engine import Engine, EngineConfig

log = logging.getLogger(__name__)

STATUS = {
    errors.NotFound: 404,
    errors.SessionIndexMismatch: 409,
    errors.AlreadyExists: 409,
    errors.LockContention: 503,
    errors.CorruptRecord: 500,
}
_STUDENT = re.compile(r"^/students/([^/]+)/(plan|results|profile)$")


def http_status(exc: errors.EngineError) -> int:
    for cls in type(exc).__mro__:
        if cls in STATUS:
            return STATUS[cls]
    return 422


class Handler(BaseHTTPRequestHandler):
    engine: Engine
    server_version = "adaptseq/0.1"

    def log_message(self, fmt, *args):
        log.info("%s " + fmt, self.address_string(), *args)

    def _send(self, status: int, body) -> None:
        data = (json.dumps(body, ensure_ascii=False, sort_keys=True) + "\n").encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _body(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        return json.loads(raw.decode("utf-8"))

    def _dispatch(self, method: str) -> None:
        url = urlsplit(self.path)
        try:
            if method == "POST" and url.path == "/students":
                body = self._body()
                if not isinstance(body, dict) or not isinstance(body.get("id"), str):
                    raise errors.InvalidResult("body must be an object with string 'id' and integer 'year'")
                profile = self.engine.create_student(body["id"], body.get("year"))
                return self._send(201, self.engine.profile_view(profile))
            m = _STUDENT.match(url.path)
            if m is None:
                return self._send(404, {"error": "NotFound", "message": f"no route for {url.path}"})
            student_id, action = m.groups()
            if method == "GET" and action == "plan":
                seed = parse_qs(url.query).get("seed", [None])[0]
                try:
                    seed = None if seed is None else int(seed)
                except ValueError:
                    raise errors.InvalidResult("seed must be an integer") from None
                if seed is not None and not 0 <= seed < 2**64:
                    raise errors.InvalidResult("seed must be an unsigned 64-bit integer")
                return self._send(200, self.engine.plan(student_id, seed).to_dict())
            if method == "GET" and action == "profile":
                return self._send(200, self.engine.profile_view(self.engine.load(student_id)))
            if method == "POST" and action == "results":
                body = self._body()
                if not isinstance(body, dict):
                    raise errors.InvalidResult("body must be a JSON object")
                return self._send(200, self.engine.submit(student_id, body).to_dict())
            return self._send(405, {"error": "MethodNotAllowed", "message": f"{method} {url.path}"})
        except json.JSONDecodeError as exc:
            self._send(400, {"error": "BadJSON", "message": str(exc)})
        except errors.EngineError as exc:
            self._send(http_status(exc), {"error": exc.code, "message": str(exc)})

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")


def make_server(engine: Engine, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (Handler,), {"engine": engine})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve(config: EngineConfig) -> ThreadingHTTPServer:
    """Build (but do not start) a server for ``config``; invalid config fails here."""
    engine = Engine.from_config(config)
    host, _, port = config.listen.rpartition(":")
    return make_server(engine, host or "127.0.0.1", int(port))
