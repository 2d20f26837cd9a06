"""Tiny threaded HTTP server exposing in-process providers on the wire protocol.

Used to exercise the live-mode HTTP clients against a real socket and to
stand in for a hosted completion API when testing full live runs. Failure
injection (status sequences per path) covers the retry policy.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from kgrank.errors import KgRankError
from kgrank.providers.base import Completer, CompletionRequest, CrossScorer, Embedder


class MockProviderServer:
    def __init__(
        self,
        embedder: Embedder | None = None,
        scorer: CrossScorer | None = None,
        completer: Completer | None = None,
        port: int = 0,
    ):
        self._embedder = embedder
        self._scorer = scorer
        self._completer = completer
        self._failures: dict[str, deque[int]] = {}
        self.requests_seen: list[str] = []
        handler = self._make_handler()
        self._httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def fail_next(self, path: str, statuses: list[int]) -> None:
        """Queue HTTP statuses to return for the next calls to `path`."""
        self._failures.setdefault(path, deque()).extend(statuses)

    def close(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _make_handler(self):
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):  # keep test output quiet
                pass

            def do_POST(self):
                server.requests_seen.append(self.path)
                queue = server._failures.get(self.path)
                if queue:
                    status = queue.popleft()
                    self._reply(status, {"error": f"injected {status}"})
                    return
                try:
                    length = int(self.headers.get("Content-Length", "0"))
                    body = json.loads(self.rfile.read(length) or b"{}")
                except (ValueError, json.JSONDecodeError):
                    self._reply(400, {"error": "malformed JSON body"})
                    return
                try:
                    self._dispatch(body)
                except KgRankError as exc:
                    self._reply(400, {"error": str(exc)})
                except Exception as exc:  # noqa: BLE001 - surface as 500
                    self._reply(500, {"error": str(exc)})

            def _dispatch(self, body: dict):
                if self.path == "/v1/embed" and server._embedder is not None:
                    vectors = server._embedder.embed(list(body["texts"]))
                    self._reply(
                        200,
                        {
                            "dim": vectors[0].dim if vectors else 0,
                            "vectors": [list(v.components) for v in vectors],
                        },
                    )
                elif self.path == "/v1/cross_score" and server._scorer is not None:
                    scores = server._scorer.cross_score(
                        body["query"], list(body["passages"])
                    )
                    self._reply(200, {"scores": scores})
                elif self.path == "/v1/complete" and server._completer is not None:
                    req = CompletionRequest(
                        prompt=body["prompt"],
                        temperature=float(body.get("temperature", 0.0)),
                        max_tokens=int(body.get("max_tokens", 1024)),
                        model_id=str(body.get("model", "default")),
                    )
                    self._reply(200, {"text": server._completer.complete(req)})
                else:
                    self._reply(404, {"error": f"no handler for {self.path}"})

            def _reply(self, status: int, payload: dict):
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        return Handler
