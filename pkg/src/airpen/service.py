"""Streaming gesture service: websocket wire protocol over a shared model.

One websocket connection carries one drawing session. Clients send
tagged JSON objects (start, point, end, config) and receive started,
trail, prediction, and error replies. The classifier model is loaded
once and shared read-only across sessions; each session's messages are
handled strictly in arrival order by its connection task.
"""
from __future__ import annotations

import itertools
import json
import logging
import os
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .classifiers import ClassifierModel, load_model
from .errors import TooShortStrokeError
from .gestures import CLASS_NAMES
from .streaming import (DEFAULT_THRESHOLD, GestureEvent, SegmenterConfig,
                        SegmentMode, Session)

log = logging.getLogger("airpen.service")

# Client coordinates are normalized to [0,1]^2; sessions run in a fixed
# virtual frame so pixel-unit defaults (dwell epsilon) keep their meaning.
VIRTUAL_FRAME = 1000.0
TRAIL_ECHO_MS = 33.0

CLIENT_TYPES = {"start", "point", "end", "config"}


def _error(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


def _prediction_reply(event: GestureEvent) -> dict:
    return {
        "type": "prediction",
        "probs": [float(p) for p in event.prediction.probs],
        "decision": event.decision_name,
        "confidence": float(event.prediction.confidence),
        "latency_ms": float(event.latency_ms),
    }


@dataclass
class _Entry:
    session: Session
    trail_pending: list[list[float]] = field(default_factory=list)
    last_echo: float = 0.0


class SessionRegistry:
    """Open sessions keyed by connection; ids unique for the process life."""

    def __init__(self, model: ClassifierModel,
                 config: SegmenterConfig = SegmenterConfig()):
        self.model = model
        self.default_config = config
        self._entries: dict[str, _Entry] = {}
        self._counter = itertools.count(1)

    def __len__(self) -> int:
        return len(self._entries)

    def open(self, conn_id: str, session_hint: str = "") -> str:
        hint = "".join(c for c in str(session_hint) if c.isalnum())[:16]
        session_id = f"{hint or 'session'}-{next(self._counter)}"
        session = Session(session_id, self.model, self.default_config,
                          frame_width=VIRTUAL_FRAME, frame_height=VIRTUAL_FRAME)
        self._entries[conn_id] = _Entry(session)
        return session_id

    def get(self, conn_id: str) -> _Entry | None:
        return self._entries.get(conn_id)

    def close(self, conn_id: str):
        self._entries.pop(conn_id, None)


def handle_message(registry: SessionRegistry, conn_id: str, msg: dict,
                   now: float | None = None) -> list[dict]:
    """Process one client message, returning the replies to send in order."""
    if now is None:
        now = time.monotonic()
    if not isinstance(msg, dict) or msg.get("type") not in CLIENT_TYPES:
        return [_error("bad-message",
                       f"unknown message type {msg.get('type') if isinstance(msg, dict) else msg!r}")]
    mtype = msg["type"]

    if mtype == "start":
        session_id = registry.open(conn_id, msg.get("session_hint", ""))
        return [{"type": "started", "session_id": session_id,
                 "classes": list(CLASS_NAMES)}]

    entry = registry.get(conn_id)
    if entry is None:
        return [_error("no-session", f"{mtype} before start")]
    session = entry.session

    if mtype == "point":
        try:
            x = float(msg["x"])
            y = float(msg["y"])
            t_ms = int(msg["t_ms"])
        except (KeyError, TypeError, ValueError):
            return [_error("bad-message", "point needs numeric x, y, t_ms")]
        replies: list[dict] = []
        try:
            event = session.push_point(x * VIRTUAL_FRAME, y * VIRTUAL_FRAME, t_ms)
        except Exception as e:
            return [_error("bad-message", str(e))]
        entry.trail_pending.append([x, y])
        if (now - entry.last_echo) * 1000.0 >= TRAIL_ECHO_MS:
            replies.append({"type": "trail", "points": entry.trail_pending})
            entry.trail_pending = []
            entry.last_echo = now
        if event is not None:
            replies.append(_prediction_reply(event))
        return replies

    if mtype == "end":
        entry.trail_pending = []
        try:
            event = session.end_stroke()
        except TooShortStrokeError as e:
            return [_error("too-short", str(e))]
        return [_prediction_reply(event)]

    # config: live threshold/mode update, acknowledged by echoing back
    threshold = msg.get("threshold", session.config.confidence_threshold)
    mode = msg.get("mode", session.config.mode.value)
    try:
        new_config = SegmenterConfig(
            mode=SegmentMode(mode),
            dwell_ms=session.config.dwell_ms,
            move_epsilon=session.config.move_epsilon,
            min_points=session.config.min_points,
            confidence_threshold=float(threshold))
    except (ValueError, TypeError) as e:
        return [_error("bad-message", f"bad config: {e}")]
    session.config = new_config
    return [{"type": "config", "threshold": new_config.confidence_threshold,
             "mode": new_config.mode.value}]


def create_app(model: ClassifierModel,
               config: SegmenterConfig = SegmenterConfig(),
               static_dir: str | None = None):
    """Build the ASGI app: websocket endpoint at /ws, static UI at /."""
    app = FastAPI(title="airpen")
    registry = SessionRegistry(model, config)
    app.state.registry = registry
    conn_ids = itertools.count(1)

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        conn_id = f"conn-{next(conn_ids)}"
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    msg = None
                for reply in handle_message(registry, conn_id, msg):
                    await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            registry.close(conn_id)

    if static_dir is None:
        candidate = os.path.join(os.path.dirname(__file__), "..", "..",
                                 "frontend", "dist")
        candidate = os.path.abspath(candidate)
        if os.path.isdir(candidate):
            static_dir = candidate
    if static_dir and os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="frontend")
    return app


def run_service(host: str, port: int, model_path: str,
                threshold: float = DEFAULT_THRESHOLD,
                mode: str = "manual", static_dir: str | None = None):
    import uvicorn

    model = load_model(model_path)
    config = SegmenterConfig(mode=SegmentMode(mode),
                             confidence_threshold=threshold)
    app = create_app(model, config, static_dir)
    log.info("serving %s model on %s:%d", model.kind, host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
