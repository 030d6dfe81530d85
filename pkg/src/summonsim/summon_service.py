"""HTTP face of the vehicle: summon endpoint, telemetry stream, e-stop.

POST /summon with {"latitude":<deg>,"longitude":<deg>} queues exactly one
PointAndGo publication; GET /telemetry streams newline-delimited JSON frames;
POST /estop toggles the physical e-stop (optionally resetting the latches).

The HTTP layer serves concurrently but never touches the bus directly: every
effect goes through a single injection queue the launcher drains at tick
boundaries, keeping logical-clock runs deterministic. Plain HTTP, no TLS --
transport security is out of scope here and must be provided by the
deployment (the default bind is loopback).
"""

from __future__ import annotations

import json
import logging
import queue
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from . import messages as m
from .geodesy import GeodesyError, GeoPoint, wgs84_to_utm

log = logging.getLogger(__name__)

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8642  # same port the vehicle web service historically used


@dataclass(frozen=True)
class TelemetryFrame:
    sim_time: float
    vehicle: GeoPoint
    heading: float
    goal: Optional[GeoPoint]
    fix: str  # "RTK" | "SPP" | "NONE"
    estop: bool
    arrived: bool
    obstacles_nearby: bool

    def to_json(self) -> str:
        obj = {
            "sim_time": self.sim_time,
            "vehicle": {
                "latitude": self.vehicle.latitude,
                "longitude": self.vehicle.longitude,
                "heading": self.heading,
            },
            "goal": (
                None
                if self.goal is None
                else {"latitude": self.goal.latitude, "longitude": self.goal.longitude}
            ),
            "fix": self.fix,
            "estop": self.estop,
            "arrived": self.arrived,
            "obstacles_nearby": self.obstacles_nearby,
        }
        return json.dumps(obj, separators=(",", ":"))


class PointAndGoNode:
    """Translates PointAndGo messages into a UTM waypoint plus mobility mode.

    Only the "go to waypoint" mobility mode string is defined; anything else
    is logged and dropped. Both output topics are latched so a late-starting
    planner still sees the active goal.
    """

    def __init__(self, bus):
        self.bus = bus
        bus.subscribe(m.TOPIC_POINT_AND_GO, self._on_point_and_go, latched=True)

    def _on_point_and_go(self, env) -> None:
        pag: m.PointAndGo = env.payload
        if pag.mobility_mode != m.DEFAULT_MOBILITY_MODE:
            log.warning("unrecognized mobility mode %r; ignoring", pag.mobility_mode)
            return
        try:
            utm = wgs84_to_utm(GeoPoint(pag.latitude, pag.longitude))
        except GeodesyError as exc:
            log.warning("summon location unusable: %s", exc)
            return
        waypoint = m.Waypoint(
            easting=utm.easting,
            northing=utm.northing,
            utm_zone=utm.zone,
            hemisphere=utm.hemisphere,
        )
        self.bus.publish(m.TOPIC_MOBILITY_MODE, m.MobilityMode(14, 0), env.sim_time)
        self.bus.publish(m.TOPIC_WAYPOINT, waypoint, env.sim_time)


class TelemetryHub:
    """Fans frames out to every connected streaming client."""

    def __init__(self):
        self._lock = threading.Lock()
        self._clients: list[queue.Queue] = []

    def attach(self) -> queue.Queue:
        q: queue.Queue = queue.Queue()
        with self._lock:
            self._clients.append(q)
        return q

    def detach(self, q: queue.Queue) -> None:
        with self._lock:
            if q in self._clients:
                self._clients.remove(q)

    def push(self, frame: TelemetryFrame) -> None:
        with self._lock:
            clients = list(self._clients)
        for q in clients:
            q.put(frame)

    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)


class SummonService:
    """HTTP server feeding the launcher's injection queue."""

    def __init__(self, host: str = DEFAULT_HOST, port: int = DEFAULT_PORT):
        self.injections: queue.Queue = queue.Queue()
        self.hub = TelemetryHub()
        service = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"

            def log_message(self, fmt, *args):
                log.debug("http: " + fmt, *args)

            def _reply(self, code: int, obj: dict) -> None:
                body = json.dumps(obj, separators=(",", ":")).encode()
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def _read_body(self) -> str:
                length = int(self.headers.get("Content-Length", 0))
                return self.rfile.read(length).decode("utf-8", errors="replace")

            def do_POST(self):
                if self.path == "/summon":
                    service._handle_summon(self)
                elif self.path == "/estop":
                    service._handle_estop(self)
                elif self.path == "/telemetry":
                    self._reply(405, {"status": "error", "detail": "method not allowed"})
                else:
                    self._reply(404, {"status": "error", "detail": "not found"})

            def do_GET(self):
                if self.path == "/telemetry":
                    service._handle_telemetry(self)
                elif self.path in ("/summon", "/estop"):
                    self._reply(405, {"status": "error", "detail": "method not allowed"})
                else:
                    self._reply(404, {"status": "error", "detail": "not found"})

        self._server = ThreadingHTTPServer((host, port), Handler)
        self._server.daemon_threads = True
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        return self._server.server_address[1]

    @property
    def host(self) -> str:
        return self._server.server_address[0]

    def start(self) -> None:
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    # -- handlers -------------------------------------------------------------

    def _handle_summon(self, handler) -> None:
        try:
            pag = m.decode_wire(handler._read_body())
        except m.WireError as exc:
            handler._reply(400, {"status": "error", "detail": str(exc)})
            return
        self.injections.put(("summon", pag))
        handler._reply(200, {"status": "ok"})

    def _handle_estop(self, handler) -> None:
        try:
            obj = json.loads(handler._read_body())
            if not isinstance(obj, dict) or not isinstance(obj.get("on"), bool):
                raise ValueError("body must be {'on': <bool>}")
        except (json.JSONDecodeError, ValueError) as exc:
            handler._reply(400, {"status": "error", "detail": str(exc)})
            return
        self.injections.put(("estop", bool(obj["on"])))
        if obj.get("reset") is True:
            self.injections.put(("reset_estop", None))
        handler._reply(200, {"status": "ok"})

    def _handle_telemetry(self, handler) -> None:
        q = self.hub.attach()
        try:
            handler.send_response(200)
            handler.send_header("Content-Type", "application/x-ndjson")
            handler.send_header("Cache-Control", "no-cache")
            handler.send_header("Connection", "close")
            handler.end_headers()
            while True:
                frame = q.get()
                if frame is None:  # shutdown sentinel
                    break
                handler.wfile.write((frame.to_json() + "\n").encode())
                handler.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.hub.detach(q)

    def close_streams(self) -> None:
        # wake all telemetry clients so their threads exit
        with self.hub._lock:
            clients = list(self.hub._clients)
        for q in clients:
            q.put(None)
