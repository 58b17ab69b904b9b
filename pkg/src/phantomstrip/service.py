"""HTTP control service: one live simulated strip for interactive clients.

Every mutation (press, macro programming, clock advance) passes through a
single lock, so observable transitions form one total order and reads are
consistent snapshots. The event stream fans out through per-subscriber
bounded queues; a consumer that cannot keep up is disconnected rather than
ever stalling command processing.
"""

from __future__ import annotations

import json
import mimetypes
import os
import queue
import threading
import time
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import List, Optional, Tuple
from urllib.parse import parse_qs, urlparse

from phantomstrip import ircodec
from phantomstrip.control import (
    Action,
    CommandEvent,
    ControlUnit,
    MasterToggle,
    NoOp,
    RunMacro,
    StripState,
    ToggleOutlet,
    UnknownMacroError,
    action_from_json,
    action_to_json,
    control_config_to_json,
    program_macro,
)
from phantomstrip.ircodec import FrameKind, IrFrame
from phantomstrip.sim import (
    US_PER_S,
    EnergyLedger,
    PowerMode,
    RemotePress,
    SimConfig,
    build_report,
    effective_draw,
    integrate_interval,
)
from phantomstrip import scenario as _scenario

HEARTBEAT_SIMULATED_S = 1.0
HISTORY_FRAMES = 4096
SUBSCRIBER_QUEUE_FRAMES = 1024


class PressError(ValueError):
    """A press request the session cannot honor; carries an HTTP status."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _action_doc(action: Action) -> dict:
    if isinstance(action, NoOp):
        return {"type": "noop"}
    return action_to_json(action)


class _Subscriber:
    __slots__ = ("frames", "dead")

    def __init__(self) -> None:
        self.frames: "queue.Queue" = queue.Queue(maxsize=SUBSCRIBER_QUEUE_FRAMES)
        self.dead = False


class LiveSession:
    """The strip, its energy ledgers, and the telemetry fan-out.

    Time is either scaled wall-clock (time_factor simulated seconds per
    real second) or fully virtual, advancing only through tick().
    """

    def __init__(
        self,
        config: SimConfig,
        virtual_clock: bool = False,
        time_factor: float = 60.0,
    ):
        if time_factor <= 0:
            raise ValueError("time_factor must be positive")
        self._lock = threading.Lock()
        self._config = config
        self.virtual_clock = virtual_clock
        self.time_factor = time_factor

        self._unit = ControlUnit(
            StripState.live(config.initial_coil_on), config.button_map, config.macros
        )
        self._intents: List[PowerMode] = list(config.initial_modes)
        self._ledger = EnergyLedger(config.outlet_count)
        self._baseline_ledger = EnergyLedger(config.outlet_count)
        self._baseline_strip = StripState.live((True,) * config.outlet_count)
        self._pending = list(config.events)
        self._next_event = 0

        self._time_us = 0
        self._wall_start = time.monotonic()
        self._seq = 0
        self._history: "deque" = deque(maxlen=HISTORY_FRAMES)
        self._subscribers: List[_Subscriber] = []
        self._closed = False

    # -- time -----------------------------------------------------------

    def _wall_now_us(self) -> int:
        elapsed = time.monotonic() - self._wall_start
        return int(elapsed * self.time_factor * US_PER_S)

    def _integrate_to(self, target_us: int) -> None:
        dt = target_us - self._time_us
        if dt <= 0:
            return
        integrate_interval(
            self._ledger,
            self._unit.state,
            self._intents,
            self._config.profiles,
            dt,
            self._config.relay_coil_watts,
        )
        integrate_interval(
            self._baseline_ledger,
            self._baseline_strip,
            self._intents,
            self._config.profiles,
            dt,
            self._config.relay_coil_watts,
        )
        self._time_us = target_us

    def _advance_to(self, target_us: int) -> None:
        # Scheduled events fire as the clock passes them, each with a frame.
        while self._next_event < len(self._pending):
            event = self._pending[self._next_event]
            event_us = event.time_s * US_PER_S
            if event_us > target_us:
                break
            self._integrate_to(event_us)
            self._next_event += 1
            subject = event.subject
            if isinstance(subject, RemotePress):
                self._handle_ir(subject.frame, event_us)
            else:
                self._intents[subject.outlet] = subject.mode
            self._emit()
        self._integrate_to(target_us)

    def _advance_wall(self) -> None:
        if not self.virtual_clock:
            self._advance_to(self._wall_now_us())

    def _handle_ir(self, frame: IrFrame, timestamp_us: int):
        if frame.kind is FrameKind.DATA:
            train = ircodec.encode_frame(self._config.protocol, frame)
        else:
            train = ircodec.encode_repeat(self._config.protocol)
        outcome = ircodec.decode_train(self._config.protocol, train)
        if len(outcome.frames) != 1 or outcome.diagnostics:
            raise RuntimeError("internal codec round-trip failed for a press")
        return self._unit.handle(CommandEvent(outcome.frames[0], timestamp_us))

    # -- telemetry --------------------------------------------------------

    def _frame_doc(self) -> dict:
        state = self._unit.state
        outlets = []
        draws = []
        energized = 0
        for i in range(state.outlet_count):
            coil = state.coil[i]
            if coil:
                energized += 1
            powered = coil  # NO-wired relay: energized coil passes mains
            intent = self._intents[i]
            draw = effective_draw(self._config.profiles[i], intent, powered)
            draws.append(draw)
            outlets.append(
                {
                    "powered": powered,
                    "draw_w": draw,
                    "mode": (intent if powered else PowerMode.OFF).value,
                }
            )
        overhead_w = self._config.relay_coil_watts * energized
        total_wh = (
            sum(
                sum(self._ledger.outlet_mode_table(i).values())
                for i in range(state.outlet_count)
            )
            + self._ledger.overhead_wh
        )
        standby_wh = sum(
            self._ledger.energy_wh(i, mode)
            for i in range(state.outlet_count)
            for mode in (PowerMode.ACTIVE_STANDBY, PowerMode.PASSIVE_STANDBY)
        )
        return {
            "seq": self._seq + 1,
            "time_s": self._time_us / US_PER_S,
            "outlets": outlets,
            "totals": {
                "instant_w": sum(draws) + overhead_w,
                "energy_wh": total_wh,
                "standby_share": standby_wh / total_wh if total_wh > 0 else None,
            },
        }

    def _emit(self) -> dict:
        doc = self._frame_doc()
        self._seq = doc["seq"]
        self._history.append(doc)
        for sub in list(self._subscribers):
            try:
                sub.frames.put_nowait(doc)
            except queue.Full:
                sub.dead = True
                self._subscribers.remove(sub)
        return doc

    # -- public API (each call takes the lock once) -----------------------

    def get_state(self) -> dict:
        with self._lock:
            self._advance_wall()
            doc = control_config_to_json(
                self._config.outlet_count, self._unit.button_map, self._unit.macros
            )
            doc["frame"] = self._frame_doc()
            doc["virtual_clock"] = self.virtual_clock
            doc["time_factor"] = self.time_factor
            return doc

    def get_report(self) -> dict:
        with self._lock:
            self._advance_wall()
            report = build_report(
                self._config.profiles,
                self._time_us // US_PER_S,
                self._ledger,
                self._baseline_ledger,
            )
            return _scenario.report_to_json(report)

    def press(self, body: object) -> dict:
        with self._lock:
            self._advance_wall()
            now = self._time_us
            action, result = self._resolve_press(body, now)
            if result is None:
                transitions = self._unit.press(action, now)
            else:
                action = result.action
                transitions = result.transitions
            frame_doc = self._emit()
            return {
                "applied_action": _action_doc(action),
                "transitions": [
                    {
                        "outlet": t.outlet,
                        "was_on": t.was_on,
                        "now_on": t.now_on,
                        "time_s": t.timestamp_us / US_PER_S,
                    }
                    for t in transitions
                ],
                "frame": frame_doc,
            }

    def _resolve_press(self, body: object, now_us: int):
        """Returns (action, None) for symbolic presses or (None, CommandResult)
        for raw frames that went through the codec path."""
        if not isinstance(body, dict):
            raise PressError(400, "press body must be a JSON object")
        if "raw_frame" in body:
            if set(body.keys()) != {"raw_frame"}:
                raise PressError(400, "raw_frame presses take no other fields")
            raw = body["raw_frame"]
            if not isinstance(raw, dict) or set(raw.keys()) != {"address", "command"}:
                raise PressError(400, "raw_frame needs exactly address and command")
            try:
                frame = IrFrame.data(raw["address"], raw["command"])
            except (TypeError, ValueError) as exc:
                raise PressError(400, str(exc)) from None
            try:
                return None, self._handle_ir(frame, now_us)
            except UnknownMacroError as exc:
                raise PressError(404, str(exc)) from None
            except ValueError as exc:
                raise PressError(400, str(exc)) from None

        kind = body.get("button")
        if kind == "master":
            if set(body.keys()) != {"button"}:
                raise PressError(400, "master presses take no other fields")
            return MasterToggle(), None
        if kind == "outlet":
            if set(body.keys()) != {"button", "index"}:
                raise PressError(400, "outlet presses need exactly button and index")
            index = body["index"]
            if (
                not isinstance(index, int)
                or isinstance(index, bool)
                or not 0 <= index < self._config.outlet_count
            ):
                raise PressError(
                    400,
                    f"index must be an integer in 0..{self._config.outlet_count - 1}",
                )
            return ToggleOutlet(index), None
        if kind == "macro":
            if set(body.keys()) != {"button", "id"}:
                raise PressError(400, "macro presses need exactly button and id")
            macro_id = body["id"]
            if not isinstance(macro_id, int) or isinstance(macro_id, bool):
                raise PressError(400, "macro id must be an integer")
            if macro_id not in self._unit.macros:
                raise PressError(404, f"macro {macro_id} is not programmed")
            return RunMacro(macro_id), None
        raise PressError(400, "unrecognized press body")

    def set_macro(self, body: object) -> dict:
        with self._lock:
            self._advance_wall()
            if not isinstance(body, dict) or set(body.keys()) != {"id", "body"}:
                raise PressError(400, "macro programming needs exactly id and body")
            macro_id = body["id"]
            if not isinstance(macro_id, int) or isinstance(macro_id, bool) or macro_id < 0:
                raise PressError(400, "macro id must be a non-negative integer")
            if not isinstance(body["body"], list):
                raise PressError(400, "macro body must be an array of actions")
            actions = []
            for i, doc in enumerate(body["body"]):
                try:
                    action = action_from_json(doc)
                except ValueError as exc:
                    raise PressError(400, f"body[{i}]: {exc}") from None
                if isinstance(action, ToggleOutlet) and (
                    action.outlet >= self._config.outlet_count
                ):
                    raise PressError(400, f"body[{i}]: outlet {action.outlet} does not exist")
                actions.append(action)
            try:
                self._unit.macros = program_macro(self._unit.macros, macro_id, actions)
            except ValueError as exc:
                raise PressError(400, str(exc)) from None
            doc = control_config_to_json(
                self._config.outlet_count, self._unit.button_map, self._unit.macros
            )
            return {"macros": doc["macros"]}

    def tick(self, body: object) -> dict:
        if not self.virtual_clock:
            raise PressError(400, "tick is only available with --virtual-clock")
        with self._lock:
            if not isinstance(body, dict) or set(body.keys()) != {"seconds"}:
                raise PressError(400, "tick needs exactly {\"seconds\": n}")
            seconds = body["seconds"]
            if isinstance(seconds, bool) or not isinstance(seconds, (int, float)):
                raise PressError(400, "seconds must be a number")
            if seconds < 0:
                raise PressError(400, "time only moves forward")
            self._advance_to(self._time_us + round(seconds * US_PER_S))
            return {"frame": self._emit()}

    def heartbeat(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._advance_wall()
            self._emit()

    def subscribe(self, after: Optional[int]) -> Tuple[list, _Subscriber]:
        with self._lock:
            sub = _Subscriber()
            if after is None:
                replay = []
            else:
                replay = [doc for doc in self._history if doc["seq"] > after]
            self._subscribers.append(sub)
            return replay, sub

    def unsubscribe(self, sub: _Subscriber) -> None:
        with self._lock:
            sub.dead = True
            if sub in self._subscribers:
                self._subscribers.remove(sub)

    def close(self) -> None:
        with self._lock:
            self._closed = True
            for sub in self._subscribers:
                sub.dead = True
            self._subscribers.clear()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "phantomstrip"

    @property
    def session(self) -> LiveSession:
        return self.server.session  # type: ignore[attr-defined]

    def log_message(self, format: str, *args) -> None:
        pass  # tests and piloting care about stdout, not access logs

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")

    def _send_json(self, status: int, doc: object) -> None:
        payload = json.dumps(doc).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _read_body(self) -> object:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise PressError(400, "request body must be JSON")
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise PressError(400, f"invalid JSON body: {exc}") from None

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        url = urlparse(self.path)
        if url.path == "/state":
            self._send_json(200, self.session.get_state())
        elif url.path == "/report":
            self._send_json(200, self.session.get_report())
        elif url.path == "/events":
            self._stream_events(url)
        else:
            self._serve_static(url.path)

    def do_POST(self) -> None:
        try:
            body = self._read_body()
            if self.path == "/press":
                self._send_json(200, self.session.press(body))
            elif self.path == "/macros":
                self._send_json(200, self.session.set_macro(body))
            elif self.path == "/tick":
                self._send_json(200, self.session.tick(body))
            else:
                self._send_json(404, {"error": f"no such endpoint: {self.path}"})
        except PressError as exc:
            self._send_json(exc.status, {"error": str(exc)})

    def _stream_events(self, url) -> None:
        params = parse_qs(url.query)
        after: Optional[int] = None
        if "after" in params:
            try:
                after = int(params["after"][0])
            except ValueError:
                self._send_json(400, {"error": "after must be an integer sequence number"})
                return
        replay, sub = self.session.subscribe(after)

        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Cache-Control", "no-store")
        self.send_header("Transfer-Encoding", "chunked")
        self.end_headers()
        try:
            for doc in replay:
                self._write_chunk(json.dumps(doc).encode("utf-8") + b"\n")
            while not sub.dead:
                try:
                    doc = sub.frames.get(timeout=0.5)
                except queue.Empty:
                    continue
                self._write_chunk(json.dumps(doc).encode("utf-8") + b"\n")
            # overflow or shutdown: terminate the stream cleanly
            self._write_chunk(b"")
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.session.unsubscribe(sub)
            self.close_connection = True

    def _write_chunk(self, payload: bytes) -> None:
        self.wfile.write(f"{len(payload):X}\r\n".encode("ascii"))
        self.wfile.write(payload + b"\r\n")
        self.wfile.flush()

    def _serve_static(self, path: str) -> None:
        root = getattr(self.server, "ui_dir", None)
        if root is None:
            self._send_json(404, {"error": f"no such endpoint: {path}"})
            return
        name = path.lstrip("/") or "index.html"
        base = os.path.realpath(root)
        full = os.path.realpath(os.path.join(base, name))
        if full != base and not full.startswith(base + os.sep):
            self._send_json(404, {"error": "not found"})
            return
        if os.path.isdir(full):
            full = os.path.join(full, "index.html")
        if not os.path.isfile(full):
            self._send_json(404, {"error": "not found"})
            return
        ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
        with open(full, "rb") as handle:
            payload = handle.read()
        self.send_response(200)
        self._cors()
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


class ControlService:
    """Owns the HTTP server, the session, and the real-time heartbeat."""

    def __init__(
        self,
        config: SimConfig,
        port: int = 0,
        time_factor: float = 60.0,
        virtual_clock: bool = False,
        ui_dir: Optional[str] = None,
    ):
        self.session = LiveSession(config, virtual_clock, time_factor)
        self._httpd = ThreadingHTTPServer(("127.0.0.1", port), _Handler)
        self._httpd.daemon_threads = True
        self._httpd.session = self.session  # type: ignore[attr-defined]
        self._httpd.ui_dir = ui_dir  # type: ignore[attr-defined]
        self.port = self._httpd.server_address[1]

        self._stop = threading.Event()
        self._heartbeat: Optional[threading.Thread] = None
        if not virtual_clock:
            interval = max(HEARTBEAT_SIMULATED_S / time_factor, 0.02)
            self._heartbeat = threading.Thread(
                target=self._beat, args=(interval,), daemon=True
            )
            self._heartbeat.start()

    def _beat(self, interval: float) -> None:
        while not self._stop.wait(interval):
            self.session.heartbeat()

    def serve_forever(self) -> None:
        self._httpd.serve_forever(poll_interval=0.1)

    def shutdown(self) -> None:
        self._stop.set()
        self.session.close()
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._heartbeat is not None:
            self._heartbeat.join(timeout=2.0)
