"""Session service: observations in, keyboard state and feedback out.

A session chains the pieces end to end.  Each observation is either a
pre-classified eye state or a PNG eye strip; strips run through the
classifier first.  The state then passes the majority filter and the
keyboard engine, and every engine event becomes one feedback message.
The wire format is line-delimited JSON over TCP, one session per
connection, so any language (and netcat) can drive it.
"""

from __future__ import annotations

import base64
import io
import json
import os
import socketserver
import threading
import time
from dataclasses import dataclass, replace

import numpy as np
from PIL import Image, UnidentifiedImageError

from .filtering import DEFAULT_CAPACITY, MajorityFilter
from .t9 import Keyboard, type_script

INPUT_MODES = ("states", "frames")
FEEDBACK_MODES = ("screen", "off_screen")


@dataclass(frozen=True)
class SessionConfig:
    weights: str | None = None
    input_mode: str = "states"
    capacity: int = DEFAULT_CAPACITY
    fps: float = 29.0
    feedback_mode: str = "screen"

    def __post_init__(self):
        if self.input_mode not in INPUT_MODES:
            raise ValueError(f"input_mode must be one of {INPUT_MODES}")
        if self.feedback_mode not in FEEDBACK_MODES:
            raise ValueError(f"feedback_mode must be one of {FEEDBACK_MODES}")
        if self.capacity < 2:
            raise ValueError("capacity must be at least 2")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        if self.input_mode == "frames" and not self.weights:
            raise ValueError("frames input mode needs a weights path")

    @classmethod
    def from_file(cls, path) -> "SessionConfig":
        """key = value lines; # starts a comment; blank lines ignored."""
        fields = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key = value")
                key, value = (part.strip() for part in line.split("=", 1))
                if key == "weights":
                    fields[key] = value
                elif key == "capacity":
                    fields[key] = int(value)
                elif key == "fps":
                    fields[key] = float(value)
                elif key in ("input_mode", "feedback_mode"):
                    fields[key] = value
                else:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        return cls(**fields)


class FrameDecodeError(ValueError):
    code = "bad_frame"


class FrameDimensionError(ValueError):
    code = "bad_dimensions"


def encode_strip_png(strip: np.ndarray) -> str:
    """Base64 PNG for a float strip in [0, 1]; the frame wire payload."""
    data = np.rint(np.clip(strip, 0.0, 1.0) * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(data).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def decode_frame(png_base64: str, width: int, height: int = 32) -> np.ndarray:
    try:
        raw = base64.b64decode(png_base64, validate=True)
        img = Image.open(io.BytesIO(raw)).convert("RGB")
    except (ValueError, UnidentifiedImageError, OSError) as exc:
        raise FrameDecodeError(f"frame is not a decodable PNG: {exc}") from exc
    arr = np.asarray(img, dtype=np.float32) / 255.0
    if arr.shape != (height, width, 3):
        raise FrameDimensionError(
            f"expected a {height}x{width} strip, got {arr.shape[0]}x{arr.shape[1]}")
    return arr


def _error(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


def _event_payload(event) -> dict:
    return {k: v for k, v in vars(event).items()
            if k != "kind" and v is not None}


class SessionLog:
    """Append-only JSON lines: one header, then one record per observation.

    Timestamps live in dedicated fields so everything else is replayable
    byte for byte.  A reset rolls over to a fresh numbered file, keeping
    every file individually replayable.
    """

    def __init__(self, directory, session_id: str, config: SessionConfig):
        self.directory = directory
        self.session_id = session_id
        self.config = config
        self.sequence = 0
        self._fh = None
        self._open()

    @property
    def path(self):
        return os.path.join(self.directory,
                            f"{self.session_id}-{self.sequence:03d}.jsonl")

    def _open(self):
        os.makedirs(self.directory, exist_ok=True)
        self._fh = open(self.path, "w")
        header = {"type": "header", "version": 1, "started": time.time(),
                  "capacity": self.config.capacity, "fps": self.config.fps,
                  "input_mode": self.config.input_mode,
                  "feedback_mode": self.config.feedback_mode}
        self._fh.write(json.dumps(header) + "\n")
        self._fh.flush()

    def record(self, frame_index: int, raw: int, filtered: int | None, events):
        entry = {"type": "record", "ts": time.time(), "frame": frame_index,
                 "raw": raw, "filtered": filtered,
                 "events": [{"kind": e.kind, **_event_payload(e)} for e in events]}
        self._fh.write(json.dumps(entry) + "\n")
        self._fh.flush()

    def rotate(self):
        self._fh.close()
        self.sequence += 1
        self._open()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_log(path) -> tuple[dict, list[dict]]:
    """Header and records.  An undecodable final line (a crash mid-write)
    is dropped; an undecodable earlier line is a real error."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    parsed = []
    for i, line in enumerate(lines):
        try:
            parsed.append(json.loads(line))
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                break
            raise ValueError(f"{path}: line {i + 1} is not valid JSON")
    if not parsed or parsed[0].get("type") != "header":
        raise ValueError(f"{path}: missing header line")
    return parsed[0], [p for p in parsed[1:] if p.get("type") == "record"]


def replay_log(path) -> str:
    """Final text the logged session produced, recomputed from scratch."""
    _, records = read_log(path)
    return type_script(Keyboard(), (r["filtered"] for r in records))


class Session:
    """One client's pipeline instance.  handle() is strictly sequential;
    give concurrent sessions sharing one model the same infer_lock."""

    def __init__(self, config: SessionConfig, model=None, log_dir=None,
                 session_id: str = "session", infer_lock=None):
        if config.input_mode == "frames" and model is None:
            from .estimator import GazeDirectionClassifier
            model = GazeDirectionClassifier.from_weights(config.weights)
        self.config = config
        self.model = model
        self.infer_lock = infer_lock if infer_lock is not None else threading.Lock()
        self.filter = MajorityFilter(config.capacity)
        self.keyboard = Keyboard()
        self.frame_index = 0
        self.log = (SessionLog(log_dir, session_id, config)
                    if log_dir is not None else None)

    # --- message dispatch -------------------------------------------------

    def handle(self, msg: dict) -> list[dict]:
        if not isinstance(msg, dict) or "type" not in msg:
            return [_error("bad_type", "message must be an object with a type")]
        kind = msg["type"]
        if kind == "gaze_state":
            return self._on_gaze_state(msg)
        if kind == "frame":
            return self._on_frame(msg)
        if kind == "reset":
            return self._on_reset()
        if kind == "configure":
            return self._on_configure(msg)
        return [_error("bad_type", f"unknown message type {kind!r}")]

    def _on_gaze_state(self, msg) -> list[dict]:
        state = msg.get("state")
        if not isinstance(state, int) or isinstance(state, bool) \
                or not 0 <= state <= 9:
            return [_error("bad_state", f"state must be an integer 0-9, "
                                        f"got {state!r}")]
        return self._observe(state)

    def _on_frame(self, msg) -> list[dict]:
        if self.model is None:
            return [_error("no_model", "this session has no classifier loaded; "
                                       "send gaze_state messages or configure "
                                       "weights")]
        try:
            strip = decode_frame(msg.get("png_base64", ""), self.model.width)
        except (FrameDecodeError, FrameDimensionError) as exc:
            return [_error(exc.code, str(exc))]
        with self.infer_lock:
            scores = self.model.predict_strip(strip)
        return self._observe(int(scores.argmax()))

    def _observe(self, raw: int) -> list[dict]:
        before = self._snapshot()
        filtered = self.filter.push(raw)
        events = self.keyboard.on_state(filtered)
        replies = [self._feedback(e) for e in events]
        if self._snapshot() != before:
            replies.append(self._ui_state())
        if self.log is not None:
            try:
                self.log.record(self.frame_index, raw, filtered, events)
            except OSError as exc:
                self.log = None
                replies.append(_error("log_failed",
                                      f"session logging disabled: {exc}"))
        self.frame_index += 1
        return replies

    def _on_reset(self) -> list[dict]:
        self.filter.reset()
        self.keyboard = Keyboard()
        self.frame_index = 0
        if self.log is not None:
            self.log.rotate()
        return [self._ui_state()]

    def _on_configure(self, msg) -> list[dict]:
        allowed = {"capacity", "feedback_mode", "fps"}
        unknown = set(msg) - allowed - {"type"}
        if unknown:
            return [_error("bad_config", f"unknown settings {sorted(unknown)}")]
        try:
            updated = replace(self.config,
                              **{k: msg[k] for k in allowed if k in msg})
        except ValueError as exc:
            return [_error("bad_config", str(exc))]
        if updated.capacity != self.config.capacity:
            self.filter = MajorityFilter(updated.capacity)
        self.config = updated
        return [self._ui_state()]

    # --- replies ------------------------------------------------------------

    def _snapshot(self):
        kb = self.keyboard
        return (kb.mode, kb.group, kb.highlight, kb.text)

    def _ui_state(self) -> dict:
        kb = self.keyboard
        return {"type": "ui_state", "mode": kb.mode, "group": kb.group,
                "highlight": kb.highlight, "text": kb.text}

    def _feedback(self, event) -> dict:
        payload = _event_payload(event)
        if event.kind == "direction_changed":
            if self.config.feedback_mode == "screen":
                payload["highlight"] = event.direction
            # off-screen users hear the label; there is nothing to highlight
        return {"type": "feedback", "kind": event.kind, "payload": payload}

    def close(self):
        if self.log is not None:
            self.log.close()


class KeyboardService(socketserver.ThreadingTCPServer):
    """One Session per TCP connection; newline-delimited JSON both ways."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, config: SessionConfig, log_dir=None):
        self.config = config
        self.log_dir = log_dir
        self.model = None
        if config.weights:
            from .estimator import GazeDirectionClassifier
            self.model = GazeDirectionClassifier.from_weights(config.weights)
        self.infer_lock = threading.Lock()
        self._conn_counter = 0
        self._counter_lock = threading.Lock()
        super().__init__(address, _ConnectionHandler)

    def next_session_id(self) -> str:
        with self._counter_lock:
            self._conn_counter += 1
            return f"conn-{self._conn_counter:03d}"


class _ConnectionHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server: KeyboardService = self.server
        session = Session(server.config, model=server.model,
                          log_dir=server.log_dir,
                          session_id=server.next_session_id(),
                          infer_lock=server.infer_lock)
        try:
            for raw_line in self.rfile:
                line = raw_line.decode("utf-8", errors="replace").strip()
                if not line:
                    continue
                try:
                    msg = json.loads(line)
                except json.JSONDecodeError:
                    replies = [_error("bad_json", "line is not valid JSON")]
                else:
                    replies = session.handle(msg)
                for reply in replies:
                    self.wfile.write((json.dumps(reply) + "\n").encode())
        except (ConnectionError, BrokenPipeError):
            pass
        finally:
            session.close()
