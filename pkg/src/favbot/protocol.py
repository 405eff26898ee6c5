"""Wire framing for the numeric command set, plus the telemetry channel.

Commands travel as fixed three-byte frames over any byte stream:

    [ 0xFA | code | 0xFA XOR code ]

The code byte is the whole vocabulary: 0 idle, 1-100 frequency in kHz (or a
duration argument when a mode is armed), 101 autonomous, 102 abort, 103-106
mode registration, 203-206 duration arming.  Codes 107-202 and 207-255 are
reserved and never appear in a valid frame.

Telemetry is a separate one-way channel: each event is one JSON object per
line, exactly as :mod:`favbot.telemetry` serializes them.  Keeping the two
channels apart means the command side stays single-byte-payload pure while
telemetry can grow fields freely.

``ProtocolServer`` binds both channels to TCP sockets: a single command
session at a time feeds a bounded queue that the owner drains between
control cycles, and any number of telemetry subscribers receive identical
event sequences.
"""

from __future__ import annotations

import json
import socket
import threading
from dataclasses import dataclass

from favbot.controller import CommandError, Controller, Phase
from favbot.telemetry import TelemetryLog

MAGIC = 0xFA
FRAME_SIZE = 3

RESERVED_RANGES = ((107, 202), (207, 255))

DEFAULT_QUEUE_LIMIT = 64


class FrameError(ValueError):
    """A byte sequence that does not form a valid command frame."""


def is_valid_code(code: int) -> bool:
    if not isinstance(code, int) or isinstance(code, bool):
        return False
    if not 0 <= code <= 255:
        return False
    return not any(lo <= code <= hi for lo, hi in RESERVED_RANGES)


def valid_codes() -> list[int]:
    return [c for c in range(256) if is_valid_code(c)]


@dataclass(frozen=True)
class CommandFrame:
    """One command byte; constructing it is the validity check."""

    code: int

    def __post_init__(self):
        if not isinstance(self.code, int) or isinstance(self.code, bool):
            raise FrameError(f"code must be an integer, got {self.code!r}")
        if not 0 <= self.code <= 255:
            raise FrameError(f"code {self.code} does not fit in one byte")
        if not is_valid_code(self.code):
            raise FrameError(f"code {self.code} is reserved")


def encode_command(frame: CommandFrame | int) -> bytes:
    if not isinstance(frame, CommandFrame):
        frame = CommandFrame(frame)
    return bytes((MAGIC, frame.code, MAGIC ^ frame.code))


def decode_command(data: bytes) -> CommandFrame:
    """Decode exactly one frame; raises FrameError on any defect."""
    if len(data) != FRAME_SIZE:
        raise FrameError(f"frame must be {FRAME_SIZE} bytes, got {len(data)}")
    magic, code, checksum = data
    if magic != MAGIC:
        raise FrameError(f"bad magic byte 0x{magic:02x}")
    if checksum != (MAGIC ^ code):
        raise FrameError(f"bad checksum 0x{checksum:02x} for code {code}")
    return CommandFrame(code)


class CommandDecoder:
    """Resynchronizing stream decoder.

    Bytes arrive in arbitrary chunks; ``feed`` returns every complete valid
    frame and silently skips anything else, scanning forward to the next
    magic byte after a defect.  A frame that fails its checksum or carries a
    reserved code is never emitted.
    """

    def __init__(self):
        self._buf = bytearray()
        self.frames_decoded = 0
        self.bytes_skipped = 0

    def feed(self, data: bytes) -> list[CommandFrame]:
        self._buf.extend(data)
        out: list[CommandFrame] = []
        pos = 0
        while True:
            start = self._buf.find(MAGIC, pos)
            if start < 0:
                self.bytes_skipped += len(self._buf) - pos
                self._buf.clear()
                return out
            self.bytes_skipped += start - pos
            if start + FRAME_SIZE > len(self._buf):
                del self._buf[:start]
                return out
            try:
                frame = decode_command(bytes(self._buf[start : start + FRAME_SIZE]))
            except FrameError:
                # defect: drop just the magic byte and rescan, so a frame
                # starting one byte later is still found
                self.bytes_skipped += 1
                pos = start + 1
                continue
            out.append(frame)
            self.frames_decoded += 1
            pos = start + FRAME_SIZE


def encode_telemetry_line(event: dict) -> bytes:
    return (json.dumps(event, sort_keys=True) + "\n").encode("utf-8")


def decode_telemetry_line(line: str | bytes) -> dict:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    event = json.loads(line)
    if not isinstance(event, dict):
        raise ValueError("telemetry line must be a JSON object")
    return event


class CommandQueue:
    """Bounded thread-safe command buffer.

    Backpressure rule: when the queue is full and the controller is still in
    characterization, an incoming frequency-set code (1-100) replaces a
    frequency-set at the tail, because an operator twisting the dial only
    cares about the newest value.  Any other overflow is dropped and
    counted.  Below the limit every code is kept in arrival order, so
    replayed scripts are never reordered or collapsed.
    """

    def __init__(self, limit: int = DEFAULT_QUEUE_LIMIT):
        if limit < 1:
            raise ValueError(f"queue limit must be at least 1, got {limit}")
        self._limit = limit
        self._items: list[int] = []
        self._lock = threading.Lock()
        self.dropped = 0

    def put(self, code: int, characterizing: bool = False) -> None:
        with self._lock:
            if len(self._items) < self._limit:
                self._items.append(code)
                return
            if (
                characterizing
                and 1 <= code <= 100
                and 1 <= self._items[-1] <= 100
            ):
                self._items[-1] = code
                return
            self.dropped += 1

    def drain(self) -> list[int]:
        with self._lock:
            items, self._items = self._items, []
            return items

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)


class TelemetryHub:
    """Fan-out of telemetry events to subscriber write callbacks."""

    def __init__(self):
        self._subs: list = []
        self._lock = threading.Lock()

    def subscribe(self, write) -> None:
        with self._lock:
            self._subs.append(write)

    def unsubscribe(self, write) -> None:
        with self._lock:
            if write in self._subs:
                self._subs.remove(write)

    def publish(self, event: dict) -> None:
        line = encode_telemetry_line(event)
        with self._lock:
            subs = list(self._subs)
        for write in subs:
            try:
                write(line)
            except OSError:
                self.unsubscribe(write)


class ProtocolServer:
    """TCP endpoints for the command and telemetry channels.

    One command session is served at a time; its bytes run through a
    resynchronizing decoder into the command queue.  ``pump`` hands queued
    codes to the controller and forwards any new telemetry, so the owner
    controls exactly when commands take effect (between actuation cycles).
    """

    def __init__(
        self,
        controller: Controller,
        host: str = "127.0.0.1",
        command_port: int = 0,
        telemetry_port: int = 0,
        queue_limit: int = DEFAULT_QUEUE_LIMIT,
    ):
        self.controller = controller
        self.queue = CommandQueue(queue_limit)
        self.hub = TelemetryHub()
        self.rejected: list[tuple[int, str]] = []
        self._host = host
        self._command_port = command_port
        self._telemetry_port = telemetry_port
        self._published = 0
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()
        self._cmd_sock: socket.socket | None = None
        self._tel_sock: socket.socket | None = None

    # ------------------------------------------------------------- sockets

    def start(self) -> None:
        if self._cmd_sock is not None:
            raise RuntimeError("server already started")
        self._cmd_sock = self._listen(self._command_port)
        self._tel_sock = self._listen(self._telemetry_port)
        for sock, handler in ((self._cmd_sock, self._command_session), (self._tel_sock, self._telemetry_session)):
            thread = threading.Thread(target=self._accept_loop, args=(sock, handler), daemon=True)
            thread.start()
            self._threads.append(thread)

    def _listen(self, port: int) -> socket.socket:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((self._host, port))
        sock.listen(4)
        sock.settimeout(0.2)
        return sock

    @property
    def command_address(self) -> tuple[str, int]:
        if self._cmd_sock is None:
            raise RuntimeError("server not started")
        return self._cmd_sock.getsockname()

    @property
    def telemetry_address(self) -> tuple[str, int]:
        if self._tel_sock is None:
            raise RuntimeError("server not started")
        return self._tel_sock.getsockname()

    def _accept_loop(self, sock: socket.socket, handler) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = sock.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            handler(conn)

    def _command_session(self, conn: socket.socket) -> None:
        # one session at a time: handled inline on the accept thread
        decoder = CommandDecoder()
        conn.settimeout(0.2)
        with conn:
            while not self._stop.is_set():
                try:
                    data = conn.recv(4096)
                except socket.timeout:
                    continue
                except OSError:
                    return
                if not data:
                    return
                characterizing = self.controller.phase is Phase.CHARACTERIZATION
                for frame in decoder.feed(data):
                    self.queue.put(frame.code, characterizing=characterizing)

    def _telemetry_session(self, conn: socket.socket) -> None:
        # subscribers are write-only; each gets its own sender registration
        lock = threading.Lock()

        def write(line: bytes) -> None:
            with lock:
                conn.sendall(line)

        self.hub.subscribe(write)

    # ---------------------------------------------------------------- pump

    def pump(self, telemetry: TelemetryLog | None = None) -> int:
        """Apply queued commands, then publish new telemetry; returns count."""
        codes = self.queue.drain()
        for code in codes:
            try:
                self.controller.handle_command(code)
            except CommandError as e:
                self.rejected.append((code, str(e)))
        if telemetry is not None:
            self.publish_pending(telemetry)
        return len(codes)

    def publish_pending(self, telemetry: TelemetryLog) -> int:
        events = telemetry.events()
        new = events[self._published :]
        for event in new:
            self.hub.publish(event)
        self._published = len(events)
        return len(new)

    def stop(self) -> None:
        self._stop.set()
        for sock in (self._cmd_sock, self._tel_sock):
            if sock is not None:
                sock.close()
        for thread in self._threads:
            thread.join(timeout=2.0)
        self._threads.clear()
