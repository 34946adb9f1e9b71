"""Live state streaming over WebSocket: frames out, steering input in.

The wire protocol is length-prefixed JSON text messages (every WebSocket text
frame carries its payload length in the frame header):

server -> client
    {"type": "frame", "t": float, "res": [w, h], "origin": [x, y],
     "spacing": float, "heights": "<base64 little-endian float32, row-major>",
     "bodies": [{"id": int, "pos": [x, y, z], "yaw": float}],
     "particles": int}                                   # optional HUD extra

client -> server
    {"type": "input", "id": int, "thrust": float, "rudder": float}

Implemented on the standard library (RFC 6455 text frames only) so the
simulator stays dependency-free; one reader thread per client feeds a
single-writer latest-input mailbox that the frame loop drains once per step.
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import sys
import threading
import time

import numpy as np

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

OP_TEXT = 0x1
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


def _accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def encode_frame(payload: bytes, opcode: int = OP_TEXT, mask: bool = False) -> bytes:
    header = bytearray([0x80 | opcode])
    n = len(payload)
    mask_bit = 0x80 if mask else 0x00
    if n < 126:
        header.append(mask_bit | n)
    elif n < (1 << 16):
        header.append(mask_bit | 126)
        header += struct.pack(">H", n)
    else:
        header.append(mask_bit | 127)
        header += struct.pack(">Q", n)
    if mask:
        key = os.urandom(4)
        header += key
        masked = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        return bytes(header) + masked
    return bytes(header) + payload


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionError("socket closed")
        buf += chunk
    return buf


def read_frame(sock: socket.socket) -> tuple[int, bytes]:
    """Read one frame; returns (opcode, payload). Raises on disconnect."""
    b0, b1 = _read_exact(sock, 2)
    opcode = b0 & 0x0F
    masked = bool(b1 & 0x80)
    n = b1 & 0x7F
    if n == 126:
        (n,) = struct.unpack(">H", _read_exact(sock, 2))
    elif n == 127:
        (n,) = struct.unpack(">Q", _read_exact(sock, 8))
    key = _read_exact(sock, 4) if masked else None
    payload = _read_exact(sock, n) if n else b""
    if key:
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return opcode, payload


class StreamServer:
    """Threaded WebSocket endpoint: broadcasts frames, collects inputs."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))     # OSError on bind failure propagates
        self._sock.listen(4)
        self.host, self.port = self._sock.getsockname()
        self._clients: list[socket.socket] = []
        self._lock = threading.Lock()
        self._inputs: dict[int, tuple[float, float]] = {}
        self._running = False
        self._accept_thread: threading.Thread | None = None

    def start(self) -> None:
        self._running = True
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()

    def _accept_loop(self) -> None:
        while self._running:
            try:
                client, _ = self._sock.accept()
            except OSError:
                return
            try:
                self._handshake(client)
            except Exception as exc:   # bad handshake: drop this client only
                print(f"stream: handshake failed: {exc}", file=sys.stderr)
                client.close()
                continue
            with self._lock:
                self._clients.append(client)
            threading.Thread(target=self._reader_loop, args=(client,),
                             daemon=True).start()

    def _handshake(self, client: socket.socket) -> None:
        client.settimeout(5.0)
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = client.recv(4096)
            if not chunk:
                raise ConnectionError("client closed during handshake")
            data += chunk
        headers = {}
        for line in data.decode("latin-1").split("\r\n")[1:]:
            if ":" in line:
                k, _, v = line.partition(":")
                headers[k.strip().lower()] = v.strip()
        key = headers.get("sec-websocket-key")
        if not key:
            raise ValueError("missing Sec-WebSocket-Key")
        resp = ("HTTP/1.1 101 Switching Protocols\r\n"
                "Upgrade: websocket\r\n"
                "Connection: Upgrade\r\n"
                f"Sec-WebSocket-Accept: {_accept_key(key)}\r\n\r\n")
        client.sendall(resp.encode("latin-1"))
        client.settimeout(None)

    def _reader_loop(self, client: socket.socket) -> None:
        try:
            while self._running:
                opcode, payload = read_frame(client)
                if opcode == OP_CLOSE:
                    break
                if opcode == OP_PING:
                    client.sendall(encode_frame(payload, OP_PONG))
                    continue
                if opcode != OP_TEXT:
                    continue
                self._handle_message(payload)
        except (ConnectionError, OSError):
            pass
        finally:
            self._drop(client)

    def _handle_message(self, payload: bytes) -> None:
        try:
            msg = json.loads(payload.decode("utf-8"))
            if msg.get("type") != "input":
                raise ValueError(f"unexpected message type {msg.get('type')!r}")
            body_id = int(msg["id"])
            thrust = max(-1.0, min(1.0, float(msg["thrust"])))
            rudder = max(-1.0, min(1.0, float(msg["rudder"])))
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            print(f"stream: rejected message: {exc}", file=sys.stderr)
            return
        with self._lock:
            self._inputs[body_id] = (thrust, rudder)

    def input_for(self, body_id: int) -> tuple[float, float] | None:
        with self._lock:
            return self._inputs.get(body_id)

    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)

    def broadcast(self, obj: dict) -> None:
        data = encode_frame(json.dumps(obj).encode("utf-8"))
        with self._lock:
            clients = list(self._clients)
        for c in clients:
            try:
                c.sendall(data)
            except OSError:
                self._drop(c)

    def _drop(self, client: socket.socket) -> None:
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)
        try:
            client.close()
        except OSError:
            pass

    def stop(self) -> None:
        self._running = False
        try:
            self._sock.close()
        except OSError:
            pass
        with self._lock:
            clients = list(self._clients)
        for c in clients:
            self._drop(c)


class StreamClient:
    """Minimal WebSocket client, used by the tests and as a probe tool."""

    def __init__(self, host: str, port: int, timeout: float = 5.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        key = base64.b64encode(os.urandom(16)).decode("ascii")
        req = (f"GET / HTTP/1.1\r\nHost: {host}:{port}\r\n"
               "Upgrade: websocket\r\nConnection: Upgrade\r\n"
               f"Sec-WebSocket-Key: {key}\r\nSec-WebSocket-Version: 13\r\n\r\n")
        self.sock.sendall(req.encode("latin-1"))
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = self.sock.recv(4096)
            if not chunk:
                raise ConnectionError("server closed during handshake")
            data += chunk
        status = data.split(b"\r\n", 1)[0]
        if b"101" not in status:
            raise ConnectionError(f"handshake rejected: {status!r}")
        expected = _accept_key(key).encode("ascii")
        if expected not in data:
            raise ConnectionError("bad Sec-WebSocket-Accept")

    def send_json(self, obj: dict) -> None:
        self.sock.sendall(encode_frame(json.dumps(obj).encode("utf-8"), mask=True))

    def recv_json(self) -> dict:
        while True:
            opcode, payload = read_frame(self.sock)
            if opcode == OP_TEXT:
                return json.loads(payload.decode("utf-8"))
            if opcode == OP_CLOSE:
                raise ConnectionError("server closed")

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


def encode_heights(grid: np.ndarray) -> str:
    """Row-major little-endian float32, base64 text."""
    return base64.b64encode(np.ascontiguousarray(grid, dtype="<f4").tobytes()).decode("ascii")


def decode_heights(text: str, shape: tuple[int, int]) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype="<f4").reshape(shape)


def frame_message(sim, res: int, window: float) -> dict:
    """Build the decimated frame message around the lead body (or the domain
    center), origin snapped to the stream grid to avoid swimming."""
    cfg = sim.config
    if sim.bodies:
        center = sim.bodies[0].position[:2]
    else:
        center = np.array([cfg.fft_domain / 2.0, cfg.fft_domain / 2.0])
    spacing = window / (res - 1)
    origin = np.round((center - window / 2.0) / spacing) * spacing
    xs = origin[0] + np.arange(res) * spacing
    ys = origin[1] + np.arange(res) * spacing
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    heights, _ = sim.sampler.sample(pts.reshape(-1, 2))
    msg = {
        "type": "frame",
        "t": sim.t,
        "res": [res, res],
        "origin": [float(origin[0]), float(origin[1])],
        "spacing": spacing,
        "heights": encode_heights(heights.reshape(res, res)),
        "bodies": [
            {"id": b.body_id,
             "pos": [float(b.position[0]), float(b.position[1]), float(b.position[2])],
             "yaw": float(b.yaw)}
            for b in sim.bodies
        ],
        "particles": int(sum(len(ps.pool) for ps in sim.patches)),
    }
    return msg


def serve(config, port: int | None = None, max_frames: int | None = None,
          realtime: bool = True, on_frame=None, on_ready=None) -> None:
    """Run the simulation with the streaming endpoint attached.

    Steering inputs received before a physics step are applied to the lead
    body. `max_frames` bounds the session (None: run until interrupted);
    `on_ready(server)` fires once the socket is listening.
    """
    from .harness import Simulation

    cfg = config.validate()
    server = StreamServer(port=port if port is not None else cfg.stream_port)
    server.start()
    print(f"streaming on ws://{server.host}:{server.port}", flush=True)
    if on_ready is not None:
        on_ready(server)
    sim = Simulation(cfg)
    period = 1.0 / cfg.stream_rate if cfg.stream_rate > 0 else 0.0
    next_emit = 0.0
    frame = 0
    try:
        while max_frames is None or frame < max_frames:
            start = time.perf_counter()
            for body in sim.bodies:
                latest = server.input_for(body.body_id)
                if latest is not None:
                    body.thrust, body.rudder = latest
            sim.step()
            now = time.perf_counter()
            if now >= next_emit:
                server.broadcast(frame_message(sim, cfg.stream_res, cfg.stream_window))
                next_emit = now + period
            if on_frame is not None:
                on_frame(sim)
            frame += 1
            if realtime:
                leftover = cfg.dt - (time.perf_counter() - start)
                if leftover > 0:
                    time.sleep(leftover)
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
