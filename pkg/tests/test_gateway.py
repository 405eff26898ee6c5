"""WebSocket gateway: byte-for-byte command bridging, telemetry line fan-out."""

import json

import pytest

fastapi = pytest.importorskip("fastapi")

import httpx
from fastapi.testclient import TestClient

from favbot.controller import Controller, Phase, packaged_registry
from favbot.gateway import CLOSE_BACKEND_UNREACHABLE, build_app, start_gateway
from favbot.protocol import ProtocolServer, encode_command
from favbot.telemetry import TelemetryLog, pose_event

from test_controller import set1_command_script
from test_protocol import wait_until

DEAD_ADDR = ("127.0.0.1", 1)  # connection refused, immediately


@pytest.fixture()
def live():
    srv = ProtocolServer(Controller())
    srv.start()
    yield srv
    srv.stop()


@pytest.fixture()
def client(live):
    app = build_app(live.command_address, live.telemetry_address)
    with TestClient(app) as c:
        yield c


def test_info_reports_bridged_addresses(live, client):
    doc = client.get("/api/info").json()
    assert tuple(doc["command"]) == live.command_address
    assert tuple(doc["telemetry"]) == live.telemetry_address


def test_command_ws_drives_controller_to_autonomous(live, client):
    stream = b"".join(encode_command(c) for c in set1_command_script())
    stream += b"\x00\x13" + encode_command(101)  # line noise before launch
    with client.websocket_connect("/ws/command") as ws:
        ws.send_bytes(stream[:10])  # split mid-frame: framing, not messages
        ws.send_bytes(stream[10:])
        assert wait_until(
            lambda: (live.pump(), live.controller.phase is Phase.AUTONOMOUS)[1]
        )
    assert live.controller.registry == packaged_registry("set1")
    assert live.rejected == []


def test_telemetry_ws_streams_lines_in_order(live, client):
    log = TelemetryLog()
    for i in range(3):
        log.append(pose_event(float(i), 10.0 + i, 20.0, 0.5))
    with client.websocket_connect("/ws/telemetry") as ws:
        assert wait_until(lambda: len(live.hub._subs) == 1)
        assert live.publish_pending(log) == 3
        lines = [ws.receive_text() for _ in range(3)]
    assert [json.loads(l)["t"] for l in lines] == [0.0, 1.0, 2.0]
    assert all(json.loads(l)["type"] == "pose" for l in lines)


def test_command_ws_closes_when_backend_unreachable():
    with TestClient(build_app(DEAD_ADDR, DEAD_ADDR)) as client:
        with client.websocket_connect("/ws/command") as ws:
            msg = ws.receive()
    assert msg["type"] == "websocket.close"
    assert msg["code"] == CLOSE_BACKEND_UNREACHABLE


def test_telemetry_ws_closes_when_backend_unreachable():
    with TestClient(build_app(DEAD_ADDR, DEAD_ADDR)) as client:
        with client.websocket_connect("/ws/telemetry") as ws:
            msg = ws.receive()
    assert msg["type"] == "websocket.close"
    assert msg["code"] == CLOSE_BACKEND_UNREACHABLE


def test_static_console_served_at_root(live, tmp_path):
    (tmp_path / "index.html").write_text("<!doctype html><title>console</title>")
    app = build_app(live.command_address, live.telemetry_address, static_dir=tmp_path)
    with TestClient(app) as client:
        page = client.get("/")
        assert page.status_code == 200
        assert "console" in page.text
        assert client.get("/api/info").status_code == 200  # routes win over mount


def test_start_gateway_serves_real_socket(live):
    app = build_app(live.command_address, live.telemetry_address)
    handle = start_gateway(app, "127.0.0.1", 0)
    try:
        host, port = handle.address
        doc = httpx.get(f"http://{host}:{port}/api/info", timeout=5.0).json()
        assert tuple(doc["command"]) == live.command_address
    finally:
        handle.stop()
    assert not handle.thread.is_alive()
