"""Socket-to-web gateway for the browser operator console.

Bridges the two TCP channels of a running ``favbot serve`` instance to
WebSockets, without inventing any console-private formats:

* ``/ws/command``   binary WebSocket messages are written verbatim to the
                    TCP command channel (the three-byte frames of
                    ``PROTOCOL.md``)
* ``/ws/telemetry`` each telemetry JSON line arrives as one WebSocket
                    text message, in emission order

``/api/info`` reports the bridged addresses, and an optional static
directory (the built console) is served at the root.  Requires the
``gateway`` extra (fastapi + uvicorn).
"""

from __future__ import annotations

import asyncio
import threading
import time
from pathlib import Path

from fastapi import FastAPI, WebSocket
from fastapi.staticfiles import StaticFiles
from starlette.websockets import WebSocketDisconnect

from favbot import __version__

CLOSE_BACKEND_UNREACHABLE = 1011


def build_app(
    command_addr: tuple[str, int],
    telemetry_addr: tuple[str, int],
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Gateway app bound to one serve instance's channel addresses."""
    app = FastAPI(title="favbot gateway", version=__version__)

    @app.get("/api/info")
    async def info():
        return {
            "version": __version__,
            "command": list(command_addr),
            "telemetry": list(telemetry_addr),
        }

    @app.websocket("/ws/command")
    async def command_ws(ws: WebSocket):
        await ws.accept()
        try:
            _, writer = await asyncio.open_connection(*command_addr)
        except OSError:
            await ws.close(code=CLOSE_BACKEND_UNREACHABLE, reason="command channel unreachable")
            return
        try:
            while True:
                msg = await ws.receive()
                if msg["type"] == "websocket.disconnect":
                    break
                data = msg.get("bytes")
                if data:
                    writer.write(data)
                    await writer.drain()
        except WebSocketDisconnect:
            pass
        finally:
            writer.close()

    @app.websocket("/ws/telemetry")
    async def telemetry_ws(ws: WebSocket):
        await ws.accept()
        try:
            reader, writer = await asyncio.open_connection(*telemetry_addr)
        except OSError:
            await ws.close(code=CLOSE_BACKEND_UNREACHABLE, reason="telemetry channel unreachable")
            return
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                await ws.send_text(line.decode("utf-8").rstrip("\n"))
        except (WebSocketDisconnect, RuntimeError):
            pass  # subscriber went away mid-stream
        finally:
            writer.close()
            try:
                await ws.close()
            except RuntimeError:
                pass

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="console")

    return app


class GatewayHandle:
    """A uvicorn server running in a daemon thread."""

    def __init__(self, server, thread: threading.Thread, address: tuple[str, int]):
        self.server = server
        self.thread = thread
        self.address = address

    def stop(self, timeout: float = 5.0) -> None:
        self.server.should_exit = True
        self.thread.join(timeout)


def start_gateway(app: FastAPI, host: str, port: int, startup_timeout: float = 10.0) -> GatewayHandle:
    """Serve ``app`` in a background thread; returns once it is accepting.

    ``port`` 0 binds an ephemeral port; the bound address is on the handle.
    """
    import uvicorn

    config = uvicorn.Config(app, host=host, port=port, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, name="favbot-gateway", daemon=True)
    thread.start()
    deadline = time.monotonic() + startup_timeout
    while not server.started:
        if not thread.is_alive():
            raise RuntimeError("gateway server exited during startup")
        if time.monotonic() > deadline:
            server.should_exit = True
            raise RuntimeError("gateway server did not start in time")
        time.sleep(0.01)
    bound = server.servers[0].sockets[0].getsockname()[:2]
    return GatewayHandle(server, thread, (bound[0], bound[1]))
