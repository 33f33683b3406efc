"""WebSocket service exposing one live teleop session.

One session at a time: the control loop is the only writer of simulator
state, runs at a fixed rate, and broadcasts a state frame after every tick.
Incoming commands are validated off-loop and handed to the session's short
command queue; clients sending faster than the control rate have their
oldest commands coalesced away. A malformed message produces an error reply
and the session continues.
"""

from __future__ import annotations

import asyncio
import logging
import os

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles
from pydantic import ValidationError

from ..config import SimConfig
from .protocol import ErrorMessage, TeleopCommand
from .session import TeleopSession

log = logging.getLogger(__name__)


def create_app(
    task_name: str = "wipe",
    data_dir: str | None = None,
    seed: int | None = None,
    rate_hz: float = 50.0,
    sim_cfg: SimConfig | None = None,
    frontend_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="mobimanip teleop service")
    app.state.busy = False
    app.state.last_episode = None

    @app.get("/health")
    def health():
        return {"ok": True, "task": task_name, "busy": app.state.busy}

    @app.websocket("/session")
    async def session_ws(ws: WebSocket):
        if app.state.busy:
            await ws.close(code=1013, reason="another session is active")
            return
        app.state.busy = True
        try:
            await ws.accept()
            sess = TeleopSession(task_name, cfg=sim_cfg, seed0=seed, data_dir=data_dir)
            await ws.send_text(sess.hello().model_dump_json())
            await _drive(ws, sess, 1.0 / rate_hz)
        finally:
            app.state.busy = False

    if frontend_dir and os.path.isdir(frontend_dir):
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    async def _drive(ws: WebSocket, sess: TeleopSession, dt: float) -> None:
        stop = asyncio.Event()

        async def reader():
            while not stop.is_set():
                try:
                    text = await ws.receive_text()
                except WebSocketDisconnect:
                    stop.set()
                    return
                try:
                    sess.submit(TeleopCommand.model_validate_json(text))
                except ValidationError as e:
                    first = e.errors()[0]
                    detail = f"{'.'.join(str(p) for p in first['loc'])}: {first['msg']}"
                    await ws.send_text(ErrorMessage(detail=detail).model_dump_json())

        reader_task = asyncio.create_task(reader())
        loop = asyncio.get_running_loop()
        next_t = loop.time() + dt
        try:
            while not stop.is_set():
                sess.tick()
                await ws.send_text(sess.frame().model_dump_json())
                delay = next_t - loop.time()
                next_t = next_t + dt if delay > -dt else loop.time() + dt
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    await asyncio.sleep(0)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            stop.set()
            reader_task.cancel()
            path = sess.finalize()
            if path:
                app.state.last_episode = path
                log.info("session ended, recording finalized at %s", path)

    return app
