"""Live operator gateway: frames out over WebSocket, feedback and door commands in.

One JSON document per text frame on `/ws`; static UI assets are served over
HTTP from the same port. Outbound frames are coalesced per client (at most one
pending; a slow client skips straight to the latest frame), so sequence
numbers may gap but never invert. Inbound events are appended to the mediator
inbox in arrival order. The live trial clock pauses while no client is
connected and resumes with a fresh hello on reconnect.
"""

from __future__ import annotations

import asyncio
import json
from pathlib import Path

from aiohttp import WSMsgType, web

from .engine import Trial
from .human import FEEDBACK_KINDS
from .mediator import DoorCommand, FeedbackEvent, Frame, RobotFrame
from .motion import Trajectory
from .planner import AssistUnavailable, ConstraintSet
from .world import Pose, Scenario

PROTOCOL_VERSION = "arn-live-1"
DEFAULT_PORT = 8700


class ProtocolError(ValueError):
    """Inbound message violates the wire schema."""


def _round3(x: float) -> float:
    return round(x + 0.0, 3)


def encode_frame(frame: Frame, seq: int = 0) -> bytes:
    """Canonical frame message: stable key order, 3-decimal coordinates."""
    payload = {
        "tick": round(frame.tick, 3),
        "robots": [
            {
                "id": rf.robot_id,
                "pose": {"x": _round3(rf.pose.x), "y": _round3(rf.pose.y),
                         "heading": _round3(rf.pose.heading)},
                "trajectory": [[_round3(x), _round3(y)] for x, y in rf.trajectory.points],
                "action": rf.action_label,
                "status": rf.status,
            }
            for rf in frame.robots
        ],
        "doors": [{"id": door_id, "state": state} for door_id, state in frame.doors],
        "constraints": [{"start": round(w.start, 3), "end": round(w.end, 3)}
                        for w in frame.constraints.windows],
    }
    message = {"type": "frame", "seq": seq, "payload": payload}
    return json.dumps(message, sort_keys=True, separators=(",", ":")).encode()


def decode_frame(data: bytes | str) -> Frame:
    """Inverse of encode_frame (for tests and UI-side tooling)."""
    message = json.loads(data)
    if message.get("type") != "frame":
        raise ProtocolError(f"expected frame message, got '{message.get('type')}'")
    payload = message["payload"]
    robots = tuple(
        RobotFrame(
            robot_id=r["id"],
            pose=Pose(r["pose"]["x"], r["pose"]["y"], r["pose"]["heading"]),
            trajectory=Trajectory(tuple((p[0], p[1]) for p in r["trajectory"])),
            action_label=r["action"],
            status=r["status"],
        )
        for r in payload["robots"]
    )
    constraints = ConstraintSet(tuple(AssistUnavailable(w["start"], w["end"])
                                      for w in payload["constraints"]))
    return Frame(
        tick=payload["tick"],
        robots=robots,
        doors=tuple((d["id"], d["state"]) for d in payload["doors"]),
        constraints=constraints,
    )


def decode_feedback(data: bytes | str, clock: float) -> FeedbackEvent | DoorCommand:
    """Map an inbound message to a feedback event or door command.

    Raises ProtocolError on malformed payloads or kinds outside the feedback
    library; the caller answers with an error message and drops the event.
    """
    try:
        message = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise ProtocolError(f"malformed JSON: {err}") from err
    if not isinstance(message, dict):
        raise ProtocolError("message must be a JSON object")
    kind = message.get("type")
    if kind == "feedback":
        feedback_kind = message.get("kind")
        if feedback_kind not in FEEDBACK_KINDS:
            raise ProtocolError(f"unknown feedback kind '{feedback_kind}'; "
                                f"library: {sorted(FEEDBACK_KINDS)}")
        return FeedbackEvent(feedback_kind, issued_at=clock)
    if kind == "door_command":
        door = message.get("door")
        if not isinstance(door, str) or not door:
            raise ProtocolError("door_command requires a 'door' id")
        return DoorCommand(door, issued_at=clock)
    raise ProtocolError(f"unknown message type '{kind}'")


def hello_message(scenario: Scenario, seq: int, feedback_enabled: bool) -> bytes:
    world = scenario.world
    payload = {
        "protocol": PROTOCOL_VERSION,
        "scenario": scenario.name,
        "n_robots": scenario.n_robots,
        "dt": 0.5,
        "feedback_enabled": feedback_enabled,
        "feedback_kinds": list(FEEDBACK_KINDS),
        "map": {
            "nodes": [{"id": n.node_id, "x": _round3(n.x), "y": _round3(n.y)}
                      for n in world.nodes],
            "edges": [{"from": e.a, "to": e.b,
                       **({"door": e.door_id} if e.door_id else {})}
                      for e in world.edges],
            "doors": [{"id": d.door_id, "assisted": d.assisted} for d in world.doors],
            "stations": [{"id": s.station_id, "node": s.node_id, "kind": s.kind}
                         for s in world.stations],
        },
    }
    message = {"type": "hello", "seq": seq, "payload": payload}
    return json.dumps(message, sort_keys=True, separators=(",", ":")).encode()


class LiveServer:
    """Runs one live trial and bridges it to browser clients."""

    def __init__(self, scenario: Scenario, *, seed: int = 1, feedback_enabled: bool = True,
                 tick_interval: float = 0.5, static_dir: Path | None = None):
        self.scenario = scenario
        self.feedback_enabled = feedback_enabled
        self.tick_interval = tick_interval
        self.trial = Trial(scenario, seed, feedback_enabled, virtual_human=False)
        self.static_dir = static_dir if static_dir is not None else self._default_static_dir()

        self._out_seq = 0
        self._latest: bytes | None = None
        self._clients: set[asyncio.Event] = set()
        self._resume = asyncio.Event()
        self._runner: web.AppRunner | None = None
        self._tick_task: asyncio.Task | None = None
        self.port: int | None = None

    @staticmethod
    def _default_static_dir() -> Path:
        return Path(__file__).resolve().parents[2] / "frontend"

    # -- tick loop -----------------------------------------------------------

    async def _tick_loop(self):
        while not self.trial.finished:
            if not self._clients:
                self._resume.clear()
                await self._resume.wait()  # disconnect pauses the live trial clock
            frame = self.trial.tick()
            self._out_seq += 1
            self._latest = encode_frame(frame, self._out_seq)
            for event in self._clients:
                event.set()
            if self.tick_interval > 0:
                await asyncio.sleep(self.tick_interval)
            else:
                await asyncio.sleep(0)

    # -- websocket -----------------------------------------------------------

    async def _ws_handler(self, request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        wakeup = asyncio.Event()
        self._clients.add(wakeup)
        self._resume.set()
        self._out_seq += 1
        await ws.send_bytes(hello_message(self.scenario, self._out_seq,
                                          self.feedback_enabled))

        async def sender():
            last_sent = 0
            while not ws.closed:
                await wakeup.wait()
                wakeup.clear()
                latest = self._latest
                if latest is None:
                    continue
                seq = json.loads(latest)["seq"]
                if seq > last_sent:  # coalesced: only ever the newest frame
                    last_sent = seq
                    await ws.send_bytes(latest)

        sender_task = asyncio.create_task(sender())
        try:
            async for message in ws:
                if message.type != WSMsgType.TEXT:
                    continue
                self._out_seq += 1
                try:
                    event = decode_feedback(message.data, clock=self.trial.clock)
                    if isinstance(event, FeedbackEvent) and not self.feedback_enabled:
                        raise ProtocolError("feedback channel is disabled")
                    if isinstance(event, DoorCommand) and not self.trial.world.has_door(event.door_id):
                        raise ProtocolError(f"unknown door '{event.door_id}'")
                    self.trial.inbox.append(event)
                    ack = {"type": "ack", "seq": self._out_seq,
                           "payload": {"accepted": True,
                                       "kind": getattr(event, "kind", None)
                                       or getattr(event, "door_id", None),
                                       "at_tick": round(self.trial.clock, 3)}}
                    await ws.send_bytes(json.dumps(ack, sort_keys=True,
                                                   separators=(",", ":")).encode())
                except ProtocolError as err:
                    error = {"type": "error", "seq": self._out_seq,
                             "payload": {"message": str(err)}}
                    await ws.send_bytes(json.dumps(error, sort_keys=True,
                                                   separators=(",", ":")).encode())
        finally:
            sender_task.cancel()
            self._clients.discard(wakeup)
        return ws

    # -- http ----------------------------------------------------------------

    async def _index(self, _request: web.Request) -> web.Response:
        index = self.static_dir / "index.html"
        if index.exists():
            return web.Response(text=index.read_text(), content_type="text/html")
        return web.Response(
            text="<html><body><h1>arn-sim live</h1>"
                 "<p>Operator UI is not built; connect to <code>/ws</code> directly "
                 "or build the frontend (see README).</p></body></html>",
            content_type="text/html")

    def _build_app(self) -> web.Application:
        app = web.Application()
        app.router.add_get("/", self._index)
        app.router.add_get("/ws", self._ws_handler)
        dist = self.static_dir / "dist"
        if dist.exists():
            app.router.add_static("/dist", dist)
        return app

    # -- lifecycle -------------------------------------------------------------

    async def start(self, port: int = DEFAULT_PORT) -> int:
        self._runner = web.AppRunner(self._build_app())
        await self._runner.setup()
        site = web.TCPSite(self._runner, "0.0.0.0", port)
        await site.start()
        self.port = site._server.sockets[0].getsockname()[1]  # resolves port 0
        self._tick_task = asyncio.create_task(self._tick_loop())
        return self.port

    async def stop(self):
        if self._tick_task is not None:
            self._tick_task.cancel()
        if self._runner is not None:
            await self._runner.cleanup()


def serve(scenario: Scenario, *, port: int = DEFAULT_PORT, seed: int = 1,
          feedback_enabled: bool = True, tick_interval: float = 0.5):
    """Run the live server until interrupted."""

    async def _main():
        server = LiveServer(scenario, seed=seed, feedback_enabled=feedback_enabled,
                            tick_interval=tick_interval)
        bound = await server.start(port)
        print(f"live mode on http://localhost:{bound} (ws at /ws); Ctrl-C to stop")
        try:
            while not server.trial.finished:
                await asyncio.sleep(1.0)
            print("trial finished")
        finally:
            await server.stop()

    try:
        asyncio.run(_main())
    except KeyboardInterrupt:
        pass
