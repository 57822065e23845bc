"""Live gateway service: the instrument behind a WebSocket wire protocol.

Messages are JSON texts with a "kind" field. The service pushes a
"snapshot" after every main-loop iteration in which the framebuffer,
LEDs, or status line changed; clients send commands ("key_press",
"config_patch", "arm_single", "cal_start") and every command is answered
exactly once with "ack" or "error". Commands are applied at loop
boundaries in arrival order; nothing mutates the instrument mid-iteration.
"""

from __future__ import annotations

import asyncio
import base64
import json
from dataclasses import dataclass
from typing import Any

import websockets

from .config import ConfigError, build_scope, load_config_file, parse_cal_pin, parse_front_end, parse_source
from .display import serialize
from .gateway import _KEYS
from .scope import LOOP_TICKS, Scope

COMMAND_KINDS = ("key_press", "config_patch", "arm_single", "cal_start")


def snapshot_payload(scope: Scope) -> dict:
    return {
        "framebuffer": base64.b64encode(serialize(scope.fb)).decode("ascii"),
        "leds": list(scope.led_state().leds),
        "status_text": scope.status_text(),
        "collect_state": scope.sys.collect_state.value,
        "tick": scope.sys.tick,
    }


def _snapshot_message(scope: Scope) -> str:
    return json.dumps({"kind": "snapshot", "payload": snapshot_payload(scope)})


def _ack(msg_id: Any, kind: str) -> str:
    return json.dumps({"kind": "ack", "payload": {"id": msg_id, "acked": kind}})


def _error(msg_id: Any, reason: str) -> str:
    return json.dumps({"kind": "error", "payload": {"id": msg_id, "reason": reason}})


def apply_wire_command(scope: Scope, kind: str, payload: dict) -> None:
    """Apply one already-validated client command. Raises ConfigError or
    ValueError with a reason suitable for an error reply."""
    if kind == "key_press":
        key = payload.get("key")
        if key not in _KEYS:
            raise ValueError(f"unknown key {key!r}")
        scope.queue_key(_KEYS[key])
    elif kind == "arm_single":
        scope.queue_key(_KEYS["K5"])
    elif kind == "cal_start":
        probe = payload.get("probe")
        if probe not in (0, 1):
            raise ValueError("cal_start requires probe 0 or 1")
        was_connected = scope.hw.front_end.probe_to_cal[probe]
        scope.hw.front_end.probe_to_cal[probe] = True
        try:
            scope.calibrate_probe(probe)
        finally:
            scope.hw.front_end.probe_to_cal[probe] = was_connected
    elif kind == "config_patch":
        if "sources" in payload:
            entries = payload["sources"]
            if not isinstance(entries, list) or len(entries) != 2:
                raise ConfigError("patch.sources: expected a list of 2 sources")
            scope.hw.sources = [
                parse_source(e, f"patch.sources[{i}]") for i, e in enumerate(entries)
            ]
        if "front_end" in payload:
            scope.hw.front_end = parse_front_end(payload["front_end"], "patch.front_end")
        if "cal_pin" in payload:
            scope.hw.cal_pin = parse_cal_pin(payload["cal_pin"], "patch.cal_pin")
    else:
        raise ValueError("unknown kind")


@dataclass
class _PendingCommand:
    ws: Any
    msg_id: Any
    kind: str
    payload: dict


class GatewayServer:
    """One instrument, any number of watching and controlling clients."""

    def __init__(self, scope: Scope, iteration_sleep: float = 0.001):
        self.scope = scope
        self.iteration_sleep = iteration_sleep
        self.clients: set = set()
        self.commands: asyncio.Queue[_PendingCommand] = asyncio.Queue()
        self._last_digest: bytes | None = None

    async def handler(self, ws) -> None:
        self.clients.add(ws)
        try:
            await ws.send(_snapshot_message(self.scope))
            async for raw in ws:
                msg_id = None
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send(_error(None, "not valid JSON"))
                    continue
                if not isinstance(msg, dict):
                    await ws.send(_error(None, "expected a JSON object"))
                    continue
                msg_id = msg.get("id")
                kind = msg.get("kind")
                if kind not in COMMAND_KINDS:
                    await ws.send(_error(msg_id, "unknown kind"))
                    continue
                payload = msg.get("payload", {})
                if not isinstance(payload, dict):
                    await ws.send(_error(msg_id, "payload must be an object"))
                    continue
                await self.commands.put(_PendingCommand(ws, msg_id, kind, payload))
        finally:
            self.clients.discard(ws)

    async def _drain_commands(self) -> None:
        while not self.commands.empty():
            cmd = self.commands.get_nowait()
            try:
                apply_wire_command(self.scope, cmd.kind, cmd.payload)
            except (ConfigError, ValueError) as exc:
                reply = _error(cmd.msg_id, str(exc))
            else:
                reply = _ack(cmd.msg_id, cmd.kind)
            try:
                await cmd.ws.send(reply)
            except websockets.exceptions.ConnectionClosed:
                pass

    async def _broadcast_if_changed(self) -> None:
        digest = serialize(self.scope.fb) + bytes(self.scope.led_state().leds) + (
            self.scope.status_text().encode()
        )
        if digest == self._last_digest:
            return
        self._last_digest = digest
        if not self.clients:
            return
        message = _snapshot_message(self.scope)
        for ws in list(self.clients):
            try:
                await ws.send(message)
            except websockets.exceptions.ConnectionClosed:
                self.clients.discard(ws)

    async def sim_loop(self) -> None:
        while True:
            await self._drain_commands()
            self.scope.tick(LOOP_TICKS)
            await self._broadcast_if_changed()
            if self.iteration_sleep:
                await asyncio.sleep(self.iteration_sleep)
            else:
                await asyncio.sleep(0)

    async def run(self, port: int, ready: asyncio.Event | None = None) -> None:
        async with websockets.serve(self.handler, "127.0.0.1", port):
            if ready is not None:
                ready.set()
            await self.sim_loop()


def serve(
    port: int,
    *,
    config_path: str | None = None,
    allow_unsafe_adc_n: bool = False,
    iteration_sleep: float = 0.001,
) -> None:
    """Blocking entry point used by the CLI."""
    raw = load_config_file(config_path) if config_path else None
    scope = build_scope(raw, allow_unsafe_adc_n=allow_unsafe_adc_n)
    server = GatewayServer(scope, iteration_sleep=iteration_sleep)
    print(f"scopesim gateway listening on ws://127.0.0.1:{port}")
    asyncio.run(server.run(port))
