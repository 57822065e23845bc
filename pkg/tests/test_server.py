"""Wire protocol: snapshots, acknowledgements, errors, broadcast."""

import asyncio
import base64
import json

import websockets

from scopesim.config import build_scope
from scopesim.display import serialize
from scopesim.gateway import Command, run_session
from scopesim.scope import Key
from scopesim.server import GatewayServer, apply_wire_command

CAL_CONFIG = {"front_end": {"probe_to_cal": [True, False]}}


def run_scenario(coro_factory, config=None, timeout=30.0):
    """Spin up a gateway on an ephemeral port and drive it with a client
    coroutine receiving (uri, server)."""

    async def main():
        scope = build_scope(config or CAL_CONFIG)
        gateway = GatewayServer(scope, iteration_sleep=0)
        async with websockets.serve(gateway.handler, "127.0.0.1", 0) as server:
            port = server.sockets[0].getsockname()[1]
            sim = asyncio.create_task(gateway.sim_loop())
            try:
                return await asyncio.wait_for(
                    coro_factory(f"ws://127.0.0.1:{port}", gateway), timeout
                )
            finally:
                sim.cancel()

    return asyncio.run(main())


async def recv_json(ws):
    return json.loads(await ws.recv())


async def next_of_kind(ws, kind):
    while True:
        msg = await recv_json(ws)
        if msg["kind"] == kind:
            return msg


class TestSnapshots:
    def test_snapshot_fields(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                snap = await next_of_kind(ws, "snapshot")
                payload = snap["payload"]
                fb = base64.b64decode(payload["framebuffer"])
                assert len(fb) == 1056
                assert payload["leds"].count(True) == 1
                assert payload["status_text"].startswith("A N=5")
                assert payload["collect_state"] in ("armed", "triggered", "done", "display")
                assert isinstance(payload["tick"], int)

        run_scenario(scenario)

    def test_key_press_acked_and_reflected(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send(json.dumps({"kind": "key_press", "id": 7, "payload": {"key": "K1"}}))
                ack = await next_of_kind(ws, "ack")
                assert ack["payload"] == {"id": 7, "acked": "key_press"}
                while True:
                    snap = await next_of_kind(ws, "snapshot")
                    if snap["payload"]["status_text"].startswith("TR"):
                        return

        run_scenario(scenario)

    def test_two_clients_see_identical_sequences(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as a, websockets.connect(uri) as b:
                # the connection-time snapshot depends on join time; align
                # the broadcast streams by tick and compare the overlap
                seq_a = [await next_of_kind(a, "snapshot") for _ in range(8)]
                seq_b = [await next_of_kind(b, "snapshot") for _ in range(8)]
                by_tick_a = {s["payload"]["tick"]: s["payload"] for s in seq_a}
                by_tick_b = {s["payload"]["tick"]: s["payload"] for s in seq_b}
                common = sorted(set(by_tick_a) & set(by_tick_b))
                assert len(common) >= 4
                for tick in common:
                    assert by_tick_a[tick] == by_tick_b[tick]

        run_scenario(scenario)


class TestErrors:
    def test_unknown_kind(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send(json.dumps({"kind": "reboot", "id": 1}))
                err = await next_of_kind(ws, "error")
                assert err["payload"]["reason"] == "unknown kind"
                # connection survives: a valid command still works
                await ws.send(json.dumps({"kind": "key_press", "id": 2, "payload": {"key": "K6"}}))
                ack = await next_of_kind(ws, "ack")
                assert ack["payload"]["id"] == 2

        run_scenario(scenario)

    def test_malformed_json(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send("{broken")
                err = await next_of_kind(ws, "error")
                assert "JSON" in err["payload"]["reason"]

        run_scenario(scenario)

    def test_bad_key_rejected_but_acknowledged_once(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send(json.dumps({"kind": "key_press", "id": 3, "payload": {"key": "K0"}}))
                err = await next_of_kind(ws, "error")
                assert err["payload"]["id"] == 3

        run_scenario(scenario)


class TestCommands:
    def test_config_patch_changes_sources(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                patch = {
                    "kind": "config_patch",
                    "id": "p1",
                    "payload": {
                        "sources": [
                            {"kind": "sine", "frequency": 440, "amplitude": 1.0, "offset": 1.65},
                            {"kind": "dc"},
                        ]
                    },
                }
                await ws.send(json.dumps(patch))
                ack = await next_of_kind(ws, "ack")
                assert ack["payload"]["acked"] == "config_patch"
                assert gateway.scope.hw.sources[0].frequency == 440

        run_scenario(scenario)

    def test_cal_start_runs_calibration(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send(json.dumps({"kind": "cal_start", "id": 9, "payload": {"probe": 0}}))
                ack = await next_of_kind(ws, "ack")
                assert ack["payload"]["acked"] == "cal_start"
                cal = gateway.scope.sys.cal[0]
                assert (cal.high, cal.low) == (4095, 0)
                # the temporary cal hookup is undone afterwards
                assert gateway.scope.hw.front_end.probe_to_cal == [True, False]

        run_scenario(scenario, config=CAL_CONFIG)

    def test_channel_toggle_reflects_in_status_flags(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send(json.dumps({"kind": "key_press", "id": 5, "payload": {"key": "chan_b"}}))
                await next_of_kind(ws, "ack")
                while True:
                    snap = await next_of_kind(ws, "snapshot")
                    if " YY " in snap["payload"]["status_text"]:
                        return

        run_scenario(scenario)

    def test_arm_single(self):
        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send(json.dumps({"kind": "key_press", "id": 1, "payload": {"key": "K1"}}))
                await next_of_kind(ws, "ack")
                for _ in range(3):  # cycle Auto -> TR -> TF -> Single
                    await ws.send(json.dumps({"kind": "key_press", "payload": {"key": "K1"}}))
                    await next_of_kind(ws, "ack")
                await ws.send(json.dumps({"kind": "arm_single", "id": 4}))
                ack = await next_of_kind(ws, "ack")
                assert ack["payload"]["acked"] == "arm_single"
                while True:
                    snap = await next_of_kind(ws, "snapshot")
                    if snap["payload"]["collect_state"] == "display":
                        return

        run_scenario(scenario)


class TestWireScriptEquivalence:
    def test_same_commands_same_framebuffer(self):
        """A key sequence delivered over the wire produces the same frames
        as the identical scripted session at matching ticks."""

        async def scenario(uri, gateway):
            async with websockets.connect(uri) as ws:
                await next_of_kind(ws, "snapshot")
                await ws.send(json.dumps({"kind": "key_press", "payload": {"key": "K2"}}))
                ack = await next_of_kind(ws, "ack")
                assert ack["kind"] == "ack"
                while gateway.scope.sys.tick < 300_000:
                    await asyncio.sleep(0)
                return

        run_scenario(scenario, config=CAL_CONFIG)
        # note: wall-clock arrival decides which boundary the wire key lands
        # on, so tick-exact equivalence is asserted on the shared command
        # path instead (below), not across a racy socket.

    def test_shared_command_path_is_tick_exact(self):
        def session(apply_via_wire):
            scope = build_scope(CAL_CONFIG)
            scope.run_until(8192)
            if apply_via_wire:
                apply_wire_command(scope, "key_press", {"key": "K2"})
            else:
                run_session(scope, [Command(action="key_press", at_tick=8192, key=Key.K2)])
            scope.run_until(400_000)
            return serialize(scope.fb), scope.sys.tick

        assert session(True) == session(False)
