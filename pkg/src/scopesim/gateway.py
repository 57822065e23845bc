"""Headless session driver: scripted replay, CSV export, PBM snapshots.

A script is a JSON-lines file of {"at_tick": N, "action": ...} records,
validated in full before anything executes. Key presses are queued for
the keypad poll at the next loop boundary; physical actions (jumpers,
touching a probe to the calibration pin) take effect at their exact tick.
The same Command objects carry live wire messages, so a scripted session
and an interactive one follow an identical code path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .config import ConfigError, _as_bool, _as_dict, _as_int, _as_list
from .display import to_pbm
from .scope import Key, Scope
from .signals import Jumper

ACTIONS = (
    "key_press",
    "connect_probe_to_cal",
    "set_jumpers",
    "arm_single",
    "snapshot",
    "export_csv",
)

_KEYS = {k.value: k for k in Key if k is not Key.NONE}


class ScriptError(ValueError):
    pass


class NoCompletedAcquisition(RuntimeError):
    pass


@dataclass
class Command:
    """One validated operator action."""

    action: str
    at_tick: int = 0
    key: Key | None = None
    probe: int = 0
    connected: bool = True
    jumpers: list[Jumper] | None = None
    path: str | None = None


def apply_command(scope: Scope, cmd: Command) -> None:
    """Apply one command to a running instrument. Artifact-producing
    actions (snapshot, export_csv) are handled by the caller, which owns
    the output paths."""
    if cmd.action == "key_press":
        scope.queue_key(cmd.key)
    elif cmd.action == "arm_single":
        scope.queue_key(Key.K5)
    elif cmd.action == "connect_probe_to_cal":
        scope.hw.front_end.probe_to_cal[cmd.probe] = cmd.connected
    elif cmd.action == "set_jumpers":
        scope.hw.front_end.jumper = list(cmd.jumpers)


def export_csv(probe0: list[int], probe1: list[int] | None = None) -> bytes:
    """CSV of one completed acquisition: header then 128 decimal rows,
    LF line endings, no floats anywhere in the path."""
    if probe1 is None:
        lines = ["index,ch0"] + [f"{i},{v}" for i, v in enumerate(probe0)]
    else:
        lines = ["index,ch0,ch1"] + [
            f"{i},{a},{b}" for i, (a, b) in enumerate(zip(probe0, probe1))
        ]
    return ("\n".join(lines) + "\n").encode("ascii")


def parse_csv(data: bytes) -> tuple[list[int], list[int] | None]:
    lines = data.decode("ascii").strip().split("\n")
    dual = lines[0] == "index,ch0,ch1"
    probe0, probe1 = [], []
    for line in lines[1:]:
        parts = line.split(",")
        probe0.append(int(parts[1]))
        if dual:
            probe1.append(int(parts[2]))
    return probe0, (probe1 if dual else None)


def scope_csv(scope: Scope) -> bytes:
    if scope.waveforms is None:
        raise NoCompletedAcquisition("no completed acquisition to export")
    probe0, probe1 = scope.waveforms
    return export_csv(probe0, probe1)


def _parse_record(obj: Any, where: str) -> Command:
    d = _as_dict(obj, where)
    action = d.get("action")
    if action not in ACTIONS:
        raise ScriptError(f"{where}: unknown action {action!r} (expected one of {ACTIONS})")
    at_tick = _as_int(d.get("at_tick", 0), f"{where}.at_tick")
    if at_tick < 0:
        raise ScriptError(f"{where}.at_tick: must be >= 0")
    cmd = Command(action=action, at_tick=at_tick)
    if action == "key_press":
        key = d.get("key")
        if key not in _KEYS:
            raise ScriptError(f"{where}.key: expected one of {sorted(_KEYS)}, got {key!r}")
        cmd.key = _KEYS[key]
    elif action == "connect_probe_to_cal":
        cmd.probe = _as_int(d.get("probe", 0), f"{where}.probe")
        if cmd.probe not in (0, 1):
            raise ScriptError(f"{where}.probe: must be 0 or 1")
        cmd.connected = _as_bool(d.get("connected", True), f"{where}.connected")
    elif action == "set_jumpers":
        entries = _as_list(d.get("jumpers"), 8, f"{where}.jumpers")
        jumpers = []
        for i, e in enumerate(entries):
            names = {j.value: j for j in Jumper}
            if e not in names:
                raise ScriptError(f"{where}.jumpers[{i}]: expected one of {sorted(names)}")
            jumpers.append(names[e])
        cmd.jumpers = jumpers
    elif action in ("snapshot", "export_csv"):
        path = d.get("path")
        if path is not None and not isinstance(path, str):
            raise ScriptError(f"{where}.path: expected a string")
        cmd.path = path
    return cmd


def load_script(path: str) -> list[Command]:
    """Parse and validate a whole script before execution. at_tick must
    be non-decreasing so replay order is the file order."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise ScriptError(f"script file not found: {path}") from None
    commands = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        where = f"{path}:{lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ScriptError(f"{where}: not valid JSON: {exc}") from exc
        try:
            commands.append(_parse_record(obj, where))
        except ConfigError as exc:
            raise ScriptError(str(exc)) from exc
        if len(commands) >= 2 and commands[-1].at_tick < commands[-2].at_tick:
            raise ScriptError(
                f"{where}: at_tick {commands[-1].at_tick} is out of order "
                f"(previous record is at {commands[-2].at_tick})"
            )
    return commands


@dataclass
class HeadlessResult:
    scope: Scope
    artifacts: dict[str, bytes] = field(default_factory=dict)


def run_session(
    scope: Scope,
    commands: list[Command],
    *,
    ticks: int | None = None,
    csv_path: str | None = None,
    snapshot_path: str | None = None,
) -> HeadlessResult:
    """Replay validated commands against an instrument, then run out the
    clock to `ticks` (an absolute tick count) and collect artifacts."""
    artifacts: dict[str, bytes] = {}
    for cmd in commands:
        scope.run_until(cmd.at_tick)
        if cmd.action == "snapshot":
            artifacts[cmd.path or snapshot_path or "snapshot.pbm"] = to_pbm(scope.fb)
        elif cmd.action == "export_csv":
            artifacts[cmd.path or csv_path or "capture.csv"] = scope_csv(scope)
        else:
            apply_command(scope, cmd)
    if ticks is not None:
        scope.run_until(ticks)
    if csv_path is not None:
        artifacts[csv_path] = scope_csv(scope)
    if snapshot_path is not None:
        artifacts[snapshot_path] = to_pbm(scope.fb)
    return HeadlessResult(scope=scope, artifacts=artifacts)


def run_headless(
    config_path: str | None,
    script_path: str | None,
    *,
    ticks: int | None = None,
    csv_path: str | None = None,
    snapshot_path: str | None = None,
    allow_unsafe_adc_n: bool = False,
) -> int:
    """CLI back end: build, validate, replay, write artifacts.

    Returns a process exit status; diagnostics go to stderr via the
    raised error's message (the CLI prints them)."""
    from .config import build_scope, load_config_file

    raw = load_config_file(config_path) if config_path else None
    scope = build_scope(raw, allow_unsafe_adc_n=allow_unsafe_adc_n)
    commands = load_script(script_path) if script_path else []
    result = run_session(
        scope, commands, ticks=ticks, csv_path=csv_path, snapshot_path=snapshot_path
    )
    for path, data in result.artifacts.items():
        with open(path, "wb") as fh:
            fh.write(data)
    return 0
