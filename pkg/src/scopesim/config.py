"""Session configuration: JSON in, a fully built instrument out.

Every validation failure raises ConfigError naming the offending field by
its dotted path, so headless runs fail with a usable diagnostic.
"""

from __future__ import annotations

import json
from typing import Any

from .adc import AdcTimingConfig, IsrTimingConfig, OPERATIONAL_ADC_N_MAX, OPERATIONAL_ADC_N_MIN
from .display import VSCALE_CHOICES
from .scope import Hardware, Scope, SysState
from .signals import (
    CalPinMode,
    CalPinState,
    Ch7Pot,
    DriveLevel,
    FrontEndConfig,
    Jumper,
    ProbeRatio,
    SignalKind,
    SignalSpec,
)
from .trigger import TriggerMode


class ConfigError(ValueError):
    pass


_VSCALE_BY_NAME = {"1/4": 0.25, "1/2": 0.5, "1": 1.0, "2": 2.0, "4": 4.0}


def _fail(path: str, msg: str) -> None:
    raise ConfigError(f"{path}: {msg}")


def _as_dict(obj: Any, path: str) -> dict:
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    return obj


def _as_number(obj: Any, path: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        _fail(path, f"expected a number, got {obj!r}")
    return float(obj)


def _as_int(obj: Any, path: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        _fail(path, f"expected an integer, got {obj!r}")
    return obj


def _as_bool(obj: Any, path: str) -> bool:
    if not isinstance(obj, bool):
        _fail(path, f"expected true/false, got {obj!r}")
    return obj


def _as_enum(obj: Any, mapping: dict, path: str):
    if not isinstance(obj, str) or obj not in mapping:
        _fail(path, f"expected one of {sorted(mapping)}, got {obj!r}")
    return mapping[obj]


def _as_list(obj: Any, length: int, path: str) -> list:
    if not isinstance(obj, list) or len(obj) != length:
        _fail(path, f"expected a list of {length} entries")
    return obj


def parse_source(obj: Any, path: str) -> SignalSpec:
    d = _as_dict(obj, path)
    kind = _as_enum(d.get("kind"), {k.value: k for k in SignalKind}, f"{path}.kind")
    table = ()
    if "table" in d:
        raw = d["table"]
        if not isinstance(raw, list):
            _fail(f"{path}.table", "expected a list of [seconds, volts] pairs")
        pts = []
        for i, entry in enumerate(raw):
            pair = _as_list(entry, 2, f"{path}.table[{i}]")
            pts.append(
                (_as_number(pair[0], f"{path}.table[{i}][0]"),
                 _as_number(pair[1], f"{path}.table[{i}][1]"))
            )
        table = tuple(pts)
    try:
        return SignalSpec(
            kind=kind,
            frequency=_as_number(d.get("frequency", 0.0), f"{path}.frequency"),
            amplitude=_as_number(d.get("amplitude", 0.0), f"{path}.amplitude"),
            offset=_as_number(d.get("offset", 0.0), f"{path}.offset"),
            phase=_as_number(d.get("phase", 0.0), f"{path}.phase"),
            duty=_as_number(d.get("duty", 0.5), f"{path}.duty"),
            table=table,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_front_end(obj: Any, path: str) -> FrontEndConfig:
    d = _as_dict(obj, path)
    cfg = FrontEndConfig()
    if "jumpers" in d:
        entries = _as_list(d["jumpers"], 8, f"{path}.jumpers")
        cfg.jumper = [
            _as_enum(e, {j.value: j for j in Jumper}, f"{path}.jumpers[{i}]")
            for i, e in enumerate(entries)
        ]
    if "probe_ratio" in d:
        entries = _as_list(d["probe_ratio"], 2, f"{path}.probe_ratio")
        cfg.probe_ratio = [
            _as_enum(e, {r.value: r for r in ProbeRatio}, f"{path}.probe_ratio[{i}]")
            for i, e in enumerate(entries)
        ]
    if "probe_series_impedance" in d:
        entries = _as_list(d["probe_series_impedance"], 2, f"{path}.probe_series_impedance")
        cfg.probe_series_impedance = [
            _as_number(e, f"{path}.probe_series_impedance[{i}]")
            for i, e in enumerate(entries)
        ]
        for i, r in enumerate(cfg.probe_series_impedance):
            if r < 0:
                _fail(f"{path}.probe_series_impedance[{i}]", "must be >= 0")
    if "probe_to_cal" in d:
        entries = _as_list(d["probe_to_cal"], 2, f"{path}.probe_to_cal")
        cfg.probe_to_cal = [
            _as_bool(e, f"{path}.probe_to_cal[{i}]") for i, e in enumerate(entries)
        ]
    if "ch7_pot" in d:
        p = _as_dict(d["ch7_pot"], f"{path}.ch7_pot")
        pot = Ch7Pot(
            enabled=_as_bool(p.get("enabled", False), f"{path}.ch7_pot.enabled"),
            wiper_voltage=_as_number(p.get("wiper_voltage", 1.0), f"{path}.ch7_pot.wiper_voltage"),
            pot_impedance=_as_number(p.get("pot_impedance", 10_000.0), f"{path}.ch7_pot.pot_impedance"),
        )
        if pot.pot_impedance <= 0:
            _fail(f"{path}.ch7_pot.pot_impedance", "must be > 0")
        cfg.ch7_pot = pot
    return cfg


def parse_cal_pin(obj: Any, path: str) -> CalPinState:
    d = _as_dict(obj, path)
    try:
        return CalPinState(
            mode=_as_enum(
                d.get("mode", "pwm"), {m.value: m for m in CalPinMode}, f"{path}.mode"
            ),
            drive_level=_as_enum(
                d.get("drive_level", "low"),
                {l.value: l for l in DriveLevel},
                f"{path}.drive_level",
            ),
            pwm_frequency=_as_number(d.get("pwm_frequency", 2500.0), f"{path}.pwm_frequency"),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def build_scope(raw: Any = None, *, allow_unsafe_adc_n: bool = False) -> Scope:
    """Build a Scope from a parsed session-config object (None means all
    defaults). This is the single entry point the CLI and service use."""
    d = _as_dict(raw, "config") if raw is not None else {}

    hw = Hardware()
    if "sources" in d:
        entries = _as_list(d["sources"], 2, "config.sources")
        hw.sources = [parse_source(e, f"config.sources[{i}]") for i, e in enumerate(entries)]
    if "front_end" in d:
        hw.front_end = parse_front_end(d["front_end"], "config.front_end")
    if "cal_pin" in d:
        hw.cal_pin = parse_cal_pin(d["cal_pin"], "config.cal_pin")
    if "adc" in d:
        a = _as_dict(d["adc"], "config.adc")
        conversion_clocks = _as_int(a.get("conversion_clocks", 21), "config.adc.conversion_clocks")
        master_clock = _as_int(a.get("master_clock", 22_000_000), "config.adc.master_clock")
        vref = _as_number(a.get("vref", 3.3), "config.adc.vref")
        try:
            hw.adc = AdcTimingConfig(
                adc_n=hw.adc.adc_n,
                conversion_clocks=conversion_clocks,
                master_clock=master_clock,
                vref=vref,
            )
        except ValueError as exc:
            raise ConfigError(f"config.adc: {exc}") from exc
    if "isr" in d:
        i = _as_dict(d["isr"], "config.isr")
        hw.isr = IsrTimingConfig(
            entry_latency_ticks=_as_int(
                i.get("entry_latency_ticks", 10), "config.isr.entry_latency_ticks"
            ),
            per_register_copy_ticks=_as_int(
                i.get("per_register_copy_ticks", 75), "config.isr.per_register_copy_ticks"
            ),
        )
        if hw.isr.entry_latency_ticks < 0 or hw.isr.per_register_copy_ticks <= 0:
            _fail("config.isr", "latencies must be non-negative and copy ticks > 0")

    sys_state = SysState()
    if "sys" in d:
        s = _as_dict(d["sys"], "config.sys")
        if "trigger_mode" in s:
            sys_state.trigger_mode = _as_enum(
                s["trigger_mode"], {m.value: m for m in TriggerMode}, "config.sys.trigger_mode"
            )
        if "adc_n" in s:
            n = _as_int(s["adc_n"], "config.sys.adc_n")
            lo = 0 if allow_unsafe_adc_n else OPERATIONAL_ADC_N_MIN
            if not lo <= n <= OPERATIONAL_ADC_N_MAX:
                _fail("config.sys.adc_n", f"must be within [{lo}, {OPERATIONAL_ADC_N_MAX}] (got {n})")
            sys_state.adc_n = n
        if "vscale" in s:
            v = s["vscale"]
            if isinstance(v, str):
                if v not in _VSCALE_BY_NAME:
                    _fail("config.sys.vscale", f"expected one of {sorted(_VSCALE_BY_NAME)}")
                sys_state.vscale = _VSCALE_BY_NAME[v]
            else:
                vv = _as_number(v, "config.sys.vscale")
                if vv not in VSCALE_CHOICES:
                    _fail("config.sys.vscale", f"must be one of {VSCALE_CHOICES}")
                sys_state.vscale = vv
        if "ch_enabled" in s:
            entries = _as_list(s["ch_enabled"], 2, "config.sys.ch_enabled")
            sys_state.ch_enabled = [
                _as_bool(e, f"config.sys.ch_enabled[{i}]") for i, e in enumerate(entries)
            ]
            if not any(sys_state.ch_enabled):
                _fail("config.sys.ch_enabled", "at least one channel must be enabled")
            sys_state.buffer.required_samples = 256 if all(sys_state.ch_enabled) else 128

    hw.adc.adc_n = sys_state.adc_n
    return Scope(hw=hw, sys_state=sys_state)


def init_system(config: Any = None, *, allow_unsafe_adc_n: bool = False) -> Scope:
    """Fresh instrument with defaults: auto trigger, armed, adc_n=5,
    vscale x1, channel 0 enabled, full-scale calibration."""
    return build_scope(config, allow_unsafe_adc_n=allow_unsafe_adc_n)


def load_config_file(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
