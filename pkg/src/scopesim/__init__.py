"""Deterministic virtual oscilloscope.

Signal sources and an analog front end feed an eight-channel scanning
12-bit ADC whose interrupt-copy timing race is modeled tick-exactly; a
four-state trigger machine drives acquisitions onto a bit-exact 128x64
monochrome framebuffer. Sessions replay deterministically from JSON
scripts or run live behind a small wire protocol.
"""

from .adc import (
    AdcTimingConfig,
    ChannelBuffer,
    IsrTimingConfig,
    conversion_period_ticks,
    extract_result,
    postproc_samples,
    quantize,
    scan_and_isr_copy,
)
from .config import ConfigError, build_scope, init_system, load_config_file
from .display import (
    FrameBuffer,
    PlotConfig,
    deserialize,
    draw_text,
    lit_pixels,
    plot_at,
    plot_data,
    render_status,
    serialize,
    status_text,
    to_pbm,
)
from .gateway import export_csv, load_script, run_headless, run_session
from .scope import Hardware, Key, LedState, Scope, SysState, led_state
from .signals import (
    CalPinState,
    FrontEndConfig,
    SignalKind,
    SignalSpec,
    cal_pin_voltage,
    front_end_voltage,
    voltage_at,
)
from .trigger import CollectState, EdgeDetector, TriggerMode, edge_event

__all__ = [
    "AdcTimingConfig",
    "CalPinState",
    "ChannelBuffer",
    "CollectState",
    "ConfigError",
    "EdgeDetector",
    "FrameBuffer",
    "FrontEndConfig",
    "Hardware",
    "IsrTimingConfig",
    "Key",
    "LedState",
    "PlotConfig",
    "Scope",
    "SignalKind",
    "SignalSpec",
    "SysState",
    "TriggerMode",
    "build_scope",
    "cal_pin_voltage",
    "conversion_period_ticks",
    "deserialize",
    "draw_text",
    "edge_event",
    "export_csv",
    "extract_result",
    "front_end_voltage",
    "init_system",
    "led_state",
    "lit_pixels",
    "load_config_file",
    "load_script",
    "plot_at",
    "plot_data",
    "postproc_samples",
    "quantize",
    "render_status",
    "run_headless",
    "run_session",
    "scan_and_isr_copy",
    "serialize",
    "status_text",
    "to_pbm",
    "voltage_at",
]
