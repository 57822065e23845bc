"""Test-signal sources and the analog path from source to ADC pin.

Everything here is a pure function of (configuration, time in seconds):
a source waveform is routed by the jumper header to one of two probes,
attenuated by the probe ratio, and on channel 7 optionally loaded by the
board potentiometer. Safe to evaluate from any context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

RAIL_VOLTS = 3.3

# RC source time constant, as a fraction of one period: tau = period / 5,
# so the envelope decays to ~0.7% of amplitude before the next reset.
RC_TAU_PER_PERIOD = 5.0


class SignalKind(Enum):
    SQUARE = "square"
    SINE = "sine"
    RC_DECAY = "rc_decay"
    DC = "dc"
    TABLE = "table"


PERIODIC_KINDS = (SignalKind.SQUARE, SignalKind.SINE, SignalKind.RC_DECAY)


@dataclass
class SignalSpec:
    """One waveform source.

    amplitude is the peak for SINE and the high level above offset for
    SQUARE and RC_DECAY. DC sources sit at offset. TABLE sources
    interpolate linearly between (seconds, volts) breakpoints and clamp
    outside them.
    """

    kind: SignalKind
    frequency: float = 0.0
    amplitude: float = 0.0
    offset: float = 0.0
    phase: float = 0.0
    duty: float = 0.5
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind in PERIODIC_KINDS and self.frequency <= 0:
            raise ValueError(f"{self.kind.value} source requires frequency > 0")
        if self.kind is SignalKind.SQUARE and not 0.0 < self.duty < 1.0:
            raise ValueError(f"duty must be within (0, 1), got {self.duty}")
        if self.kind is SignalKind.TABLE:
            if not self.table:
                raise ValueError("table source requires at least one breakpoint")
            times = [p[0] for p in self.table]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ValueError("table breakpoints must be strictly increasing in time")


def _cycle_fraction(spec: SignalSpec, t: float) -> float:
    cycles = t * spec.frequency + spec.phase / (2.0 * math.pi)
    return cycles - math.floor(cycles)


def voltage_at(spec: SignalSpec, t: float) -> float:
    """Source voltage at time t (seconds). Total and deterministic."""
    if spec.kind is SignalKind.DC:
        return spec.offset
    if spec.kind is SignalKind.SINE:
        return spec.offset + spec.amplitude * math.sin(
            2.0 * math.pi * spec.frequency * t + spec.phase
        )
    if spec.kind is SignalKind.SQUARE:
        frac = _cycle_fraction(spec, t)
        return spec.offset + spec.amplitude if frac < spec.duty else spec.offset
    if spec.kind is SignalKind.RC_DECAY:
        frac = _cycle_fraction(spec, t)
        return spec.offset + spec.amplitude * math.exp(-frac * RC_TAU_PER_PERIOD)
    # TABLE: linear interpolation, clamped at both ends
    pts = spec.table
    if t <= pts[0][0]:
        return pts[0][1]
    if t >= pts[-1][0]:
        return pts[-1][1]
    for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
        if t0 <= t <= t1:
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    raise AssertionError("unreachable: table breakpoints are ordered")


class Jumper(Enum):
    PROBE0 = "probe0"
    PROBE1 = "probe1"
    OPEN = "open"


class ProbeRatio(Enum):
    ONE_TO_ONE = "1:1"
    FIVE_TO_ONE = "5:1"


@dataclass
class Ch7Pot:
    """Potentiometer wired to the channel-7 pin on the host board."""

    enabled: bool = False
    wiper_voltage: float = 1.0
    pot_impedance: float = 10_000.0


@dataclass
class FrontEndConfig:
    """Routing and loading between the two probes and the 8 ADC pins.

    jumper entries are independently settable; mis-jumpering is a legal
    state. probe_to_cal models the operator touching a probe tip to the
    board's calibration pin instead of its configured source.
    """

    jumper: list[Jumper] = field(default_factory=lambda: [Jumper.PROBE0] * 8)
    probe_ratio: list[ProbeRatio] = field(
        default_factory=lambda: [ProbeRatio.ONE_TO_ONE, ProbeRatio.ONE_TO_ONE]
    )
    probe_series_impedance: list[float] = field(default_factory=lambda: [0.0, 0.0])
    ch7_pot: Ch7Pot = field(default_factory=Ch7Pot)
    probe_to_cal: list[bool] = field(default_factory=lambda: [False, False])


class CalPinMode(Enum):
    PWM = "pwm"
    GPIO_DRIVE = "gpio_drive"


class DriveLevel(Enum):
    HIGH = "high"
    LOW = "low"


@dataclass
class CalPinState:
    mode: CalPinMode = CalPinMode.PWM
    drive_level: DriveLevel = DriveLevel.LOW
    pwm_frequency: float = 2500.0

    def __post_init__(self) -> None:
        if self.pwm_frequency <= 0:
            raise ValueError("pwm_frequency must be > 0")


def cal_pin_voltage(cal: CalPinState, t: float) -> float:
    """Calibration pin output: a 0/3.3 V square at 50% duty in PWM mode,
    a driven rail in GPIO mode."""
    if cal.mode is CalPinMode.GPIO_DRIVE:
        return RAIL_VOLTS if cal.drive_level is DriveLevel.HIGH else 0.0
    cycles = t * cal.pwm_frequency
    frac = cycles - math.floor(cycles)
    return RAIL_VOLTS if frac < 0.5 else 0.0


def front_end_voltage(
    cfg: FrontEndConfig,
    sources: list[SignalSpec],
    cal: CalPinState,
    channel: int,
    t: float,
) -> float:
    """Voltage at ADC pin `channel` at time t.

    Open jumpers read 0 V (grounded by design, not noise). A 5:1 probe
    divides by five, except into the enabled channel-7 pot where the
    probe's series impedance and the pot form a resistive divider pulling
    toward the wiper voltage.
    """
    if not 0 <= channel <= 7:
        raise ValueError(f"channel must be in 0..7, got {channel}")
    route = cfg.jumper[channel]
    if route is Jumper.OPEN:
        return 0.0
    probe = 0 if route is Jumper.PROBE0 else 1
    if cfg.probe_to_cal[probe]:
        v_src = cal_pin_voltage(cal, t)
    else:
        v_src = voltage_at(sources[probe], t)
    if channel == 7 and cfg.ch7_pot.enabled:
        r_series = cfg.probe_series_impedance[probe]
        r_pot = cfg.ch7_pot.pot_impedance
        return (v_src * r_pot + cfg.ch7_pot.wiper_voltage * r_series) / (r_pot + r_series)
    if cfg.probe_ratio[probe] is ProbeRatio.FIVE_TO_ONE:
        return v_src / 5.0
    return v_src
