"""Instrument controller: global state, the simulated clock, keypad
handling, the acquisition cycle, probe calibration, and the LEDs.

The whole instrument advances on one logical timeline. Hardware (pin
voltages, conversions, the edge detector) is evaluated tick-exactly
between main-loop boundaries; the firmware-side work (key polling, the
acquisition state machine, status and waveform drawing) happens once per
boundary, every LOOP_TICKS master ticks. All state transitions follow
Armed -> Triggered -> Done -> Display -> Armed, so any sampled trace of
collect_state is a stuttered prefix of that cycle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum

from .adc import (
    AdcTimingConfig,
    ChannelBuffer,
    IsrTimingConfig,
    OPERATIONAL_ADC_N_MAX,
    OPERATIONAL_ADC_N_MIN,
    conversion_period_ticks,
    postproc_samples,
    scan_and_isr_copy,
)
from .display import (
    FrameBuffer,
    PlotConfig,
    VSCALE_CHOICES,
    WAVEFORM_ROW_BOTTOM,
    WAVEFORM_ROW_TOP,
    clear_rows,
    draw_text,
    plot_data,
    render_status,
    status_text,
)
from .signals import (
    CalPinMode,
    CalPinState,
    DriveLevel,
    FrontEndConfig,
    SignalKind,
    SignalSpec,
    front_end_voltage,
)
from .trigger import (
    CollectState,
    Edge,
    EdgeDetector,
    EdgeScanner,
    MODE_CYCLE,
    TriggerMode,
)

# Main-loop cadence: one iteration per this many master ticks.
LOOP_TICKS = 2048


class Key(Enum):
    K1 = "K1"
    K2 = "K2"
    K3 = "K3"
    K4 = "K4"
    K5 = "K5"
    K6 = "K6"
    K7 = "K7"
    K8 = "K8"
    K9 = "K9"
    CHAN_A = "chan_a"
    CHAN_B = "chan_b"
    NONE = "none"


@dataclass
class ProbeCal:
    high: int = 4095
    low: int = 0


@dataclass
class SysState:
    trigger_mode: TriggerMode = TriggerMode.AUTO
    collect_state: CollectState = CollectState.ARMED
    adc_n: int = 5
    vscale: float = 1.0
    ch_enabled: list[bool] = field(default_factory=lambda: [True, False])
    cal: list[ProbeCal] = field(default_factory=lambda: [ProbeCal(), ProbeCal()])
    buffer: ChannelBuffer = field(default_factory=ChannelBuffer)
    tick: int = 0


@dataclass(frozen=True)
class LedState:
    """One LED per acquisition state; exactly one lit."""

    leds: tuple[bool, bool, bool, bool]


_STATE_ORDER = (
    CollectState.ARMED,
    CollectState.TRIGGERED,
    CollectState.DONE,
    CollectState.DISPLAY,
)


def led_state(sys_state: SysState) -> LedState:
    active = _STATE_ORDER.index(sys_state.collect_state)
    return LedState(tuple(i == active for i in range(4)))


@dataclass
class Hardware:
    """Everything outside the firmware: sources, front end, converter."""

    sources: list[SignalSpec] = field(
        default_factory=lambda: [
            SignalSpec(SignalKind.DC, offset=0.0),
            SignalSpec(SignalKind.DC, offset=0.0),
        ]
    )
    front_end: FrontEndConfig = field(default_factory=FrontEndConfig)
    cal_pin: CalPinState = field(default_factory=CalPinState)
    adc: AdcTimingConfig = field(default_factory=AdcTimingConfig)
    isr: IsrTimingConfig = field(default_factory=IsrTimingConfig)

    def pin_voltage(self, channel: int, t: float) -> float:
        return front_end_voltage(self.front_end, self.sources, self.cal_pin, channel, t)


class Scope:
    """The running instrument. Drive it with queue_key() and tick()."""

    def __init__(self, hw: Hardware | None = None, sys_state: SysState | None = None):
        self.hw = hw if hw is not None else Hardware()
        self.sys = sys_state if sys_state is not None else SysState()
        self.fb = FrameBuffer()
        self.key_queue: deque[Key] = deque()
        self.waveforms: tuple[list[int], list[int] | None] | None = None
        self.single_armed = False
        self.pending_cal: int | None = None
        self.capture_starts: list[int] = []
        self.state_log: list[CollectState] | None = None
        self._scanner: EdgeScanner | None = None
        self._adc_on = False
        self._adc_start = 0
        self._scans_done = 0
        self._adc_cfg = self.hw.adc
        self._capture_required = self.sys.buffer.required_samples
        self._need_plot = False
        # the firmware's first loop iteration runs at power-on
        self._loop_boundary()

    # ------------------------------------------------------------------
    # operator input

    def queue_key(self, key: Key) -> None:
        """Queue a key press; the keypad reports at most one key per
        main-loop poll, so each queued key lands on its own iteration."""
        if key is not Key.NONE:
            self.key_queue.append(key)

    def handle_key(self, key: Key) -> None:
        sys = self.sys
        if key is Key.K1:
            i = MODE_CYCLE.index(sys.trigger_mode)
            sys.trigger_mode = MODE_CYCLE[(i + 1) % len(MODE_CYCLE)]
        elif key is Key.K4:
            sys.adc_n = _clamp_adc_n(sys.adc_n - 1)
        elif key is Key.K6:
            sys.adc_n = _clamp_adc_n(sys.adc_n + 1)
        elif key is Key.K2:
            sys.vscale = _step_vscale(sys.vscale, +1)
        elif key is Key.K8:
            sys.vscale = _step_vscale(sys.vscale, -1)
        elif key is Key.K5:
            if sys.trigger_mode is TriggerMode.SINGLE:
                self.single_armed = True
        elif key is Key.K7:
            self.pending_cal = 0
            self._show_cal_prompt(0)
        elif key is Key.K9:
            self.pending_cal = 1
            self._show_cal_prompt(1)
        elif key is Key.K3:
            if self.pending_cal is not None:
                probe = self.pending_cal
                self.pending_cal = None
                self.calibrate_probe(probe)
        elif key in (Key.CHAN_A, Key.CHAN_B):
            idx = 0 if key is Key.CHAN_A else 1
            if sys.ch_enabled[idx] and not sys.ch_enabled[1 - idx]:
                return  # the last enabled channel cannot be switched off
            sys.ch_enabled[idx] = not sys.ch_enabled[idx]
            sys.buffer.required_samples = 256 if all(sys.ch_enabled) else 128

    # ------------------------------------------------------------------
    # time

    def tick(self, n: int) -> None:
        """Advance the master clock n ticks, running every loop boundary
        crossed. Calibration is modal and may advance time further."""
        if n <= 0:
            raise ValueError("tick count must be > 0")
        target = self.sys.tick + n
        while self.sys.tick < target:
            boundary = (self.sys.tick // LOOP_TICKS + 1) * LOOP_TICKS
            step = min(target, boundary)
            self._advance_hardware(step)
            self.sys.tick = step
            if step == boundary:
                self._loop_boundary()

    def run_until(self, tick: int) -> None:
        if tick > self.sys.tick:
            self.tick(tick - self.sys.tick)

    # ------------------------------------------------------------------
    # observables

    def led_state(self) -> LedState:
        return led_state(self.sys)

    def status_text(self) -> str:
        return status_text(self.sys)

    # ------------------------------------------------------------------
    # calibration

    def calibrate_probe(self, probe: int) -> None:
        """Measure the probe's response to driven rails and store the
        mean counts; a measurement with high <= low is rejected and the
        previous calibration kept. Blocks until both captures finish."""
        hw = self.hw
        self._finish_in_flight()
        pwm_freq = hw.cal_pin.pwm_frequency
        hw.cal_pin = CalPinState(
            mode=CalPinMode.GPIO_DRIVE, drive_level=DriveLevel.HIGH, pwm_frequency=pwm_freq
        )
        high = self._blocking_acquisition_mean(probe)
        hw.cal_pin = CalPinState(
            mode=CalPinMode.GPIO_DRIVE, drive_level=DriveLevel.LOW, pwm_frequency=pwm_freq
        )
        low = self._blocking_acquisition_mean(probe)
        hw.cal_pin = CalPinState(
            mode=CalPinMode.PWM, drive_level=DriveLevel.LOW, pwm_frequency=pwm_freq
        )
        if high > low:
            self.sys.cal[probe] = ProbeCal(high=high, low=low)
        self._set_state(CollectState.ARMED)

    def _finish_in_flight(self) -> None:
        """Roll any acquisition in progress forward to Display so the
        state trace stays on the legal cycle. An armed edge wait is
        taken over by enabling the converter directly."""
        state = self.sys.collect_state
        if state is CollectState.TRIGGERED:
            if self._scanner is not None:
                self._scanner = None
                self._enable_adc(self.sys.tick)
            elif not self._adc_on:
                self._enable_adc(self.sys.tick)
            self._poll_to_done()
            state = self.sys.collect_state
        if state is CollectState.DONE:
            self.waveforms = self._consume_capture()
            self._set_state(CollectState.DISPLAY)
            self._need_plot = True

    def _poll_to_done(self) -> None:
        sys = self.sys
        scan_ticks = 8 * conversion_period_ticks(self._adc_cfg)
        while sys.collect_state is not CollectState.DONE:
            next_isr = self._adc_start + (self._scans_done + 1) * scan_ticks
            self._advance_hardware(next_isr)
            if next_isr > sys.tick:
                sys.tick = next_isr

    def _blocking_acquisition_mean(self, probe: int) -> int:
        """One full acquisition polled to completion, returning the
        round-half-up mean of the target probe's samples."""
        sys = self.sys
        self._set_state(CollectState.ARMED)
        self._enable_adc(sys.tick)
        self._set_state(CollectState.TRIGGERED)
        self._poll_to_done()
        probe0, probe1 = self._consume_capture()
        self._set_state(CollectState.DISPLAY)
        samples = probe1 if probe1 is not None and probe == 1 else probe0
        mean = sum(samples) / len(samples)
        return int(mean + 0.5)

    def _consume_capture(self) -> tuple[list[int], list[int] | None]:
        """Post-process the completed capture at its latched size and
        hand the buffer back for the next acquisition."""
        buf = self.sys.buffer
        view = ChannelBuffer(
            raw=buf.raw,
            buffer_idx=buf.buffer_idx,
            required_samples=self._capture_required,
        )
        result = postproc_samples(view, dual=self._capture_required == 256)
        buf.buffer_idx = 0
        return result

    # ------------------------------------------------------------------
    # internals

    def _set_state(self, state: CollectState) -> None:
        self.sys.collect_state = state
        if self.state_log is not None and (
            not self.state_log or self.state_log[-1] is not state
        ):
            self.state_log.append(state)

    def _pin0_at_tick(self, tick: int) -> float:
        return self.hw.pin_voltage(0, tick / self.hw.adc.master_clock)

    def _enable_adc(self, at_tick: int) -> None:
        # conversion timing and the capture size latch at start, like the
        # real setup path; toggling channels mid-capture affects the next
        # acquisition, not the one in flight
        self._adc_cfg = replace(self.hw.adc, adc_n=self.sys.adc_n)
        self._adc_on = True
        self._adc_start = at_tick
        self._scans_done = 0
        self._capture_required = self.sys.buffer.required_samples
        self.capture_starts.append(at_tick)
        if len(self.capture_starts) > 8192:  # keep long-lived sessions bounded
            del self.capture_starts[:4096]

    def _advance_hardware(self, until: int) -> None:
        if self._scanner is not None:
            fire = self._scanner.advance(until)
            if fire is not None:
                self._scanner = None
                self._enable_adc(fire)
        if not self._adc_on:
            return
        scan_ticks = 8 * conversion_period_ticks(self._adc_cfg)
        buf = self.sys.buffer
        while True:
            isr_tick = self._adc_start + (self._scans_done + 1) * scan_ticks
            if isr_tick > until:
                break
            words = scan_and_isr_copy(
                self._adc_start + self._scans_done * scan_ticks,
                self._adc_cfg,
                self.hw.isr,
                self.hw.pin_voltage,
            )
            buf.append_scan(words)
            self._scans_done += 1
            if buf.buffer_idx >= self._capture_required:
                self._adc_on = False
                self._set_state(CollectState.DONE)
                break

    def _capture_samples_step(self) -> None:
        sys = self.sys
        state = sys.collect_state
        if state is CollectState.ARMED:
            mode = sys.trigger_mode
            if mode in (TriggerMode.TRIGGERED_RISING, TriggerMode.TRIGGERED_FALLING):
                edge = Edge.RISING if mode is TriggerMode.TRIGGERED_RISING else Edge.FALLING
                det = EdgeDetector(armed_edge=edge)
                self._scanner = EdgeScanner(det, self._pin0_at_tick, sys.tick)
                self._set_state(CollectState.TRIGGERED)
            elif mode is TriggerMode.AUTO:
                self._enable_adc(sys.tick)
                self._set_state(CollectState.TRIGGERED)
            elif self.single_armed:
                self.single_armed = False
                self._enable_adc(sys.tick)
                self._set_state(CollectState.TRIGGERED)
        elif state is CollectState.DONE:
            self.waveforms = self._consume_capture()
            self._set_state(CollectState.DISPLAY)
            self._need_plot = True
        elif state is CollectState.DISPLAY:
            if sys.trigger_mode is not TriggerMode.SINGLE or self.single_armed:
                self._set_state(CollectState.ARMED)

    def _loop_boundary(self) -> None:
        if self.key_queue:
            self.handle_key(self.key_queue.popleft())
        self._capture_samples_step()
        render_status(self.fb, self.sys)
        if self._need_plot:
            self._plot_waveforms()
            self._need_plot = False

    def _plot_waveforms(self) -> None:
        sys = self.sys
        clear_rows(self.fb, WAVEFORM_ROW_TOP, WAVEFORM_ROW_BOTTOM)
        if self.waveforms is None:
            return
        probe0, probe1 = self.waveforms
        cfg = PlotConfig(vscale=float(sys.vscale))
        if probe1 is not None:
            if sys.ch_enabled[0]:
                plot_data(self.fb, probe0, (sys.cal[0].high, sys.cal[0].low), cfg)
            if sys.ch_enabled[1]:
                plot_data(self.fb, probe1, (sys.cal[1].high, sys.cal[1].low), cfg)
        else:
            ch = 0 if sys.ch_enabled[0] else 1
            plot_data(self.fb, probe0, (sys.cal[ch].high, sys.cal[ch].low), cfg)

    def _show_cal_prompt(self, probe: int) -> None:
        clear_rows(self.fb, WAVEFORM_ROW_TOP, WAVEFORM_ROW_BOTTOM)
        draw_text(self.fb, 4, 0, f"CONNECT P{probe} TO CAL")
        draw_text(self.fb, 3, 0, "KEY 3 STARTS")


def _clamp_adc_n(value: int) -> int:
    return max(OPERATIONAL_ADC_N_MIN, min(value, OPERATIONAL_ADC_N_MAX))


def _step_vscale(current: float, direction: int) -> float:
    idx = VSCALE_CHOICES.index(current)
    idx = max(0, min(idx + direction, len(VSCALE_CHOICES) - 1))
    return VSCALE_CHOICES[idx]
