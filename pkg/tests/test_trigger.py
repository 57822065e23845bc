"""Edge detection and the acquisition state machine."""

import pytest

from scopesim.config import build_scope
from scopesim.scope import Scope
from scopesim.trigger import CollectState, Edge, EdgeDetector, edge_event

SQUARE_PERIOD = 8800  # 2.5 kHz at a 22 MHz master clock
HALF = SQUARE_PERIOD // 2


def square_pin(tick):
    return 3.3 if tick % SQUARE_PERIOD < HALF else 0.0


def next_rising_tick(from_tick):
    """Analytic transition locator for the tick-domain square above."""
    k = from_tick // SQUARE_PERIOD + 1
    return k * SQUARE_PERIOD


class TestEdgeEvent:
    def test_rising_from_mid_low_half(self):
        from_tick = HALF + HALF // 2  # mid low half
        expect = next_rising_tick(from_tick) + 32
        got = edge_event(EdgeDetector(), square_pin, from_tick, 3 * SQUARE_PERIOD)
        assert got == expect

    def test_falling_edge(self):
        det = EdgeDetector(armed_edge=Edge.FALLING)
        got = edge_event(det, square_pin, 100, 2 * SQUARE_PERIOD)
        assert got == HALF + 32

    def test_constant_high_never_fires(self):
        det = EdgeDetector()
        assert edge_event(det, lambda t: 3.3, 0, 100_000) is None

    def test_short_glitch_rejected(self):
        def glitchy(tick):
            return 3.3 if 500 <= tick < 520 else 0.0  # 20 ticks < debounce

        assert edge_event(EdgeDetector(), glitchy, 0, 10_000) is None

    def test_debounce_boundary(self):
        def pulse(width):
            return lambda tick: 3.3 if 500 <= tick < 500 + width else 0.0

        assert edge_event(EdgeDetector(), pulse(31), 0, 10_000) is None
        assert edge_event(EdgeDetector(), pulse(32), 0, 10_000) == 532

    def test_requires_armed_detector(self):
        det = EdgeDetector(enabled=False)
        with pytest.raises(ValueError):
            edge_event(det, square_pin, 0, 100)

    def test_mid_band_wander_does_not_fire(self):
        # hovers between the thresholds: no defined crossing
        assert edge_event(EdgeDetector(), lambda t: 1.6, 0, 50_000) is None

    def test_incremental_scan_matches_one_shot(self):
        from scopesim.trigger import EdgeScanner

        one_shot = edge_event(EdgeDetector(), square_pin, 1000, 3 * SQUARE_PERIOD)
        scanner = EdgeScanner(EdgeDetector(), square_pin, 1000)
        got = None
        t = 1000
        while got is None and t < 1000 + 3 * SQUARE_PERIOD:
            t += 700
            got = scanner.advance(t)
        assert got == one_shot


def cal_connected_config(mode="auto", extra_sys=None):
    sys_cfg = {"trigger_mode": mode}
    if extra_sys:
        sys_cfg.update(extra_sys)
    return {
        "front_end": {"probe_to_cal": [True, False]},
        "sys": sys_cfg,
    }


def run_to_first_display(scope: Scope, limit_ticks=2_000_000):
    start = scope.sys.tick
    while scope.sys.collect_state is not CollectState.DISPLAY:
        scope.tick(2048)
        if scope.sys.tick - start > limit_ticks:
            raise AssertionError("no capture completed")


class TestCaptureStateMachine:
    def test_auto_reaches_display_in_sixteen_scans(self):
        scope = build_scope(cal_connected_config())
        run_to_first_display(scope)
        # 128 samples, 8 per interrupt
        assert scope._scans_done == 16
        assert scope.waveforms is not None

    def test_trace_follows_cycle(self):
        scope = build_scope(cal_connected_config())
        scope.state_log = []
        scope.tick(200_000)
        cycle = [
            CollectState.ARMED,
            CollectState.TRIGGERED,
            CollectState.DONE,
            CollectState.DISPLAY,
        ]
        log = scope.state_log
        assert len(log) >= 8
        start = cycle.index(log[0])
        for i, state in enumerate(log):
            assert state is cycle[(start + i) % 4]

    def test_edge_mode_waits_forever_on_dc(self):
        scope = build_scope({"sys": {"trigger_mode": "triggered_rising"}})
        scope.tick(500_000)
        assert scope.sys.collect_state is CollectState.TRIGGERED
        assert scope.waveforms is None

    def test_edge_mode_triggers_on_cal_square(self):
        scope = build_scope(cal_connected_config("triggered_rising"))
        run_to_first_display(scope)
        # acquisition began at a debounced rising edge of the 2.5 kHz square
        assert scope.capture_starts[0] % SQUARE_PERIOD == 32

    def test_edge_phase_locks_across_captures(self):
        scope = build_scope(cal_connected_config("triggered_rising"))
        for _ in range(5):
            run_to_first_display(scope)
            scope.tick(2048 * 3)  # re-arm and start the next wait
        phases = {start % SQUARE_PERIOD for start in scope.capture_starts}
        assert phases == {32}

    def test_one_shot_no_retrigger_during_capture(self):
        scope = build_scope(cal_connected_config("triggered_rising"))
        run_to_first_display(scope)
        # plenty of edges passed during the capture window; only the armed
        # one may have started an acquisition
        assert len(scope.capture_starts) == 1

    def test_single_mode_is_latched(self):
        scope = build_scope(cal_connected_config("single"))
        scope.tick(100_000)
        assert scope.sys.collect_state is CollectState.ARMED
        assert scope.waveforms is None
        from scopesim.scope import Key

        scope.queue_key(Key.K5)
        run_to_first_display(scope)
        assert len(scope.capture_starts) == 1
        scope.tick(300_000)
        # display holds; nothing re-arms without another explicit arm
        assert scope.sys.collect_state is CollectState.DISPLAY
        assert len(scope.capture_starts) == 1
