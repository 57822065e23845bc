"""Trigger modes, the acquisition state machine states, and debounced
edge detection on the channel-0 pin."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional


class TriggerMode(Enum):
    AUTO = "auto"
    TRIGGERED_RISING = "triggered_rising"
    TRIGGERED_FALLING = "triggered_falling"
    SINGLE = "single"


# Keypad cycle order.
MODE_CYCLE = (
    TriggerMode.AUTO,
    TriggerMode.TRIGGERED_RISING,
    TriggerMode.TRIGGERED_FALLING,
    TriggerMode.SINGLE,
)


class CollectState(Enum):
    ARMED = "armed"
    TRIGGERED = "triggered"
    DONE = "done"
    DISPLAY = "display"


class Edge(Enum):
    RISING = "rising"
    FALLING = "falling"


@dataclass
class EdgeDetector:
    """Debounced level-crossing detector.

    Logic thresholds are 0.7/0.3 of the 3.3 V rail. A crossing counts
    only if the new level holds for debounce_ticks consecutive ticks; the
    event is reported at crossing + debounce_ticks. Fires once, then the
    owner must re-arm.
    """

    threshold_high: float = 2.31
    threshold_low: float = 0.99
    debounce_ticks: int = 32
    armed_edge: Edge = Edge.RISING
    enabled: bool = True


class EdgeScanner:
    """Incremental tick-by-tick search for a debounced edge.

    Holds its position between calls so a caller advancing time in slices
    never re-evaluates a tick. The pin function maps an absolute tick to
    volts and must be pure.
    """

    def __init__(
        self, det: EdgeDetector, pin: Callable[[int], float], from_tick: int
    ) -> None:
        self.det = det
        self.pin = pin
        self.next_tick = from_tick + 1
        self.fired_at: Optional[int] = None
        self._level_high = self._classify(pin(from_tick), initial=True)
        self._held = 0  # ticks the candidate level has persisted, 0 = no candidate

    def _classify(self, v: float, initial: bool = False) -> bool:
        if v >= self.det.threshold_high:
            return True
        if v <= self.det.threshold_low:
            return False
        # Between thresholds: hysteresis keeps the previous level. At the
        # start there is no previous level; bias against the armed edge so
        # a mid-band start cannot fire spuriously.
        if initial:
            return self.det.armed_edge is Edge.RISING
        return self._level_high

    def advance(self, until_tick: int) -> Optional[int]:
        """Scan ticks up to and including until_tick. Returns the event
        tick (crossing + debounce) once, or None while still searching."""
        if self.fired_at is not None:
            return self.fired_at
        want_high = self.det.armed_edge is Edge.RISING
        det = self.det
        pin = self.pin
        t = self.next_tick
        while t <= until_tick:
            level = self._classify(pin(t))
            if self._held > 0:
                if level == want_high:
                    self._held += 1
                    if self._held >= det.debounce_ticks:
                        self.fired_at = t + 1
                        self.next_tick = t + 1
                        return self.fired_at
                else:
                    self._held = 0
            elif level == want_high and self._level_high != want_high:
                self._held = 1  # crossing tick itself counts toward the hold
                if self._held >= det.debounce_ticks:
                    self.fired_at = t + 1
                    self.next_tick = t + 1
                    return self.fired_at
            self._level_high = level
            t += 1
        self.next_tick = until_tick + 1
        return None


def edge_event(
    det: EdgeDetector,
    pin: Callable[[int], float],
    from_tick: int,
    horizon: int,
) -> Optional[int]:
    """First debounced crossing of the armed edge at tick >= from_tick,
    or None if none completes within `horizon` ticks."""
    if not det.enabled:
        raise ValueError("edge detector is not armed")
    return EdgeScanner(det, pin, from_tick).advance(from_tick + horizon)
