"""Continuous-scan 12-bit ADC model with the interrupt copy race.

The converter scans channels 0..7 in ascending order, back to back, one
conversion every `conversion_clocks` ADC clocks, where the ADC clock is
the master clock divided by (adc_n + 1). The end-of-scan interrupt copies
the eight result registers out one at a time; meanwhile the next scan is
already overwriting them in the same order. Whether a register is read
before or after its overwrite is pure tick arithmetic, so the corruption
at small adc_n is exactly reproducible.

A register read that loses the race returns a torn word: the upper bits
of the freshest conversion combined with the low bits of the value it
replaced. When adjacent scans sample equal voltages (plateaus, DC) the
tear is invisible and the read equals the new conversion's value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

ADC_CHANNELS = 8
FULL_SCALE = 4096  # 12-bit converter
RESULT_MASK = 0xFFF
# Synthetic status bits above the result field; bit 16 is always set so
# extraction has something real to mask off.
STATUS_BITS = 1 << 16
# Number of low result bits taken from the stale value in a torn read.
TEAR_LOW_BITS = 6
_TEAR_LOW_MASK = (1 << TEAR_LOW_BITS) - 1

OPERATIONAL_ADC_N_MIN = 3
OPERATIONAL_ADC_N_MAX = 10


@dataclass
class AdcTimingConfig:
    """Conversion timing. adc_n 0..2 is allowed so the copy race can be
    demonstrated; the instrument clamps operator control to 3..10."""

    adc_n: int = 5
    conversion_clocks: int = 21
    master_clock: int = 22_000_000
    vref: float = 3.3
    resolution_bits: int = 12

    def __post_init__(self) -> None:
        if not 0 <= self.adc_n <= OPERATIONAL_ADC_N_MAX:
            raise ValueError(f"adc_n must be in 0..10, got {self.adc_n}")
        if self.conversion_clocks <= 0:
            raise ValueError("conversion_clocks must be > 0")
        if self.master_clock <= 0:
            raise ValueError("master_clock must be > 0")


@dataclass
class IsrTimingConfig:
    """Ticks from interrupt entry to each register read.

    The defaults place the corruption boundary between adc_n=2 and
    adc_n=3: with (10, 75) every read beats its overwrite at adc_n=3 and
    register 5 onward lose at adc_n=2.
    """

    entry_latency_ticks: int = 10
    per_register_copy_ticks: int = 75


def conversion_period_ticks(cfg: AdcTimingConfig) -> int:
    """Master-clock ticks per conversion: conversion_clocks ADC clocks at
    a divide-by-(adc_n+1) clock."""
    return cfg.conversion_clocks * (cfg.adc_n + 1)


def quantize(v: float, cfg: AdcTimingConfig) -> int:
    """Ideal 12-bit quantizer: clamp to [0, vref], floor to counts."""
    if v <= 0.0:
        return 0
    if v >= cfg.vref:
        return FULL_SCALE - 1
    return min(int(v / cfg.vref * FULL_SCALE), FULL_SCALE - 1)


def extract_result(word: int) -> int:
    """Bits 11:0 of a raw result word."""
    return word & RESULT_MASK


def scan_and_isr_copy(
    start_tick: int,
    adc: AdcTimingConfig,
    isr: IsrTimingConfig,
    pin_voltage: Callable[[int, float], float],
) -> list[int]:
    """One scan plus the interrupt copy that follows it.

    The scan beginning at start_tick samples channel i at start_tick+i*P
    and the interrupt fires at start_tick+8P. Register i is rewritten by
    each later scan m at start_tick + m*8P + (i+1)*P; the copy reads it
    at start_tick + 8P + entry_latency + i*per_register_copy. The read
    returns the last value written before it, torn against the value
    that write replaced (see module docstring). Pure in all arguments.
    """
    period = conversion_period_ticks(adc)
    scan_ticks = ADC_CHANNELS * period
    words = []
    for ch in range(ADC_CHANNELS):
        read_offset = (
            scan_ticks + isr.entry_latency_ticks + ch * isr.per_register_copy_ticks
        )
        # Index of the last scan whose conversion of this channel finished
        # before the read; 0 is the scan being copied out.
        scans_completed = (read_offset - (ch + 1) * period) // scan_ticks
        t_last = (start_tick + scans_completed * scan_ticks + ch * period) / adc.master_clock
        v_last = quantize(pin_voltage(ch, t_last), adc)
        if scans_completed == 0:
            result = v_last
        else:
            t_prev = (
                start_tick + (scans_completed - 1) * scan_ticks + ch * period
            ) / adc.master_clock
            v_prev = quantize(pin_voltage(ch, t_prev), adc)
            result = (v_last & (RESULT_MASK ^ _TEAR_LOW_MASK)) | (v_prev & _TEAR_LOW_MASK)
        words.append(result | STATUS_BITS)
    return words


@dataclass
class ChannelBuffer:
    """Raw capture storage: 32-bit words, eight appended per interrupt."""

    raw: list[int] = field(default_factory=lambda: [0] * 256)
    buffer_idx: int = 0
    required_samples: int = 128

    def append_scan(self, words: list[int]) -> None:
        if len(words) != ADC_CHANNELS:
            raise ValueError("a scan copies exactly 8 words")
        self.raw[self.buffer_idx : self.buffer_idx + ADC_CHANNELS] = words
        self.buffer_idx += ADC_CHANNELS

    @property
    def complete(self) -> bool:
        return self.buffer_idx >= self.required_samples


class IncompleteAcquisition(ValueError):
    pass


def postproc_samples(
    buf: ChannelBuffer, dual: bool
) -> tuple[list[int], list[int] | None]:
    """Extract 12-bit results; de-interleave even/odd channels in dual mode.

    Probe 0 owns the even ADC channels and probe 1 the odd ones, so raw
    index parity is probe identity.
    """
    need = buf.required_samples
    if buf.buffer_idx < need:
        raise IncompleteAcquisition(
            f"acquisition incomplete: {buf.buffer_idx} of {need} samples"
        )
    values = [extract_result(w) for w in buf.raw[:need]]
    if not dual:
        return values, None
    return values[0::2], values[1::2]
