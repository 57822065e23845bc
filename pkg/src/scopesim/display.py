"""Bit-exact monochrome framebuffer mirroring the LCD controller's RAM.

The controller sees 132 bytes per page and 8 pages; the visible panel is
128x64 with panel x mapped to byte indices 2..129 (reflected, because the
panel is mounted upside down) and panel y=0 at the top. One byte holds
eight vertically stacked pixels. Byte indices 0, 1, 130, 131 of every
page are unmapped and must never be touched.

Coordinate map for panel pixel (x, y), both zero-based from the top-left:

    page       = 7 - (y >> 3)
    byte index = (127 - x) + 2
    bit        = 1 << (7 - (y & 7))

The status line owns rows 0..15 (storage pages 7 and 6); waveforms own
rows 16..63 (storage pages 5..0).
"""

from __future__ import annotations

from dataclasses import dataclass

from .font import GLYPH_ADVANCE, GLYPH_WIDTH, glyph_columns

LCD_COLUMNS = 8  # pages of 8 pixel rows
LCD_WIDTH_LOGICAL = 132
LCD_TOTAL_DATA = LCD_COLUMNS * LCD_WIDTH_LOGICAL
PANEL_WIDTH = 128
PANEL_HEIGHT = 64
BYTE_INDEX_FIRST = 2
BYTE_INDEX_LAST = 129

STATUS_ROWS = range(0, 16)
WAVEFORM_ROW_TOP = 16
WAVEFORM_ROW_BOTTOM = 63
WAVEFORM_SPAN = WAVEFORM_ROW_BOTTOM - WAVEFORM_ROW_TOP  # 47

VSCALE_CHOICES = (0.25, 0.5, 1.0, 2.0, 4.0)

PBM_HEADER = b"P4\n128 64\n"


class FrameBuffer:
    """8 pages x 132 bytes, plus the pixel-level operations on them."""

    __slots__ = ("pages",)

    def __init__(self) -> None:
        self.pages = [bytearray(LCD_WIDTH_LOGICAL) for _ in range(LCD_COLUMNS)]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FrameBuffer) and self.pages == other.pages

    def copy(self) -> "FrameBuffer":
        fb = FrameBuffer()
        for i, page in enumerate(self.pages):
            fb.pages[i][:] = page
        return fb

    def get_pixel(self, x: int, y: int) -> bool:
        page, byte_index, mask = pixel_target(x, y)
        return bool(self.pages[page][byte_index] & mask)


def pixel_target(x: int, y: int) -> tuple[int, int, int]:
    """(page, byte index, bit mask) addressed by panel pixel (x, y)."""
    if not (0 <= x < PANEL_WIDTH and 0 <= y < PANEL_HEIGHT):
        raise ValueError(f"pixel ({x}, {y}) outside the 128x64 panel")
    bit_mask = 1 << ((LCD_COLUMNS - 1) - (y & (LCD_COLUMNS - 1)))
    page = (LCD_COLUMNS - 1) - ((y >> 3) & (LCD_COLUMNS - 1))
    byte_index = (PANEL_WIDTH - 1) - x + 2
    return page, byte_index, bit_mask


def plot_at(fb: FrameBuffer, x: int, y: int) -> FrameBuffer:
    """Set one panel pixel. Idempotent."""
    page, byte_index, mask = pixel_target(x, y)
    fb.pages[page][byte_index] |= mask
    return fb


def clear_rows(fb: FrameBuffer, y_top: int, y_bottom: int) -> FrameBuffer:
    """Zero all mapped bytes of the pages covering rows y_top..y_bottom.

    Row regions used by the instrument are page-aligned, so whole pages
    are cleared; the unmapped byte indices stay untouched.
    """
    for band in range(y_top >> 3, (y_bottom >> 3) + 1):
        page = (LCD_COLUMNS - 1) - band
        fb.pages[page][BYTE_INDEX_FIRST : BYTE_INDEX_LAST + 1] = bytes(
            BYTE_INDEX_LAST - BYTE_INDEX_FIRST + 1
        )
    return fb


def _reverse_bits(b: int) -> int:
    out = 0
    for i in range(8):
        if b & (1 << i):
            out |= 1 << (7 - i)
    return out


def draw_text(fb: FrameBuffer, page: int, start_col: int, text: str) -> FrameBuffer:
    """Render text into one storage page, 5 glyph columns plus one blank
    spacer each, with the same x reflection as plot_at.

    Font data carries the top row in bit 0; page bytes carry it in bit 7,
    hence the bit reversal. Columns past the panel edge are dropped.
    """
    if not 0 <= page < LCD_COLUMNS:
        raise ValueError(f"page must be in 0..7, got {page}")
    x = start_col
    for ch in text:
        if x + GLYPH_WIDTH > PANEL_WIDTH:
            break
        columns = glyph_columns(ch)
        for i in range(GLYPH_ADVANCE):
            col_x = x + i
            if col_x >= PANEL_WIDTH:
                break
            value = _reverse_bits(columns[i]) if i < GLYPH_WIDTH else 0x00
            fb.pages[page][(PANEL_WIDTH - 1) - col_x + 2] = value
        x += GLYPH_ADVANCE
    return fb


@dataclass
class PlotConfig:
    vscale: float = 1.0
    row_top: int = WAVEFORM_ROW_TOP
    row_bottom: int = WAVEFORM_ROW_BOTTOM

    def __post_init__(self) -> None:
        if self.vscale not in VSCALE_CHOICES:
            raise ValueError(f"vscale must be one of {VSCALE_CHOICES}")


def _round_half_up(v: float) -> int:
    # round-half-away-from-zero; inputs here are never negative
    return int(v + 0.5)


def plot_data(
    fb: FrameBuffer,
    samples: list[int],
    cal: tuple[int, int],
    cfg: PlotConfig,
) -> FrameBuffer:
    """Plot 128 samples into the waveform rows.

    Each sample is normalized against the probe's calibrated (high, low)
    counts, scaled about mid-screen by vscale, and mapped to a row; the
    vertical span between consecutive points is filled inclusively so the
    trace is connected.
    """
    cal_high, cal_low = cal
    if cal_high <= cal_low:
        raise ValueError(f"degenerate calibration: high={cal_high} low={cal_low}")
    if len(samples) != PANEL_WIDTH:
        raise ValueError(f"expected {PANEL_WIDTH} samples, got {len(samples)}")
    span = cfg.row_bottom - cfg.row_top
    prev_y = None
    for x, s in enumerate(samples):
        normalized = (s - cal_low) / (cal_high - cal_low)
        normalized = min(1.0, max(0.0, normalized))
        centered = (normalized - 0.5) * cfg.vscale + 0.5
        centered = min(1.0, max(0.0, centered))
        y = cfg.row_bottom - _round_half_up(centered * span)
        if prev_y is None:
            plot_at(fb, x, y)
        else:
            for yy in range(min(prev_y, y), max(prev_y, y) + 1):
                plot_at(fb, x, yy)
        prev_y = y
    return fb


_MODE_TOKENS = {
    "auto": "A",
    "triggered_rising": "TR",
    "triggered_falling": "TF",
    "single": "S",
}

_VSCALE_LABELS = {0.25: "1/4", 0.5: "1/2", 1.0: "1", 2.0: "2", 4.0: "4"}


def status_text(sys_state) -> str:
    """One status line: mode token, ADC divider, channel flags, vscale."""
    mode = _MODE_TOKENS[sys_state.trigger_mode.value]
    flags = "".join("Y" if on else "N" for on in sys_state.ch_enabled)
    vscale = _VSCALE_LABELS[float(sys_state.vscale)]
    return f"{mode} N={sys_state.adc_n} {flags} x{vscale}"


def render_status(fb: FrameBuffer, sys_state) -> FrameBuffer:
    """Clear the status rows and redraw the status line in the top page."""
    clear_rows(fb, STATUS_ROWS.start, STATUS_ROWS.stop - 1)
    draw_text(fb, LCD_COLUMNS - 1, 0, status_text(sys_state))
    return fb


def serialize(fb: FrameBuffer) -> bytes:
    """Contiguous page-major dump, 1056 bytes."""
    return b"".join(bytes(page) for page in fb.pages)


def deserialize(data: bytes) -> FrameBuffer:
    if len(data) != LCD_TOTAL_DATA:
        raise ValueError(f"framebuffer dump must be {LCD_TOTAL_DATA} bytes")
    fb = FrameBuffer()
    for i in range(LCD_COLUMNS):
        fb.pages[i][:] = data[i * LCD_WIDTH_LOGICAL : (i + 1) * LCD_WIDTH_LOGICAL]
    return fb


def to_pbm(fb: FrameBuffer) -> bytes:
    """P4 snapshot: the verbatim header plus 1024 bytes of row-major
    panel bits, row 0 at the top, MSB leftmost."""
    out = bytearray(PBM_HEADER)
    for y in range(PANEL_HEIGHT):
        for xb in range(PANEL_WIDTH // 8):
            b = 0
            for i in range(8):
                if fb.get_pixel(xb * 8 + i, y):
                    b |= 1 << (7 - i)
            out.append(b)
    return bytes(out)


def lit_pixels(fb: FrameBuffer) -> list[tuple[int, int]]:
    """All lit panel pixels, ordered by (y, x). The reference inverse of
    the pixel map, shared with UI fidelity tests."""
    out = []
    for y in range(PANEL_HEIGHT):
        for x in range(PANEL_WIDTH):
            if fb.get_pixel(x, y):
                out.append((x, y))
    return out
