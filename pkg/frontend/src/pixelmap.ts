/**
 * Inverse of the instrument's framebuffer pixel map.
 *
 * The wire carries the raw display RAM: 8 pages of 132 bytes, page-major.
 * Panel pixel (x, y), origin top-left, lives at
 *
 *   page      = 7 - (y >> 3)
 *   byteIndex = (127 - x) + 2
 *   bit       = 1 << (7 - (y & 7))
 *
 * Byte indices 0, 1, 130, 131 of each page are unmapped padding.
 */

export const PANEL_WIDTH = 128;
export const PANEL_HEIGHT = 64;
export const PAGES = 8;
export const PAGE_BYTES = 132;
export const FRAMEBUFFER_BYTES = PAGES * PAGE_BYTES;

export function byteOffset(x: number, y: number): { offset: number; mask: number } {
  if (x < 0 || x >= PANEL_WIDTH || y < 0 || y >= PANEL_HEIGHT) {
    throw new RangeError(`pixel (${x}, ${y}) outside the ${PANEL_WIDTH}x${PANEL_HEIGHT} panel`);
  }
  const page = 7 - (y >> 3);
  const byteIndex = 127 - x + 2;
  const mask = 1 << (7 - (y & 7));
  return { offset: page * PAGE_BYTES + byteIndex, mask };
}

export function isLit(framebuffer: Uint8Array, x: number, y: number): boolean {
  const { offset, mask } = byteOffset(x, y);
  return (framebuffer[offset]! & mask) !== 0;
}

/** All lit pixels ordered by (y, x) — the shared-vector ordering. */
export function litPixels(framebuffer: Uint8Array): Array<[number, number]> {
  if (framebuffer.length !== FRAMEBUFFER_BYTES) {
    throw new RangeError(`framebuffer must be ${FRAMEBUFFER_BYTES} bytes, got ${framebuffer.length}`);
  }
  const out: Array<[number, number]> = [];
  for (let y = 0; y < PANEL_HEIGHT; y++) {
    for (let x = 0; x < PANEL_WIDTH; x++) {
      if (isLit(framebuffer, x, y)) {
        out.push([x, y]);
      }
    }
  }
  return out;
}

export function decodeBase64(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    bytes[i] = binary.charCodeAt(i);
  }
  return bytes;
}
