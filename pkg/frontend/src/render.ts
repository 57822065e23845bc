/** Pixel-exact canvas renderer: integer zoom, nearest neighbor. */

import { isLit, PANEL_HEIGHT, PANEL_WIDTH } from "./pixelmap.js";

const LIT = [96, 255, 128, 255]; // green phosphor
const DARK = [10, 26, 12, 255];

export class PanelRenderer {
  private ctx: CanvasRenderingContext2D;
  private backing: OffscreenCanvas | HTMLCanvasElement;
  private backingCtx: CanvasRenderingContext2D | OffscreenCanvasRenderingContext2D;
  private image: ImageData;

  constructor(private canvas: HTMLCanvasElement, readonly zoom = 4) {
    canvas.width = PANEL_WIDTH * zoom;
    canvas.height = PANEL_HEIGHT * zoom;
    this.ctx = canvas.getContext("2d")!;
    this.ctx.imageSmoothingEnabled = false;
    this.backing =
      typeof OffscreenCanvas !== "undefined"
        ? new OffscreenCanvas(PANEL_WIDTH, PANEL_HEIGHT)
        : Object.assign(document.createElement("canvas"), {
            width: PANEL_WIDTH,
            height: PANEL_HEIGHT,
          });
    this.backingCtx = this.backing.getContext("2d") as CanvasRenderingContext2D;
    this.image = this.backingCtx.createImageData(PANEL_WIDTH, PANEL_HEIGHT);
  }

  render(framebuffer: Uint8Array | null): void {
    const data = this.image.data;
    for (let y = 0; y < PANEL_HEIGHT; y++) {
      for (let x = 0; x < PANEL_WIDTH; x++) {
        const lit = framebuffer !== null && isLit(framebuffer, x, y);
        const rgba = lit ? LIT : DARK;
        const at = (y * PANEL_WIDTH + x) * 4;
        data[at] = rgba[0]!;
        data[at + 1] = rgba[1]!;
        data[at + 2] = rgba[2]!;
        data[at + 3] = rgba[3]!;
      }
    }
    this.backingCtx.putImageData(this.image, 0, 0);
    this.ctx.imageSmoothingEnabled = false;
    this.ctx.drawImage(
      this.backing as CanvasImageSource,
      0,
      0,
      PANEL_WIDTH * this.zoom,
      PANEL_HEIGHT * this.zoom,
    );
  }
}
