/**
 * Panel state. Everything rendered derives from the last received
 * snapshot — the model never synthesizes pixels or predicts the
 * instrument's reaction to a command. A control that sent a command is
 * held disabled until its ack or error comes back.
 */

import { decodeBase64, FRAMEBUFFER_BYTES } from "./pixelmap.js";
import { CommandKind, encodeCommand, parseServerMessage } from "./protocol.js";

export type Connection = "connecting" | "live" | "lost";

export interface Transport {
  send(text: string): void;
}

export class PanelModel {
  framebuffer: Uint8Array | null = null;
  leds: boolean[] = [false, false, false, false];
  statusText = "";
  collectState = "";
  tick = 0;
  connection: Connection = "connecting";
  lastError: string | null = null;

  /** Fires after any observable change; the renderer hangs off this. */
  onChange: (() => void) | null = null;

  private transport: Transport | null = null;
  private nextId = 1;
  private pending = new Map<number, string>(); // command id -> control name

  attachTransport(transport: Transport): void {
    this.transport = transport;
    this.connection = "connecting";
    this.pending.clear();
    this.notify();
  }

  markLive(): void {
    this.connection = "live";
    this.notify();
  }

  markLost(): void {
    this.connection = "lost";
    this.pending.clear();
    this.notify();
  }

  /** The status line's mode token, e.g. "A" or "TR". */
  get modeToken(): string {
    return this.statusText.split(" ")[0] ?? "";
  }

  isDisabled(control: string): boolean {
    if (this.connection !== "live") return true;
    for (const name of this.pending.values()) {
      if (name === control) return true;
    }
    return false;
  }

  handleMessage(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      // keep the last good frame on screen but stop trusting the link
      this.markLost();
      return;
    }
    if (msg.kind === "snapshot") {
      const bytes = decodeBase64(msg.payload.framebuffer);
      if (bytes.length !== FRAMEBUFFER_BYTES) {
        this.markLost();
        return;
      }
      this.framebuffer = bytes;
      this.leds = msg.payload.leds;
      this.statusText = msg.payload.status_text;
      this.collectState = msg.payload.collect_state;
      this.tick = msg.payload.tick;
    } else if (msg.kind === "ack") {
      if (typeof msg.payload.id === "number") {
        this.pending.delete(msg.payload.id);
      }
    } else {
      if (typeof msg.payload.id === "number") {
        this.pending.delete(msg.payload.id);
      }
      this.lastError = msg.payload.reason;
    }
    this.notify();
  }

  sendKey(key: string): void {
    this.sendCommand("key_press", `key:${key}`, { key });
  }

  toggleChannel(index: 0 | 1): void {
    const key = index === 0 ? "chan_a" : "chan_b";
    this.sendCommand("key_press", `chan:${index}`, { key });
  }

  armSingle(): void {
    this.sendCommand("arm_single", "arm_single");
  }

  startCalibration(probe: 0 | 1): void {
    this.sendCommand("cal_start", `cal:${probe}`, { probe });
  }

  applyConfigPatch(patch: Record<string, unknown>): void {
    this.sendCommand("config_patch", "config", patch);
  }

  dismissError(): void {
    this.lastError = null;
    this.notify();
  }

  private sendCommand(
    kind: CommandKind,
    control: string,
    payload?: Record<string, unknown>,
  ): void {
    if (this.transport === null || this.isDisabled(control)) return;
    const id = this.nextId++;
    this.pending.set(id, control);
    this.transport.send(encodeCommand(kind, id, payload));
    this.notify();
  }

  private notify(): void {
    this.onChange?.();
  }
}
