/** Gateway wire protocol: JSON texts over one WebSocket. */

export interface SnapshotPayload {
  framebuffer: string; // base64, 1056 bytes
  leds: boolean[];
  status_text: string;
  collect_state: string;
  tick: number;
}

export type ServerMessage =
  | { kind: "snapshot"; payload: SnapshotPayload }
  | { kind: "ack"; payload: { id: unknown; acked: string } }
  | { kind: "error"; payload: { id: unknown; reason: string } };

export type CommandKind = "key_press" | "config_patch" | "arm_single" | "cal_start";

function isSnapshotPayload(p: unknown): p is SnapshotPayload {
  if (typeof p !== "object" || p === null) return false;
  const o = p as Record<string, unknown>;
  return (
    typeof o.framebuffer === "string" &&
    Array.isArray(o.leds) &&
    o.leds.length === 4 &&
    typeof o.status_text === "string" &&
    typeof o.collect_state === "string" &&
    typeof o.tick === "number"
  );
}

/** Parse one incoming frame; null means the message was malformed. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof msg !== "object" || msg === null) return null;
  const o = msg as Record<string, unknown>;
  const payload = o.payload;
  if (o.kind === "snapshot" && isSnapshotPayload(payload)) {
    return { kind: "snapshot", payload };
  }
  if (typeof payload === "object" && payload !== null) {
    const p = payload as Record<string, unknown>;
    if (o.kind === "ack" && typeof p.acked === "string") {
      return { kind: "ack", payload: { id: p.id, acked: p.acked } };
    }
    if (o.kind === "error" && typeof p.reason === "string") {
      return { kind: "error", payload: { id: p.id, reason: p.reason } };
    }
  }
  return null;
}

export function encodeCommand(
  kind: CommandKind,
  id: number,
  payload?: Record<string, unknown>,
): string {
  return JSON.stringify(payload === undefined ? { kind, id } : { kind, id, payload });
}
