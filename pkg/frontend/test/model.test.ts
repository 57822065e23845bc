import { describe, expect, it } from "vitest";

import { PanelModel, Transport } from "../src/model.js";
import { FRAMEBUFFER_BYTES } from "../src/pixelmap.js";

function snapshotJson(statusText: string, tick = 2048): string {
  const zeros = btoa(String.fromCharCode(...new Uint8Array(FRAMEBUFFER_BYTES)));
  return JSON.stringify({
    kind: "snapshot",
    payload: {
      framebuffer: zeros,
      leds: [true, false, false, false],
      status_text: statusText,
      collect_state: "armed",
      tick,
    },
  });
}

/** Transport scripted to behave like the gateway's key-cycle contract. */
class ScriptedGateway implements Transport {
  sent: Array<Record<string, unknown>> = [];

  constructor(private model: PanelModel) {}

  send(text: string): void {
    const msg = JSON.parse(text) as { kind: string; id: number; payload?: { key?: string } };
    this.sent.push(msg);
    if (msg.kind === "key_press" && msg.payload?.key === "K1") {
      // the gateway acks, applies the key at the loop boundary, and the
      // next changed-state snapshot carries the new mode token
      this.model.handleMessage(JSON.stringify({ kind: "ack", payload: { id: msg.id, acked: "key_press" } }));
      this.model.handleMessage(snapshotJson("TR N=5 YN x1", 4096));
    }
  }
}

function liveModel(): { model: PanelModel; gateway: ScriptedGateway } {
  const model = new PanelModel();
  const gateway = new ScriptedGateway(model);
  model.attachTransport(gateway);
  model.markLive();
  model.handleMessage(snapshotJson("A N=5 YN x1"));
  return { model, gateway };
}

describe("key 1 and the mode token", () => {
  it("changes A to TR via the next snapshot, never optimistically", () => {
    const { model, gateway } = liveModel();
    expect(model.modeToken).toBe("A");

    let tokenWhenSent = "";
    const realSend = gateway.send.bind(gateway);
    gateway.send = (text) => {
      tokenWhenSent = model.modeToken; // state at the moment the command leaves
      realSend(text);
    };
    model.sendKey("K1");
    expect(tokenWhenSent).toBe("A"); // nothing changed before the gateway answered
    expect(model.modeToken).toBe("TR");
    expect(gateway.sent[0]).toMatchObject({ kind: "key_press", payload: { key: "K1" } });
  });
});

describe("command acknowledgement discipline", () => {
  it("disables the originating control until the ack arrives", () => {
    const model = new PanelModel();
    const sent: string[] = [];
    model.attachTransport({ send: (t) => sent.push(t) });
    model.markLive();
    model.handleMessage(snapshotJson("A N=5 YN x1"));

    model.sendKey("K6");
    expect(model.isDisabled("key:K6")).toBe(true);
    expect(model.isDisabled("key:K4")).toBe(false);
    model.sendKey("K6"); // swallowed while pending
    expect(sent.length).toBe(1);

    const id = (JSON.parse(sent[0]!) as { id: number }).id;
    model.handleMessage(JSON.stringify({ kind: "ack", payload: { id, acked: "key_press" } }));
    expect(model.isDisabled("key:K6")).toBe(false);
  });

  it("surfaces error replies and re-enables the control", () => {
    const model = new PanelModel();
    const sent: string[] = [];
    model.attachTransport({ send: (t) => sent.push(t) });
    model.markLive();
    model.handleMessage(snapshotJson("A N=5 YN x1"));

    model.applyConfigPatch({ sources: "garbage" });
    const id = (JSON.parse(sent[0]!) as { id: number }).id;
    model.handleMessage(
      JSON.stringify({ kind: "error", payload: { id, reason: "patch.sources: expected a list" } }),
    );
    expect(model.lastError).toContain("patch.sources");
    expect(model.isDisabled("config")).toBe(false);
  });
});

describe("connection handling", () => {
  it("marks the link lost on malformed input and keeps the frame", () => {
    const { model } = liveModel();
    const frame = model.framebuffer;
    expect(frame).not.toBeNull();
    model.handleMessage("{definitely not json");
    expect(model.connection).toBe("lost");
    expect(model.framebuffer).toBe(frame);
  });

  it("rejects snapshots with a short framebuffer", () => {
    const { model } = liveModel();
    const bad = JSON.stringify({
      kind: "snapshot",
      payload: {
        framebuffer: btoa("abc"),
        leds: [true, false, false, false],
        status_text: "A N=5 YN x1",
        collect_state: "armed",
        tick: 1,
      },
    });
    model.handleMessage(bad);
    expect(model.connection).toBe("lost");
  });

  it("ignores clicks while not live", () => {
    const model = new PanelModel();
    const sent: string[] = [];
    model.attachTransport({ send: (t) => sent.push(t) });
    model.sendKey("K1"); // still connecting
    expect(sent).toEqual([]);
  });
});
