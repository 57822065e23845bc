/** DOM wiring: one live connection, reconnect with backoff. */

import { PanelModel } from "./model.js";
import { PanelRenderer } from "./render.js";

const KEY_LABELS: Array<[string, string]> = [
  ["K1", "1 mode"],
  ["K2", "2 vscale+"],
  ["K3", "3 ok"],
  ["K4", "4 adc_n-"],
  ["K5", "5 arm"],
  ["K6", "6 adc_n+"],
  ["K7", "7 cal P0"],
  ["K8", "8 vscale-"],
  ["K9", "9 cal P1"],
];

const LED_NAMES = ["armed", "triggered", "complete", "displayed"];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function gatewayUrl(): string {
  const params = new URLSearchParams(location.search);
  return params.get("gateway") ?? `ws://${location.hostname || "127.0.0.1"}:8765`;
}

class ReconnectingSocket {
  private socket: WebSocket | null = null;
  private backoffMs = 250;

  constructor(private url: string, private model: PanelModel) {}

  open(): void {
    this.model.attachTransport({ send: (text) => this.socket?.send(text) });
    this.socket = new WebSocket(this.url);
    this.socket.onopen = () => {
      this.backoffMs = 250;
      this.model.markLive();
    };
    this.socket.onmessage = (event) => this.model.handleMessage(String(event.data));
    this.socket.onclose = () => this.scheduleReconnect();
    this.socket.onerror = () => this.socket?.close();
  }

  private scheduleReconnect(): void {
    this.model.markLost();
    const delay = this.backoffMs;
    this.backoffMs = Math.min(this.backoffMs * 2, 8000);
    setTimeout(() => this.open(), delay);
  }
}

function buildSourceEditor(model: PanelModel, probe: 0 | 1): HTMLElement {
  const box = el("fieldset", "source-editor");
  box.appendChild(el("legend", "", `probe ${probe} source`));
  const kind = el("select");
  for (const k of ["square", "sine", "rc_decay", "dc", "table"]) {
    const opt = el("option", "", k);
    opt.value = k;
    kind.appendChild(opt);
  }
  kind.value = probe === 0 ? "square" : "dc";
  const freq = el("input") as HTMLInputElement;
  freq.value = "2500";
  const amp = el("input") as HTMLInputElement;
  amp.value = "3.3";
  const offset = el("input") as HTMLInputElement;
  offset.value = "0";
  for (const [label, input] of [
    ["kind", kind],
    ["Hz", freq],
    ["Vamp", amp],
    ["Voff", offset],
  ] as Array<[string, HTMLElement]>) {
    const row = el("label", "editor-row", `${label} `);
    row.appendChild(input);
    box.appendChild(row);
  }
  const apply = el("button", "", "apply") as HTMLButtonElement;
  apply.onclick = () => {
    const sources = [0, 1].map((i) => {
      if (i !== probe) return { kind: "dc", offset: 0 };
      return {
        kind: kind.value,
        frequency: Number(freq.value),
        amplitude: Number(amp.value),
        offset: Number(offset.value),
      };
    });
    model.applyConfigPatch({ sources });
  };
  box.appendChild(apply);
  return box;
}

function buildJumperEditor(model: PanelModel): HTMLElement {
  const box = el("fieldset", "jumper-editor");
  box.appendChild(el("legend", "", "jumpers"));
  const selects: HTMLSelectElement[] = [];
  for (let ch = 0; ch < 8; ch++) {
    const select = el("select") as HTMLSelectElement;
    for (const j of ["probe0", "probe1", "open"]) {
      const opt = el("option", "", j);
      opt.value = j;
      select.appendChild(opt);
    }
    select.value = "probe0";
    const row = el("label", "editor-row", `ch${ch} `);
    row.appendChild(select);
    box.appendChild(row);
    selects.push(select);
  }
  const cal = el("label", "editor-row", "probe0 on cal pin ");
  const calBox = el("input") as HTMLInputElement;
  calBox.type = "checkbox";
  cal.appendChild(calBox);
  box.appendChild(cal);
  const apply = el("button", "", "apply") as HTMLButtonElement;
  apply.onclick = () =>
    model.applyConfigPatch({
      front_end: {
        jumpers: selects.map((s) => s.value),
        probe_to_cal: [calBox.checked, false],
      },
    });
  box.appendChild(apply);
  return box;
}

export function mount(root: HTMLElement, model: PanelModel): void {
  const screenWrap = el("div", "screen");
  const canvas = el("canvas") as HTMLCanvasElement;
  screenWrap.appendChild(canvas);
  const renderer = new PanelRenderer(canvas, 4);

  const status = el("div", "status-line");
  const connection = el("div", "connection");
  const toast = el("div", "toast");
  toast.onclick = () => model.dismissError();

  const leds = el("div", "leds");
  const ledDots: HTMLElement[] = LED_NAMES.map((name) => {
    const dot = el("span", "led");
    dot.title = name;
    leds.appendChild(dot);
    const label = el("span", "led-label", name);
    leds.appendChild(label);
    return dot;
  });

  const keypad = el("div", "keypad");
  const buttons: Array<[string, HTMLButtonElement]> = [];
  for (const [key, label] of KEY_LABELS) {
    const button = el("button", "key", label) as HTMLButtonElement;
    button.onclick = () => model.sendKey(key);
    keypad.appendChild(button);
    buttons.push([`key:${key}`, button]);
  }
  const channels = el("div", "channels");
  (["A", "B"] as const).forEach((name, i) => {
    const button = el("button", "key chan", `ch ${name}`) as HTMLButtonElement;
    button.onclick = () => model.toggleChannel(i as 0 | 1);
    channels.appendChild(button);
    buttons.push([`chan:${i}`, button]);
  });

  const editors = el("div", "editors");
  editors.appendChild(buildSourceEditor(model, 0));
  editors.appendChild(buildSourceEditor(model, 1));
  editors.appendChild(buildJumperEditor(model));

  root.append(screenWrap, status, connection, leds, keypad, channels, editors, toast);

  model.onChange = () => {
    renderer.render(model.framebuffer);
    status.textContent = model.statusText || " ";
    connection.textContent = model.connection;
    connection.dataset.state = model.connection;
    model.leds.forEach((on, i) => ledDots[i]?.classList.toggle("on", on));
    for (const [control, button] of buttons) {
      button.disabled = model.isDisabled(control);
    }
    toast.textContent = model.lastError ?? "";
    toast.style.display = model.lastError ? "block" : "none";
  };
  model.onChange();
}

if (typeof document !== "undefined" && document.getElementById("panel-root")) {
  const model = new PanelModel();
  mount(document.getElementById("panel-root")!, model);
  new ReconnectingSocket(gatewayUrl(), model).open();
}
