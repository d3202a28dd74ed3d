/** End-to-end: the real typing service on one side, the client model,
 * input bridge and renderer on the other.  Talks TCP directly; the WS
 * bridge gets its own round trip at the end. */
import { ChildProcess, spawn } from "node:child_process";
import { afterAll, beforeAll, expect, test } from "vitest";
import { InputBridge } from "../src/input.js";
import { apply, drainFeedback, initialModel, setConnection, UiModel } from "../src/model.js";
import { ClientMsg, encodeLine, LineDecoder, parseServer } from "../src/protocol.js";
import { render } from "../src/view.js";
import { startBridge } from "../src/node/bridge.js";
import { connectTcp, LineSocket } from "../src/node/tcp.js";

let proc: ChildProcess;
let host: string;
let port: number;

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

beforeAll(async () => {
  proc = spawn("python3", ["-m", "gaze9.cli", "serve", "--listen", "127.0.0.1:0"], {
    stdio: ["ignore", "pipe", "pipe"],
  });
  const banner: string = await new Promise((resolve, reject) => {
    let out = "";
    proc.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      if (out.includes("\n")) resolve(out);
    });
    proc.on("exit", (code) => reject(new Error(`service exited early (${code})`)));
    setTimeout(() => reject(new Error(`no banner from service, got: ${out}`)), 15000);
  });
  const m = banner.match(/listening on ([\d.]+):(\d+)/);
  if (!m) throw new Error(`unexpected banner: ${banner}`);
  host = m[1];
  port = Number(m[2]);
}, 20000);

afterAll(() => {
  proc?.kill();
});

/** One connected client: real socket, real model, counted click sounds. */
class Harness {
  model: UiModel = initialModel();
  clicks = 0;
  bridge = new InputBridge((msg) => this.send(msg));
  private sock!: LineSocket;

  static async connect(): Promise<Harness> {
    const h = new Harness();
    h.sock = await connectTcp(host, port, (line) => h.online(line));
    h.model = setConnection(h.model, "open");
    h.send({ type: "reset" });
    await h.waitFor((m) => m.synced, "initial ui_state");
    return h;
  }

  private online(line: string): void {
    const msg = parseServer(line);
    if (!msg) return;
    this.model = apply(this.model, msg, Date.now());
    const [events, drained] = drainFeedback(this.model);
    this.model = drained;
    for (const e of events) if (e.kind === "selection_click") this.clicks += 1;
  }

  send(msg: ClientMsg): void {
    this.sock.send(encodeLine(msg));
  }

  /** Hold a key for a number of camera frames, then release it. */
  hold(key: string, ticks: number): void {
    this.bridge.keyDown(key);
    for (let i = 0; i < ticks; i++) this.bridge.tick();
    this.bridge.keyUp(key);
  }

  async waitFor(pred: (m: UiModel) => boolean, what: string, ms = 8000): Promise<void> {
    const t0 = Date.now();
    while (Date.now() - t0 < ms) {
      if (pred(this.model)) return;
      await sleep(2);
    }
    throw new Error(`timed out waiting for ${what}; model: ${JSON.stringify(this.model)}`);
  }

  close(): void {
    this.sock.close();
  }
}

test("holding 3 highlights top right; a long blink clicks into its group", async () => {
  const h = await Harness.connect();
  try {
    h.hold("3", 16);
    await h.waitFor((m) => m.highlight === 3, "highlight 3");
    expect(render(h.model)).toMatch(/class="cell lit" data-dir="3"/);

    h.hold("0", 9); // voluntary blink: 9 of the 16-frame window
    await h.waitFor((m) => m.mode === "secondary" && m.group === 3, "Secondary(3)");
    expect(h.clicks).toBe(1);
    expect(render(h.model)).toContain('<span class="label">d</span>');
  } finally {
    h.close();
  }
}, 15000);

test("a natural-length blink selects nothing", async () => {
  const h = await Harness.connect();
  try {
    h.hold("3", 16);
    await h.waitFor((m) => m.highlight === 3, "highlight 3");

    h.hold("0", 4); // involuntary blink territory: filtered out
    h.hold("2", 16); // later ui_state proves the zeros were consumed
    await h.waitFor((m) => m.highlight === 2, "highlight 2");
    expect(h.clicks).toBe(0);
    expect(h.model.mode).toBe("main");
    expect(h.model.text).toBe("");
  } finally {
    h.close();
  }
}, 15000);

test("the hello key script types hello with ten clicks", async () => {
  const h = await Harness.connect();
  try {
    const picks: Array<[number, number]> = [
      [4, 5], // h
      [3, 5], // e
      [5, 6], // l
      [5, 6], // l
      [6, 6], // o
    ];
    let expected = "";
    for (const [button, slot] of picks) {
      h.hold(String(button), 16);
      h.hold("0", 9);
      await h.waitFor(
        (m) => m.mode === "secondary" && m.group === button,
        `Secondary(${button}) for '${expected}'`,
      );
      expected += "hello"[expected.length];
      h.hold(String(slot), 16);
      h.hold("0", 9);
      await h.waitFor(
        (m) => m.text === expected && m.mode === "main",
        `text ${JSON.stringify(expected)}`,
      );
    }
    expect(h.model.text).toBe("hello");
    expect(h.clicks).toBe(10);
    expect(render(h.model)).toContain('class="textbar">hello<');
  } finally {
    h.close();
  }
}, 30000);

test("the websocket bridge relays the same protocol", async () => {
  const bridge = await startBridge({ listenPort: 0, targetHost: host, targetPort: port });
  try {
    const { default: WebSocket } = await import("ws");
    const ws = new WebSocket(`ws://127.0.0.1:${bridge.port}/bridge`);
    const decoder = new LineDecoder();
    const lines: string[] = [];
    ws.on("message", (data) => lines.push(...decoder.push(data.toString())));
    await new Promise<void>((resolve, reject) => {
      ws.on("open", () => resolve());
      ws.on("error", reject);
    });
    ws.send(encodeLine({ type: "reset" }));
    const t0 = Date.now();
    while (lines.length === 0 && Date.now() - t0 < 8000) await sleep(5);
    const msg = parseServer(lines[0] ?? "");
    expect(msg).toMatchObject({ type: "ui_state", mode: "main", text: "" });
    ws.close();

    const page = await fetch(`http://127.0.0.1:${bridge.port}/`);
    expect(page.status).toBe(200);
    expect(await page.text()).toContain("gaze keyboard");
  } finally {
    await bridge.close();
  }
}, 15000);
