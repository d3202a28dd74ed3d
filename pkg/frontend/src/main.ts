/** Browser entry point: WebSocket to the bridge, keyboard-simulated gaze,
 * and a render-on-change loop. */
import { FeedbackSink, WebAudioSink } from "./audio.js";
import { InputBridge } from "./input.js";
import { apply, drainFeedback, initialModel, setConnection, UiModel } from "./model.js";
import { ClientMsg, encodeLine, LineDecoder, parseServer } from "./protocol.js";
import { parseTrace, ReplayPlayer } from "./replay.js";
import { render } from "./view.js";

class App {
  model: UiModel = initialModel();
  private ws: WebSocket | null = null;
  private decoder = new LineDecoder();
  private sink: FeedbackSink = new WebAudioSink();
  private bridge = new InputBridge((msg) => this.send(msg));
  private player: ReplayPlayer | null = null;
  private replayRate = 1;

  constructor(private root: HTMLElement) {
    window.addEventListener("keydown", (e) => {
      if (e.repeat) return;
      if (targetIsField(e)) return;
      if (this.bridge.keyDown(e.key)) e.preventDefault();
    });
    window.addEventListener("keyup", (e) => {
      if (targetIsField(e)) return;
      this.bridge.keyUp(e.key);
    });
    root.addEventListener("click", (e) => {
      const button = (e.target as HTMLElement).closest("[data-action=reconnect]");
      if (button) this.connect();
    });
    setInterval(() => this.frame(), 1000 / this.bridge.fps);
  }

  connect(): void {
    this.ws?.close();
    this.model = setConnection(this.model, "connecting");
    this.draw();
    const ws = new WebSocket(`ws://${location.host}/bridge`);
    this.ws = ws;
    ws.onopen = () => {
      this.model = setConnection(this.model, "open");
      this.send({ type: "reset" }); // fetch the initial board
      this.draw();
    };
    ws.onmessage = (ev) => {
      for (const line of this.decoder.push(String(ev.data))) {
        const msg = parseServer(line);
        if (msg) this.dispatch(msg);
      }
    };
    ws.onclose = () => {
      this.model = setConnection(this.model, "closed");
      this.draw();
    };
  }

  private dispatch(msg: Parameters<typeof apply>[1]): void {
    this.model = apply(this.model, msg, performance.now());
    const [events, drained] = drainFeedback(this.model);
    this.model = drained;
    for (const event of events) this.sink.handle(event);
    this.draw();
  }

  private send(msg: ClientMsg): void {
    if (this.ws?.readyState === WebSocket.OPEN) this.ws.send(encodeLine(msg));
  }

  /** One frame tick: replay takes priority over held keys. */
  private frame(): void {
    if (this.player && !this.player.done) {
      this.player.tick(this.replayRate);
      if (this.model.source.kind === "replay") {
        this.model = { ...this.model, source: { ...this.model.source, sent: this.player.sent } };
        this.draw();
      }
      if (this.player.done) this.player = null;
    } else {
      this.bridge.tick();
    }
  }

  loadReplay(name: string, text: string): void {
    const states = parseTrace(name, text);
    this.player = new ReplayPlayer(states, (msg) => this.send(msg));
    this.model = { ...this.model, source: { kind: "replay", name, total: states.length, sent: 0 } };
    this.send({ type: "reset" });
    this.draw();
  }

  setMinimal(on: boolean): void {
    this.model = { ...this.model, minimalUi: on };
    this.send({ type: "configure", feedback_mode: on ? "off_screen" : "screen" });
    this.draw();
  }

  setReference(text: string): void {
    this.model = { ...this.model, reference: text === "" ? null : text };
    this.draw();
  }

  setReplayRate(rate: number): void {
    this.replayRate = rate;
  }

  reset(): void {
    this.send({ type: "reset" });
  }

  draw(): void {
    this.root.innerHTML = render(this.model);
  }
}

function targetIsField(e: KeyboardEvent): boolean {
  const el = e.target as HTMLElement | null;
  return el !== null && (el.tagName === "INPUT" || el.tagName === "TEXTAREA");
}

function start(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const app = new App(root);
  app.connect();

  document.getElementById("reset")?.addEventListener("click", () => app.reset());
  document.getElementById("minimal")?.addEventListener("change", (e) => {
    app.setMinimal((e.target as HTMLInputElement).checked);
  });
  document.getElementById("reference")?.addEventListener("input", (e) => {
    app.setReference((e.target as HTMLInputElement).value);
  });
  document.getElementById("rate")?.addEventListener("change", (e) => {
    app.setReplayRate(Number((e.target as HTMLSelectElement).value));
  });
  document.getElementById("replay")?.addEventListener("change", async (e) => {
    const input = e.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    try {
      app.loadReplay(file.name, await file.text());
    } catch (err) {
      console.error("replay rejected:", err);
    }
    input.value = "";
  });
}

start();
