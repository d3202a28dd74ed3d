/** Keyboard-simulated gaze: digits 1-9 are the nine directions, 0 (or
 * space, or b) is eyes closed.  While a key is held its state is re-sent
 * once per tick at the configured frame rate, like a camera pipeline
 * would. */
import { ClientMsg } from "./protocol.js";

const BLINK_KEYS = new Set(["0", " ", "b"]);

export class InputBridge {
  private held: number | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private send: (msg: ClientMsg) => void, readonly fps: number = 29) {}

  /** Returns true when the key is one of ours (caller preventDefaults). */
  keyDown(key: string): boolean {
    if (BLINK_KEYS.has(key)) {
      this.held = 0;
    } else if (key.length === 1 && key >= "1" && key <= "9") {
      this.held = Number(key);
    } else {
      return false;
    }
    return true;
  }

  keyUp(key: string): void {
    const state = BLINK_KEYS.has(key)
      ? 0
      : key.length === 1 && key >= "1" && key <= "9"
        ? Number(key)
        : null;
    if (state !== null && state === this.held) this.held = null;
  }

  /** One camera frame: report the held state, if any. */
  tick(): void {
    if (this.held !== null) this.send({ type: "gaze_state", state: this.held });
  }

  start(): void {
    if (this.timer === null) this.timer = setInterval(() => this.tick(), 1000 / this.fps);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
