/** Replays recorded gaze traces through the service.
 *
 * Two formats: the simulator's frame,raw,filtered CSV and the service's
 * JSONL session logs.  Both times the raw column is what gets re-sent,
 * so the server runs its own filter exactly as it would live.
 */
import { ClientMsg } from "./protocol.js";

export function parseTrace(name: string, text: string): number[] {
  if (name.endsWith(".jsonl")) return parseSessionLog(text);
  return parseTraceCsv(name, text);
}

function parseTraceCsv(name: string, text: string): number[] {
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  if (lines.length === 0) throw new Error(`${name} is empty`);
  const header = lines[0].split(",").map((c) => c.trim());
  const rawCol = header.indexOf("raw");
  if (rawCol < 0) throw new Error(`${name} has no raw column`);
  const states: number[] = [];
  for (const line of lines.slice(1)) {
    const cell = line.split(",")[rawCol]?.trim() ?? "";
    if (cell === "") continue;
    const state = Number(cell);
    if (!Number.isInteger(state) || state < 0 || state > 9) {
      throw new Error(`${name}: bad state ${JSON.stringify(cell)}`);
    }
    states.push(state);
  }
  return states;
}

function parseSessionLog(text: string): number[] {
  const states: number[] = [];
  const lines = text.split("\n").filter((l) => l.trim().length > 0);
  for (let i = 0; i < lines.length; i++) {
    let entry: { type?: string; raw?: number };
    try {
      entry = JSON.parse(lines[i]);
    } catch {
      if (i === lines.length - 1) break; // torn final line from a live log
      throw new Error(`line ${i + 1} is not valid JSON`);
    }
    if (entry.type === "record" && typeof entry.raw === "number") states.push(entry.raw);
  }
  return states;
}

export class ReplayPlayer {
  private index = 0;

  constructor(
    readonly states: number[],
    private send: (msg: ClientMsg) => void,
  ) {}

  get sent(): number {
    return this.index;
  }

  get done(): boolean {
    return this.index >= this.states.length;
  }

  /** Sends the next `count` observations (rate > 1 plays accelerated). */
  tick(count = 1): void {
    for (let i = 0; i < count && !this.done; i++) {
      this.send({ type: "gaze_state", state: this.states[this.index++] });
    }
  }
}
