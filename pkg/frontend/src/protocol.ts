/** Wire types for the typing service: newline-delimited JSON, both ways. */

export type ClientMsg =
  | { type: "gaze_state"; state: number }
  | { type: "frame"; png_base64: string }
  | { type: "reset" }
  | { type: "configure"; capacity?: number; fps?: number; feedback_mode?: "screen" | "off_screen" };

export type Mode = "main" | "secondary";

export type UiState = {
  type: "ui_state";
  mode: Mode;
  group: number | null;
  highlight: number | null;
  text: string;
};

export type FeedbackKind = "direction_changed" | "selection_click" | "char_committed" | "mode_changed";

export type Feedback = {
  type: "feedback";
  kind: FeedbackKind;
  payload: {
    direction?: number;
    label?: string;
    highlight?: number;
    char?: string;
    mode?: Mode;
    group?: number;
  };
};

export type ErrorMsg = { type: "error"; code: string; message: string };

export type ServerMsg = UiState | Feedback | ErrorMsg;

export function encodeLine(msg: ClientMsg): string {
  return JSON.stringify(msg) + "\n";
}

export function parseServer(line: string): ServerMsg | null {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof parsed !== "object" || parsed === null) return null;
  const type = (parsed as { type?: unknown }).type;
  if (type !== "ui_state" && type !== "feedback" && type !== "error") return null;
  return parsed as ServerMsg;
}

/** Reassembles lines from arbitrarily chunked stream data. */
export class LineDecoder {
  private carry = "";

  push(chunk: string): string[] {
    this.carry += chunk;
    const parts = this.carry.split("\n");
    this.carry = parts.pop() ?? "";
    return parts.map((p) => p.trim()).filter((p) => p.length > 0);
  }
}
