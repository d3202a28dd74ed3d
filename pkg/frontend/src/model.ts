/** Client-side mirror of the server's keyboard session.
 *
 * The server owns all typing logic.  This model only reflects the messages
 * it has received, so a page reload mid-session recovers as soon as the
 * next ui_state arrives.  In particular the rendered highlight comes from
 * ui_state alone, never from feedback hints.
 */
import { Feedback, Mode, ServerMsg } from "./protocol.js";

export type ConnectionState = "connecting" | "open" | "closed";

export type InputSource =
  | { kind: "keys" }
  | { kind: "replay"; name: string; total: number; sent: number };

export interface UiModel {
  connection: ConnectionState;
  synced: boolean;
  mode: Mode;
  group: number | null;
  highlight: number | null;
  text: string;
  feedback: Feedback[];
  lastError: string | null;
  minimalUi: boolean;
  source: InputSource;
  reference: string | null;
  firstCommitMs: number | null;
  lastCommitMs: number | null;
}

export function initialModel(): UiModel {
  return {
    connection: "connecting",
    synced: false,
    mode: "main",
    group: null,
    highlight: null,
    text: "",
    feedback: [],
    lastError: null,
    minimalUi: false,
    source: { kind: "keys" },
    reference: null,
    firstCommitMs: null,
    lastCommitMs: null,
  };
}

export function apply(model: UiModel, msg: ServerMsg, nowMs: number): UiModel {
  switch (msg.type) {
    case "ui_state":
      return {
        ...model,
        synced: true,
        mode: msg.mode,
        group: msg.group,
        highlight: msg.highlight,
        text: msg.text,
      };
    case "feedback": {
      const next = { ...model, feedback: [...model.feedback, msg] };
      if (msg.kind === "char_committed") {
        next.firstCommitMs = model.firstCommitMs ?? nowMs;
        next.lastCommitMs = nowMs;
      }
      return next;
    }
    case "error":
      return { ...model, lastError: `${msg.code}: ${msg.message}` };
    default:
      return model;
  }
}

/** Hands over the queued feedback exactly once (one sound per event). */
export function drainFeedback(model: UiModel): [Feedback[], UiModel] {
  if (model.feedback.length === 0) return [[], model];
  return [model.feedback, { ...model, feedback: [] }];
}

export function setConnection(model: UiModel, connection: ConnectionState): UiModel {
  if (connection === model.connection) return model;
  // a dropped session's board is stale; require a fresh ui_state
  const synced = connection === "open" ? model.synced : false;
  return { ...model, connection, synced };
}
