/** Renders the model to an HTML string.  Pure function: all state lives in
 * the model, so tests assert on markup without a DOM. */
import { lettersPerMinute, errorRate } from "./metrics.js";
import { UiModel } from "./model.js";

// Mirrors the server's keypad: letter groups on 2-9, functions on 1.  Grid
// rows are phone order, so direction 3 is the top-right cell.
const MAIN_LABELS: Record<number, string> = {
  1: "space ⌫",
  2: "abc",
  3: "def",
  4: "ghi",
  5: "jkl",
  6: "mno",
  7: "pqrs",
  8: "tuv",
  9: "wxyz",
};

// Secondary placements: candidates on 4/5/6(/7), the digit on 8, back on 2.
const LETTER_SLOTS = [4, 5, 6, 7];

function secondaryLabels(group: number | null): Record<number, string> {
  if (group === null) return {};
  if (group === 1) return { 2: "back", 4: "space", 6: "⌫" };
  const cells: Record<number, string> = { 2: "back", 8: String(group) };
  const letters = MAIN_LABELS[group] ?? "";
  for (let i = 0; i < letters.length; i++) cells[LETTER_SLOTS[i]] = letters[i];
  return cells;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function cell(direction: number, label: string, lit: boolean): string {
  const classes = ["cell"];
  if (lit) classes.push("lit");
  if (label === "") classes.push("blank");
  return (
    `<div class="${classes.join(" ")}" data-dir="${direction}">` +
    `<span class="dir">${direction}</span><span class="label">${esc(label)}</span></div>`
  );
}

function statusLine(model: UiModel): string {
  if (model.connection === "closed") {
    return `<span class="bad">disconnected</span> <button data-action="reconnect">reconnect</button>`;
  }
  if (model.connection === "connecting") return `<span>connecting…</span>`;
  const where = model.mode === "secondary" ? `button ${model.group}` : "main";
  const err = model.lastError ? ` <span class="bad">${esc(model.lastError)}</span>` : "";
  return `<span>connected · ${where}</span>${err}`;
}

function metricsLine(model: UiModel, nowMs: number): string {
  if (model.firstCommitMs === null) return "";
  const elapsed = (nowMs - model.firstCommitMs) / 1000;
  const parts: string[] = [];
  if (elapsed > 0) parts.push(`${lettersPerMinute(model.text, elapsed).toFixed(1)} letters/min`);
  if (model.reference !== null) {
    parts.push(`error rate ${(errorRate(model.text, model.reference) * 100).toFixed(1)}%`);
  }
  return parts.join(" · ");
}

export function render(model: UiModel, nowMs: number = Date.now()): string {
  const labels = model.mode === "secondary" ? secondaryLabels(model.group) : MAIN_LABELS;
  const cells: string[] = [];
  for (let direction = 1; direction <= 9; direction++) {
    cells.push(cell(direction, labels[direction] ?? "", model.highlight === direction));
  }

  const boardClasses = ["board"];
  if (model.connection !== "open" || !model.synced) boardClasses.push("disabled");
  if (model.minimalUi) boardClasses.push("hidden");
  const textClasses = model.minimalUi ? "textbar hidden" : "textbar";

  const replayNote =
    model.source.kind === "replay"
      ? `<div class="replay">replaying ${esc(model.source.name)}: ${model.source.sent}/${model.source.total}</div>`
      : "";

  return (
    `<div class="status">${statusLine(model)}</div>` +
    `<div class="${boardClasses.join(" ")}">${cells.join("")}</div>` +
    `<div class="${textClasses}">${esc(model.text)}<span class="caret"></span></div>` +
    `<div class="metrics">${metricsLine(model, nowMs)}</div>` +
    replayNote
  );
}
