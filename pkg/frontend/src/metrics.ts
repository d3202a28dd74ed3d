/** Typing-rate display math.  Mirrors the service's session metrics:
 * spaces are not letters, and error rate is positional after removing
 * spaces, with anything typed past the reference counting as wrong. */

export function lettersPerMinute(typed: string, elapsedSeconds: number): number {
  if (typed.length === 0) return 0;
  if (elapsedSeconds <= 0) throw new Error("elapsed time must be positive");
  const letters = typed.split(" ").join("").length;
  return (60 * letters) / elapsedSeconds;
}

export function errorRate(typed: string, reference: string): number {
  const t = typed.split(" ").join("");
  const r = reference.split(" ").join("");
  if (t.length === 0) return 0;
  let wrong = 0;
  for (let i = 0; i < t.length; i++) {
    if (i >= r.length || t[i] !== r[i]) wrong += 1;
  }
  return wrong / t.length;
}
