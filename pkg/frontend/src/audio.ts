/** Tone and speech rendering of feedback events.  The engine contract is
 * events, not audio, so everything here degrades to silence when the
 * platform lacks WebAudio or speech synthesis. */
import { Feedback } from "./protocol.js";

export interface FeedbackSink {
  handle(event: Feedback): void;
}

export class SilentSink implements FeedbackSink {
  handle(): void {}
}

export class WebAudioSink implements FeedbackSink {
  private ctx: AudioContext | null = null;

  handle(event: Feedback): void {
    switch (event.kind) {
      case "selection_click":
        this.tone(1175, 70, 0.3);
        break;
      case "direction_changed":
        this.tone(392 + 36 * (event.payload.direction ?? 0), 45, 0.12);
        if (event.payload.label) this.speak(event.payload.label);
        break;
      case "char_committed":
        if (event.payload.char !== undefined) {
          this.speak(event.payload.char === " " ? "space" : event.payload.char);
        }
        break;
      case "mode_changed":
        this.tone(event.payload.mode === "secondary" ? 660 : 523, 55, 0.12);
        break;
    }
  }

  private tone(freq: number, ms: number, gain: number): void {
    if (typeof AudioContext === "undefined") return;
    this.ctx ??= new AudioContext();
    const osc = this.ctx.createOscillator();
    const amp = this.ctx.createGain();
    osc.frequency.value = freq;
    osc.type = "sine";
    amp.gain.value = gain;
    osc.connect(amp);
    amp.connect(this.ctx.destination);
    const now = this.ctx.currentTime;
    amp.gain.setTargetAtTime(0, now + ms / 1000, 0.01);
    osc.start(now);
    osc.stop(now + ms / 1000 + 0.05);
  }

  private speak(text: string): void {
    if (typeof speechSynthesis === "undefined") return;
    speechSynthesis.cancel(); // stale letter names are worse than clipped ones
    const utterance = new SpeechSynthesisUtterance(text);
    utterance.rate = 1.3;
    speechSynthesis.speak(utterance);
  }
}
