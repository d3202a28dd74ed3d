"""Sliding-window majority vote over per-frame eye states.

Raw per-frame predictions flicker: blinks read as closed for a few
frames, saccades sweep through neighbouring directions, and the
classifier occasionally misfires outright.  The filter reports the
majority state of the last ``capacity`` frames, so an intended fixation
survives short disturbances and a deliberate change of gaze wins the
vote after about half a window.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .states import check_state

DEFAULT_CAPACITY = 16


class MajorityFilter:
    """Majority vote with sticky ties.

    ``push`` takes the newest per-frame state (or None for frames where
    no eyes were found, which leave the window untouched) and returns the
    filtered state.  On a tie the previous output is kept when it is one
    of the tied states; otherwise the lowest state code wins.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY):
        if not isinstance(capacity, int) or isinstance(capacity, bool):
            raise TypeError(f"capacity must be an int, got {type(capacity).__name__}")
        if capacity < 1:
            raise ValueError(f"capacity must be at least 1, got {capacity}")
        self.capacity = capacity
        self._window: deque[int] = deque(maxlen=capacity)
        self._counts = [0] * 10
        self._output: int | None = None

    def push(self, state: int | None) -> int | None:
        if state is not None:
            state = check_state(state)
            if len(self._window) == self.capacity:
                self._counts[self._window[0]] -= 1
            self._window.append(state)
            self._counts[state] += 1
            top = max(self._counts)
            if self._output is None or self._counts[self._output] != top:
                # lowest code among the leaders; stays put through a tie
                self._output = self._counts.index(top)
        return self._output

    def current(self) -> int | None:
        return self._output

    def reset(self) -> None:
        self._window.clear()
        self._counts = [0] * 10
        self._output = None

    def __len__(self) -> int:
        return len(self._window)


def recommend_capacity(max_disturbance_frames: int) -> int:
    """Smallest window that no disturbance of the given length can flip.

    With at most d consecutive corrupted frames in the window, the true
    fixation still holds a strict majority once the window is longer than
    2d + 1; the next even size keeps the midpoint tie away too.
    """
    if max_disturbance_frames < 0:
        raise ValueError("disturbance length cannot be negative")
    return 2 * max_disturbance_frames + 2


def filter_stream(states, capacity: int = DEFAULT_CAPACITY):
    """Run a fresh filter over an iterable of states; yields the outputs."""
    filt = MajorityFilter(capacity)
    for state in states:
        yield filt.push(state)


# --- scripted noise for the robustness harness ---------------------------


@dataclass(frozen=True)
class NoiseScript:
    """A gaze session as (state, frame_count) fixation segments plus the
    disturbance rates used to corrupt it.

    blink_rate is blinks per minute; saccade_prob and misestimation_rate
    are per-opportunity probabilities.  fps fixes how rates convert to
    frame counts.
    """

    segments: tuple[tuple[int, int], ...]
    fps: float = 29.0
    blink_rate: float = 15.0
    saccade_prob: float = 0.25
    misestimation_rate: float = 0.02

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a script needs at least one segment")
        for state, frames in self.segments:
            check_state(state)
            if frames < 1:
                raise ValueError(f"segment length must be positive, got {frames}")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        for name in ("blink_rate", "saccade_prob", "misestimation_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} cannot be negative")
        if not self.saccade_prob <= 1 or not self.misestimation_rate <= 1:
            raise ValueError("probabilities cannot exceed 1")

    @property
    def total_frames(self) -> int:
        return sum(frames for _, frames in self.segments)

    def clean_states(self) -> list[int]:
        out = []
        for state, frames in self.segments:
            out.extend([state] * frames)
        return out

    def to_json(self) -> str:
        return json.dumps({"segments": [list(s) for s in self.segments],
                           "fps": self.fps, "blink_rate": self.blink_rate,
                           "saccade_prob": self.saccade_prob,
                           "misestimation_rate": self.misestimation_rate})

    @classmethod
    def from_json(cls, text: str) -> "NoiseScript":
        obj = json.loads(text)
        return cls(segments=tuple((int(s), int(f)) for s, f in obj["segments"]),
                   fps=float(obj.get("fps", 29.0)),
                   blink_rate=float(obj.get("blink_rate", 15.0)),
                   saccade_prob=float(obj.get("saccade_prob", 0.25)),
                   misestimation_rate=float(obj.get("misestimation_rate", 0.02)))


def sweep_script(states=range(10), dwell_frames: int = 40, **rates) -> NoiseScript:
    """One fixation per state in order: the standard shakedown script."""
    return NoiseScript(segments=tuple((check_state(s), dwell_frames)
                                      for s in states), **rates)


def simulate_sequence(script: NoiseScript, seed: int,
                      min_gap: int = DEFAULT_CAPACITY) -> list[int]:
    """Corrupt a script's clean frame sequence with blinks, saccade
    sweeps, and misestimations.

    Disturbance events are at most 5 frames long and their start frames
    are spaced at least min_gap + 5 apart, so within any min_gap-frame
    window at most one event (at most 5 corrupted frames) is visible.
    Segment boundaries are left untouched for 5 frames on each side so a
    disturbance never straddles two fixations.
    """

    rng = np.random.default_rng(seed)
    frames = script.clean_states()
    n = len(frames)

    # candidate event starts, earliest first, spaced so windows see one event
    starts = []
    cursor = 0
    segment_edges = set()
    edge = 0
    for _, length in script.segments:
        segment_edges.update(range(max(0, edge - 5), min(n, edge + 5)))
        edge += length
    segment_edges.update(range(max(0, n - 5), n))
    while cursor + 5 <= n:
        if any(f in segment_edges for f in range(cursor, cursor + 5)):
            cursor += 1
            continue
        starts.append(cursor)
        cursor += min_gap + 5

    expected_blinks = script.blink_rate * n / (script.fps * 60.0)
    p_blink = min(1.0, expected_blinks / max(1, len(starts)))

    for start in starts:
        here = frames[start]
        roll = rng.random()
        if roll < p_blink:
            # a blink reads as closed for 3 to 5 frames
            length = int(rng.integers(3, 6))
            for i in range(start, start + length):
                frames[i] = 0
        elif roll < p_blink + script.saccade_prob:
            # a saccade passes through other directions for 1 to 4 frames
            length = int(rng.integers(1, 5))
            for i in range(start, start + length):
                other = int(rng.integers(0, 10))
                frames[i] = other if other != here else (here + 1) % 10
        elif roll < p_blink + script.saccade_prob + script.misestimation_rate:
            other = int(rng.integers(0, 10))
            frames[start] = other if other != here else (here + 1) % 10
    return frames


def write_trace_csv(path, raw, filtered) -> None:
    """Frame-by-frame raw vs filtered states, one row per frame."""
    if len(raw) != len(filtered):
        raise ValueError("raw and filtered traces must have equal length")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "raw", "filtered"])
        for i, (r, f) in enumerate(zip(raw, filtered)):
            writer.writerow([i, r, "" if f is None else f])
