"""Two-level phone-pad keyboard driven by filtered eye states.

The main view is a 3x3 button grid addressed by gaze direction: looking
left-up highlights button 1, straight ahead button 5, and so on.  A
stabilized eye closure clicks the highlighted button and opens that
button's secondary view, where each direction maps to one concrete
action (commit a letter, commit the digit, space, backspace, or back).
Committing anything returns to the main view.
"""

from __future__ import annotations

from dataclasses import dataclass

from .states import CLOSED, check_state

LETTER_GROUPS = {2: "abc", 3: "def", 4: "ghi", 5: "jkl",
                 6: "mno", 7: "pqrs", 8: "tuv", 9: "wxyz"}

# secondary slots for a letter group: left, middle, right, then left-down
LETTER_SLOTS = (4, 5, 6, 7)
DIGIT_SLOT = 8
BACK_SLOT = 2
SPACE_SLOT = 4
BACKSPACE_SLOT = 6


@dataclass(frozen=True)
class Action:
    kind: str  # char | digit | space | backspace | back | noop
    value: str = ""

    def __post_init__(self):
        if self.kind not in ("char", "digit", "space", "backspace", "back", "noop"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.kind in ("char", "digit") and len(self.value) != 1:
            raise ValueError(f"{self.kind} action needs a single character")

    @property
    def commits(self) -> str:
        """The text this action appends ('' when it appends nothing)."""
        if self.kind in ("char", "digit"):
            return self.value
        return " " if self.kind == "space" else ""

    @property
    def spoken(self) -> str:
        if self.kind in ("char", "digit"):
            return self.value
        return "" if self.kind == "noop" else self.kind


NOOP = Action("noop")
BACK = Action("back")
SPACE = Action("space")
BACKSPACE = Action("backspace")


@dataclass(frozen=True)
class Layout:
    """main: button -> spoken labels; secondary: button -> direction -> action."""

    main: dict[int, tuple[str, ...]]
    secondary: dict[int, dict[int, Action]]

    def __post_init__(self):
        buttons = set(range(1, 10))
        if set(self.main) != buttons or set(self.secondary) != buttons:
            raise ValueError("layout must cover buttons 1 through 9")
        letters = []
        for button, actions in self.secondary.items():
            if set(actions) != buttons:
                raise ValueError(f"secondary {button} must cover directions 1-9")
            letters.extend(a.value for a in actions.values() if a.kind == "char")
        if sorted(letters) != [chr(c) for c in range(ord("a"), ord("z") + 1)]:
            raise ValueError("secondary views must place a-z exactly once")


def default_layout() -> Layout:
    main = {1: ("space", "backspace")}
    secondary = {1: {d: NOOP for d in range(1, 10)}}
    secondary[1][SPACE_SLOT] = SPACE
    secondary[1][BACKSPACE_SLOT] = BACKSPACE
    secondary[1][BACK_SLOT] = BACK
    for button, letters in LETTER_GROUPS.items():
        main[button] = tuple(letters)
        view = {d: NOOP for d in range(1, 10)}
        for slot, letter in zip(LETTER_SLOTS, letters):
            view[slot] = Action("char", letter)
        view[DIGIT_SLOT] = Action("digit", str(button))
        view[BACK_SLOT] = BACK
        secondary[button] = view
    return Layout(main=main, secondary=secondary)


@dataclass(frozen=True)
class FeedbackEvent:
    kind: str  # direction_changed | selection_click | char_committed | mode_changed
    direction: int | None = None
    label: str | None = None
    char: str | None = None
    mode: str | None = None
    group: int | None = None


class Keyboard:
    """Feed filtered eye states in; collect feedback events out.

    State changes only inside on_state, one filtered observation at a
    time, so identical streams always replay to identical text.
    """

    def __init__(self, layout: Layout | None = None):
        self.layout = layout if layout is not None else default_layout()
        self.mode = "main"
        self.group: int | None = None
        self.highlight: int | None = None
        self.last_stable_direction: int | None = None
        self.text = ""
        self.closed_latch = False

    def spoken_label(self, direction: int) -> str:
        if self.mode == "main":
            return " ".join(self.layout.main[direction])
        return self.layout.secondary[self.group][direction].spoken

    def on_state(self, filtered: int | None) -> list[FeedbackEvent]:
        if filtered is None:
            return []
        state = check_state(filtered)
        if state == CLOSED:
            if self.closed_latch or self.last_stable_direction is None:
                return []  # one click per closure; none before any direction
            self.closed_latch = True
            return [FeedbackEvent("selection_click"),
                    *self._activate(self.last_stable_direction)]
        self.closed_latch = False
        if state == self.highlight:
            return []
        self.highlight = state
        self.last_stable_direction = state
        return [FeedbackEvent("direction_changed", direction=state,
                              label=self.spoken_label(state))]

    def _activate(self, button: int) -> list[FeedbackEvent]:
        if self.mode == "main":
            self.mode, self.group = "secondary", button
            return [FeedbackEvent("mode_changed", mode="secondary", group=button)]
        action = self.layout.secondary[self.group][button]
        if action.kind == "noop":
            return []
        events = []
        if action.commits:
            self.text += action.commits
            events.append(FeedbackEvent("char_committed", char=action.commits))
        elif action.kind == "backspace":
            self.text = self.text[:-1]
        self.mode, self.group = "main", None
        events.append(FeedbackEvent("mode_changed", mode="main"))
        return events


def type_script(keyboard: Keyboard, filtered_stream) -> str:
    """Fold a filtered-state stream through the keyboard; final text."""
    for state in filtered_stream:
        keyboard.on_state(state)
    return keyboard.text


def selection_stream(picks) -> list[int]:
    """Filtered-state stream that clicks the given (button, direction)
    picks in order: one click to open each button's secondary view, one
    to take the direction inside it."""
    stream = []
    for button, direction in picks:
        stream.extend([check_state(button), CLOSED, check_state(direction), CLOSED])
    return stream


@dataclass(frozen=True)
class SessionMetrics:
    letters: int
    elapsed_seconds: float
    letters_per_minute: float
    error_rate: float

    def __post_init__(self):
        if not 0.0 <= self.error_rate <= 1.0:
            raise ValueError("error_rate must be within [0, 1]")
        if self.letters < 0 or self.elapsed_seconds <= 0:
            raise ValueError("letters must be >= 0 and elapsed positive")


def compute_metrics(typed: str, reference: str,
                    elapsed_seconds: float) -> SessionMetrics:
    """Rate and accuracy of a typing session.

    Spaces are dropped from both texts before comparison and are not
    counted as letters.  A typed position with no aligned reference
    character counts as an error.
    """
    if elapsed_seconds <= 0:
        raise ValueError("elapsed_seconds must be positive")
    typed_letters = typed.replace(" ", "")
    ref_letters = reference.replace(" ", "")
    n = len(typed_letters)
    if n == 0:
        return SessionMetrics(0, elapsed_seconds, 0.0, 0.0)
    wrong = sum(1 for i, c in enumerate(typed_letters)
                if i >= len(ref_letters) or ref_letters[i] != c)
    return SessionMetrics(n, elapsed_seconds, 60.0 * n / elapsed_seconds,
                          wrong / n)
