"""Shared vocabulary for the ten eye states.

State 0 is "eyes closed".  States 1-9 name the coarse gaze directions,
laid out as a 3x3 grid read left to right, top to bottom:

    1 left-up     2 up       3 right-up
    4 left        5 middle   6 right
    7 left-down   8 down     9 right-down

Image coordinates put the origin at the top-left corner, so "up" means a
negative row offset and "left" a negative column offset.
"""

from __future__ import annotations

CLOSED = 0
N_STATES = 10

DIRECTION_NAMES = {
    1: "left-up", 2: "up", 3: "right-up",
    4: "left", 5: "middle", 6: "right",
    7: "left-down", 8: "down", 9: "right-down",
}

STATE_NAMES = {CLOSED: "closed", **DIRECTION_NAMES}

# Horizontal mirror: left/right columns of the grid swap, the middle
# column and the closed state are fixed points.
MIRROR = {0: 0, 1: 3, 2: 2, 3: 1, 4: 6, 5: 5, 6: 4, 7: 9, 8: 8, 9: 7}


def is_state(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and 0 <= value <= 9


def check_state(value) -> int:
    if not is_state(value):
        raise ValueError(f"not an eye state (expected integer 0-9): {value!r}")
    return value


def check_direction(value) -> int:
    check_state(value)
    if value == CLOSED:
        raise ValueError("expected a gaze direction 1-9, got the closed state 0")
    return value


def direction_vector(state: int) -> tuple[int, int]:
    """(dx, dy) for a direction state, each component in {-1, 0, +1}.

    dx is -1 for the left column, +1 for the right; dy is -1 for the top
    row, +1 for the bottom (rows grow downward).
    """
    check_direction(state)
    return (state - 1) % 3 - 1, (state - 1) // 3 - 1


def mirror(state: int) -> int:
    return MIRROR[check_state(state)]
