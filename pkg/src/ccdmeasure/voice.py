"""Voice-control state machine: a pure transition function over text tokens.

Three states: sleeping (default, ignores everything but the wake word),
listening (a 5-second window for one command), and dictating (accumulating a
snapshot note until "ok").  The machine knows nothing about speech — any
transcriber that yields text tokens can drive it, including a keyboard stub.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Optional, Union

DEFAULT_WAKE_WORD = "activate"
LISTEN_TIMEOUT_S = 5.0
MAX_NOTE_CHARS = 2000


@dataclass(frozen=True)
class Sleeping:
    pass


@dataclass(frozen=True)
class Listening:
    activated_at: float


@dataclass(frozen=True)
class Dictating:
    buffer: str


VoiceState = Union[Sleeping, Listening, Dictating]


@dataclass(frozen=True)
class ZoomLeft:
    pass


@dataclass(frozen=True)
class ZoomRight:
    pass


@dataclass(frozen=True)
class ZoomOut:
    pass


@dataclass(frozen=True)
class OpenNext:
    pass


@dataclass(frozen=True)
class SaveSnapshot:
    note: str = ""


VoiceAction = Union[ZoomLeft, ZoomRight, ZoomOut, OpenNext, SaveSnapshot]

_COMMANDS: dict[str, VoiceAction] = {
    "left": ZoomLeft(),
    "right": ZoomRight(),
    "out": ZoomOut(),
    "both": ZoomOut(),
    "open": OpenNext(),
}


def normalize_token(token: str) -> str:
    return token.strip().strip(string.punctuation).lower()


def tick(state: VoiceState, now: float) -> VoiceState:
    """Collapse a stale listening window; everything else is unchanged."""
    if isinstance(state, Listening) and now - state.activated_at > LISTEN_TIMEOUT_S:
        return Sleeping()
    return state


def step(
    state: VoiceState,
    token: str,
    now: float,
    wake_word: str = DEFAULT_WAKE_WORD,
) -> tuple[VoiceState, Optional[VoiceAction]]:
    """Process one token at time ``now``; returns (new state, optional action).

    A stale listening window collapses to sleeping before the token is
    matched, so a late command is silently dropped.
    """
    state = tick(state, now)
    word = normalize_token(token)

    if isinstance(state, Sleeping):
        if word == wake_word:
            return Listening(activated_at=now), None
        return state, None

    if isinstance(state, Listening):
        if word == wake_word:
            return Listening(activated_at=now), None  # refresh the window
        if word == "save":
            return Dictating(buffer=""), None
        action = _COMMANDS.get(word)
        if action is not None:
            return Sleeping(), action
        return state, None  # unrecognized, window timestamp unchanged

    # Dictating: only "ok" escapes; everything else is note text
    if word == "ok":
        return Sleeping(), SaveSnapshot(note=state.buffer)
    buffer = f"{state.buffer} {word}".strip() if word else state.buffer
    return Dictating(buffer=buffer[:MAX_NOTE_CHARS]), None


def feed(
    state: VoiceState,
    text: str,
    now: float,
    wake_word: str = DEFAULT_WAKE_WORD,
) -> tuple[VoiceState, list[VoiceAction]]:
    """Split a multi-word transcription and run each token through step."""
    actions = []
    for token in text.split():
        state, action = step(state, token, now, wake_word)
        if action is not None:
            actions.append(action)
    return state, actions


def state_indicator(state: VoiceState) -> str:
    """'idle' (grey icon) when sleeping, 'active' (red icon) otherwise."""
    return "idle" if isinstance(state, Sleeping) else "active"
