"""
Voice command state machine
===========================

Replays a transcript through the wake-word state machine and prints every
transition. Commands only fire inside the 5 second window after the wake
word; "save" opens a dictation buffer that only "ok" closes.
"""

from ccdmeasure.voice import Sleeping, state_indicator, step

transcript = [
    (0.0, "right"),        # ignored, machine is asleep
    (1.0, "activate"),
    (2.0, "right"),        # zooms, then back to sleep
    (3.0, "activate"),
    (9.5, "left"),         # too late, window closed at 8.0
    (10.0, "activate"),
    (11.0, "save"),        # start dictating a snapshot note
    (12.0, "suspected"),
    (13.0, "coxa"),
    (14.0, "vara"),
    (15.0, "ok"),          # commit
]

state = Sleeping()
for now, token in transcript:
    state, action = step(state, token, now)
    fired = f"  -> {action}" if action else ""
    print(f"t={now:5.1f}  {token!r:13}  [{state_indicator(state)}] "
          f"{type(state).__name__}{fired}")
