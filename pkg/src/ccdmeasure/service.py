"""Measurement service: studies, sessions, line editing, voice, snapshots.

Holds sessions in memory only; snapshots are the sole persistence.  Every
angle the service reports goes through :func:`ccdmeasure.geometry.ccd_angle`,
so displayed values always match the library bit for bit.
"""

from __future__ import annotations

import datetime as _dt
import json
import threading
import time
import uuid
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

from PIL import Image, ImageDraw
from pydantic import BaseModel

from . import voice
from .fitting import RansacConfig
from .geometry import (
    ChannelFitError,
    DegenerateAngleWarning,
    FemurMeasurement,
    MissingChannelError,
    ccd_angle,
    line_from_endpoints,
    measure_femur,
)
from .heatmap import DEFAULT_CUTOFF, Heatmap, Side, load_heatmap


class ServiceError(RuntimeError):
    pass


class UnknownSessionError(ServiceError):
    pass


@dataclass
class Study:
    manifest_path: Path
    heatmap: Heatmap
    measurements: dict[Side, FemurMeasurement] = field(default_factory=dict)
    errors: dict[Side, str] = field(default_factory=dict)
    opened_seq: int = 0

    @property
    def sides_present(self) -> set[Side]:
        return {c.name.side for c in self.heatmap.channels}

    @property
    def identity(self) -> str:
        sides = self.sides_present
        if sides == {Side.RIGHT}:
            return "right"
        if sides == {Side.LEFT}:
            return "left"
        return "both"


@dataclass
class Session:
    session_id: str
    studies: list[Study] = field(default_factory=list)
    view: str = "both"  # both | left_zoom | right_zoom
    voice_state: voice.VoiceState = field(default_factory=voice.Sleeping)
    folder_cursor: float | None = None
    warning: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    _seq: int = 0


def _slots(session: Session) -> list[tuple[str, Study]]:
    """Display slot assignment: with two studies the right-femur study takes
    the left slot; a single study occupies the left slot."""
    studies = session.studies
    if len(studies) <= 1:
        return [("left", s) for s in studies]
    a, b = sorted(studies, key=lambda s: s.opened_seq)
    if b.identity == "right" and a.identity != "right":
        a, b = b, a
    elif a.identity == "left" and b.identity != "left":
        a, b = b, a
    return [("left", a), ("right", b)]


class MeasurementService:
    def __init__(
        self,
        watch_folder: Path | str | None = None,
        save_folder: Path | str | None = None,
        wake_word: str = voice.DEFAULT_WAKE_WORD,
        cutoff: float = DEFAULT_CUTOFF,
        config: RansacConfig = RansacConfig(),
        clock=time.monotonic,
    ):
        self.watch_folder = Path(watch_folder) if watch_folder else None
        self.save_folder = Path(save_folder) if save_folder else None
        self.wake_word = wake_word
        self.cutoff = cutoff
        self.config = config
        self.clock = clock
        self._sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()

    # -- sessions ---------------------------------------------------------

    def create_session(self) -> str:
        session = Session(session_id=uuid.uuid4().hex[:12])
        with self._registry_lock:
            self._sessions[session.session_id] = session
        return session.session_id

    def _session(self, session_id: str) -> Session:
        with self._registry_lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSessionError(f"unknown session: {session_id}") from None

    # -- studies ----------------------------------------------------------

    def open_study(self, session_id: str, manifest_path: Path | str) -> None:
        heatmap = load_heatmap(manifest_path)
        study = Study(manifest_path=Path(manifest_path), heatmap=heatmap)
        for side in study.sides_present:
            try:
                study.measurements[side] = measure_femur(
                    heatmap, side, self.config, self.cutoff
                )
            except (MissingChannelError, ChannelFitError) as exc:
                study.errors[side] = str(exc)
        session = self._session(session_id)
        with session.lock:
            session._seq += 1
            study.opened_seq = session._seq
            session.studies.append(study)
            if len(session.studies) > 2:
                oldest = min(session.studies, key=lambda s: s.opened_seq)
                session.studies.remove(oldest)
            session.warning = None

    def open_next(self, session_id: str) -> bool:
        """Open the next manifest from the watch folder, sorted by mtime.

        First use opens the newest; afterwards, the oldest manifest newer
        than the cursor.  Returns False (with a session warning) when
        nothing newer exists.
        """
        if self.watch_folder is None:
            raise ServiceError("no watch folder configured")
        if not self.watch_folder.is_dir():
            raise ServiceError(f"watch folder unreadable: {self.watch_folder}")
        manifests = sorted(
            self.watch_folder.glob("**/manifest.json"),
            key=lambda p: p.stat().st_mtime,
        )
        session = self._session(session_id)
        with session.lock:
            cursor = session.folder_cursor
        if not manifests:
            with session.lock:
                session.warning = "watch folder contains no manifests"
            return False
        if cursor is None:
            target = manifests[-1]
        else:
            newer = [p for p in manifests if p.stat().st_mtime > cursor]
            if not newer:
                with session.lock:
                    session.warning = "no image newer than the last opened one"
                return False
            target = newer[0]
        self.open_study(session_id, target)
        with session.lock:
            session.folder_cursor = target.stat().st_mtime
        return True

    # -- line editing -----------------------------------------------------

    def update_line(
        self,
        session_id: str,
        slot: str,
        side: Side,
        which: str,
        endpoint_index: int,
        x: float,
        y: float,
    ) -> float:
        """Move one endpoint, rebuild the line, and return the new CCD angle."""
        if which not in ("neck", "shaft"):
            raise ServiceError(f"unknown line kind: {which}")
        if endpoint_index not in (0, 1):
            raise ServiceError(f"endpoint index must be 0 or 1: {endpoint_index}")
        session = self._session(session_id)
        with session.lock:
            study = dict(_slots(session)).get(slot)
            if study is None:
                raise ServiceError(f"no study in slot {slot!r}")
            m = study.measurements.get(side)
            if m is None:
                raise ServiceError(f"no measurement for side {side.value!r}")
            endpoints = list(m.neck_endpoints if which == "neck" else m.shaft_endpoints)
            endpoints[endpoint_index] = (float(x), float(y))
            # after a manual edit the displayed segments are the source of
            # truth, so both lines are rebuilt from endpoints; a client doing
            # the same reconstruction gets the identical angle bit for bit
            neck_endpoints = tuple(endpoints) if which == "neck" else m.neck_endpoints
            shaft_endpoints = tuple(endpoints) if which == "shaft" else m.shaft_endpoints
            neck_line = line_from_endpoints(*neck_endpoints)
            shaft_line = line_from_endpoints(*shaft_endpoints)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", DegenerateAngleWarning)
                ccd = ccd_angle(neck_line, shaft_line)
            study.measurements[side] = replace(
                m,
                neck_centerline=neck_line,
                shaft_centerline=shaft_line,
                ccd_degrees=ccd,
                neck_endpoints=neck_endpoints,
                shaft_endpoints=shaft_endpoints,
                degenerate=bool(caught),
                neck_fit=None,
                shaft_fit=None,
            )
            return ccd

    # -- voice ------------------------------------------------------------

    def process_voice_token(
        self, session_id: str, token: str, now: float | None = None
    ) -> str | None:
        """Run one token through the state machine and execute its action."""
        if now is None:
            now = self.clock()
        session = self._session(session_id)
        with session.lock:
            state, action = voice.step(
                session.voice_state, token, now, self.wake_word
            )
            session.voice_state = state
            if action is None:
                return None
            if isinstance(action, voice.ZoomLeft):
                session.view = "left_zoom"
                return "zoom_left"
            if isinstance(action, voice.ZoomRight):
                session.view = "right_zoom"
                return "zoom_right"
            if isinstance(action, voice.ZoomOut):
                session.view = "both"
                return "zoom_out"
        # the remaining actions touch files; run them outside the lock
        if isinstance(action, voice.OpenNext):
            self.open_next(session_id)
            return "open_next"
        if isinstance(action, voice.SaveSnapshot):
            self.save_snapshot(session_id, action.note)
            return "save_snapshot"
        return None

    def tick(self, now: float | None = None) -> None:
        """Collapse stale listening windows across all sessions."""
        if now is None:
            now = self.clock()
        with self._registry_lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            with session.lock:
                session.voice_state = voice.tick(session.voice_state, now)

    def start_ticker(self, interval_s: float = 0.25) -> threading.Thread:
        def run():
            while True:
                time.sleep(interval_s)
                self.tick()

        thread = threading.Thread(target=run, daemon=True, name="voice-ticker")
        thread.start()
        return thread

    # -- snapshots --------------------------------------------------------

    def save_snapshot(self, session_id: str, note: str = "") -> dict[str, str]:
        """Burn lines and angles into an overlay PNG plus a JSON sidecar."""
        if self.save_folder is None:
            raise ServiceError("no save folder configured")
        session = self._session(session_id)
        with session.lock:
            if not session.studies:
                raise ServiceError("no open study to snapshot")
            slots = _slots(session)
            overlay = _render_overlay(slots)
            doc = {
                "timestamp": _dt.datetime.now().isoformat(timespec="milliseconds"),
                "note": note,
                "studies": [
                    {
                        "slot": slot,
                        "manifest": str(study.manifest_path),
                        "measurements": {
                            side.value: _measurement_to_dict(m)
                            for side, m in study.measurements.items()
                        },
                    }
                    for slot, study in slots
                ],
            }
        self.save_folder.mkdir(parents=True, exist_ok=True)
        stamp = _dt.datetime.now().strftime("%Y%m%dT%H%M%S.%f")[:-3]
        png_path = self.save_folder / f"snapshot_{stamp}.png"
        json_path = self.save_folder / f"snapshot_{stamp}.json"
        overlay.save(png_path)
        json_path.write_text(json.dumps(doc, indent=2))
        return {"png": str(png_path), "json": str(json_path)}

    # -- state serialization ---------------------------------------------

    def session_state(self, session_id: str, now: float | None = None) -> dict:
        if now is None:
            now = self.clock()
        session = self._session(session_id)
        with session.lock:
            session.voice_state = voice.tick(session.voice_state, now)
            return {
                "session_id": session.session_id,
                "view": session.view,
                "indicator": voice.state_indicator(session.voice_state),
                "warning": session.warning,
                "studies": [
                    {
                        "slot": slot,
                        "manifest": str(study.manifest_path),
                        "identity": study.identity,
                        "width": study.heatmap.width,
                        "height": study.heatmap.height,
                        "measurements": {
                            side.value: _measurement_to_dict(m)
                            for side, m in study.measurements.items()
                        },
                        "errors": {
                            side.value: msg for side, msg in study.errors.items()
                        },
                    }
                    for slot, study in _slots(session)
                ],
            }


def _measurement_to_dict(m: FemurMeasurement) -> dict:
    return {
        "ccd_degrees": m.ccd_degrees,
        "degenerate": m.degenerate,
        "neck_endpoints": [list(p) for p in m.neck_endpoints],
        "shaft_endpoints": [list(p) for p in m.shaft_endpoints],
    }


def _render_overlay(slots: list[tuple[str, Study]]) -> Image.Image:
    """Side-by-side panels: radiograph (or blank) with lines and angle text."""
    panels = []
    for _, study in slots:
        w, h = study.heatmap.width, study.heatmap.height
        if study.heatmap.image is not None:
            panel = Image.fromarray(study.heatmap.image).convert("RGB")
        else:
            panel = Image.new("RGB", (w, h), "black")
        draw = ImageDraw.Draw(panel)
        text_y = 10
        for side, m in sorted(study.measurements.items(), key=lambda kv: kv[0].value):
            draw.line([*m.neck_endpoints], fill="yellow", width=2)
            draw.line([*m.shaft_endpoints], fill="cyan", width=2)
            draw.text(
                (10, text_y),
                f"{side.value} CCD: {m.ccd_degrees:.1f}°",
                fill="red",
            )
            text_y += 16
        panels.append(panel)
    width = sum(p.width for p in panels)
    height = max(p.height for p in panels)
    combined = Image.new("RGB", (width, height), "black")
    x = 0
    for p in panels:
        combined.paste(p, (x, 0))
        x += p.width
    return combined


class OpenBody(BaseModel):
    manifest: str


class LineBody(BaseModel):
    slot: str
    side: str
    which: str
    endpoint: int
    x: float
    y: float


class VoiceBody(BaseModel):
    token: str


class SnapshotBody(BaseModel):
    note: str = ""


def create_app(service: MeasurementService):
    """FastAPI wiring around a MeasurementService."""
    from fastapi import FastAPI, HTTPException

    app = FastAPI(title="ccdmeasure service")

    def _get(session_id: str) -> str:
        try:
            service._session(session_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail="unknown session")
        return session_id

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session():
        return {"session_id": service.create_session()}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return service.session_state(_get(session_id))

    @app.post("/sessions/{session_id}/open")
    def open_study(session_id: str, body: OpenBody):
        try:
            service.open_study(_get(session_id), body.manifest)
        except Exception as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return service.session_state(session_id)

    @app.post("/sessions/{session_id}/open-next")
    def open_next(session_id: str):
        try:
            opened = service.open_next(_get(session_id))
        except ServiceError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        state = service.session_state(session_id)
        state["opened"] = opened
        return state

    @app.patch("/sessions/{session_id}/lines")
    def patch_line(session_id: str, body: LineBody):
        try:
            side = Side(body.side)
            angle = service.update_line(
                _get(session_id), body.slot, side, body.which, body.endpoint,
                body.x, body.y,
            )
        except (ServiceError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"ccd_degrees": angle, "side": body.side, "slot": body.slot}

    @app.post("/sessions/{session_id}/voice")
    def voice_token(session_id: str, body: VoiceBody):
        action = service.process_voice_token(_get(session_id), body.token)
        state = service.session_state(session_id)
        return {
            "state": type(service._session(session_id).voice_state).__name__.lower(),
            "indicator": state["indicator"],
            "view": state["view"],
            "action": action,
        }

    @app.post("/sessions/{session_id}/snapshot")
    def snapshot(session_id: str, body: SnapshotBody):
        try:
            return service.save_snapshot(_get(session_id), body.note)
        except ServiceError as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    return app
