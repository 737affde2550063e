"""HTTP listening-test service: sessions, blinded stimuli, durable ratings.

State lives in a directory of plain files: stimuli.json (the blinded id map,
written once when a test definition is first loaded), sessions.ndjson, and
ratings.ndjson. Both logs are append-only and replayed at startup, so a
restart loses nothing and keeps every issued id valid.
"""

# No postponed annotations here: the request model is defined inside
# create_app, and the framework must see the class itself, not its name.

import hmac
import json
import os
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..errors import (
    DuplicateEntryError,
    MissingAudioError,
    NoRatingsError,
    NoTestLoadedError,
    ScoreOutOfRangeError,
    SchemaMismatchError,
    UnknownSessionError,
    UnknownStimulusError,
)
from .stats import MosSummary, summarize

PathLike = Union[str, Path]

_ID_BYTES = 12  # 96 bits of entropy per opaque token


@dataclass(frozen=True)
class Stimulus:
    stimulus_id: str
    system_name: str  # never sent to rater-facing endpoints
    utterance_id: str
    audio_path: Path


def load_test_definition(path: PathLike) -> List[Stimulus]:
    """Materialize stimuli with fresh random ids from a definition file.

    Definition shape: {"name": str, "systems": [{"name": str,
    "utterances": [{"id": str, "wav": path}]}]}. Relative wav paths resolve
    against the definition file's directory.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        systems = doc["systems"]
        entries = [
            (sys_["name"], utt["id"], utt["wav"])
            for sys_ in systems
            for utt in sys_["utterances"]
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatchError(f"{path}: not a test definition ({exc})") from exc

    seen = set()
    missing = []
    stimuli = []
    for system_name, utterance_id, wav in entries:
        key = (system_name, utterance_id)
        if key in seen:
            raise DuplicateEntryError(
                f"(system={system_name!r}, utterance={utterance_id!r}) listed twice"
            )
        seen.add(key)
        audio_path = Path(wav)
        if not audio_path.is_absolute():
            audio_path = path.parent / audio_path
        if not audio_path.is_file():
            missing.append(str(audio_path))
            continue
        stimuli.append(
            Stimulus(secrets.token_urlsafe(_ID_BYTES), system_name, utterance_id, audio_path)
        )
    if missing:
        raise MissingAudioError(
            f"{len(missing)} audio file(s) absent: {', '.join(missing[:5])}"
        )
    return stimuli


class MosStore:
    """In-memory view over the append-only state directory.

    All mutation goes through one lock and hits disk before returning;
    reads work on plain dict snapshots.
    """

    def __init__(self, state_dir: PathLike):
        self._dir = Path(state_dir)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._stimuli_file = self._dir / "stimuli.json"
        self._sessions_log = self._dir / "sessions.ndjson"
        self._ratings_log = self._dir / "ratings.ndjson"
        self._lock = threading.Lock()
        self._stimuli: Dict[str, Stimulus] = {}
        self._sessions: Dict[str, List[str]] = {}
        self._ratings: Dict[Tuple[str, str], int] = {}
        self._replay()

    # -- persistence ----------------------------------------------------------

    def _replay(self) -> None:
        if self._stimuli_file.exists():
            doc = json.loads(self._stimuli_file.read_text(encoding="utf-8"))
            for e in doc["stimuli"]:
                st = Stimulus(e["id"], e["system"], e["utterance"], Path(e["wav"]))
                self._stimuli[st.stimulus_id] = st
        for rec in self._read_log(self._sessions_log):
            self._sessions[rec["session_id"]] = list(rec["playlist"])
        for rec in self._read_log(self._ratings_log):
            self._ratings[(rec["session"], rec["stimulus"])] = int(rec["score"])

    @staticmethod
    def _read_log(path: Path):
        if not path.exists():
            return
        with path.open("r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except ValueError:
                    # torn trailing line from an interrupted write
                    continue

    def _append(self, path: Path, record: dict) -> None:
        with path.open("a", encoding="utf-8") as f:
            f.write(json.dumps(record, ensure_ascii=False) + "\n")
            f.flush()
            os.fsync(f.fileno())

    # -- test definition ------------------------------------------------------

    @property
    def has_test(self) -> bool:
        return bool(self._stimuli)

    def install(self, stimuli: List[Stimulus]) -> None:
        """Persist a freshly materialized stimulus set (first load only)."""
        with self._lock:
            if self._stimuli:
                raise DuplicateEntryError(
                    "a test definition is already installed in this state directory"
                )
            doc = {
                "stimuli": [
                    {
                        "id": st.stimulus_id,
                        "system": st.system_name,
                        "utterance": st.utterance_id,
                        "wav": str(st.audio_path),
                    }
                    for st in stimuli
                ]
            }
            self._stimuli_file.write_text(
                json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
            )
            self._stimuli = {st.stimulus_id: st for st in stimuli}

    # -- sessions and ratings -------------------------------------------------

    def create_session(self) -> Tuple[str, List[str]]:
        if not self._stimuli:
            raise NoTestLoadedError("no test definition installed")
        session_id = secrets.token_urlsafe(_ID_BYTES)
        playlist = list(self._stimuli)
        secrets.SystemRandom().shuffle(playlist)
        with self._lock:
            self._append(
                self._sessions_log,
                {
                    "session_id": session_id,
                    "playlist": playlist,
                    "ts": _now_iso(),
                },
            )
            self._sessions[session_id] = playlist
        return session_id, playlist

    def get_session(self, session_id: str) -> Tuple[List[str], Dict[str, int]]:
        """Stored playlist plus this session's own scores, for client resume."""
        playlist = self._sessions.get(session_id)
        if playlist is None:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        scores = {
            stim: score
            for (sess, stim), score in self._ratings.items()
            if sess == session_id
        }
        return playlist, scores

    def stimulus(self, stimulus_id: str) -> Stimulus:
        st = self._stimuli.get(stimulus_id)
        if st is None:
            raise UnknownStimulusError(f"unknown stimulus {stimulus_id!r}")
        return st

    def submit_rating(self, session_id: str, stimulus_id: str, score: int) -> None:
        if session_id not in self._sessions:
            raise UnknownSessionError(f"unknown session {session_id!r}")
        if stimulus_id not in self._stimuli:
            raise UnknownStimulusError(f"unknown stimulus {stimulus_id!r}")
        if not isinstance(score, int) or isinstance(score, bool) or not 1 <= score <= 5:
            raise ScoreOutOfRangeError(f"score must be an integer in 1..5, got {score!r}")
        with self._lock:
            self._append(
                self._ratings_log,
                {
                    "session": session_id,
                    "stimulus": stimulus_id,
                    "score": score,
                    "ts": _now_iso(),
                },
            )
            self._ratings[(session_id, stimulus_id)] = score

    def rating_count(self) -> int:
        return len(self._ratings)

    def ratings_by_system(self) -> Dict[str, List[int]]:
        out: Dict[str, List[int]] = {}
        for (_, stimulus_id), score in self._ratings.items():
            system = self._stimuli[stimulus_id].system_name
            out.setdefault(system, []).append(score)
        return out

    def summaries(self) -> List[MosSummary]:
        by_system = self.ratings_by_system()
        if not by_system:
            raise NoRatingsError("no ratings stored yet")
        return summarize(by_system)


def _now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def create_app(store: MosStore, admin_token: str, ui_dir: Optional[PathLike] = None):
    """FastAPI application over a store. Endpoints are sync on purpose: the
    framework runs them on a thread pool, so the store's lock sees real
    concurrency in tests and under uvicorn alike."""
    from fastapi import FastAPI, Header, HTTPException
    from fastapi.responses import FileResponse
    from pydantic import BaseModel

    class RatingIn(BaseModel):
        session_id: str
        stimulus_id: str
        score: int

    app = FastAPI(title="listening-test service", docs_url=None, redoc_url=None)

    @app.post("/api/v1/session")
    def post_session():
        try:
            session_id, playlist = store.create_session()
        except NoTestLoadedError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {"session_id": session_id, "playlist": playlist}

    @app.get("/api/v1/session/{session_id}")
    def get_session(session_id: str):
        try:
            playlist, scores = store.get_session(session_id)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"session_id": session_id, "playlist": playlist, "scores": scores}

    @app.get("/api/v1/stimulus/{stimulus_id}/audio")
    def get_audio(stimulus_id: str):
        try:
            st = store.stimulus(stimulus_id)
        except UnknownStimulusError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        # filename is the opaque id: the real path could leak the system name
        return FileResponse(
            st.audio_path, media_type="audio/wav", filename=f"{stimulus_id}.wav"
        )

    @app.post("/api/v1/rating")
    def post_rating(body: RatingIn):
        try:
            store.submit_rating(body.session_id, body.stimulus_id, body.score)
        except UnknownSessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except UnknownStimulusError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except ScoreOutOfRangeError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"ok": True}

    @app.get("/api/v1/admin/summary")
    def get_summary(x_admin_token: str = Header(default="")):
        if not hmac.compare_digest(x_admin_token, admin_token):
            raise HTTPException(status_code=401, detail="bad admin token")
        try:
            summaries = store.summaries()
        except NoRatingsError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return [
            {
                "system": s.system_name,
                "n": s.n,
                "mos": s.mean,
                "ci95": s.ci95_half_width,
            }
            for s in summaries
        ]

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
