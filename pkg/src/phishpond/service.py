"""HTTP service exposing the game and assessment machinery.

The service keeps every session in memory and mirrors every state
change into an append-only event store before acknowledging it, so a
restarted process can rebuild exactly where it left off by replaying
the log.  Clients never see truth labels, cue verdicts, or the round
seed while a session is in progress; those appear only in the summary
of a finished session.
"""

from __future__ import annotations

import logging
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .assessment import (
    MissingPhase,
    Phase,
    QuizItem,
    QuizResult,
    cohort_report,
    score_quiz,
    sus_score,
)
from .corpus import Corpus, Label, generate_round, load_corpus_file, sample_corpus
from .cues import BrandList, RuleSet, default_brands, default_ruleset, load_brands_file, load_ruleset_file
from .game import (
    GameConfig,
    PlayerAction,
    SessionFinished,
    SessionState,
    SessionStatus,
    apply_action,
    current_worm_view,
    new_session,
    summary as session_summary,
)
from .store import EventStore, StoreCorrupt, StoreUnavailable
from .urls import SuffixList, default_suffixes

logger = logging.getLogger(__name__)

MAX_ELAPSED_S = 3600

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8000

CONFIG_ENV_VAR = "PHISHPOND_CONFIG"


class ConfigError(ValueError):
    """Raised when a service configuration file cannot be used."""


@dataclass(frozen=True)
class ServiceConfig:
    """Where the service finds its data and where it listens."""

    corpus_path: Optional[Path] = None
    rules_path: Optional[Path] = None
    brands_path: Optional[Path] = None
    suffixes_path: Optional[Path] = None
    store_path: Path = Path("phishpond-events.jsonl")
    host: str = DEFAULT_HOST
    port: int = DEFAULT_PORT


_CONFIG_KEYS = {"corpus", "rules", "brands", "suffixes", "store", "host", "port"}


def load_config(path: Path) -> ServiceConfig:
    """Parse a ``key = value`` config file into a ServiceConfig."""
    values: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value

    def as_path(key: str) -> Optional[Path]:
        if key not in values:
            return None
        return (path.parent / values[key]).resolve()

    port = DEFAULT_PORT
    if "port" in values:
        try:
            port = int(values["port"])
        except ValueError as exc:
            raise ConfigError(f"{path}: port must be an integer") from exc
        if not 1 <= port <= 65535:
            raise ConfigError(f"{path}: port {port} out of range")
    return ServiceConfig(
        corpus_path=as_path("corpus"),
        rules_path=as_path("rules"),
        brands_path=as_path("brands"),
        suffixes_path=as_path("suffixes"),
        store_path=as_path("store") or Path("phishpond-events.jsonl"),
        host=values.get("host", DEFAULT_HOST),
        port=port,
    )


def config_from_env() -> ServiceConfig:
    """Build a ServiceConfig from PHISHPOND_CONFIG, or defaults."""
    raw = os.environ.get(CONFIG_ENV_VAR)
    if raw:
        return load_config(Path(raw))
    return ServiceConfig()


@dataclass
class _SessionEntry:
    participant_id: str
    seed: int
    state: SessionState
    seq: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


@dataclass
class _AppState:
    corpus: Corpus
    rules: RuleSet
    brands: BrandList
    suffixes: SuffixList
    store: EventStore
    sessions: dict[str, _SessionEntry] = field(default_factory=dict)
    # (participant_id, kind, phase) -> score
    assessments: dict[tuple[str, str, str], float] = field(default_factory=dict)
    registry_lock: threading.Lock = field(default_factory=threading.Lock)


class _ApiError(Exception):
    """Internal carrier mapping domain failures onto HTTP responses."""

    def __init__(self, status_code: int, error: str, detail: str) -> None:
        super().__init__(detail)
        self.status_code = status_code
        self.error = error
        self.detail = detail


class CreateSessionRequest(BaseModel):
    participant_id: str = Field(default="anonymous", min_length=1, max_length=128)
    seed: Optional[int] = None


class ActionRequest(BaseModel):
    expected_seq: int
    action: str
    elapsed_s: int = 0


class QuizAnswerModel(BaseModel):
    url: str
    truth: str
    answer: str


class AssessmentRequest(BaseModel):
    phase: str
    kind: str
    answers: Optional[list[QuizAnswerModel]] = None
    responses: Optional[list[int]] = None


_ACTION_NAMES = {
    "eat": PlayerAction.EAT,
    "avoid": PlayerAction.AVOID,
    "ask_teacher": PlayerAction.ASK_TEACHER,
}


def _public_state(session_id: str, entry: _SessionEntry) -> dict[str, Any]:
    """Serialize what a client may see mid-session: no truth, no seed."""
    state = entry.state
    worm = None
    if state.status is SessionStatus.IN_PROGRESS:
        view = current_worm_view(state)
        worm = {
            "index": view.index,
            "total": view.total,
            "url": view.url,
            "helps_shown": view.helps_shown,
        }
    return {
        "session_id": session_id,
        "participant_id": entry.participant_id,
        "status": state.status.value,
        "score": state.score,
        "lives": state.lives,
        "time_remaining_s": state.time_remaining_s,
        "next_seq": entry.seq,
        "worm": worm,
    }


def _summary_payload(session_id: str, entry: _SessionEntry) -> dict[str, Any]:
    summary = session_summary(entry.state)
    worms = [
        {
            "index": w.index,
            "url": w.url,
            "truth": w.truth.value,
            "action": w.action_taken.value if w.action_taken is not None else None,
            "correct": w.correct,
            "helps_used": w.helps_used,
            "time_spent_s": w.time_spent_s,
            "cues": [{"rule_id": rule_id, "tip": tip} for rule_id, tip in w.cues],
            "played": w.played,
        }
        for w in summary.worms
    ]
    return {
        "session_id": session_id,
        "participant_id": entry.participant_id,
        "seed": entry.seed,
        "status": summary.status.value,
        "score": summary.score,
        "total_worms": summary.total_worms,
        "resolved_count": summary.resolved_count,
        "accuracy_pct": summary.accuracy_pct,
        "helps_used": summary.helps_used,
        "time_used_s": summary.time_used_s,
        "worms": worms,
    }


def _append_or_503(state: _AppState, record: Mapping[str, Any]) -> None:
    try:
        state.store.append(record)
    except StoreUnavailable as exc:
        raise _ApiError(503, "store_unavailable", str(exc)) from exc


def _rebuild(state: _AppState) -> None:
    """Replay the event log into fresh in-memory state.

    Digest checks guard against the log and the engine drifting apart:
    if a recorded digest no longer matches the recomputed state, the
    store (or the code that wrote it) is not trustworthy and we refuse
    to serve from it.
    """
    records = state.store.load()
    for record in records:
        kind = record.get("type")
        if kind == "session":
            session_id = record["session_id"]
            corpus_id = record.get("corpus_id")
            if corpus_id != state.corpus.id:
                raise StoreCorrupt(
                    f"session {session_id} was created from corpus {corpus_id!r}, "
                    f"but the service loaded corpus {state.corpus.id!r}"
                )
            config = GameConfig(**record["config"])
            round_ = generate_round(
                state.corpus,
                record["seed"],
                rules=state.rules,
                brands=state.brands,
                suffixes=state.suffixes,
                legit_count=config.legit_count,
                phish_count=config.phish_count,
            )
            state.sessions[session_id] = _SessionEntry(
                participant_id=record["participant_id"],
                seed=record["seed"],
                state=new_session(round_, config),
            )
        elif kind == "action":
            session_id = record["session_id"]
            entry = state.sessions.get(session_id)
            if entry is None:
                raise StoreCorrupt(f"action for unknown session {session_id}")
            if record["seq"] != entry.seq:
                raise StoreCorrupt(
                    f"session {session_id}: action seq {record['seq']} "
                    f"does not follow {entry.seq}"
                )
            action = _ACTION_NAMES[record["action"]]
            new_state, _ = apply_action(entry.state, action, record["elapsed_s"])
            if new_state.digest() != record["digest"]:
                raise StoreCorrupt(
                    f"session {session_id}: digest mismatch at seq {record['seq']}"
                )
            entry.state = new_state
            entry.seq += 1
        elif kind == "assessment":
            key = (record["participant_id"], record["kind"], record["phase"])
            state.assessments[key] = record["score"]
        else:
            raise StoreCorrupt(f"unknown record type {kind!r}")
    if records:
        logger.info("rebuilt %d sessions from %d events", len(state.sessions), len(records))


def build_state(config: ServiceConfig) -> _AppState:
    """Load data files, open the store, and replay any existing log."""
    corpus = (
        load_corpus_file(config.corpus_path) if config.corpus_path else sample_corpus()
    )
    rules = load_ruleset_file(config.rules_path) if config.rules_path else default_ruleset()
    brands = load_brands_file(config.brands_path) if config.brands_path else default_brands()
    suffixes = (
        SuffixList.from_file(config.suffixes_path)
        if config.suffixes_path
        else default_suffixes()
    )
    store = EventStore(config.store_path)
    state = _AppState(
        corpus=corpus, rules=rules, brands=brands, suffixes=suffixes, store=store
    )
    _rebuild(state)
    return state


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    """Build the FastAPI application around a fresh or replayed state."""
    if config is None:
        config = config_from_env()
    state = build_state(config)
    app = FastAPI(title="phishpond", docs_url=None, redoc_url=None)
    app.state.game = state

    @app.exception_handler(_ApiError)
    async def handle_api_error(request: Request, exc: _ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": exc.error, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": "malformed_payload", "detail": str(exc.errors()[:1])},
        )

    def get_entry(session_id: str) -> _SessionEntry:
        entry = state.sessions.get(session_id)
        if entry is None:
            raise _ApiError(404, "unknown_session", f"no session {session_id!r}")
        return entry

    @app.post("/sessions", status_code=201)
    def create_session(payload: Optional[CreateSessionRequest] = None) -> dict[str, Any]:
        if payload is None:
            payload = CreateSessionRequest()
        seed = payload.seed
        if seed is None:
            seed = int.from_bytes(os.urandom(8), "big")
        config_ = GameConfig()
        round_ = generate_round(
            state.corpus,
            seed,
            rules=state.rules,
            brands=state.brands,
            suffixes=state.suffixes,
            legit_count=config_.legit_count,
            phish_count=config_.phish_count,
        )
        session_id = uuid.uuid4().hex
        entry = _SessionEntry(
            participant_id=payload.participant_id,
            seed=seed,
            state=new_session(round_, config_),
        )
        record = {
            "type": "session",
            "session_id": session_id,
            "participant_id": payload.participant_id,
            "seed": seed,
            "corpus_id": state.corpus.id,
            "config": {
                "total_worms": config_.total_worms,
                "legit_count": config_.legit_count,
                "phish_count": config_.phish_count,
                "starting_lives": config_.starting_lives,
                "time_budget_s": config_.time_budget_s,
                "help_cost_s": config_.help_cost_s,
                "points_per_correct": config_.points_per_correct,
            },
        }
        with state.registry_lock:
            _append_or_503(state, record)
            state.sessions[session_id] = entry
        return _public_state(session_id, entry)

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict[str, Any]:
        return _public_state(session_id, get_entry(session_id))

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, payload: ActionRequest) -> dict[str, Any]:
        entry = get_entry(session_id)
        action = _ACTION_NAMES.get(payload.action)
        if action is None:
            raise _ApiError(
                400, "malformed_action", f"unknown action {payload.action!r}"
            )
        if not 0 <= payload.elapsed_s <= MAX_ELAPSED_S:
            raise _ApiError(
                400,
                "malformed_action",
                f"elapsed_s must be between 0 and {MAX_ELAPSED_S}",
            )
        with entry.lock:
            if entry.state.status is not SessionStatus.IN_PROGRESS:
                raise _ApiError(
                    409, "session_finished", "session already reached a terminal state"
                )
            if payload.expected_seq != entry.seq:
                raise _ApiError(
                    409,
                    "sequence_conflict",
                    f"expected_seq {payload.expected_seq} does not match {entry.seq}",
                )
            try:
                new_state, result = apply_action(entry.state, action, payload.elapsed_s)
            except SessionFinished as exc:
                raise _ApiError(409, "session_finished", str(exc)) from exc
            record = {
                "type": "action",
                "session_id": session_id,
                "seq": entry.seq,
                "action": payload.action,
                "elapsed_s": payload.elapsed_s,
                "digest": new_state.digest(),
            }
            _append_or_503(state, record)
            entry.state = new_state
            entry.seq += 1
            return {
                "result": {
                    "action": result.action.value,
                    "resolved": result.resolved,
                    "correct": result.correct,
                    "tip": result.tip,
                },
                "state": _public_state(session_id, entry),
            }

    @app.get("/sessions/{session_id}/summary")
    def get_summary(session_id: str) -> dict[str, Any]:
        entry = get_entry(session_id)
        if entry.state.status is SessionStatus.IN_PROGRESS:
            raise _ApiError(
                409, "session_in_progress", "summary is only available after the end"
            )
        return _summary_payload(session_id, entry)

    @app.post("/participants/{participant_id}/assessments", status_code=201)
    def post_assessment(participant_id: str, payload: AssessmentRequest) -> dict[str, Any]:
        if payload.phase not in ("pre", "post"):
            raise _ApiError(400, "malformed_payload", f"unknown phase {payload.phase!r}")
        if payload.kind not in ("quiz", "sus"):
            raise _ApiError(400, "malformed_payload", f"unknown kind {payload.kind!r}")
        key = (participant_id, payload.kind, payload.phase)
        if payload.kind == "quiz":
            if not payload.answers:
                raise _ApiError(400, "malformed_payload", "quiz needs answers")
            try:
                items = []
                for a in payload.answers:
                    if a.answer not in ("eat", "avoid"):
                        raise ValueError(f"quiz answer must be eat or avoid, got {a.answer!r}")
                    items.append(
                        QuizItem(url=a.url, truth=Label(a.truth), answer=PlayerAction(a.answer))
                    )
                result = score_quiz(participant_id, Phase(payload.phase), items)
            except ValueError as exc:
                raise _ApiError(400, "malformed_payload", str(exc)) from exc
            score = result.score_pct
        else:
            if payload.responses is None:
                raise _ApiError(400, "malformed_payload", "sus needs responses")
            try:
                score = sus_score(payload.responses)
            except ValueError as exc:
                raise _ApiError(400, "malformed_payload", str(exc)) from exc
        with state.registry_lock:
            if key in state.assessments:
                raise _ApiError(
                    409,
                    "duplicate_phase",
                    f"{payload.kind} already recorded for {participant_id} ({payload.phase})",
                )
            record = {
                "type": "assessment",
                "participant_id": participant_id,
                "kind": payload.kind,
                "phase": payload.phase,
                "score": score,
            }
            _append_or_503(state, record)
            state.assessments[key] = score
        return {
            "participant_id": participant_id,
            "phase": payload.phase,
            "kind": payload.kind,
            "score": score,
        }

    @app.get("/report")
    def get_report() -> dict[str, Any]:
        with state.registry_lock:
            quizzes = []
            complete = set()
            by_pid: dict[str, set[str]] = {}
            for (pid, kind, phase), score in state.assessments.items():
                if kind != "quiz":
                    continue
                by_pid.setdefault(pid, set()).add(phase)
            for pid, phases in by_pid.items():
                if phases == {"pre", "post"}:
                    complete.add(pid)
            if len(complete) < 2:
                raise _ApiError(
                    409,
                    "insufficient_data",
                    f"need at least 2 participants with both quiz phases, have {len(complete)}",
                )
            for (pid, kind, phase), score in sorted(state.assessments.items()):
                if kind == "quiz" and pid in complete:
                    quizzes.append(QuizResult(pid, Phase(phase), (), score))
            sus_by_pid = {
                pid: score
                for (pid, kind, phase), score in state.assessments.items()
                if kind == "sus" and pid in complete
            }
            session_digests = {
                entry.participant_id: entry.state.digest()
                for _, entry in sorted(state.sessions.items())
                if entry.participant_id in complete
            }
        try:
            report = cohort_report(quizzes, session_digests, sus_by_pid)
        except MissingPhase as exc:
            raise _ApiError(409, "insufficient_data", str(exc)) from exc
        t_test = report.t_test
        return {
            "participants": report.participants,
            "pre_mean": report.pre_mean,
            "pre_sd": report.pre_sd,
            "post_mean": report.post_mean,
            "post_sd": report.post_sd,
            "improvement_points": report.improvement_points,
            "t": t_test.t if t_test else None,
            "df": t_test.df if t_test else None,
            "p_two_tailed": t_test.p_two_tailed if t_test else None,
            "sus_mean": report.sus_mean,
            "post_above_80": report.post_above_80,
            "post_perfect": report.post_perfect,
            "sessions_played": report.sessions_played,
        }

    return app


def serve(config: Optional[ServiceConfig] = None) -> None:
    """Run the service under uvicorn until interrupted."""
    import uvicorn

    if config is None:
        config = config_from_env()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
