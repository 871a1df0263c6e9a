"""Deterministic session engine for the pond game.

One playthrough: ten worms, each carrying a URL. Eat a real worm or avoid a
fake one and score a point; get it wrong and lose one of five lives; ask the
teacher and pay 100 seconds out of the 600-second budget for a tip. The
engine itself never reads a clock -- the caller reports elapsed seconds with
every action, so a session is a pure fold over its action log and replaying
that log reproduces the final state exactly.

States are immutable; :func:`apply_action` returns a new state plus an
:class:`ActionResult`. Nothing a caller can do before a worm is resolved
reveals its truth label.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from .corpus import Label, Round, WormItem
from .cues import next_tip


class SessionFinished(Exception):
    """Action or view requested after the session reached a terminal state."""


class SessionInProgress(Exception):
    """Summary requested before the session reached a terminal state."""


class ConfigMismatch(ValueError):
    """Round size does not match the configured worm count."""


class NegativeElapsed(ValueError):
    """elapsed_s must be >= 0."""


class PlayerAction(Enum):
    EAT = "eat"
    AVOID = "avoid"
    ASK_TEACHER = "ask_teacher"


class SessionStatus(Enum):
    IN_PROGRESS = "in_progress"
    COMPLETED = "completed"
    OUT_OF_LIVES = "out_of_lives"
    OUT_OF_TIME = "out_of_time"


@dataclass(frozen=True)
class GameConfig:
    total_worms: int = 10
    legit_count: int = 5
    phish_count: int = 5
    starting_lives: int = 5
    time_budget_s: int = 600
    help_cost_s: int = 100
    points_per_correct: int = 1

    def __post_init__(self) -> None:
        values = (
            self.total_worms,
            self.legit_count,
            self.phish_count,
            self.starting_lives,
            self.time_budget_s,
            self.help_cost_s,
            self.points_per_correct,
        )
        if any(not isinstance(v, int) or v <= 0 for v in values):
            raise ValueError("all game config values must be positive integers")
        if self.total_worms != self.legit_count + self.phish_count:
            raise ValueError("total_worms must equal legit_count + phish_count")


@dataclass(frozen=True)
class ResolvedWorm:
    worm: WormItem
    action_taken: PlayerAction  # EAT or AVOID
    correct: bool
    helps_used: int
    time_spent_s: int


@dataclass(frozen=True)
class SessionState:
    round: Round
    config: GameConfig
    cursor: int
    score: int
    lives: int
    time_remaining_s: int
    helps_shown_for_current: int
    time_spent_current_s: int
    total_helps: int
    history: tuple[ResolvedWorm, ...]
    status: SessionStatus

    def digest(self) -> str:
        """Stable fingerprint of the state, used by the event log."""
        payload = {
            "cursor": self.cursor,
            "score": self.score,
            "lives": self.lives,
            "time_remaining_s": self.time_remaining_s,
            "helps_shown_for_current": self.helps_shown_for_current,
            "time_spent_current_s": self.time_spent_current_s,
            "total_helps": self.total_helps,
            "status": self.status.value,
            "seed": self.round.seed,
            "corpus_id": self.round.corpus_id,
            "history": [
                [r.worm.url_text, r.action_taken.value, r.correct, r.helps_used, r.time_spent_s]
                for r in self.history
            ],
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ActionResult:
    action: PlayerAction
    resolved: bool
    correct: bool | None
    tip: str | None
    status: SessionStatus


@dataclass(frozen=True)
class WormView:
    """What the player may see about the current worm: the URL, nothing more."""

    url: str
    index: int
    total: int
    helps_shown: int


@dataclass(frozen=True)
class WormReport:
    """Post-game disclosure for one worm."""

    index: int
    url: str
    truth: Label
    played: bool
    action_taken: PlayerAction | None
    correct: bool | None
    helps_used: int
    time_spent_s: int
    cues: tuple[tuple[str, str], ...]  # (rule id, tip text)


@dataclass(frozen=True)
class SessionSummary:
    status: SessionStatus
    score: int
    total_worms: int
    resolved_count: int
    accuracy_pct: float
    helps_used: int
    time_used_s: int
    worms: tuple[WormReport, ...]


def new_session(round_: Round, config: GameConfig | None = None) -> SessionState:
    config = config or GameConfig()
    if len(round_.worms) != config.total_worms:
        raise ConfigMismatch(
            f"round has {len(round_.worms)} worms, config expects {config.total_worms}"
        )
    return SessionState(
        round=round_,
        config=config,
        cursor=0,
        score=0,
        lives=config.starting_lives,
        time_remaining_s=config.time_budget_s,
        helps_shown_for_current=0,
        time_spent_current_s=0,
        total_helps=0,
        history=(),
        status=SessionStatus.IN_PROGRESS,
    )


def apply_action(
    state: SessionState, action: PlayerAction, elapsed_s: int
) -> tuple[SessionState, ActionResult]:
    """Advance the session by one player action.

    Elapsed time is charged first; if the clock hits zero the session ends
    and the action itself is not applied. Eat/avoid resolves the current
    worm (right: +1 point, wrong: -1 life); ask-teacher charges the help
    cost and returns the next tip without resolving anything.
    """
    if state.status is not SessionStatus.IN_PROGRESS:
        raise SessionFinished(f"session is {state.status.value}")
    if not isinstance(elapsed_s, int) or isinstance(elapsed_s, bool):
        raise NegativeElapsed("elapsed_s must be an integer number of seconds")
    if elapsed_s < 0:
        raise NegativeElapsed(f"elapsed_s must be >= 0, got {elapsed_s}")

    time_after = state.time_remaining_s - elapsed_s
    if time_after <= 0:
        expired = replace(
            state,
            time_remaining_s=0,
            time_spent_current_s=state.time_spent_current_s + state.time_remaining_s,
            status=SessionStatus.OUT_OF_TIME,
        )
        return expired, ActionResult(action, False, None, None, SessionStatus.OUT_OF_TIME)

    if action is PlayerAction.ASK_TEACHER:
        time_after_help = time_after - state.config.help_cost_s
        if time_after_help <= 0:
            # the help cannot be fully paid for; the clock runs out instead
            expired = replace(
                state,
                time_remaining_s=0,
                time_spent_current_s=state.time_spent_current_s + state.time_remaining_s,
                status=SessionStatus.OUT_OF_TIME,
            )
            return expired, ActionResult(action, False, None, None, SessionStatus.OUT_OF_TIME)
        worm = state.round.worms[state.cursor]
        tip = next_tip(worm.verdict, state.helps_shown_for_current)
        consumed = state.time_remaining_s - time_after_help
        helped = replace(
            state,
            time_remaining_s=time_after_help,
            helps_shown_for_current=state.helps_shown_for_current + 1,
            time_spent_current_s=state.time_spent_current_s + consumed,
            total_helps=state.total_helps + 1,
        )
        return helped, ActionResult(action, False, None, tip, SessionStatus.IN_PROGRESS)

    # EAT or AVOID resolves the current worm
    worm = state.round.worms[state.cursor]
    correct = (action is PlayerAction.EAT and worm.truth is Label.LEGIT) or (
        action is PlayerAction.AVOID and worm.truth is Label.PHISH
    )
    resolved = ResolvedWorm(
        worm=worm,
        action_taken=action,
        correct=correct,
        helps_used=state.helps_shown_for_current,
        time_spent_s=state.time_spent_current_s + elapsed_s,
    )
    score = state.score + (state.config.points_per_correct if correct else 0)
    lives = state.lives - (0 if correct else 1)
    cursor = state.cursor + 1
    if lives == 0:
        status = SessionStatus.OUT_OF_LIVES
    elif cursor == len(state.round.worms):
        status = SessionStatus.COMPLETED
    else:
        status = SessionStatus.IN_PROGRESS
    new_state = replace(
        state,
        cursor=cursor,
        score=score,
        lives=lives,
        time_remaining_s=time_after,
        helps_shown_for_current=0,
        time_spent_current_s=0,
        history=state.history + (resolved,),
        status=status,
    )
    return new_state, ActionResult(action, True, correct, None, status)


def current_worm_view(state: SessionState) -> WormView:
    """The player-facing view of the current worm; never the truth label."""
    if state.status is not SessionStatus.IN_PROGRESS:
        raise SessionFinished(f"session is {state.status.value}")
    worm = state.round.worms[state.cursor]
    return WormView(
        url=worm.url_text,
        index=state.cursor,
        total=len(state.round.worms),
        helps_shown=state.helps_shown_for_current,
    )


def summary(state: SessionState) -> SessionSummary:
    """Full post-game disclosure: truths, choices, and the cues on every worm."""
    if state.status is SessionStatus.IN_PROGRESS:
        raise SessionInProgress("summary is only available after the session ends")
    reports = []
    resolved_by_index = {i: r for i, r in enumerate(state.history)}
    for i, worm in enumerate(state.round.worms):
        r = resolved_by_index.get(i)
        if r is not None:
            reports.append(
                WormReport(
                    index=i,
                    url=worm.url_text,
                    truth=worm.truth,
                    played=True,
                    action_taken=r.action_taken,
                    correct=r.correct,
                    helps_used=r.helps_used,
                    time_spent_s=r.time_spent_s,
                    cues=tuple((c.rule_id, c.tip_text) for c in worm.verdict.cues),
                )
            )
        else:
            pending = i == state.cursor
            reports.append(
                WormReport(
                    index=i,
                    url=worm.url_text,
                    truth=worm.truth,
                    played=False,
                    action_taken=None,
                    correct=None,
                    helps_used=state.helps_shown_for_current if pending else 0,
                    time_spent_s=state.time_spent_current_s if pending else 0,
                    cues=tuple((c.rule_id, c.tip_text) for c in worm.verdict.cues),
                )
            )
    resolved_count = len(state.history)
    accuracy = 100.0 * state.score / resolved_count if resolved_count else 0.0
    return SessionSummary(
        status=state.status,
        score=state.score,
        total_worms=len(state.round.worms),
        resolved_count=resolved_count,
        accuracy_pct=accuracy,
        helps_used=state.total_helps,
        time_used_s=state.config.time_budget_s - state.time_remaining_s,
        worms=tuple(reports),
    )


def replay(
    round_: Round, config: GameConfig | None, events: Iterable[tuple[PlayerAction, int]]
) -> SessionState:
    """Re-run a recorded (action, elapsed_s) log from a fresh session."""
    state = new_session(round_, config)
    for action, elapsed_s in events:
        state, _ = apply_action(state, action, elapsed_s)
    return state


# How each construct of the threat-avoidance framework shows up as a concrete
# game mechanic. Documentation-grade: the completeness test keeps this map in
# one-to-one correspondence with the construct set.
FRAMEWORK_CONSTRUCTS = frozenset(
    {
        "perceived_severity",
        "perceived_susceptibility",
        "perceived_threat",
        "safeguard_effectiveness",
        "safeguard_cost",
        "self_efficacy",
        "avoidance_motivation",
        "avoidance_behaviour",
    }
)

CONSTRUCT_MAPPING: dict[str, str] = {
    "perceived_severity": "a wrong eat/avoid call permanently burns one of five lives",
    "perceived_susceptibility": "half of every round is phishing: 5 fake worms out of 10",
    "perceived_threat": "lives and the 600-second clock combine into two ways to lose",
    "safeguard_effectiveness": "teacher tips come from the cue rules that actually fired on the URL",
    "safeguard_cost": "every teacher help costs 100 seconds of remaining time",
    "self_efficacy": "the end-of-game summary discloses each URL's truth and the cues that were there to spot",
    "avoidance_motivation": "not a game mechanic; measured by the pre/post assessments",
    "avoidance_behaviour": "not a game mechanic; measured by the pre/post assessments",
}


def mistake_count(state: SessionState) -> int:
    return sum(1 for r in state.history if not r.correct)


def summarize_actions(history: Sequence[ResolvedWorm]) -> dict[str, int]:
    """Small aggregate used by the CLI summary footer."""
    return {
        "eat": sum(1 for r in history if r.action_taken is PlayerAction.EAT),
        "avoid": sum(1 for r in history if r.action_taken is PlayerAction.AVOID),
        "correct": sum(1 for r in history if r.correct),
    }
