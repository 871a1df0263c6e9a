"""Pre/post quiz scoring, SUS scoring, paired t-tests and cohort reports.

The t-distribution p-value is computed from the regularized incomplete beta
function, evaluated with the standard continued fraction (modified Lentz),
so the package needs no numerical dependencies. The test suite checks it
against a quadrature oracle.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .corpus import Label
from .game import PlayerAction


class EmptyQuiz(ValueError):
    """A quiz needs at least one item."""


class OutOfRangeResponse(ValueError):
    """SUS responses must be ten integers in 1..5."""


class LengthMismatch(ValueError):
    """Paired samples must have equal length >= 2."""


class ZeroVariance(ValueError):
    """All differences equal and nonzero: t is undefined."""


class MissingPhase(ValueError):
    """A participant lacks a pre or post quiz."""


class Phase(Enum):
    PRE = "pre"
    POST = "post"


@dataclass(frozen=True)
class QuizItem:
    url: str
    truth: Label
    answer: PlayerAction  # EAT or AVOID

    @property
    def correct(self) -> bool:
        # same correctness rule as the game engine
        return (self.answer is PlayerAction.EAT and self.truth is Label.LEGIT) or (
            self.answer is PlayerAction.AVOID and self.truth is Label.PHISH
        )


@dataclass(frozen=True)
class QuizResult:
    participant_id: str
    phase: Phase
    items: tuple[QuizItem, ...]
    score_pct: float


def score_quiz(participant_id: str, phase: Phase, items: Sequence[QuizItem]) -> QuizResult:
    """Percent of items answered correctly (eat legit / avoid phish)."""
    if not items:
        raise EmptyQuiz("quiz has no items")
    correct = sum(1 for item in items if item.correct)
    return QuizResult(
        participant_id=participant_id,
        phase=phase,
        items=tuple(items),
        score_pct=100.0 * correct / len(items),
    )


def sus_score(responses: Sequence[int]) -> float:
    """System Usability Scale score, 0..100 in steps of 2.5.

    Brooke's rule: odd items contribute (x - 1), even items (5 - x),
    and the sum is scaled by 2.5.
    """
    if len(responses) != 10:
        raise OutOfRangeResponse(f"SUS takes exactly 10 responses, got {len(responses)}")
    total = 0
    for i, x in enumerate(responses):
        if not isinstance(x, int) or isinstance(x, bool) or not 1 <= x <= 5:
            raise OutOfRangeResponse(f"item {i + 1} must be an integer in 1..5, got {x!r}")
        total += (x - 1) if i % 2 == 0 else (5 - x)
    return total * 2.5


@dataclass(frozen=True)
class TTestResult:
    n: int
    t: float
    df: int
    p_two_tailed: float
    mean_pre: float
    sd_pre: float
    mean_post: float
    sd_post: float
    mean_diff: float
    sd_diff: float


_BETACF_TOL = 1e-10
_BETACF_MAX_ITER = 500
_TINY = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_TOL:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_tailed_p(t: float, df: int) -> float:
    """P(|T| >= |t|) for T ~ Student-t with ``df`` degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def paired_t_test(pre: Sequence[float], post: Sequence[float]) -> TTestResult:
    """Paired-samples t-test on differences d = pre - post, df = n - 1.

    All differences zero returns t=0, p=1 (no effect). Identical nonzero
    differences raise ZeroVariance: t would be infinite.
    """
    if len(pre) != len(post):
        raise LengthMismatch(f"pre has {len(pre)} values, post has {len(post)}")
    n = len(pre)
    if n < 2:
        raise LengthMismatch("need at least 2 pairs")
    diffs = [float(a) - float(b) for a, b in zip(pre, post)]
    mean_diff = statistics.fmean(diffs)
    sd_diff = statistics.stdev(diffs)
    mean_pre = statistics.fmean(pre)
    mean_post = statistics.fmean(post)
    sd_pre = statistics.stdev(pre)
    sd_post = statistics.stdev(post)
    df = n - 1
    if sd_diff == 0.0:
        if mean_diff == 0.0:
            return TTestResult(n, 0.0, df, 1.0, mean_pre, sd_pre, mean_post, sd_post, 0.0, 0.0)
        raise ZeroVariance("all differences identical and nonzero")
    t = mean_diff / (sd_diff / math.sqrt(n))
    p = t_two_tailed_p(t, df)
    return TTestResult(n, t, df, p, mean_pre, sd_pre, mean_post, sd_post, mean_diff, sd_diff)


@dataclass(frozen=True)
class CohortRow:
    """One participant's line in the cohort export file."""

    participant_id: str
    pre_pct: float
    post_pct: float
    sus: float | None
    session_digest: str | None


@dataclass(frozen=True)
class Report:
    participants: int
    pre_mean: float
    pre_sd: float
    post_mean: float
    post_sd: float
    improvement_points: float
    t_test: TTestResult | None
    sus_mean: float | None
    post_above_80: int
    post_perfect: int
    sessions_played: int
    rows: tuple[CohortRow, ...]


def cohort_report(
    quizzes: Iterable[QuizResult],
    sessions: Mapping[str, str] | None = None,
    sus_scores: Mapping[str, float] | None = None,
) -> Report:
    """Aggregate a cohort: per-phase means/SDs, improvement, t-test, SUS.

    ``sessions`` maps participant id to a session digest (for the export);
    ``sus_scores`` maps participant id to a SUS value. Every quizzed
    participant must have both phases or MissingPhase is raised. The t-test
    needs at least two participants and non-degenerate differences;
    otherwise the report carries ``t_test=None``.
    """
    sessions = dict(sessions or {})
    sus_scores = dict(sus_scores or {})

    by_participant: dict[str, dict[Phase, float]] = {}
    for quiz in quizzes:
        by_participant.setdefault(quiz.participant_id, {})[quiz.phase] = quiz.score_pct
    for pid, phases in by_participant.items():
        missing = {Phase.PRE, Phase.POST} - set(phases)
        if missing:
            raise MissingPhase(f"participant {pid} lacks {', '.join(m.value for m in missing)}")
    if not by_participant:
        raise MissingPhase("no quiz results")

    pids = sorted(by_participant)
    pre = [by_participant[p][Phase.PRE] for p in pids]
    post = [by_participant[p][Phase.POST] for p in pids]
    n = len(pids)

    t_test: TTestResult | None = None
    if n >= 2:
        try:
            t_test = paired_t_test(pre, post)
        except ZeroVariance:
            t_test = None

    sus_values = [sus_scores[p] for p in pids if p in sus_scores]
    rows = tuple(
        CohortRow(
            participant_id=p,
            pre_pct=by_participant[p][Phase.PRE],
            post_pct=by_participant[p][Phase.POST],
            sus=sus_scores.get(p),
            session_digest=sessions.get(p),
        )
        for p in pids
    )
    return Report(
        participants=n,
        pre_mean=statistics.fmean(pre),
        pre_sd=statistics.stdev(pre) if n >= 2 else 0.0,
        post_mean=statistics.fmean(post),
        post_sd=statistics.stdev(post) if n >= 2 else 0.0,
        improvement_points=statistics.fmean(post) - statistics.fmean(pre),
        t_test=t_test,
        sus_mean=statistics.fmean(sus_values) if sus_values else None,
        post_above_80=sum(1 for s in post if s > 80.0),
        post_perfect=sum(1 for s in post if s == 100.0),
        sessions_played=len(sessions),
        rows=rows,
    )


EXPORT_HEADER = "# phishpond cohort export v1"
_EXPORT_COLUMNS = "# participant | pre_pct | post_pct | sus | session_digest"


def render_cohort_export(rows: Iterable[CohortRow]) -> str:
    """The cohort results file: one pipe-separated line per participant."""
    lines = [EXPORT_HEADER, _EXPORT_COLUMNS]
    for row in rows:
        sus = f"{row.sus:g}" if row.sus is not None else "-"
        digest = row.session_digest if row.session_digest else "-"
        lines.append(
            f"{row.participant_id} | {row.pre_pct:g} | {row.post_pct:g} | {sus} | {digest}"
        )
    return "\n".join(lines) + "\n"


def parse_cohort_export(text: str) -> tuple[CohortRow, ...]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split("|")]
        if len(fields) != 5:
            raise ValueError(f"export line {lineno}: expected 5 fields, got {len(fields)}")
        pid, pre, post, sus, digest = fields
        rows.append(
            CohortRow(
                participant_id=pid,
                pre_pct=float(pre),
                post_pct=float(post),
                sus=float(sus) if sus != "-" else None,
                session_digest=digest if digest != "-" else None,
            )
        )
    return tuple(rows)


def report_from_rows(rows: Iterable[CohortRow]) -> Report:
    """Rebuild a cohort report from an export file's rows."""
    rows = tuple(rows)
    quizzes = []
    sessions = {}
    sus_scores = {}
    for row in rows:
        quizzes.append(
            QuizResult(row.participant_id, Phase.PRE, (), row.pre_pct)
        )
        quizzes.append(
            QuizResult(row.participant_id, Phase.POST, (), row.post_pct)
        )
        if row.session_digest is not None:
            sessions[row.participant_id] = row.session_digest
        if row.sus is not None:
            sus_scores[row.participant_id] = row.sus
    return cohort_report(quizzes, sessions, sus_scores)
