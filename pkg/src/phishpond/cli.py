"""Command line front end.

Subcommands:

* ``analyze`` checks one URL against the cue rules (exit 0 clean,
  1 suspicious, 2 unparseable).
* ``validate`` audits a corpus file for phish without cues and legit
  entries with cues.
* ``play`` runs an interactive session in the terminal.
* ``report`` aggregates assessment results from an event store.
* ``serve`` starts the HTTP service.

``--format structured`` switches the non-interactive commands from
human-readable text to line-delimited JSON with the same field names
the HTTP service uses.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence, TextIO

from .assessment import Phase, QuizResult, cohort_report, render_cohort_export
from .corpus import (
    Corpus,
    CorpusFormatError,
    load_corpus_file,
    generate_round,
    sample_corpus,
    validate_corpus,
)
from .cues import (
    BrandList,
    RuleSet,
    analyze,
    default_brands,
    default_ruleset,
    load_brands_file,
    load_ruleset_file,
)
from .game import (
    GameConfig,
    PlayerAction,
    SessionStatus,
    apply_action,
    current_worm_view,
    new_session,
    summary as session_summary,
)
from .store import EventStore, StoreCorrupt, StoreUnavailable
from .urls import MalformedUrl, SuffixList, default_suffixes, parse_url, serialize

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


def _add_rule_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rules", type=Path, help="rule definitions file")
    parser.add_argument("--brands", type=Path, help="brand tokens file")
    parser.add_argument("--suffixes", type=Path, help="public suffix file")


def _analysis_inputs(args: argparse.Namespace) -> tuple[RuleSet, BrandList, SuffixList]:
    rules = load_ruleset_file(args.rules) if args.rules else default_ruleset()
    brands = load_brands_file(args.brands) if args.brands else default_brands()
    suffixes = SuffixList.from_file(args.suffixes) if args.suffixes else default_suffixes()
    return rules, brands, suffixes


def _emit(payload: dict[str, Any], out: TextIO) -> None:
    print(json.dumps(payload, sort_keys=True), file=out)


def cmd_analyze(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    rules, brands, suffixes = _analysis_inputs(args)
    try:
        url = parse_url(args.url)
    except MalformedUrl as exc:
        if args.format == "structured":
            _emit({"error": "malformed_url", "detail": str(exc)}, out)
        else:
            print(f"not a parseable URL: {exc}", file=err)
        return EXIT_ERROR
    verdict = analyze(url, rules, brands, suffixes)
    canonical = serialize(url)
    if args.format == "structured":
        _emit(
            {
                "url": canonical,
                "suspicious": verdict.suspicious,
                "cues": [
                    {
                        "rule_id": c.rule_id,
                        "span": [c.matched_span[0], c.matched_span[1]],
                        "tip": c.tip_text,
                    }
                    for c in verdict.cues
                ],
            },
            out,
        )
    else:
        print(canonical, file=out)
        if verdict.suspicious:
            n = len(verdict.cues)
            print(f"suspicious ({n} cue{'s' if n != 1 else ''})", file=out)
            for c in verdict.cues:
                start, end = c.matched_span
                print(f"  {c.rule_id} [{start}:{end}) {c.tip_text}", file=out)
        else:
            print("clean", file=out)
    return EXIT_FINDINGS if verdict.suspicious else EXIT_OK


def cmd_validate(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    rules, brands, suffixes = _analysis_inputs(args)
    try:
        corpus = load_corpus_file(args.corpus)
    except (OSError, CorpusFormatError, MalformedUrl) as exc:
        if args.format == "structured":
            _emit({"error": "bad_corpus", "detail": str(exc)}, out)
        else:
            print(f"cannot load corpus: {exc}", file=err)
        return EXIT_ERROR
    report = validate_corpus(corpus, rules, brands, suffixes)
    if args.format == "structured":
        _emit(
            {
                "corpus_id": corpus.id,
                "entries": len(corpus.entries),
                "clean": report.clean,
                "uncued_phish": list(report.uncued_phish),
                "cued_legit": [{"url": u, "rules": r} for u, r in report.cued_legit],
            },
            out,
        )
    else:
        print(f"corpus {corpus.id}: {len(corpus.entries)} entries", file=out)
        for u in report.uncued_phish:
            print(f"  phish without a cue: {u}", file=out)
        for u, rule_ids in report.cued_legit:
            print(f"  legit with cues ({rule_ids}): {u}", file=out)
        print("clean" if report.clean else "findings above", file=out)
    return EXIT_OK if report.clean else EXIT_FINDINGS


_PROMPT_ACTIONS = {
    "e": PlayerAction.EAT,
    "a": PlayerAction.AVOID,
    "t": PlayerAction.ASK_TEACHER,
}


def cmd_play(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    rules, brands, suffixes = _analysis_inputs(args)
    try:
        corpus = load_corpus_file(args.corpus) if args.corpus else sample_corpus()
    except (OSError, CorpusFormatError, MalformedUrl) as exc:
        print(f"cannot load corpus: {exc}", file=err)
        return EXIT_ERROR
    seed = args.seed if args.seed is not None else int(time.time())
    config = GameConfig()
    round_ = generate_round(
        corpus,
        seed,
        rules=rules,
        brands=brands,
        suffixes=suffixes,
        legit_count=config.legit_count,
        phish_count=config.phish_count,
    )
    state = new_session(round_, config)
    print(
        f"{config.total_worms} worms, {config.starting_lives} lives, "
        f"{config.time_budget_s}s. eat the real ones, avoid the scams.",
        file=out,
    )
    while state.status is SessionStatus.IN_PROGRESS:
        view = current_worm_view(state)
        print(
            f"\nworm {view.index + 1} of {view.total}  "
            f"[score {state.score}  lives {state.lives}  time {state.time_remaining_s}s]",
            file=out,
        )
        print(f"  {view.url}", file=out)
        asked = time.monotonic()
        try:
            raw = input("[e]at / [a]void / [t]eacher / [q]uit > ")
        except EOFError:
            raw = "q"
        answer = raw.strip().lower()
        if answer == "q":
            print("session discarded", file=out)
            return EXIT_OK
        action = _PROMPT_ACTIONS.get(answer)
        if action is None:
            print("  (unrecognized; type e, a, t, or q)", file=out)
            continue
        elapsed = max(0, min(3600, int(time.monotonic() - asked)))
        state, result = apply_action(state, action, elapsed)
        if result.tip is not None:
            print(f"  teacher: {result.tip}", file=out)
        elif result.resolved:
            print("  correct!" if result.correct else "  wrong, lost a life", file=out)
        elif result.status is SessionStatus.OUT_OF_TIME:
            print("  the clock ran out", file=out)

    final = session_summary(state)
    print(f"\n{final.status.value.replace('_', ' ')}", file=out)
    print(
        f"score {final.score} of {final.total_worms}, "
        f"accuracy {final.accuracy_pct:.0f}%, "
        f"helps {final.helps_used}, time used {final.time_used_s}s",
        file=out,
    )
    for w in final.worms:
        took = w.action_taken.value if w.action_taken else "unplayed"
        mark = "" if not w.played else ("  ok" if w.correct else "  X")
        print(f"  {w.truth.value:5}  {took:8}{mark}  {w.url}", file=out)
    return EXIT_OK


def _report_inputs(path: Path) -> tuple[dict[tuple[str, str, str], float], dict[str, str]]:
    """Assessment scores and participant -> final session digest from a store."""
    store = EventStore(path)
    try:
        records = store.load()
    finally:
        store.close()
    assessments: dict[tuple[str, str, str], float] = {}
    session_owner: dict[str, str] = {}
    digests: dict[str, str] = {}
    for record in records:
        kind = record.get("type")
        if kind == "assessment":
            key = (record["participant_id"], record["kind"], record["phase"])
            assessments[key] = record["score"]
        elif kind == "session":
            session_owner[record["session_id"]] = record["participant_id"]
        elif kind == "action":
            owner = session_owner.get(record["session_id"])
            if owner is not None:
                digests[owner] = record["digest"]
    return assessments, digests


def cmd_report(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    try:
        assessments, digests = _report_inputs(args.store)
    except (OSError, StoreUnavailable, StoreCorrupt) as exc:
        if args.format == "structured":
            _emit({"error": "bad_store", "detail": str(exc)}, out)
        else:
            print(f"cannot read store: {exc}", file=err)
        return EXIT_ERROR

    phases_by_pid: dict[str, set[str]] = {}
    for (pid, kind, phase) in assessments:
        if kind == "quiz":
            phases_by_pid.setdefault(pid, set()).add(phase)
    complete = {pid for pid, phases in phases_by_pid.items() if phases == {"pre", "post"}}
    if len(complete) < 2:
        msg = f"need at least 2 participants with both quiz phases, have {len(complete)}"
        if args.format == "structured":
            _emit({"error": "insufficient_data", "detail": msg}, out)
        else:
            print(msg, file=err)
        return EXIT_FINDINGS

    quizzes = [
        QuizResult(pid, Phase(phase), (), score)
        for (pid, kind, phase), score in sorted(assessments.items())
        if kind == "quiz" and pid in complete
    ]
    sus_scores = {
        pid: score
        for (pid, kind, phase), score in assessments.items()
        if kind == "sus" and pid in complete
    }
    sessions = {pid: digest for pid, digest in digests.items() if pid in complete}
    report = cohort_report(quizzes, sessions, sus_scores)

    if args.format == "structured":
        t_test = report.t_test
        _emit(
            {
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
            },
            out,
        )
    else:
        print(f"participants: {report.participants}", file=out)
        print(f"pre-test:  {report.pre_mean:.2f}% (sd {report.pre_sd:.3f})", file=out)
        print(f"post-test: {report.post_mean:.2f}% (sd {report.post_sd:.3f})", file=out)
        print(f"improvement: {report.improvement_points:+.2f} points", file=out)
        if report.t_test is not None:
            t_test = report.t_test
            print(
                f"t({t_test.df}) = {t_test.t:.2f}, p = {t_test.p_two_tailed:.3g}",
                file=out,
            )
        else:
            print("t-test: not available", file=out)
        if report.sus_mean is not None:
            print(f"SUS mean: {report.sus_mean:.2f}", file=out)
        print(f"post scores above 80%: {report.post_above_80} of {report.participants}", file=out)
        print(f"perfect post scores: {report.post_perfect}", file=out)
        print(f"sessions played: {report.sessions_played}", file=out)

    if args.export:
        args.export.write_text(render_cohort_export(report.rows), encoding="utf-8")
        if args.format != "structured":
            print(f"export written to {args.export}", file=out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    from .service import ConfigError, config_from_env, load_config, serve

    try:
        config = load_config(args.config) if args.config else config_from_env()
    except ConfigError as exc:
        print(str(exc), file=err)
        return EXIT_ERROR
    if args.host:
        config = dataclasses.replace(config, host=args.host)
    if args.port:
        config = dataclasses.replace(config, port=args.port)
    print(f"listening on {config.host}:{config.port}", file=out)
    serve(config)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phishpond", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="check one URL for scam cues")
    p.add_argument("url")
    p.add_argument("--format", choices=("human", "structured"), default="human")
    _add_rule_args(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="audit a corpus file")
    p.add_argument("corpus", type=Path)
    p.add_argument("--format", choices=("human", "structured"), default="human")
    _add_rule_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("play", help="play a session in the terminal")
    p.add_argument("--corpus", type=Path)
    p.add_argument("--seed", type=int)
    _add_rule_args(p)
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("report", help="aggregate assessments from an event store")
    p.add_argument("store", type=Path)
    p.add_argument("--format", choices=("human", "structured"), default="human")
    p.add_argument("--export", type=Path, help="write the cohort export file here")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", type=Path, help="service config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args, sys.stdout, sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
