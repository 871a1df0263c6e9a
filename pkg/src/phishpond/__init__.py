"""phishpond: a phishing-awareness pond game.

A small fish eats worms, but each worm carries a website address and half of
them are fakes. This package holds the pieces behind that game: a strict URL
model, the cue rules the teacher fish draws tips from, corpus and round
generation, the deterministic session engine, assessment statistics, an HTTP
service with durable storage, and a CLI.
"""

__version__ = "0.1.0"

from .urls import MalformedUrl, ParsedUrl, parse_url, serialize  # noqa: F401
from .cues import Verdict, analyze, next_tip  # noqa: F401
from .corpus import Corpus, Round, generate_round, load_corpus  # noqa: F401
from .game import (  # noqa: F401
    GameConfig,
    PlayerAction,
    SessionState,
    SessionStatus,
    apply_action,
    new_session,
)
from .assessment import paired_t_test, sus_score  # noqa: F401
