"""Shared fixtures: bundled data, a large synthetic corpus, cohort vectors."""

from __future__ import annotations

import math

import pytest

from phishpond.corpus import Corpus, load_corpus, sample_corpus
from phishpond.cues import BrandList, RuleSet, default_brands, default_ruleset
from phishpond.urls import SuffixList, default_suffixes


@pytest.fixture(scope="session")
def rules() -> RuleSet:
    return default_ruleset()


@pytest.fixture(scope="session")
def brands() -> BrandList:
    return default_brands()


@pytest.fixture(scope="session")
def suffixes() -> SuffixList:
    return default_suffixes()


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    return sample_corpus()


def build_big_corpus() -> Corpus:
    """30 legit + 30 phish; every phish carries at least one cue."""
    lines = ["id = big", "version = 1"]
    for i in range(30):
        lines.append(f"https://www.store{i:02d}.com/catalog | legit | - | plain shop")
    for i in range(10):
        lines.append(f"http://203.0.113.{i + 1}/login | phish | - | raw address")
    for i in range(10):
        lines.append(f"http://paypal.com.verify{i:02d}.net/signin | phish | paypal | brand decoy")
    for i in range(10):
        lines.append(
            f"http://login.secure.account.update.mail{i:02d}.org/confirm | phish | - | deep chain"
        )
    return load_corpus("\n".join(lines))


@pytest.fixture(scope="session")
def big_corpus() -> Corpus:
    return build_big_corpus()


def build_paper_cohort() -> tuple[list[float], list[float]]:
    """Twenty pre/post pairs with mean_diff = -28 and sd_diff = 15.712.

    Half the differences sit at -28 + s and half at -28 - s with
    s = 15.712 * sqrt(19/20), which makes the sample standard deviation
    (n-1 denominator) come out at exactly 15.712.
    """
    s = 15.712 * math.sqrt(19 / 20)
    diffs = [-28.0 + s] * 10 + [-28.0 - s] * 10
    pre = [56.0] * 20
    post = [p - d for p, d in zip(pre, diffs)]
    return pre, post


@pytest.fixture(scope="session")
def paper_cohort() -> tuple[list[float], list[float]]:
    return build_paper_cohort()
