"""Phishing-cue rules: run them over a parsed URL, get teacher tips back.

Five rules ship enabled (R1..R5, fixed priority order) plus one disabled
alternate (R1A). R1 and R2 carry the two canonical teacher tips; the other
tip strings live in the rule-set file so content editors can rewrite them
without touching code.

`analyze` is pure: same URL + rules + brands + suffixes, same verdict.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .urls import (
    DomainName,
    Ipv4Literal,
    NoRegistrableDomain,
    ParsedUrl,
    RegistrableDomain,
    SuffixList,
    default_suffixes,
    registrable_domain,
    serialize_parts,
)

R1_NUMERIC_HOST = "R1_NUMERIC_HOST"
R2_BRAND_HYPHEN = "R2_BRAND_HYPHEN"
R3_BRAND_IN_SUBDOMAIN = "R3_BRAND_IN_SUBDOMAIN"
R4_USERINFO_PRESENT = "R4_USERINFO_PRESENT"
R5_DEEP_SUBDOMAINS = "R5_DEEP_SUBDOMAINS"
R1A_DIGIT_LEADING_LABEL = "R1A_DIGIT_LEADING_LABEL"

KNOWN_RULE_IDS = (
    R1_NUMERIC_HOST,
    R2_BRAND_HYPHEN,
    R3_BRAND_IN_SUBDOMAIN,
    R4_USERINFO_PRESENT,
    R5_DEEP_SUBDOMAINS,
    R1A_DIGIT_LEADING_LABEL,
)

# Shown by next_tip when no rule fired on the current URL.
FALLBACK_TIP = "look carefully at the whole website address before you decide"

DEFAULT_DEPTH_THRESHOLD = 4

_BRAND_RE = re.compile(r"[a-z0-9]+\Z")


class RuleSetError(ValueError):
    """The rule-set file is malformed or inconsistent."""


class BrandListError(ValueError):
    """The brand-list file is malformed."""


@dataclass(frozen=True)
class Rule:
    id: str
    priority: int
    tip_text: str
    enabled: bool = True
    threshold: int | None = None


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...]

    def __post_init__(self) -> None:
        ids = [r.id for r in self.rules]
        if len(set(ids)) != len(ids):
            raise RuleSetError("duplicate rule ids")
        priorities = [r.priority for r in self.rules]
        if len(set(priorities)) != len(priorities):
            raise RuleSetError("rule priorities must be a total order (no ties)")
        for r in self.rules:
            if r.id not in KNOWN_RULE_IDS:
                raise RuleSetError(f"unknown rule id: {r.id}")

    def enabled_rules(self) -> list[Rule]:
        return sorted((r for r in self.rules if r.enabled), key=lambda r: r.priority)

    def rule(self, rule_id: str) -> Rule:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)


@dataclass(frozen=True)
class BrandList:
    brands: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for b in self.brands:
            if not _BRAND_RE.match(b):
                raise BrandListError(f"bad brand token: {b!r}")


@dataclass(frozen=True)
class Cue:
    rule_id: str
    matched_span: tuple[int, int]  # byte offsets into serialize(url)
    tip_text: str


@dataclass(frozen=True)
class Verdict:
    cues: tuple[Cue, ...]

    @property
    def suspicious(self) -> bool:
        return bool(self.cues)


def load_ruleset(text: str) -> RuleSet:
    """Parse the blank-line-separated key=value rule blocks."""
    blocks: list[dict[str, str]] = []
    current: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            if current:
                blocks.append(current)
                current = {}
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise RuleSetError(f"line {lineno}: expected 'key = value', got {raw!r}")
        current[key.strip()] = value.strip()
    if current:
        blocks.append(current)

    rules = []
    for block in blocks:
        try:
            rule_id = block["id"]
            priority = int(block["priority"])
            tip_text = block["tip_text"]
        except KeyError as exc:
            raise RuleSetError(f"rule block missing field {exc}") from None
        except ValueError:
            raise RuleSetError(f"bad priority in rule {block.get('id')!r}") from None
        enabled = block.get("enabled", "true").lower() in ("true", "yes", "1")
        threshold = int(block["threshold"]) if "threshold" in block else None
        rules.append(Rule(rule_id, priority, tip_text, enabled, threshold))
    if not rules:
        raise RuleSetError("no rules in rule set")
    return RuleSet(tuple(rules))


def load_ruleset_file(path: str | Path) -> RuleSet:
    return load_ruleset(Path(path).read_text(encoding="utf-8"))


def load_brands(text: str) -> BrandList:
    brands = set()
    for raw in text.splitlines():
        line = raw.strip().lower()
        if not line or line.startswith("#"):
            continue
        brands.add(line)
    return BrandList(frozenset(brands))


def load_brands_file(path: str | Path) -> BrandList:
    return load_brands(Path(path).read_text(encoding="utf-8"))


_DEFAULT_RULESET: RuleSet | None = None
_DEFAULT_BRANDS: BrandList | None = None


def default_ruleset() -> RuleSet:
    global _DEFAULT_RULESET
    if _DEFAULT_RULESET is None:
        text = resources.files("phishpond.data").joinpath("rules.txt").read_text("utf-8")
        _DEFAULT_RULESET = load_ruleset(text)
    return _DEFAULT_RULESET


def default_brands() -> BrandList:
    global _DEFAULT_BRANDS
    if _DEFAULT_BRANDS is None:
        text = resources.files("phishpond.data").joinpath("brands.txt").read_text("utf-8")
        _DEFAULT_BRANDS = load_brands(text)
    return _DEFAULT_BRANDS


class _Layout:
    """Byte offsets of URL components within the serialized text."""

    def __init__(self, url: ParsedUrl):
        self.spans: dict[str, tuple[int, int]] = {}
        pos = 0
        for name, text in serialize_parts(url):
            nbytes = len(text.encode("utf-8"))
            self.spans[name] = (pos, pos + nbytes)
            pos += nbytes

    def host_span(self) -> tuple[int, int]:
        return self.spans["host"]

    def label_span(self, labels: tuple[str, ...], index: int) -> tuple[int, int]:
        # host labels are ASCII, so byte offsets == char offsets within the host
        start = self.spans["host"][0] + sum(len(labels[j]) + 1 for j in range(index))
        return (start, start + len(labels[index]))

    def userinfo_span(self) -> tuple[int, int]:
        # cover the userinfo text plus the terminating '@'
        return (self.spans["userinfo"][0], self.spans["at"][1])


def _registrable_or_none(url: ParsedUrl, suffixes: SuffixList) -> RegistrableDomain | None:
    try:
        return registrable_domain(url, suffixes)
    except NoRegistrableDomain:
        return None


def analyze(
    url: ParsedUrl,
    rules: RuleSet | None = None,
    brands: BrandList | None = None,
    suffixes: SuffixList | None = None,
) -> Verdict:
    """Run every enabled rule over ``url`` and return the cues in priority order.

    An empty brand list simply disables R2/R3. ``suffixes`` defaults to the
    bundled list; R2/R3 use it to find the registrable domain.
    """
    rules = rules if rules is not None else default_ruleset()
    brands = brands if brands is not None else default_brands()
    suffixes = suffixes if suffixes is not None else default_suffixes()

    layout = _Layout(url)
    regdom = _registrable_or_none(url, suffixes)
    labels = url.host.labels if isinstance(url.host, DomainName) else ()
    brand_order = sorted(brands.brands)

    cues = []
    for rule in rules.enabled_rules():
        span = _match_rule(rule, url, labels, regdom, brand_order, layout)
        if span is not None:
            cues.append(Cue(rule.id, span, rule.tip_text))
    return Verdict(tuple(cues))


def _match_rule(
    rule: Rule,
    url: ParsedUrl,
    labels: tuple[str, ...],
    regdom: RegistrableDomain | None,
    brand_order: list[str],
    layout: _Layout,
) -> tuple[int, int] | None:
    if rule.id == R1_NUMERIC_HOST:
        if isinstance(url.host, Ipv4Literal):
            return layout.host_span()
        return None

    if rule.id == R2_BRAND_HYPHEN:
        # A hyphenated brand label is trusted only when the host already sits
        # under that brand's own registrable domain (e.g. *.paypal.com).
        for i, label in enumerate(labels):
            for brand in brand_order:
                if label.startswith(brand + "-") or label.endswith("-" + brand):
                    if regdom is not None and regdom.owner_label == brand:
                        continue
                    return layout.label_span(labels, i)
        return None

    if rule.id == R3_BRAND_IN_SUBDOMAIN:
        if regdom is None:
            return None
        boundary = len(labels) - len(regdom.labels)
        for i in range(boundary):
            if labels[i] in brand_order:
                return layout.label_span(labels, i)
        return None

    if rule.id == R4_USERINFO_PRESENT:
        if url.userinfo is not None:
            return layout.userinfo_span()
        return None

    if rule.id == R5_DEEP_SUBDOMAINS:
        threshold = rule.threshold if rule.threshold is not None else DEFAULT_DEPTH_THRESHOLD
        if labels and len(labels) > threshold:
            return layout.host_span()
        return None

    if rule.id == R1A_DIGIT_LEADING_LABEL:
        if labels and labels[0][0].isdigit():
            return layout.label_span(labels, 0)
        return None

    raise RuleSetError(f"unknown rule id: {rule.id}")


def next_tip(verdict: Verdict, already_shown: int) -> str:
    """Tip for the (already_shown mod cue-count)-th cue; fallback if none fired.

    Repeated help requests on the same worm cycle through the cues.
    """
    if not verdict.cues:
        return FALLBACK_TIP
    return verdict.cues[already_shown % len(verdict.cues)].tip_text
