"""URL parsing and canonical serialization for the pond game.

The grammar is deliberately narrow: ``http`` / ``https`` only, an optional
userinfo part, a host that is either an IPv4 literal or a lowercase domain
name, an optional port, then path / query / fragment kept verbatim (no
percent-decoding, URLs are matched exactly as the player sees them).
Everything else -- IPv6 literals, other schemes, non-ASCII hosts, interior
whitespace -- raises :class:`MalformedUrl`.

The one law every caller may rely on: ``parse_url(serialize(u)) == u`` for
any :class:`ParsedUrl` that passed construction-time validation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Union


class MalformedUrl(ValueError):
    """The text is not a URL this engine accepts."""


class NoRegistrableDomain(ValueError):
    """The host has no registrable domain (IP literal or bare suffix)."""


_SCHEME_RE = re.compile(r"[a-z][a-z0-9+.-]*\Z")
_LABEL_RE = re.compile(r"[a-z0-9-]{1,63}\Z")
_DIGITS_RE = re.compile(r"[0-9]+\Z")

_ALLOWED_SCHEMES = {"http", "https"}
_DEFAULT_PORTS = {"http": 80, "https": 443}


@dataclass(frozen=True)
class Ipv4Literal:
    octets: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if len(self.octets) != 4 or not all(
            isinstance(o, int) and 0 <= o <= 255 for o in self.octets
        ):
            raise MalformedUrl(f"bad IPv4 octets: {self.octets!r}")

    def __str__(self) -> str:
        return ".".join(str(o) for o in self.octets)


@dataclass(frozen=True)
class DomainName:
    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise MalformedUrl("empty host")
        for label in self.labels:
            if not _LABEL_RE.match(label):
                raise MalformedUrl(f"bad host label: {label!r}")
            if label.startswith("-") or label.endswith("-"):
                raise MalformedUrl(f"hyphen at label edge: {label!r}")

    def __str__(self) -> str:
        return ".".join(self.labels)


Host = Union[Ipv4Literal, DomainName]


def _reject_ws(part: str, what: str) -> None:
    if any(c.isspace() for c in part):
        raise MalformedUrl(f"whitespace in {what}")


@dataclass(frozen=True)
class ParsedUrl:
    """Canonical structural form of a URL.

    Construction validates the canonical-form invariants, so any value that
    exists round-trips through :func:`serialize` / :func:`parse_url`.
    """

    scheme: str
    host: Host
    userinfo: str | None = None
    port: int | None = None
    path: str = ""
    query: str | None = None
    fragment: str | None = None

    def __post_init__(self) -> None:
        if self.scheme not in _ALLOWED_SCHEMES or not _SCHEME_RE.match(self.scheme):
            raise MalformedUrl(f"unsupported scheme: {self.scheme!r}")
        if self.userinfo is not None:
            if any(c in self.userinfo for c in "/?#"):
                raise MalformedUrl("userinfo may not contain / ? #")
            _reject_ws(self.userinfo, "userinfo")
        if self.port is not None:
            if not 1 <= self.port <= 65535:
                raise MalformedUrl(f"port out of range: {self.port}")
            if self.port == _DEFAULT_PORTS[self.scheme]:
                raise MalformedUrl("default port must be stripped, not stored")
        if self.path:
            if not self.path.startswith("/"):
                raise MalformedUrl("non-empty path must start with /")
            if any(c in self.path for c in "?#"):
                raise MalformedUrl("path may not contain ? or #")
            _reject_ws(self.path, "path")
        if self.query is not None:
            if "#" in self.query:
                raise MalformedUrl("query may not contain #")
            _reject_ws(self.query, "query")
        if self.fragment is not None:
            _reject_ws(self.fragment, "fragment")


def parse_url(text: str) -> ParsedUrl:
    """Parse ``text`` into a :class:`ParsedUrl` or raise :class:`MalformedUrl`.

    Leading/trailing whitespace is trimmed; interior whitespace is rejected.
    Scheme and host are lowercased, the scheme's default port is stripped,
    path/query/fragment are preserved byte for byte.
    """
    if not isinstance(text, str):
        raise MalformedUrl("URL must be text")
    text = text.strip()
    if not text:
        raise MalformedUrl("empty URL")
    _reject_ws(text, "URL")

    scheme, sep, rest = text.partition("://")
    if not sep:
        raise MalformedUrl("missing ://")
    scheme = scheme.lower()
    if not _SCHEME_RE.match(scheme):
        raise MalformedUrl(f"illegal scheme: {scheme!r}")
    if scheme not in _ALLOWED_SCHEMES:
        raise MalformedUrl(f"unsupported scheme: {scheme!r}")

    # authority runs to the first /, ? or #
    cut = len(rest)
    for ch in "/?#":
        idx = rest.find(ch)
        if idx != -1:
            cut = min(cut, idx)
    authority, tail = rest[:cut], rest[cut:]

    userinfo: str | None = None
    if "@" in authority:
        userinfo, _, hostport = authority.rpartition("@")
        if any(c in userinfo for c in "/?#"):
            raise MalformedUrl("userinfo may not contain / ? #")
    else:
        hostport = authority

    port: int | None = None
    if ":" in hostport:
        hosttext, _, porttext = hostport.rpartition(":")
        if not _DIGITS_RE.match(porttext):
            raise MalformedUrl(f"bad port: {porttext!r}")
        port = int(porttext)
        if not 1 <= port <= 65535:
            raise MalformedUrl(f"port out of range: {port}")
        if port == _DEFAULT_PORTS[scheme]:
            port = None
    else:
        hosttext = hostport

    host = _parse_host(hosttext.lower())

    path = tail
    fragment: str | None = None
    query: str | None = None
    if "#" in path:
        path, _, fragment = path.partition("#")
    if "?" in path:
        path, _, query = path.partition("?")

    return ParsedUrl(
        scheme=scheme,
        host=host,
        userinfo=userinfo,
        port=port,
        path=path,
        query=query,
        fragment=fragment,
    )


def _parse_host(hosttext: str) -> Host:
    if not hosttext:
        raise MalformedUrl("empty host")
    parts = hosttext.split(".")
    if len(parts) == 4 and all(_DIGITS_RE.match(p) for p in parts):
        octets = tuple(int(p) for p in parts)
        if any(o > 255 for o in octets):
            raise MalformedUrl(f"IPv4 octet out of range: {hosttext!r}")
        return Ipv4Literal(octets)  # type: ignore[arg-type]
    return DomainName(tuple(parts))


def serialize_parts(url: ParsedUrl) -> list[tuple[str, str]]:
    """Ordered (component, text) pieces whose concatenation is the URL.

    Component names: scheme, sep, userinfo, at, host, port, path, query,
    fragment. Used by the cue engine to compute byte spans.
    """
    parts: list[tuple[str, str]] = [("scheme", url.scheme), ("sep", "://")]
    if url.userinfo is not None:
        parts.append(("userinfo", url.userinfo))
        parts.append(("at", "@"))
    parts.append(("host", str(url.host)))
    if url.port is not None:
        parts.append(("port", f":{url.port}"))
    if url.path:
        parts.append(("path", url.path))
    if url.query is not None:
        parts.append(("query", f"?{url.query}"))
    if url.fragment is not None:
        parts.append(("fragment", f"#{url.fragment}"))
    return parts


def serialize(url: ParsedUrl) -> str:
    """Canonical text form; inverse of :func:`parse_url`."""
    return "".join(text for _, text in serialize_parts(url))


@dataclass(frozen=True)
class RegistrableDomain:
    """Public suffix plus the one label its owner actually registered."""

    labels: tuple[str, ...]
    suffix_labels: tuple[str, ...]

    @property
    def value(self) -> str:
        return ".".join(self.labels)

    @property
    def owner_label(self) -> str:
        return self.labels[0]

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SuffixList:
    """Small editable public-suffix list; not the full PSL.

    When no listed suffix matches, the final label acts as the suffix
    (the PSL's implicit ``*`` rule), so unknown TLDs still yield a
    registrable domain.
    """

    entries: frozenset[tuple[str, ...]]

    @classmethod
    def from_text(cls, text: str) -> "SuffixList":
        entries = set()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            labels = tuple(line.split("."))
            for label in labels:
                if not _LABEL_RE.match(label) or label[0] == "-" or label[-1] == "-":
                    raise ValueError(f"suffix list line {lineno}: bad label {label!r}")
            entries.add(labels)
        return cls(frozenset(entries))

    @classmethod
    def from_file(cls, path: str | Path) -> "SuffixList":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


_DEFAULT_SUFFIXES: SuffixList | None = None


def default_suffixes() -> SuffixList:
    """The suffix list bundled with the package (data/suffixes.txt)."""
    global _DEFAULT_SUFFIXES
    if _DEFAULT_SUFFIXES is None:
        text = resources.files("phishpond.data").joinpath("suffixes.txt").read_text("utf-8")
        _DEFAULT_SUFFIXES = SuffixList.from_text(text)
    return _DEFAULT_SUFFIXES


def registrable_domain(url: ParsedUrl, suffixes: SuffixList) -> RegistrableDomain:
    """Longest matching public suffix plus one label.

    Raises :class:`NoRegistrableDomain` for IPv4 hosts and for hosts that
    are nothing but a suffix (or a single label under the implicit rule).
    """
    if not isinstance(url.host, DomainName):
        raise NoRegistrableDomain("IP-literal host")
    labels = url.host.labels
    best: tuple[str, ...] = ()
    for suffix in suffixes.entries:
        if len(suffix) > len(best) and len(suffix) <= len(labels):
            if labels[len(labels) - len(suffix):] == suffix:
                best = suffix
    if not best:
        best = labels[-1:]
    if len(labels) == len(best):
        raise NoRegistrableDomain(f"host is a bare suffix: {url.host}")
    return RegistrableDomain(labels=labels[-(len(best) + 1):], suffix_labels=best)
