"""Append-only JSONL event store with crash-safe reload.

Every record is one JSON object per line, flushed and fsync'd before the
write is acknowledged. On reload, a torn final line (from a crash mid-write)
is detected and dropped; corruption anywhere else raises StoreCorrupt.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path
from typing import Any, Iterator


class StoreCorrupt(Exception):
    """A non-final record failed to parse: the store file is damaged."""


class StoreUnavailable(Exception):
    """The store file cannot be opened or written."""


class EventStore:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "ab")
        except OSError as exc:
            raise StoreUnavailable(f"cannot open store at {self.path}: {exc}") from exc

    def append(self, record: dict[str, Any]) -> None:
        """Durably append one record; returns only after fsync."""
        record = dict(record)
        record.setdefault("ts", time.time())
        line = json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n"
        try:
            self._fh.write(line.encode("utf-8"))
            self._fh.flush()
            os.fsync(self._fh.fileno())
        except (OSError, ValueError) as exc:  # ValueError: handle already closed
            raise StoreUnavailable(f"cannot append to store: {exc}") from exc

    def load(self) -> list[dict[str, Any]]:
        """All complete records, oldest first. Drops a torn final line."""
        return list(self._iter_records())

    def _iter_records(self) -> Iterator[dict[str, Any]]:
        try:
            data = self.path.read_bytes()
        except OSError as exc:
            raise StoreUnavailable(f"cannot read store: {exc}") from exc
        if not data:
            return
        terminated = data.endswith(b"\n")
        lines = data.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        for i, line in enumerate(lines):
            final = i == len(lines) - 1
            try:
                record = json.loads(line.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                if final and not terminated:
                    return  # torn tail from a crash mid-write; ignore
                raise StoreCorrupt(f"store record {i} is not valid JSON")
            if not isinstance(record, dict):
                raise StoreCorrupt(f"store record {i} is not an object")
            yield record

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "EventStore":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()
