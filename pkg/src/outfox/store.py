"""Event-sourced persistence: an append-only log of everything that happened.

On disk each entry is framed as

    u32 payload length (big endian) | u32 CRC-32 of payload | payload bytes

where the payload is one canonical-JSON event. Appends flush and fsync
before returning, so an acknowledged event survives a crash. A torn final
entry (crash between write and ack) is detected by the framing, treated
as absent, and trimmed on reopen; a checksum failure anywhere else is
corruption and refuses to load.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import LogCorruptionError

_HEADER = struct.Struct(">II")


class EventKind(Enum):
    CONTEXT_ADDED = "ContextAdded"
    ROUND_OPENED = "RoundOpened"
    SESSION_OPENED = "SessionOpened"
    ATTEMPT_SUBMITTED = "AttemptSubmitted"
    REASON_SUBMITTED = "ReasonSubmitted"
    VERDICT_RECORDED = "VerdictRecorded"
    CASE_RESOLVED = "CaseResolved"
    ROUND_CLOSED = "RoundClosed"
    SPLIT_ASSIGNED = "SplitAssigned"


@dataclass(frozen=True)
class EventRecord:
    sequence: int
    timestamp: float
    kind: EventKind
    payload: dict

    def encode(self) -> bytes:
        body = {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "kind": self.kind.value,
            "payload": self.payload,
        }
        return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")

    @classmethod
    def decode(cls, raw: bytes, expected_sequence: int) -> "EventRecord":
        try:
            body = json.loads(raw.decode("utf-8"))
            record = cls(
                sequence=body["sequence"],
                timestamp=body["timestamp"],
                kind=EventKind(body["kind"]),
                payload=body["payload"],
            )
        except (ValueError, KeyError, TypeError) as exc:
            raise LogCorruptionError(expected_sequence, f"undecodable event: {exc}") from exc
        if record.sequence != expected_sequence:
            raise LogCorruptionError(
                expected_sequence, f"sequence gap: found {record.sequence}"
            )
        return record


def frame(payload: bytes) -> bytes:
    return _HEADER.pack(len(payload), zlib.crc32(payload)) + payload


class EventStore:
    """Append-only event log, file-backed or purely in memory.

    truncated_tail reports whether the last load dropped a torn entry.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: list[EventRecord] = []
        self.truncated_tail = False
        self._fh = None
        if self.path is not None:
            self._load_and_open()

    # -- loading ----------------------------------------------------------

    def _load_and_open(self) -> None:
        assert self.path is not None
        self.path.parent.mkdir(parents=True, exist_ok=True)
        raw = self.path.read_bytes() if self.path.exists() else b""
        good_end = 0
        offset = 0
        sequence = 1
        while offset < len(raw):
            if offset + _HEADER.size > len(raw):
                self.truncated_tail = True
                break
            length, checksum = _HEADER.unpack_from(raw, offset)
            start = offset + _HEADER.size
            end = start + length
            if end > len(raw):
                self.truncated_tail = True
                break
            payload = raw[start:end]
            if zlib.crc32(payload) != checksum:
                raise LogCorruptionError(sequence, "checksum mismatch")
            self._records.append(EventRecord.decode(payload, sequence))
            sequence += 1
            offset = end
            good_end = end
        if self.truncated_tail:
            # drop the torn entry so new appends continue from a clean frame
            with open(self.path, "r+b") as fh:
                fh.truncate(good_end)
        self._fh = open(self.path, "ab")

    # -- appending --------------------------------------------------------

    def append(self, kind: EventKind, payload: dict, timestamp: float) -> EventRecord:
        """Durably append one event; the returned record is the acknowledgment."""
        record = EventRecord(
            sequence=len(self._records) + 1,
            timestamp=timestamp,
            kind=kind,
            payload=payload,
        )
        if self._fh is not None:
            self._fh.write(frame(record.encode()))
            self._fh.flush()
            os.fsync(self._fh.fileno())
        self._records.append(record)
        return record

    # -- reading ----------------------------------------------------------

    def events(self) -> list[EventRecord]:
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

    def raw_bytes(self) -> bytes:
        """Canonical byte serialization of the whole log (framing included)."""
        return b"".join(frame(r.encode()) for r in self._records)

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None
