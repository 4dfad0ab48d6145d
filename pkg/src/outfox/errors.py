"""Exception hierarchy shared across the platform."""

from __future__ import annotations


class OutfoxError(Exception):
    """Base class for every error raised by this package."""


class PhraseParseError(OutfoxError):
    """A label phrase (or label token) was not in the vocabulary."""

    def __init__(self, text: str) -> None:
        super().__init__(f"not a recognized label phrase: {text!r}")
        self.text = text


class ValidationError(OutfoxError):
    """Input failed a precondition (empty text, bad range, duplicate id...)."""


class StateError(OutfoxError):
    """Operation attempted on an object in the wrong state."""


class TryLimitExceeded(StateError):
    """Attempt submitted past the round's try limit."""

    def __init__(self, limit: int) -> None:
        super().__init__(f"try limit of {limit} reached")
        self.limit = limit


class PoolExhaustedError(OutfoxError):
    """No unseen context remains for this writer in the round."""


class DuplicateVerifierError(ValidationError):
    """The same annotator tried to vote twice on one case."""


class ShortfallError(OutfoxError):
    """Not enough verified examples to fill the requested dev/test cells."""

    def __init__(self, cells: list[tuple[str, str, int, int]]) -> None:
        # each cell: (genre, label, needed, available)
        lines = ", ".join(
            f"{genre}/{label}: need {need}, have {have}" for genre, label, need, have in cells
        )
        super().__init__(f"insufficient verified examples for cells: {lines}")
        self.cells = cells


class TransportError(OutfoxError):
    """Remote model endpoint unreachable or timed out."""

    def __init__(self, endpoint: str, elapsed: float, cause: str) -> None:
        super().__init__(f"remote model at {endpoint} failed after {elapsed:.3f}s: {cause}")
        self.endpoint = endpoint
        self.elapsed = elapsed


class RemoteProtocolError(OutfoxError):
    """Remote model answered, but not in the documented response schema."""


class IngestError(OutfoxError):
    """A dataset file could not be parsed."""

    def __init__(self, path: str, line: int, reason: str) -> None:
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class ConfigError(OutfoxError):
    """Deployment or campaign configuration failed validation."""

    def __init__(self, field: str, reason: str) -> None:
        super().__init__(f"config field {field!r}: {reason}")
        self.field = field


class LogCorruptionError(OutfoxError):
    """An event log entry failed its checksum or framing."""

    def __init__(self, sequence: int, reason: str) -> None:
        super().__init__(f"event log corrupt at sequence {sequence}: {reason}")
        self.sequence = sequence
