"""Core vocabulary: labels, predictions, contexts, annotators, examples, round config.

Everything here is an immutable value once constructed and safe to share
across threads. Mutation happens by replacement (dataclasses.replace).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import PhraseParseError, ValidationError

PROB_SUM_TOLERANCE = 1e-9


class Label(Enum):
    """Three-way inference class. Definition order is the fixed tie-break order."""

    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"

    @property
    def short(self) -> str:
        return _SHORT_BY_LABEL[self]

    def __lt__(self, other: "Label") -> bool:  # stable sorts in balancing code
        return LABEL_ORDER.index(self) < LABEL_ORDER.index(other)


# Fixed order used everywhere a deterministic tie-break or remainder rule
# is needed: entailment first, then neutral, then contradiction.
LABEL_ORDER: tuple[Label, Label, Label] = (
    Label.ENTAILMENT,
    Label.NEUTRAL,
    Label.CONTRADICTION,
)

_SHORT_BY_LABEL = {Label.ENTAILMENT: "e", Label.NEUTRAL: "n", Label.CONTRADICTION: "c"}
_LABEL_BY_SHORT = {v: k for k, v in _SHORT_BY_LABEL.items()}

# The exact wording writers see for each target label.
_PHRASE_BY_LABEL = {
    Label.ENTAILMENT: "definitely correct",
    Label.CONTRADICTION: "definitely incorrect",
    Label.NEUTRAL: "neither definitely correct nor definitely incorrect",
}
_LABEL_BY_PHRASE = {v: k for k, v in _PHRASE_BY_LABEL.items()}


def phrase_from_label(label: Label) -> str:
    """Return the writer-facing phrasing of a target label."""
    return _PHRASE_BY_LABEL[label]


def label_from_phrase(phrase: str) -> Label:
    """Parse a writer-facing phrase back to its label.

    Case-insensitive; leading/trailing/internal runs of whitespace are
    normalized. Unknown phrases raise PhraseParseError naming the text.
    """
    normalized = " ".join(phrase.split()).lower()
    try:
        return _LABEL_BY_PHRASE[normalized]
    except KeyError:
        raise PhraseParseError(phrase) from None


def label_from_token(token: str) -> Label:
    """Parse 'e'/'n'/'c' or a full label word. Used by dataset ingestion."""
    normalized = token.strip().lower()
    if normalized in _LABEL_BY_SHORT:
        return _LABEL_BY_SHORT[normalized]
    for lab in LABEL_ORDER:
        if normalized == lab.value:
            return lab
    raise PhraseParseError(token)


class Genre(Enum):
    WIKI = "wiki"
    NEWS = "news"
    FICTION = "fiction"
    SPOKEN = "spoken"
    PROCEDURAL = "procedural"
    RTE = "rte"


def genre_from_token(token: str) -> Genre:
    normalized = token.strip().lower()
    for g in Genre:
        if normalized == g.value:
            return g
    raise ValidationError(f"unknown genre: {token!r}")


class Role(Enum):
    WRITER = "writer"
    VERIFIER = "verifier"
    BOTH = "both"


class Fate(Enum):
    """Outcome class of a collected example.

    A  - model predicted the writer's label; goes straight to the training pool.
    B1 - model-wrong, first two verifiers both confirmed the writer's label.
    B2 - model-wrong, confirmed via the tie-breaking third verifier.
    C  - model-wrong, a verifier majority overruled the writer (relabeled).
    D  - model-wrong, verifiers reached no agreement; discarded.
    """

    A = "A"
    B1 = "B1"
    B2 = "B2"
    C = "C"
    D = "D"


# Fates that carry a resolved gold label.
GOLDED_FATES = frozenset({Fate.A, Fate.B1, Fate.B2, Fate.C})
# Fates eligible for dev/test membership.
VERIFIED_FATES = frozenset({Fate.B1, Fate.B2})


@dataclass(frozen=True)
class Prediction:
    """A probability distribution over the three labels plus its argmax.

    Probabilities must cover exactly the three labels and sum to 1 within
    1e-9. Ties on the maximum break by the fixed label order.
    """

    probabilities: Mapping[Label, float]

    def __post_init__(self) -> None:
        probs = dict(self.probabilities)
        if set(probs) != set(LABEL_ORDER):
            raise ValidationError("prediction must assign all three labels")
        for lab, p in probs.items():
            if not (0.0 <= p <= 1.0 + PROB_SUM_TOLERANCE) or math.isnan(p):
                raise ValidationError(f"probability for {lab.value} out of range: {p}")
        total = sum(probs.values())
        if abs(total - 1.0) > PROB_SUM_TOLERANCE:
            raise ValidationError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "probabilities", probs)

    @property
    def argmax(self) -> Label:
        best = max(self.probabilities.values())
        for lab in LABEL_ORDER:
            if self.probabilities[lab] == best:
                return lab
        raise AssertionError("unreachable: some label attains the maximum")

    @classmethod
    def uniform(cls) -> "Prediction":
        return cls({lab: 1.0 / 3.0 for lab in LABEL_ORDER})

    def as_dict(self) -> dict[str, float]:
        return {lab.value: self.probabilities[lab] for lab in LABEL_ORDER}

    @classmethod
    def from_dict(cls, raw: Mapping[str, float]) -> "Prediction":
        return cls({label_from_token(k): float(v) for k, v in raw.items()})


@dataclass(frozen=True)
class Context:
    """A passage writers write hypotheses against."""

    id: str
    text: str
    genre: Genre
    source: str
    round: int

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("context id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"context {self.id}: text must be non-empty")
        if self.round < 1:
            raise ValidationError(f"context {self.id}: round must be positive")


@dataclass(frozen=True)
class Annotator:
    """A participant. Exclusive annotators' examples never reach the train split."""

    id: str
    role: Role = Role.BOTH
    exclusive: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("annotator id must be non-empty")

    @property
    def can_write(self) -> bool:
        return self.role in (Role.WRITER, Role.BOTH)

    @property
    def can_verify(self) -> bool:
        return self.role in (Role.VERIFIER, Role.BOTH)


@dataclass(frozen=True)
class HypothesisAttempt:
    """One submitted hypothesis and the adversary's response to it."""

    session_id: str
    try_index: int
    hypothesis: str
    prediction: Prediction
    fooled: bool
    elapsed_seconds: float
    timestamp: float
    model_id: str = ""

    def __post_init__(self) -> None:
        if self.try_index < 1:
            raise ValidationError("try_index must be positive")
        if not self.hypothesis.strip():
            raise ValidationError("hypothesis must be non-empty")
        if self.elapsed_seconds < 0:
            raise ValidationError("elapsed_seconds must be non-negative")


class Verdict(NamedTuple):
    verifier_id: str
    label: Label


@dataclass(frozen=True)
class CollectedExample:
    """A finished (context, hypothesis) pair with its adjudication state.

    reason is mandatory exactly when the model was fooled; gold_label is
    present iff the fate carries one (A/B1/B2/C).
    """

    id: str
    context_id: str
    hypothesis: str
    writer_label: Label
    model_prediction: Prediction
    writer_id: str
    tries_used: int
    total_session_seconds: float
    reason: str | None = None
    verdicts: tuple[Verdict, ...] = ()
    fate: Fate | None = None
    gold_label: Label | None = None

    def __post_init__(self) -> None:
        if self.tries_used < 1:
            raise ValidationError(f"example {self.id}: tries_used must be positive")
        if self.model_wrong and not (self.reason or "").strip():
            raise ValidationError(f"example {self.id}: model-wrong examples need a reason")
        if self.fate is not None:
            has_gold = self.gold_label is not None
            if (self.fate in GOLDED_FATES) != has_gold:
                raise ValidationError(
                    f"example {self.id}: fate {self.fate.value} and gold label presence disagree"
                )
        elif self.gold_label is not None:
            raise ValidationError(f"example {self.id}: gold label without a fate")
        seen = {self.writer_id}
        for v in self.verdicts:
            if v.verifier_id in seen:
                raise ValidationError(
                    f"example {self.id}: verifier {v.verifier_id} duplicates writer or prior verdict"
                )
            seen.add(v.verifier_id)

    @property
    def model_wrong(self) -> bool:
        return self.model_prediction.argmax != self.writer_label


@dataclass(frozen=True)
class BonusPolicy:
    """Pay structure in abstract units; recorded, never transacted."""

    base_pay: float = 1.0
    bonus_per_verified: float = 0.5


@dataclass(frozen=True)
class RoundConfig:
    """Per-round protocol parameters.

    ensemble holds model ids resolved against the deployment's model
    registry; recorded predictions (not live models) are what replays use.
    """

    round_number: int
    try_limit: int
    genres: Mapping[Genre, float] = field(default_factory=lambda: {Genre.WIKI: 1.0})
    ensemble: tuple[str, ...] = ()
    dev_size: int = 0
    test_size: int = 0
    exclusive_fraction: float = 0.1
    bonus_policy: BonusPolicy = BonusPolicy()
    rng_seed: int = 0
    test_fallback_nonexclusive: bool = True

    def __post_init__(self) -> None:
        if self.round_number < 1:
            raise ValidationError("round_number must be positive")
        if self.try_limit < 1:
            raise ValidationError("try_limit must be at least 1")
        if self.dev_size < 0 or self.test_size < 0:
            raise ValidationError("dev/test sizes must be non-negative")
        if not (0.0 <= self.exclusive_fraction <= 1.0):
            raise ValidationError("exclusive_fraction must be in [0, 1]")
        genres = dict(self.genres)
        if not genres:
            raise ValidationError("at least one genre is required")
        if any(w < 0 for w in genres.values()) or sum(genres.values()) <= 0:
            raise ValidationError("genre weights must be non-negative with positive sum")
        object.__setattr__(self, "genres", genres)

    @classmethod
    def for_round(cls, round_number: int, **overrides: object) -> "RoundConfig":
        """Default protocol parameters: 5 tries in round 1, 10 in later rounds."""
        try_limit = 5 if round_number == 1 else 10
        kwargs: dict = {"round_number": round_number, "try_limit": try_limit}
        kwargs.update(overrides)
        return cls(**kwargs)


def canonical_uid(parts: Sequence[str] | Iterable[str]) -> str:
    """Deterministic identifier for a sequence of name parts.

    Digest rule: SHA-256 over the parts joined with the ASCII unit
    separator (0x1f), UTF-8 encoded; the uid is the first 16 hex digits.
    Stable across runs and platforms.
    """
    parts = list(parts)
    if not parts:
        raise ValidationError("canonical_uid needs at least one part")
    joined = "\x1f".join(str(p) for p in parts)
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]
