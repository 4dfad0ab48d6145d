"""The writer's loop: serve a context and target, take attempts, enforce limits.

The engine never calls a model itself. Callers obtain a prediction from
whatever adversary they picked and feed it to record_attempt; that keeps
every transition deterministic and lets an event log replay through the
exact same code path.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

from .domain import (
    Annotator,
    canonical_uid,
    CollectedExample,
    Context,
    Fate,
    Genre,
    HypothesisAttempt,
    Label,
    LABEL_ORDER,
    Prediction,
    RoundConfig,
)
from .errors import PoolExhaustedError, StateError, TryLimitExceeded, ValidationError


class SessionState(Enum):
    OPEN = "open"
    AWAITING_REASON = "awaiting_reason"
    CLOSED_FOOLED = "closed_fooled"
    CLOSED_EXHAUSTED = "closed_exhausted"
    ABANDONED = "abandoned"

CLOSED_STATES = frozenset(
    {SessionState.CLOSED_FOOLED, SessionState.CLOSED_EXHAUSTED, SessionState.ABANDONED}
)


@dataclass
class WritingSession:
    """Live state of one writer working one (context, target) pair."""

    session_id: str
    writer_id: str
    context_id: str
    target: Label
    round_number: int
    try_limit: int
    opened_at: float
    attempts: list[HypothesisAttempt] = field(default_factory=list)
    state: SessionState = SessionState.OPEN
    reason: str | None = None
    closed_at: float | None = None

    @property
    def tries_used(self) -> int:
        return len(self.attempts)

    @property
    def tries_remaining(self) -> int:
        return self.try_limit - len(self.attempts)

    @property
    def last_event_at(self) -> float:
        return self.attempts[-1].timestamp if self.attempts else self.opened_at

    @property
    def total_seconds(self) -> float:
        return sum(a.elapsed_seconds for a in self.attempts)


class AttemptFeedback(NamedTuple):
    prediction: Prediction
    fooled: bool
    tries_remaining: int


class SessionSummary(NamedTuple):
    """What a finished session contributes to the dataset."""

    fooling_example: CollectedExample | None
    model_correct_examples: list[CollectedExample]
    tries_used: int
    total_seconds: float


class CollectionEngine:
    """Round-scoped coordinator: target balancing, context draws, session rules.

    Target labels are assigned least-served-first (ties break by the fixed
    label order) so per-round target counts stay balanced by construction.
    A writer never receives the same context twice; genre choice follows
    the round's sampling weights.
    """

    def __init__(self, config: RoundConfig, contexts: Sequence[Context], rng_seed: int | None = None):
        self.config = config
        self.contexts: dict[str, Context] = {}
        for ctx in contexts:
            self.add_context(ctx)
        self.rng = random.Random(config.rng_seed if rng_seed is None else rng_seed)
        self.target_counts: Counter[Label] = Counter({lab: 0 for lab in LABEL_ORDER})
        self.seen: dict[str, set[str]] = {}
        self.sessions: dict[str, WritingSession] = {}

    def add_context(self, context: Context) -> None:
        if context.id in self.contexts:
            raise ValidationError(f"duplicate context id: {context.id}")
        self.contexts[context.id] = context

    # -- opening ----------------------------------------------------------

    def _next_target(self) -> Label:
        floor = min(self.target_counts[lab] for lab in LABEL_ORDER)
        for lab in LABEL_ORDER:
            if self.target_counts[lab] == floor:
                return lab
        raise AssertionError("unreachable: some label is least served")

    def _draw_context(self, writer_id: str) -> Context:
        seen = self.seen.setdefault(writer_id, set())
        if not self.contexts:
            raise PoolExhaustedError(
                f"round {self.config.round_number} has no contexts loaded"
            )
        unseen = [c for c in self.contexts.values() if c.id not in seen]
        if not unseen:
            raise PoolExhaustedError(f"writer {writer_id} has seen every context in the round")
        by_genre: dict[Genre, list[Context]] = {}
        for ctx in unseen:
            by_genre.setdefault(ctx.genre, []).append(ctx)
        weighted = [(g, w) for g, w in self.config.genres.items() if w > 0 and g in by_genre]
        if weighted:
            genres, weights = zip(*weighted)
            genre = self.rng.choices(genres, weights=weights, k=1)[0]
            pool = by_genre[genre]
        else:
            pool = unseen
        return pool[self.rng.randrange(len(pool))]

    def open_session(self, writer: Annotator, now: float) -> WritingSession:
        """Start a session: balanced target, fresh context for this writer."""
        if not writer.can_write:
            raise ValidationError(f"annotator {writer.id} is not a writer")
        context = self._draw_context(writer.id)
        target = self._next_target()
        self.target_counts[target] += 1
        self.seen[writer.id].add(context.id)
        session = WritingSession(
            session_id=canonical_uid([f"r{self.config.round_number}", writer.id, context.id]),
            writer_id=writer.id,
            context_id=context.id,
            target=target,
            round_number=self.config.round_number,
            try_limit=self.config.try_limit,
            opened_at=now,
        )
        if session.session_id in self.sessions:
            raise ValidationError(f"session {session.session_id} already exists")
        self.sessions[session.session_id] = session
        return session

    # -- attempts ---------------------------------------------------------

    def record_attempt(
        self,
        session: WritingSession,
        hypothesis: str,
        prediction: Prediction,
        model_id: str,
        now: float,
    ) -> AttemptFeedback:
        """Append one attempt and advance the session state machine.

        Fooled means the adversary's argmax differs from the target.
        Model-correct attempts are retained: they feed the training pool.
        """
        if session.state is SessionState.CLOSED_EXHAUSTED:
            raise TryLimitExceeded(session.try_limit)
        if session.state is not SessionState.OPEN:
            raise StateError(f"session {session.session_id} is {session.state.value}, not open")
        if not hypothesis.strip():
            raise ValidationError("hypothesis must be non-empty")
        if len(session.attempts) >= session.try_limit:
            raise TryLimitExceeded(session.try_limit)

        fooled = prediction.argmax != session.target
        attempt = HypothesisAttempt(
            session_id=session.session_id,
            try_index=len(session.attempts) + 1,
            hypothesis=hypothesis.strip(),
            prediction=prediction,
            fooled=fooled,
            elapsed_seconds=max(0.0, now - session.last_event_at),
            timestamp=now,
            model_id=model_id,
        )
        session.attempts.append(attempt)
        if fooled:
            session.state = SessionState.AWAITING_REASON
        elif attempt.try_index == session.try_limit:
            session.state = SessionState.CLOSED_EXHAUSTED
            session.closed_at = now
        return AttemptFeedback(prediction, fooled, session.tries_remaining)

    def submit_reason(self, session: WritingSession, reason: str, now: float) -> WritingSession:
        """Attach the writer's explanation of the misclassification and close."""
        if session.state is not SessionState.AWAITING_REASON:
            raise StateError(
                f"session {session.session_id} is {session.state.value}, not awaiting a reason"
            )
        if not reason.strip():
            raise ValidationError("reason must be non-empty")
        session.reason = reason
        session.state = SessionState.CLOSED_FOOLED
        session.closed_at = now
        return session

    def abandon(self, session: WritingSession, now: float) -> WritingSession:
        if session.state in CLOSED_STATES:
            raise StateError(f"session {session.session_id} is already closed")
        session.state = SessionState.ABANDONED
        session.closed_at = now
        return session

    # -- closing ----------------------------------------------------------

    def close_session(self, session: WritingSession) -> SessionSummary:
        """Convert a finished session into collected examples.

        Every model-correct attempt becomes a fate-A example (gold = the
        writer's target, unverified). The fooling attempt, when a reason
        was recorded, becomes an example pending verification; abandoned
        sessions drop their reason-less fooling attempt.
        """
        if session.state not in CLOSED_STATES:
            raise StateError(f"session {session.session_id} is still {session.state.value}")

        correct: list[CollectedExample] = []
        fooling: CollectedExample | None = None
        cumulative = 0.0
        for attempt in session.attempts:
            cumulative += attempt.elapsed_seconds
            example_id = canonical_uid([session.session_id, str(attempt.try_index)])
            if not attempt.fooled:
                correct.append(
                    CollectedExample(
                        id=example_id,
                        context_id=session.context_id,
                        hypothesis=attempt.hypothesis,
                        writer_label=session.target,
                        model_prediction=attempt.prediction,
                        writer_id=session.writer_id,
                        tries_used=attempt.try_index,
                        total_session_seconds=cumulative,
                        fate=Fate.A,
                        gold_label=session.target,
                    )
                )
            elif session.state is SessionState.CLOSED_FOOLED:
                fooling = CollectedExample(
                    id=example_id,
                    context_id=session.context_id,
                    hypothesis=attempt.hypothesis,
                    writer_label=session.target,
                    model_prediction=attempt.prediction,
                    writer_id=session.writer_id,
                    tries_used=attempt.try_index,
                    total_session_seconds=cumulative,
                    reason=session.reason,
                )
        return SessionSummary(
            fooling_example=fooling,
            model_correct_examples=correct,
            tries_used=session.tries_used,
            total_seconds=session.total_seconds,
        )
