"""The operational core: one object that owns state, log, and transitions.

Every state change flows through a handler keyed by event kind. Live
calls run the handler first (guards included), then append the event;
replay runs the exact same handlers over the stored events, so a
restarted process reconstructs precisely the state it shut down with.
Events carry recorded facts (model predictions, drawn contexts), never
re-computed ones, which keeps replay independent of model availability.
"""

from __future__ import annotations

import hashlib
import io
import random
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from . import adversary as adv
from .analytics import RoundLog, RoundStats, compute_round_stats
from .assembly import (
    assign_splits,
    DatasetRecord,
    export_records,
    record_from_example,
    Split,
    SplitAssignment,
    SplitManifest,
)
from .collection import CollectionEngine, SessionState, WritingSession
from .config import round_config_from_dict, round_config_to_dict
from .domain import (
    Annotator,
    CollectedExample,
    Context,
    Genre,
    Label,
    phrase_from_label,
    Prediction,
    RoundConfig,
)
from .errors import LogCorruptionError, StateError, ValidationError
from .store import EventKind, EventStore
from .verification import CaseStatus, record_verdict, VerificationCase, VerificationQueue


def derive_seed(*parts: str) -> int:
    """Deterministic 64-bit seed from name parts (process-independent)."""
    joined = "\x1f".join(parts)
    return int.from_bytes(hashlib.sha256(joined.encode("utf-8")).digest()[:8], "big")


@dataclass
class RoundState:
    config: RoundConfig
    engine: CollectionEngine
    queue: VerificationQueue = field(default_factory=VerificationQueue)
    examples: dict[str, CollectedExample] = field(default_factory=dict)
    closed: bool = False
    assignment: SplitAssignment | None = None


class Platform:
    """Application service wiring collection, verification, and assembly.

    The registry maps model ids to adversaries: either ModelSpec values
    or any object with classify(context, hypothesis) -> Prediction (used
    by simulations and tests).
    """

    def __init__(
        self,
        store: EventStore,
        roster: Mapping[str, Annotator],
        registry: Mapping[str, Any] | None = None,
        clock: Callable[[], float] = time.time,
        implicit_roster: bool = False,
    ) -> None:
        self.store = store
        self.roster = dict(roster)
        self.registry = dict(registry or {})
        self.clock = clock
        # offline analytics replays logs without the deployment config;
        # unknown annotators then materialize as generic both-role entries
        self.implicit_roster = implicit_roster
        self.contexts: dict[str, Context] = {}
        self.rounds: dict[int, RoundState] = {}
        self.session_rounds: dict[str, int] = {}
        self._handlers: dict[EventKind, Callable[[dict], dict]] = {
            EventKind.CONTEXT_ADDED: self._on_context_added,
            EventKind.ROUND_OPENED: self._on_round_opened,
            EventKind.SESSION_OPENED: self._on_session_opened,
            EventKind.ATTEMPT_SUBMITTED: self._on_attempt_submitted,
            EventKind.REASON_SUBMITTED: self._on_reason_submitted,
            EventKind.VERDICT_RECORDED: self._on_verdict_recorded,
            EventKind.CASE_RESOLVED: self._on_case_resolved,
            EventKind.ROUND_CLOSED: self._on_round_closed,
            EventKind.SPLIT_ASSIGNED: self._on_split_assigned,
        }
        self.replay()

    # -- event plumbing ----------------------------------------------------

    def replay(self) -> None:
        """Fold the stored log into fresh state through the live handlers."""
        self.contexts = {}
        self.rounds = {}
        self.session_rounds = {}
        for event in self.store.events():
            handler = self._handlers[event.kind]
            try:
                applied = handler(event.payload)
            except Exception as exc:  # any failure here means the log lies
                raise LogCorruptionError(event.sequence, f"replay failed: {exc}") from exc
            for key, value in applied.items():
                if event.payload.get(key) != value:
                    raise LogCorruptionError(
                        event.sequence,
                        f"replay diverged on {key!r}: log has {event.payload.get(key)!r}, "
                        f"replay produced {value!r}",
                    )

    def _commit(self, kind: EventKind, payload: dict) -> dict:
        full = self._handlers[kind](payload)
        self.store.append(kind, full, timestamp=full.get("now", self.clock()))
        return full

    def _round(self, round_number: int) -> RoundState:
        try:
            return self.rounds[round_number]
        except KeyError:
            raise ValidationError(f"round {round_number} is not open") from None

    def _session(self, session_id: str) -> tuple[RoundState, WritingSession]:
        if session_id not in self.session_rounds:
            raise ValidationError(f"no such session: {session_id}")
        round_state = self.rounds[self.session_rounds[session_id]]
        return round_state, round_state.engine.sessions[session_id]

    def session_writer(self, session_id: str) -> str:
        return self._session(session_id)[1].writer_id

    def _annotator(self, annotator_id: str) -> Annotator:
        annotator = self.roster.get(annotator_id)
        if annotator is None:
            if not self.implicit_roster:
                raise ValidationError(f"unknown annotator: {annotator_id}")
            annotator = Annotator(id=annotator_id)
            self.roster[annotator_id] = annotator
        return annotator

    # -- handlers (shared by live calls and replay) -------------------------

    def _on_context_added(self, payload: dict) -> dict:
        context = Context(
            id=payload["id"],
            text=payload["text"],
            genre=Genre(payload["genre"]),
            source=payload.get("source", ""),
            round=payload["round"],
        )
        if context.id in self.contexts:
            raise ValidationError(f"duplicate context id: {context.id}")
        self.contexts[context.id] = context
        if context.round in self.rounds:
            self.rounds[context.round].engine.add_context(context)
        return dict(payload)

    def _on_round_opened(self, payload: dict) -> dict:
        config = round_config_from_dict(payload["config"])
        if config.round_number in self.rounds:
            raise ValidationError(f"round {config.round_number} already open")
        pool = [c for c in self.contexts.values() if c.round == config.round_number]
        engine = CollectionEngine(config, pool)
        self.rounds[config.round_number] = RoundState(config=config, engine=engine)
        return dict(payload)

    def _on_session_opened(self, payload: dict) -> dict:
        round_state = self._round(payload["round"])
        if round_state.closed:
            raise StateError(f"round {payload['round']} is closed")
        writer = self._annotator(payload["writer_id"])
        session = round_state.engine.open_session(writer, payload["now"])
        self.session_rounds[session.session_id] = payload["round"]
        return {
            **payload,
            "session_id": session.session_id,
            "context_id": session.context_id,
            "target": session.target.value,
        }

    def _on_attempt_submitted(self, payload: dict) -> dict:
        round_state, session = self._session(payload["session_id"])
        prediction = Prediction.from_dict(payload["prediction"])
        feedback = round_state.engine.record_attempt(
            session,
            payload["hypothesis"],
            prediction,
            payload["model_id"],
            payload["now"],
        )
        if session.state is SessionState.CLOSED_EXHAUSTED:
            self._materialize(round_state, session)
        return {
            **payload,
            "try_index": session.attempts[-1].try_index,
            "fooled": feedback.fooled,
            "tries_remaining": feedback.tries_remaining,
        }

    def _on_reason_submitted(self, payload: dict) -> dict:
        round_state, session = self._session(payload["session_id"])
        round_state.engine.submit_reason(session, payload["reason"], payload["now"])
        case_id = self._materialize(round_state, session)
        return {**payload, "case_id": case_id}

    def _materialize(self, round_state: RoundState, session: WritingSession) -> str | None:
        """Turn a finished session into collected examples; queue the fooler."""
        summary = round_state.engine.close_session(session)
        for example in summary.model_correct_examples:
            round_state.examples[example.id] = example
        if summary.fooling_example is not None:
            example = summary.fooling_example
            round_state.examples[example.id] = example
            case = VerificationCase(case_id=example.id, example=example)
            round_state.queue.add(case)
            return case.case_id
        return None

    def _on_verdict_recorded(self, payload: dict) -> dict:
        round_state = self._round(payload["round"])
        case = round_state.queue.get(payload["case_id"])
        verifier = self._annotator(payload["verifier_id"])
        record_verdict(case, verifier, Label(payload["label"]))
        if case.status is CaseStatus.RESOLVED:
            resolved = case.resolved_example()
            round_state.examples[resolved.id] = resolved
        return {**payload, "status": case.status.value}

    def _on_case_resolved(self, payload: dict) -> dict:
        round_state = self._round(payload["round"])
        case = round_state.queue.get(payload["case_id"])
        if case.status is not CaseStatus.RESOLVED or case.result is None:
            raise StateError(f"case {payload['case_id']} is not resolved")
        return {
            **payload,
            "fate": case.result.fate.value,
            "gold": case.result.gold.value if case.result.gold else None,
        }

    def _on_round_closed(self, payload: dict) -> dict:
        round_state = self._round(payload["round"])
        if round_state.closed:
            raise StateError(f"round {payload['round']} already closed")
        abandoned = []
        for session_id in sorted(round_state.engine.sessions):
            session = round_state.engine.sessions[session_id]
            if session.state in (SessionState.OPEN, SessionState.AWAITING_REASON):
                round_state.engine.abandon(session, payload["now"])
                self._materialize(round_state, session)
                abandoned.append(session_id)
        round_state.closed = True
        return {**payload, "abandoned_sessions": abandoned}

    def _on_split_assigned(self, payload: dict) -> dict:
        round_state = self._round(payload["round"])
        assignments = {eid: Split(name) for eid, name in payload["assignments"].items()}
        manifest = SplitManifest(
            round_number=payload["round"],
            seed=payload["seed"],
            counts={
                (s, l, g): n
                for s, l, g, n in (tuple(row) for row in payload["manifest"]["counts"])
            },
            discard_reasons=dict(payload["manifest"]["discard_reasons"]),
        )
        round_state.assignment = SplitAssignment(assignments=assignments, manifest=manifest)
        return dict(payload)

    # -- live operations -----------------------------------------------------

    def add_context(self, context: Context) -> None:
        self._commit(
            EventKind.CONTEXT_ADDED,
            {
                "id": context.id,
                "text": context.text,
                "genre": context.genre.value,
                "source": context.source,
                "round": context.round,
                "now": self.clock(),
            },
        )

    def open_round(self, config: RoundConfig) -> int:
        for model_id in config.ensemble:
            if model_id not in self.registry:
                raise ValidationError(f"round {config.round_number}: unknown model {model_id!r}")
        self._commit(
            EventKind.ROUND_OPENED,
            {"config": round_config_to_dict(config), "now": self.clock()},
        )
        return config.round_number

    def open_session(self, writer_id: str, round_number: int) -> dict:
        full = self._commit(
            EventKind.SESSION_OPENED,
            {"writer_id": writer_id, "round": round_number, "now": self.clock()},
        )
        context = self.contexts[full["context_id"]]
        target = Label(full["target"])
        return {
            "session_id": full["session_id"],
            "round": round_number,
            "context": context.text,
            "target": target.value,
            "target_phrase": phrase_from_label(target),
            "tries_remaining": self._round(round_number).config.try_limit,
        }

    def _classify(self, model_ref: Any, context: Context, hypothesis: str) -> Prediction:
        if isinstance(model_ref, adv.ModelSpec):
            return adv.classify(model_ref, context, hypothesis)
        return model_ref.classify(context, hypothesis)

    def submit_attempt(self, session_id: str, hypothesis: str, try_index: int | None = None) -> dict:
        round_state, session = self._session(session_id)

        # idempotent retry: an already-recorded try index replays its feedback
        if try_index is not None and 1 <= try_index <= len(session.attempts):
            attempt = session.attempts[try_index - 1]
            if attempt.hypothesis != hypothesis.strip():
                raise ValidationError(
                    f"try {try_index} of session {session_id} was a different hypothesis"
                )
            return {
                "session_id": session_id,
                "try_index": attempt.try_index,
                "probabilities": attempt.prediction.as_dict(),
                "fooled": attempt.fooled,
                "tries_remaining": session.try_limit - attempt.try_index,
                "state": session.state.value,
                "replayed": True,
            }
        if try_index is not None and try_index != len(session.attempts) + 1:
            raise ValidationError(
                f"unexpected try_index {try_index}; next is {len(session.attempts) + 1}"
            )

        config = round_state.config
        members = [self.registry[m] for m in config.ensemble]
        if not members:
            raise ValidationError(f"round {config.round_number} has no adversary configured")
        turn_rng = random.Random(
            derive_seed(str(config.rng_seed), session_id, str(len(session.attempts) + 1))
        )
        pick = turn_rng.randrange(len(members))
        model_ref = members[pick]
        model_id = config.ensemble[pick]
        context = self.contexts[session.context_id]
        prediction = self._classify(model_ref, context, hypothesis)

        full = self._commit(
            EventKind.ATTEMPT_SUBMITTED,
            {
                "session_id": session_id,
                "hypothesis": hypothesis.strip(),
                "prediction": prediction.as_dict(),
                "model_id": model_id,
                "now": self.clock(),
            },
        )
        return {
            "session_id": session_id,
            "try_index": full["try_index"],
            "probabilities": full["prediction"],
            "fooled": full["fooled"],
            "tries_remaining": full["tries_remaining"],
            "state": session.state.value,
            "replayed": False,
        }

    def submit_reason(self, session_id: str, reason: str) -> dict:
        _, session = self._session(session_id)
        if session.state is SessionState.CLOSED_FOOLED and session.reason == reason:
            return {"session_id": session_id, "state": session.state.value, "replayed": True}
        full = self._commit(
            EventKind.REASON_SUBMITTED,
            {"session_id": session_id, "reason": reason, "now": self.clock()},
        )
        return {
            "session_id": session_id,
            "state": session.state.value,
            "case_id": full["case_id"],
            "replayed": False,
        }

    def next_case(self, verifier_id: str, round_number: int | None = None) -> dict | None:
        verifier = self._annotator(verifier_id)
        numbers = [round_number] if round_number is not None else sorted(self.rounds)
        for number in numbers:
            case = self._round(number).queue.next_for(verifier)
            if case is not None:
                context = self.contexts[case.example.context_id]
                return {
                    "case_id": case.case_id,
                    "round": number,
                    "context": context.text,
                    "hypothesis": case.example.hypothesis,
                    "verdicts_recorded": len(case.verdicts),
                }
        return None

    def record_verdict(self, case_id: str, verifier_id: str, label: Label) -> dict:
        round_number = self._find_case_round(case_id)
        case = self.rounds[round_number].queue.get(case_id)

        # idempotent retry: same verifier re-posting the same label is an ack
        for verdict in case.verdicts:
            if verdict.verifier_id == verifier_id and verdict.label == label:
                return self._case_status(case, round_number, replayed=True)

        self._commit(
            EventKind.VERDICT_RECORDED,
            {
                "round": round_number,
                "case_id": case_id,
                "verifier_id": verifier_id,
                "label": label.value,
                "now": self.clock(),
            },
        )
        if case.status is CaseStatus.RESOLVED:
            self._commit(
                EventKind.CASE_RESOLVED,
                {"round": round_number, "case_id": case_id, "now": self.clock()},
            )
        return self._case_status(case, round_number, replayed=False)

    def _case_status(self, case: VerificationCase, round_number: int, replayed: bool) -> dict:
        out = {
            "case_id": case.case_id,
            "round": round_number,
            "status": case.status.value,
            "replayed": replayed,
        }
        if case.result is not None:
            out["fate"] = case.result.fate.value
            out["gold"] = case.result.gold.value if case.result.gold else None
        return out

    def _find_case_round(self, case_id: str) -> int:
        for number, round_state in self.rounds.items():
            try:
                round_state.queue.get(case_id)
                return number
            except ValidationError:
                continue
        raise ValidationError(f"no such case: {case_id}")

    def close_round(self, round_number: int) -> dict:
        return self._commit(
            EventKind.ROUND_CLOSED, {"round": round_number, "now": self.clock()}
        )

    def assign_round_splits(self, round_number: int, seed: int | None = None) -> SplitAssignment:
        round_state = self._round(round_number)
        if not round_state.closed:
            raise StateError(f"round {round_number} must be closed before assembly")
        pending = round_state.queue.pending()
        if pending:
            raise StateError(
                f"round {round_number} has unresolved cases: {sorted(c.case_id for c in pending)}"
            )
        seed = round_state.config.rng_seed if seed is None else seed
        examples = [round_state.examples[eid] for eid in sorted(round_state.examples)]
        assignment = assign_splits(
            examples, round_state.config, seed, self.contexts, self.roster
        )
        self._commit(
            EventKind.SPLIT_ASSIGNED,
            {
                "round": round_number,
                "seed": seed,
                "assignments": {
                    eid: split.value for eid, split in sorted(assignment.assignments.items())
                },
                "manifest": {
                    "counts": [
                        [s, l, g, n] for (s, l, g), n in sorted(assignment.manifest.counts.items())
                    ],
                    "discard_reasons": dict(sorted(assignment.manifest.discard_reasons.items())),
                },
                "now": self.clock(),
            },
        )
        return assignment

    # -- read side -------------------------------------------------------------

    def round_log(self, round_number: int) -> RoundLog:
        round_state = self._round(round_number)
        return RoundLog(
            round_number=round_number,
            sessions=list(round_state.engine.sessions.values()),
            examples=[round_state.examples[eid] for eid in sorted(round_state.examples)],
            contexts=self.contexts,
        )

    def round_stats(self, round_number: int, allow_pending: bool = False) -> RoundStats:
        return compute_round_stats(self.round_log(round_number), allow_pending=allow_pending)

    def export_round(self, round_number: int, split: Split) -> list[DatasetRecord]:
        round_state = self._round(round_number)
        if round_state.assignment is None:
            raise StateError(f"round {round_number} has no split assignment yet")
        records = []
        for eid in round_state.assignment.members(split):
            example = round_state.examples[eid]
            records.append(
                record_from_example(example, self.contexts[example.context_id], round_number)
            )
        return records

    def export_round_text(self, round_number: int, split: Split, allow_empty: bool = True) -> str:
        buffer = io.StringIO()
        export_records(self.export_round(round_number, split), buffer, allow_empty=allow_empty)
        return buffer.getvalue()
