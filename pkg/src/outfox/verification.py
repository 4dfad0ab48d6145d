"""Adjudication of model-wrong examples.

Every fooling example is shown to two verifiers. If they agree with each
other the case resolves immediately: with the writer (B1) or against the
writer (C, relabeled). If they split, a third verifier breaks the tie and
the majority among the three verifier verdicts decides: writer confirmed
(B2), writer overruled (C), or no majority at all (D, discarded).

Resolution is a pure function of the recorded verdicts; the case object
only sequences them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple, Sequence

from .domain import Annotator, CollectedExample, Fate, Label, LABEL_ORDER, Prediction, Verdict
from .errors import DuplicateVerifierError, StateError, ValidationError


class CaseStatus(Enum):
    NEEDS_FIRST_PAIR = "needs_first_pair"
    NEEDS_THIRD = "needs_third"
    RESOLVED = "resolved"


class FateResult(NamedTuple):
    fate: Fate
    gold: Label | None


def needs_third_verdict(verdict_labels: Sequence[Label], writer_label: Label) -> bool:
    """Decide whether a third verifier is required after the first pair.

    False iff the two verdicts agree with each other, whether that is with
    or against the writer; an agreeing pair is decisive either way, and a
    third vote could not change the verifier majority. The writer's label
    is part of the decision surface for alternative protocols but does not
    influence this rule.
    """
    if len(verdict_labels) != 2:
        raise ValidationError(f"expected exactly two verdicts, got {len(verdict_labels)}")
    return verdict_labels[0] != verdict_labels[1]


def resolve_fate(
    writer_label: Label,
    model_prediction: Prediction,
    verdict_labels: Sequence[Label],
) -> FateResult:
    """Map a finished example to its outcome class and gold label.

    model-correct         -> A,  gold = writer's label (no verdicts allowed)
    pair agrees w/ writer -> B1, gold = writer's label
    pair agrees, against  -> C,  gold = the verifiers' label
    triple, majority w/   -> B2, gold = writer's label
    triple, majority agnst-> C,  gold = majority label
    triple, all distinct  -> D,  no gold
    Any other verdict count is a protocol error.
    """
    labels = list(verdict_labels)
    if model_prediction.argmax == writer_label:
        if labels:
            raise ValidationError("model-correct examples take no verdicts")
        return FateResult(Fate.A, writer_label)

    if len(labels) == 2:
        if needs_third_verdict(labels, writer_label):
            raise ValidationError("a split pair needs a third verdict before resolution")
        agreed = labels[0]
        if agreed == writer_label:
            return FateResult(Fate.B1, writer_label)
        return FateResult(Fate.C, agreed)

    if len(labels) == 3:
        counts = Counter(labels)
        majority = [lab for lab in LABEL_ORDER if counts[lab] >= 2]
        if not majority:
            return FateResult(Fate.D, None)
        winner = majority[0]
        if winner == writer_label:
            return FateResult(Fate.B2, writer_label)
        return FateResult(Fate.C, winner)

    raise ValidationError(f"cannot resolve a model-wrong example with {len(labels)} verdicts")


@dataclass
class VerificationCase:
    """One model-wrong example moving through adjudication."""

    case_id: str
    example: CollectedExample
    verdicts: list[Verdict] = field(default_factory=list)
    status: CaseStatus = CaseStatus.NEEDS_FIRST_PAIR
    result: FateResult | None = None

    @property
    def writer_id(self) -> str:
        return self.example.writer_id

    @property
    def writer_label(self) -> Label:
        return self.example.writer_label

    def resolved_example(self) -> CollectedExample:
        """The example with fate, gold label, and verdicts attached."""
        if self.result is None:
            raise StateError(f"case {self.case_id} is not resolved")
        return replace(
            self.example,
            verdicts=tuple(self.verdicts),
            fate=self.result.fate,
            gold_label=self.result.gold,
        )


def record_verdict(case: VerificationCase, verifier: Annotator, label: Label) -> VerificationCase:
    """Append one verdict and advance the case state machine.

    Guards: the case must be open; the verifier must hold a verifying
    role, must not be the writer, and must not have voted already.
    """
    if case.status is CaseStatus.RESOLVED:
        raise StateError(f"case {case.case_id} is already resolved")
    if not verifier.can_verify:
        raise ValidationError(f"annotator {verifier.id} cannot verify")
    if verifier.id == case.writer_id:
        raise ValidationError(f"writer {verifier.id} cannot verify their own example")
    if any(v.verifier_id == verifier.id for v in case.verdicts):
        raise DuplicateVerifierError(f"verifier {verifier.id} already voted on case {case.case_id}")

    case.verdicts.append(Verdict(verifier.id, label))
    labels = [v.label for v in case.verdicts]
    if len(labels) < 2:
        case.status = CaseStatus.NEEDS_FIRST_PAIR
    elif len(labels) == 2 and needs_third_verdict(labels, case.writer_label):
        case.status = CaseStatus.NEEDS_THIRD
    else:
        case.result = resolve_fate(case.writer_label, case.example.model_prediction, labels)
        case.status = CaseStatus.RESOLVED
    return case


class VerificationQueue:
    """Open cases plus pull-based verifier assignment.

    A verifier asking for work receives the oldest case they are eligible
    for: unresolved, not written by them, not already voted on by them.
    With verifiers pulling in turn this degenerates to round-robin.
    """

    def __init__(self) -> None:
        self._cases: dict[str, VerificationCase] = {}
        self._order: list[str] = []

    def add(self, case: VerificationCase) -> None:
        if case.case_id in self._cases:
            raise ValidationError(f"case {case.case_id} already queued")
        self._cases[case.case_id] = case
        self._order.append(case.case_id)

    def get(self, case_id: str) -> VerificationCase:
        try:
            return self._cases[case_id]
        except KeyError:
            raise ValidationError(f"no such case: {case_id}") from None

    def next_for(self, verifier: Annotator) -> VerificationCase | None:
        for case_id in self._order:
            case = self._cases[case_id]
            if case.status is CaseStatus.RESOLVED:
                continue
            if case.writer_id == verifier.id:
                continue
            if any(v.verifier_id == verifier.id for v in case.verdicts):
                continue
            return case
        return None

    def pending(self) -> list[VerificationCase]:
        return [c for c in self._cases.values() if c.status is not CaseStatus.RESOLVED]

    def all_cases(self) -> list[VerificationCase]:
        return [self._cases[cid] for cid in self._order]
