"""Shared fixture builders for the test suite."""

from __future__ import annotations

from outfox.domain import (
    Annotator,
    CollectedExample,
    Context,
    Fate,
    Genre,
    Label,
    LABEL_ORDER,
    Prediction,
    Role,
    Verdict,
)


def peaked(label: Label, peak: float = 0.8) -> Prediction:
    rest = (1.0 - peak) / 2
    return Prediction({lab: (peak if lab is label else rest) for lab in LABEL_ORDER})


def wrong_for(writer_label: Label) -> Prediction:
    """A prediction whose argmax differs from the writer's label."""
    other = next(lab for lab in LABEL_ORDER if lab is not writer_label)
    return peaked(other)


def make_context(cid: str = "ctx-1", round_number: int = 1, genre: Genre = Genre.WIKI,
                 text: str = "The harbor of Arden opened in 1901 and drew 500 visitors.") -> Context:
    return Context(id=cid, text=text, genre=genre, source="test", round=round_number)


def make_example(
    eid: str,
    writer_id: str = "w1",
    writer_label: Label = Label.ENTAILMENT,
    fate: Fate | None = None,
    gold: Label | None = None,
    context_id: str = "ctx-1",
    verdict_labels: tuple[Label, ...] = (),
    tries: int = 1,
    seconds: float = 30.0,
    hypothesis: str = "Something about the harbor.",
) -> CollectedExample:
    model_wrong = fate is None or fate is not Fate.A
    prediction = wrong_for(writer_label) if model_wrong else peaked(writer_label)
    if fate is not None and gold is None and fate is not Fate.D:
        gold = writer_label
    verdicts = tuple(
        Verdict(f"v{i + 1}", lab) for i, lab in enumerate(verdict_labels)
    )
    return CollectedExample(
        id=eid,
        context_id=context_id,
        hypothesis=hypothesis,
        writer_label=writer_label,
        model_prediction=prediction,
        writer_id=writer_id,
        tries_used=tries,
        total_session_seconds=seconds,
        reason="the model missed it" if model_wrong else None,
        verdicts=verdicts,
        fate=fate,
        gold_label=gold,
    )


def writer(aid: str = "w1", exclusive: bool = False) -> Annotator:
    return Annotator(id=aid, role=Role.WRITER, exclusive=exclusive)


def verifier(aid: str = "v1") -> Annotator:
    return Annotator(id=aid, role=Role.VERIFIER)
