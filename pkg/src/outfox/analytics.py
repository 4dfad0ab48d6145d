"""Measurement over finished rounds: error rates, agreement, tag incidence.

All functions here are pure over immutable snapshots. Statistics that the
dashboard, the CLI, and the export files all display come from this one
module so the numbers can never drift apart.
"""

from __future__ import annotations

import json
import statistics
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Hashable, Iterable, Mapping, Sequence

from .assembly import DatasetRecord
from .collection import CLOSED_STATES, WritingSession
from .domain import CollectedExample, Context, Fate, Label, LABEL_ORDER, VERIFIED_FATES
from .errors import ValidationError
from .text import tokenize

Histogram = dict[int, int]


@dataclass(frozen=True)
class RoundStats:
    """Round summary: rates over attempts, effort over verified examples.

    The error-rate denominator is every hypothesis attempt in the round
    (model-correct attempts included, since they are collected too); this
    choice is isolated here so an alternative denominator stays a one-line
    change. Tries/seconds describe only verified (B1/B2) examples.
    """

    round_number: int
    total_attempts: int
    unverified_error_rate: float
    verified_error_rate: float
    tries_mean: float | None
    tries_median: float | None
    seconds_mean: float | None
    seconds_median: float | None
    fate_counts: Mapping[str, int]
    tries_histogram: Histogram
    seconds_histogram: Histogram
    context_token_histogram: Histogram
    hypothesis_token_histogram: Histogram
    n_collected: int = 0
    n_sessions: int = 0

    def as_dict(self) -> dict:
        return {
            "round": self.round_number,
            "total_attempts": self.total_attempts,
            "unverified_error_rate": self.unverified_error_rate,
            "verified_error_rate": self.verified_error_rate,
            "tries_mean": self.tries_mean,
            "tries_median": self.tries_median,
            "seconds_mean": self.seconds_mean,
            "seconds_median": self.seconds_median,
            "fate_counts": {f.value: self.fate_counts.get(f.value, 0) for f in Fate},
            "histograms": {
                "tries": {str(k): v for k, v in sorted(self.tries_histogram.items())},
                "seconds": {str(k): v for k, v in sorted(self.seconds_histogram.items())},
                "context_tokens": {
                    str(k): v for k, v in sorted(self.context_token_histogram.items())
                },
                "hypothesis_tokens": {
                    str(k): v for k, v in sorted(self.hypothesis_token_histogram.items())
                },
            },
            "n_collected": self.n_collected,
            "n_sessions": self.n_sessions,
        }


def canonical_stats_json(stats: RoundStats) -> str:
    """The one serialization of RoundStats every surface shares.

    The CLI writes it, the API returns it verbatim, the dashboard renders
    it; byte-level equality between them is part of the contract.
    """
    return json.dumps(stats.as_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class RoundLog:
    """Everything a finished round left behind, ready for measurement."""

    round_number: int
    sessions: list[WritingSession]
    examples: list[CollectedExample]
    contexts: Mapping[str, Context]


def compute_round_stats(log: RoundLog, allow_pending: bool = False) -> RoundStats:
    """Reduce a round log to its summary statistics.

    The log must be complete: every session closed and every example
    fated. Unresolved examples raise unless allow_pending explicitly
    excludes them from the measurement.
    """
    open_sessions = [s.session_id for s in log.sessions if s.state not in CLOSED_STATES]
    if open_sessions:
        raise ValidationError(f"round {log.round_number} has open sessions: {sorted(open_sessions)}")
    pending = [ex.id for ex in log.examples if ex.fate is None]
    if pending and not allow_pending:
        raise ValidationError(
            f"round {log.round_number} has unresolved examples: {sorted(pending)}"
        )
    examples = [ex for ex in log.examples if ex.fate is not None]

    total_attempts = sum(len(s.attempts) for s in log.sessions)
    wrong_attempts = sum(1 for s in log.sessions for a in s.attempts if a.fooled)
    verified = [ex for ex in examples if ex.fate in VERIFIED_FATES]

    unverified_rate = wrong_attempts / total_attempts if total_attempts else 0.0
    verified_rate = len(verified) / total_attempts if total_attempts else 0.0

    tries = [ex.tries_used for ex in verified]
    seconds = [ex.total_session_seconds for ex in verified]
    fate_counts = Counter(ex.fate.value for ex in examples)

    used_context_ids = {ex.context_id for ex in examples}
    context_hist: Counter[int] = Counter(
        len(tokenize(log.contexts[cid].text)) for cid in used_context_ids if cid in log.contexts
    )
    hypothesis_hist: Counter[int] = Counter(len(tokenize(ex.hypothesis)) for ex in examples)

    return RoundStats(
        round_number=log.round_number,
        total_attempts=total_attempts,
        unverified_error_rate=unverified_rate,
        verified_error_rate=verified_rate,
        tries_mean=statistics.fmean(tries) if tries else None,
        tries_median=float(statistics.median(tries)) if tries else None,
        seconds_mean=statistics.fmean(seconds) if seconds else None,
        seconds_median=float(statistics.median(seconds)) if seconds else None,
        fate_counts=dict(fate_counts),
        tries_histogram=dict(Counter(tries)),
        seconds_histogram=dict(Counter(int(s) for s in seconds)),
        context_token_histogram=dict(context_hist),
        hypothesis_token_histogram=dict(hypothesis_hist),
        n_collected=len(examples),
        n_sessions=len(log.sessions),
    )


# -- agreement --------------------------------------------------------------

def fleiss_kappa(ratings: Sequence[Sequence[Hashable]]) -> float:
    """Chance-corrected multi-rater agreement over categorical assignments.

    Every item must carry the same number n >= 2 of ratings. With observed
    agreement P-bar and chance agreement Pe-bar (from pooled category
    proportions), kappa = (P-bar - Pe-bar) / (1 - Pe-bar). When every
    rating in the input is the same category, Pe-bar is 1 and kappa is
    defined as 1.0.
    """
    if not ratings:
        raise ValidationError("fleiss_kappa needs at least one item")
    n = len(ratings[0])
    if n < 2:
        raise ValidationError("fleiss_kappa needs at least two raters per item")
    for i, item in enumerate(ratings):
        if len(item) != n:
            raise ValidationError(f"item {i} has {len(item)} ratings, expected {n}")

    pooled: Counter[Hashable] = Counter()
    p_sum = 0.0
    for item in ratings:
        counts = Counter(item)
        pooled.update(counts)
        p_sum += (sum(c * c for c in counts.values()) - n) / (n * (n - 1))
    p_bar = p_sum / len(ratings)
    total = len(ratings) * n
    pe_bar = sum((c / total) ** 2 for c in pooled.values())
    if pe_bar == 1.0:
        return 1.0
    return (p_bar - pe_bar) / (1 - pe_bar)


def verifier_agreement(examples: Iterable[CollectedExample]) -> float:
    """Fraction of individual verdicts that matched the writer's label."""
    matches = 0
    total = 0
    for ex in examples:
        for verdict in ex.verdicts:
            total += 1
            if verdict.label == ex.writer_label:
                matches += 1
    if total == 0:
        raise ValidationError("no verdicts in scope")
    return matches / total


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    n_items: int
    n_raters: int
    n_categories: int
    verifier_author_agreement: float


def agreement_report(examples: Sequence[CollectedExample]) -> AgreementReport:
    """Kappa over (writer + first two verifiers) plus raw verdict agreement."""
    ratings = [
        [ex.writer_label, ex.verdicts[0].label, ex.verdicts[1].label]
        for ex in examples
        if len(ex.verdicts) >= 2
    ]
    if not ratings:
        raise ValidationError("no examples with two verdicts in scope")
    categories = {lab for item in ratings for lab in item}
    return AgreementReport(
        kappa=fleiss_kappa(ratings),
        n_items=len(ratings),
        n_raters=3,
        n_categories=len(categories),
        verifier_author_agreement=verifier_agreement(ex for ex in examples if ex.verdicts),
    )


def kappa_from_records(records: Iterable[DatasetRecord]) -> float:
    """Kappa over ingested records carrying at least two validator labels.

    The record's own label stands in for the writer (dev/test gold equals
    the writer's label by construction of those splits).
    """
    ratings = [
        [rec.label, rec.validator_labels[0], rec.validator_labels[1]]
        for rec in records
        if rec.validator_labels and len(rec.validator_labels) >= 2
    ]
    if not ratings:
        raise ValidationError("no records with two validator labels")
    return fleiss_kappa(ratings)


def label_distribution(records: Iterable[DatasetRecord]) -> dict[Label, int]:
    counts = Counter(rec.label for rec in records)
    return {lab: counts.get(lab, 0) for lab in LABEL_ORDER}


# -- linguistic tagging ------------------------------------------------------

TAG_NAMES = (
    "negation", "and", "or", "numbers", "time",
    "wh_words", "pronouns", "quantifiers", "modals", "over_20_words",
)

_LIST_FILES = {
    "negation": "negation.txt",
    "time": "time.txt",
    "wh_words": "wh_words.txt",
    "pronouns": "pronouns.txt",
    "quantifiers": "quantifiers.txt",
    "modals": "modals.txt",
    "number_words": "number_words.txt",
}


class InferenceTag(Enum):
    """Closed ontology for expert inference-type annotations."""

    NUMERICAL_QUANTITATIVE = "numerical_quantitative"
    REFERENCE_NAMES = "reference_names"
    STANDARD = "standard"
    LEXICAL = "lexical"
    TRICKY = "tricky"
    REASONING_FACTS = "reasoning_facts"
    QUALITY = "quality"


@dataclass(frozen=True)
class TagWordLists:
    negation: frozenset[str]
    time: frozenset[str]
    wh_words: frozenset[str]
    pronouns: frozenset[str]
    quantifiers: frozenset[str]
    modals: frozenset[str]
    number_words: frozenset[str]


def _read_list(path: Path) -> frozenset[str]:
    words = {
        line.strip().lower()
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    }
    return frozenset(words)


def load_wordlists(overrides: Mapping[str, str | Path] | None = None) -> TagWordLists:
    """Load the shipped word lists, honoring per-list path overrides."""
    overrides = overrides or {}
    lists: dict[str, frozenset[str]] = {}
    for key, filename in _LIST_FILES.items():
        if key in overrides:
            lists[key] = _read_list(Path(overrides[key]))
        else:
            ref = resources.files("outfox.wordlists").joinpath(filename)
            with resources.as_file(ref) as path:
                lists[key] = _read_list(path)
    return TagWordLists(**lists)


_DEFAULT_LISTS: TagWordLists | None = None


def default_wordlists() -> TagWordLists:
    global _DEFAULT_LISTS
    if _DEFAULT_LISTS is None:
        _DEFAULT_LISTS = load_wordlists()
    return _DEFAULT_LISTS


def tag_sentence(text: str, lists: TagWordLists | None = None) -> set[str]:
    """Surface-cue tags for one sentence via word-list membership.

    Deterministic and case-insensitive; "numbers" fires on any digit or
    number word, "over_20_words" on a token count above 20.
    """
    if not text.strip():
        raise ValidationError("cannot tag empty text")
    lists = lists or default_wordlists()
    tokens = tokenize(text)
    token_set = set(tokens)
    tags: set[str] = set()
    if token_set & lists.negation:
        tags.add("negation")
    if "and" in token_set:
        tags.add("and")
    if "or" in token_set:
        tags.add("or")
    if any(any(ch.isdigit() for ch in tok) for tok in token_set) or token_set & lists.number_words:
        tags.add("numbers")
    if token_set & lists.time:
        tags.add("time")
    if token_set & lists.wh_words:
        tags.add("wh_words")
    if token_set & lists.pronouns:
        tags.add("pronouns")
    if token_set & lists.quantifiers:
        tags.add("quantifiers")
    if token_set & lists.modals:
        tags.add("modals")
    if len(tokens) > 20:
        tags.add("over_20_words")
    return tags


@dataclass(frozen=True)
class TagProfile:
    """Per-tag incidence: percent of contexts and of hypotheses carrying it."""

    context_pct: Mapping[str, float]
    hypothesis_pct: Mapping[str, float]
    n_contexts: int
    n_hypotheses: int

    def as_dict(self) -> dict:
        return {
            "n_contexts": self.n_contexts,
            "n_hypotheses": self.n_hypotheses,
            "context_pct": {t: self.context_pct[t] for t in TAG_NAMES},
            "hypothesis_pct": {t: self.hypothesis_pct[t] for t in TAG_NAMES},
        }


def tag_incidence(
    records: Sequence[DatasetRecord], lists: TagWordLists | None = None
) -> TagProfile:
    """Tag incidence over a dataset; each unique context text counts once."""
    if not records:
        raise ValidationError("cannot profile an empty dataset")
    lists = lists or default_wordlists()
    contexts = sorted({rec.premise for rec in records})
    ctx_counts: Counter[str] = Counter()
    for text in contexts:
        ctx_counts.update(tag_sentence(text, lists))
    hyp_counts: Counter[str] = Counter()
    for rec in records:
        hyp_counts.update(tag_sentence(rec.hypothesis, lists))
    return TagProfile(
        context_pct={t: 100.0 * ctx_counts[t] / len(contexts) for t in TAG_NAMES},
        hypothesis_pct={t: 100.0 * hyp_counts[t] / len(records) for t in TAG_NAMES},
        n_contexts=len(contexts),
        n_hypotheses=len(records),
    )
