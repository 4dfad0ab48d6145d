"""Split construction and the line-delimited interchange format.

Dev and test are built solely from model-wrong verified-correct examples
(fates B1/B2). Test is filled first, preferring exclusive annotators'
examples; dev next, from non-exclusive leftovers. Everything else that is
usable goes to train, except that exclusive annotators' examples never do.

Record files are UTF-8, one JSON object per line, LF terminators, fixed
field order, records sorted by uid - repeated exports are byte-identical.

Field schema (optional fields are omitted when absent):
  uid              str   stable example identifier
  premise          str   context text
  hypothesis       str
  label            str   "e" | "n" | "c"  (gold label)
  reason           str?  writer's explanation, model-wrong examples only
  model_label      str?  adversary's prediction at collection time
  validator_labels [str]? verifier verdicts in recorded order
  genre            str?
  round            int?
  tags             [str]? free-form annotation tags
"""

from __future__ import annotations

import json
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

from .domain import (
    Annotator,
    CollectedExample,
    Context,
    Fate,
    Genre,
    genre_from_token,
    Label,
    LABEL_ORDER,
    label_from_token,
    RoundConfig,
    VERIFIED_FATES,
)
from .errors import IngestError, PhraseParseError, ShortfallError, ValidationError


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"
    DISCARDED = "discarded"


def balance_labels(total: int) -> tuple[int, int, int]:
    """Split a count three ways, remainders to entailment then neutral.

    balance_labels(1000) == (334, 333, 333); counts differ by at most 1.
    """
    if total < 0:
        raise ValidationError("total must be non-negative")
    base, remainder = divmod(total, 3)
    return tuple(base + (1 if i < remainder else 0) for i in range(3))  # type: ignore[return-value]


@dataclass(frozen=True)
class SplitManifest:
    """Counts and provenance for one assignment run."""

    round_number: int
    seed: int
    counts: Mapping[tuple[str, str, str], int]  # (split, label, genre) -> n
    discard_reasons: Mapping[str, int]          # reason -> n

    def split_label_counts(self, split: Split) -> dict[Label, int]:
        out = {lab: 0 for lab in LABEL_ORDER}
        for (split_name, short, _genre), n in self.counts.items():
            if split_name == split.value:
                out[label_from_token(short)] += n
        return out


@dataclass(frozen=True)
class SplitAssignment:
    assignments: Mapping[str, Split]  # example id -> split
    manifest: SplitManifest

    def members(self, split: Split) -> list[str]:
        return sorted(eid for eid, s in self.assignments.items() if s is split)


def _dataset_label(example: CollectedExample) -> Label:
    return example.gold_label if example.gold_label is not None else example.writer_label


def _genre_shares(pool_sizes: Mapping[Genre, int], total: int) -> dict[Genre, int]:
    """Largest-remainder apportionment of `total` across genres."""
    pool_total = sum(pool_sizes.values())
    if pool_total == 0:
        return {}
    quotas = {g: total * n / pool_total for g, n in pool_sizes.items()}
    sizes = {g: int(q) for g, q in quotas.items()}
    leftover = total - sum(sizes.values())
    by_remainder = sorted(
        pool_sizes, key=lambda g: (-(quotas[g] - sizes[g]), g.value)
    )
    for g in by_remainder[:leftover]:
        sizes[g] += 1
    return {g: n for g, n in sizes.items() if n > 0}


def _fill_cells(
    pool: list[CollectedExample],
    size: int,
    contexts: Mapping[str, Context],
    exclusive_ids: frozenset[str],
    rng: random.Random,
    split_name: str,
) -> list[CollectedExample]:
    """Pick `size` examples: per-genre proportional, per-label balanced.

    Within each (genre, label) cell candidates are shuffled with the
    seeded rng, exclusive-annotator examples first so test keeps its
    exclusivity whenever supply allows.
    """
    if size == 0:
        return []
    by_genre: dict[Genre, list[CollectedExample]] = defaultdict(list)
    for ex in pool:
        by_genre[contexts[ex.context_id].genre].append(ex)
    genre_sizes = _genre_shares({g: len(v) for g, v in by_genre.items()}, size)
    if sum(genre_sizes.values()) < size:
        raise ShortfallError([(split_name, "any", size, len(pool))])

    shortfalls: list[tuple[str, str, int, int]] = []
    picked: list[CollectedExample] = []
    for genre in sorted(genre_sizes, key=lambda g: g.value):
        cell_size = genre_sizes[genre]
        label_targets = dict(zip(LABEL_ORDER, balance_labels(cell_size)))
        by_label: dict[Label, list[CollectedExample]] = defaultdict(list)
        for ex in by_genre[genre]:
            by_label[_dataset_label(ex)].append(ex)
        for lab in LABEL_ORDER:
            need = label_targets[lab]
            candidates = sorted(by_label[lab], key=lambda ex: ex.id)
            rng.shuffle(candidates)
            # stable partition: exclusive writers first, shuffled order kept
            candidates.sort(key=lambda ex: ex.writer_id not in exclusive_ids)
            if len(candidates) < need:
                shortfalls.append((genre.value, lab.short, need, len(candidates)))
            else:
                picked.extend(candidates[:need])
    if shortfalls:
        raise ShortfallError(shortfalls)
    return picked


def assign_splits(
    examples: Sequence[CollectedExample],
    config: RoundConfig,
    seed: int,
    contexts: Mapping[str, Context],
    annotators: Mapping[str, Annotator],
) -> SplitAssignment:
    """Place every collected example into exactly one split.

    Routing: fate D is discarded; B1/B2 are dev/test candidates; A and C
    go to train. Exclusive annotators' examples are barred from train -
    those not selected for test are discarded rather than leaked, with the
    reason recorded in the manifest.
    """
    ids = [ex.id for ex in examples]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise ValidationError(f"duplicate example ids: {dupes}")
    for ex in examples:
        if ex.fate is None:
            raise ValidationError(f"example {ex.id} has no fate; resolve verification first")
        if ex.context_id not in contexts:
            raise ValidationError(f"example {ex.id} references unknown context {ex.context_id}")

    exclusive_ids = frozenset(a.id for a in annotators.values() if a.exclusive)
    rng = random.Random(seed)

    assignments: dict[str, Split] = {}
    discard_reasons: Counter[str] = Counter()

    verified = [ex for ex in examples if ex.fate in VERIFIED_FATES]
    test_pool = [ex for ex in verified if ex.writer_id in exclusive_ids]
    if config.test_fallback_nonexclusive:
        test_pool = test_pool + [ex for ex in verified if ex.writer_id not in exclusive_ids]
    test_members = _fill_cells(test_pool, config.test_size, contexts, exclusive_ids, rng, "test")
    for ex in test_members:
        assignments[ex.id] = Split.TEST

    dev_pool = [
        ex for ex in verified
        if ex.id not in assignments and ex.writer_id not in exclusive_ids
    ]
    dev_members = _fill_cells(dev_pool, config.dev_size, contexts, exclusive_ids, rng, "dev")
    for ex in dev_members:
        assignments[ex.id] = Split.DEV

    for ex in examples:
        if ex.id in assignments:
            continue
        if ex.fate is Fate.D:
            assignments[ex.id] = Split.DISCARDED
            discard_reasons["no_verifier_agreement"] += 1
        elif ex.writer_id in exclusive_ids:
            assignments[ex.id] = Split.DISCARDED
            discard_reasons["exclusive_annotator_overflow"] += 1
        else:
            assignments[ex.id] = Split.TRAIN

    counts: Counter[tuple[str, str, str]] = Counter()
    by_id = {ex.id: ex for ex in examples}
    for eid, split in assignments.items():
        ex = by_id[eid]
        genre = contexts[ex.context_id].genre
        counts[(split.value, _dataset_label(ex).short, genre.value)] += 1

    manifest = SplitManifest(
        round_number=config.round_number,
        seed=seed,
        counts=dict(counts),
        discard_reasons=dict(discard_reasons),
    )
    return SplitAssignment(assignments=assignments, manifest=manifest)


# -- interchange records ---------------------------------------------------

_FIELD_ORDER = (
    "uid", "premise", "hypothesis", "label", "reason",
    "model_label", "validator_labels", "genre", "round", "tags",
)


@dataclass(frozen=True)
class DatasetRecord:
    uid: str
    premise: str
    hypothesis: str
    label: Label
    reason: str | None = None
    model_label: Label | None = None
    validator_labels: tuple[Label, ...] | None = None
    genre: Genre | None = None
    round: int | None = None
    tags: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not self.uid:
            raise ValidationError("record uid must be non-empty")

    def to_json(self) -> str:
        payload: dict[str, object] = {
            "uid": self.uid,
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "label": self.label.short,
        }
        if self.reason is not None:
            payload["reason"] = self.reason
        if self.model_label is not None:
            payload["model_label"] = self.model_label.short
        if self.validator_labels is not None:
            payload["validator_labels"] = [v.short for v in self.validator_labels]
        if self.genre is not None:
            payload["genre"] = self.genre.value
        if self.round is not None:
            payload["round"] = self.round
        if self.tags is not None:
            payload["tags"] = list(self.tags)
        return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


_GENRE_ALIASES = {
    "wikipedia": "wiki",
    "story": "fiction",
    "storytelling": "fiction",
    "court": "spoken",
    "debate": "spoken",
    "wikihow": "procedural",
}


def record_from_example(
    example: CollectedExample, context: Context, round_number: int | None = None
) -> DatasetRecord:
    if example.fate is None or example.gold_label is None:
        raise ValidationError(f"example {example.id} has no gold label to export")
    return DatasetRecord(
        uid=example.id,
        premise=context.text,
        hypothesis=example.hypothesis,
        label=example.gold_label,
        reason=example.reason,
        model_label=example.model_prediction.argmax,
        validator_labels=tuple(v.label for v in example.verdicts) or None,
        genre=context.genre,
        round=round_number if round_number is not None else context.round,
    )


def export_records(
    records: Iterable[DatasetRecord], destination: str | Path | TextIO, allow_empty: bool = False
) -> int:
    """Write records as sorted, stable JSONL. Returns the record count."""
    ordered = sorted(records, key=lambda r: r.uid)
    seen: set[str] = set()
    for rec in ordered:
        if rec.uid in seen:
            raise ValidationError(f"duplicate record uid: {rec.uid}")
        seen.add(rec.uid)
    if not ordered and not allow_empty:
        raise ValidationError("refusing to export an empty split (pass allow_empty to override)")
    text = "".join(rec.to_json() + "\n" for rec in ordered)
    if hasattr(destination, "write"):
        destination.write(text)  # type: ignore[union-attr]
    else:
        Path(destination).write_text(text, encoding="utf-8")
    return len(ordered)


def export_split(
    assignment: SplitAssignment,
    split: Split,
    examples: Mapping[str, CollectedExample],
    contexts: Mapping[str, Context],
    destination: str | Path | TextIO,
    allow_empty: bool = False,
) -> int:
    records = []
    for eid in assignment.members(split):
        ex = examples[eid]
        records.append(record_from_example(ex, contexts[ex.context_id]))
    return export_records(records, destination, allow_empty=allow_empty)


def parse_record_line(raw: str, path: str = "<memory>", line: int = 0) -> DatasetRecord:
    try:
        data = json.loads(raw)
    except ValueError as exc:
        raise IngestError(path, line, f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise IngestError(path, line, "record line is not a JSON object")

    def _label(token: object, field_name: str) -> Label:
        if not isinstance(token, str):
            raise IngestError(path, line, f"{field_name} must be a string")
        try:
            return label_from_token(token)
        except PhraseParseError:
            raise IngestError(path, line, f"unknown label token {token!r} in {field_name}") from None

    try:
        uid = data["uid"]
        premise = data.get("premise", data.get("context"))
        hypothesis = data["hypothesis"]
        label_token = data["label"]
    except KeyError as exc:
        raise IngestError(path, line, f"missing required field {exc.args[0]!r}") from None
    if premise is None:
        raise IngestError(path, line, "missing required field 'premise'")

    validators = data.get("validator_labels", data.get("valid"))
    validator_labels = None
    if validators:
        validator_labels = tuple(_label(tok, "validator_labels") for tok in validators)

    # foreign files may carry genre vocabularies of their own; an
    # unrecognized token degrades to None rather than failing the ingest
    genre = None
    genre_token = data.get("genre")
    if genre_token:
        token = str(genre_token).strip().lower()
        token = _GENRE_ALIASES.get(token, token)
        try:
            genre = genre_from_token(token)
        except ValidationError:
            genre = None

    tags_raw = data.get("tags", data.get("tag"))
    tags = None
    if tags_raw:
        if isinstance(tags_raw, str):
            tags = tuple(t.strip() for t in tags_raw.split(",") if t.strip())
        else:
            tags = tuple(str(t) for t in tags_raw)

    model_label = _label(data["model_label"], "model_label") if data.get("model_label") else None
    round_value = data.get("round")
    return DatasetRecord(
        uid=str(uid),
        premise=str(premise),
        hypothesis=str(hypothesis),
        label=_label(label_token, "label"),
        reason=data.get("reason") or None,
        model_label=model_label,
        validator_labels=validator_labels,
        genre=genre,
        round=int(round_value) if round_value is not None else None,
        tags=tags,
    )


def ingest_file(path: str | Path) -> list[DatasetRecord]:
    """Parse one JSONL file; errors cite the file and 1-based line number."""
    records: list[DatasetRecord] = []
    seen: set[str] = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        record = parse_record_line(raw, str(path), lineno)
        if record.uid in seen:
            raise IngestError(str(path), lineno, f"duplicate uid {record.uid!r}")
        seen.add(record.uid)
        records.append(record)
    return records


@dataclass
class Dataset:
    """Ingested records grouped by split name."""

    splits: dict[str, list[DatasetRecord]] = field(default_factory=dict)

    def add(self, split: str, records: list[DatasetRecord]) -> None:
        self.splits.setdefault(split, []).extend(records)

    def counts(self) -> dict[str, int]:
        return {split: len(records) for split, records in self.splits.items()}

    def all_records(self) -> list[DatasetRecord]:
        return [rec for records in self.splits.values() for rec in records]


def _split_from_name(path: Path) -> str:
    stem = path.stem.lower()
    for candidate in ("train", "dev", "test"):
        if candidate in stem:
            return candidate
    return stem


def ingest(paths: Sequence[str | Path]) -> Dataset:
    """Load dataset files; the split of each file is inferred from its name."""
    dataset = Dataset()
    for path in paths:
        p = Path(path)
        dataset.add(_split_from_name(p), ingest_file(p))
    return dataset
