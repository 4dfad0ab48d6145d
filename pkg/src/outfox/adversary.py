"""The model side of the loop.

A uniform classification interface over two kinds of adversary:

* builtin - a smoothed generative classifier over hypothesis word n-grams
  plus two engineered features (context/hypothesis token-overlap bucket,
  negation-word presence). Trains in milliseconds, is fully deterministic,
  and carries a genuine hypothesis-only bias that writers can exploit,
  which is what makes the closed loop meaningful at desk scale.
* remote - an HTTP client for an external inference endpoint, so real
  transformer models can be plugged in as adversaries.

Wire format for remote models (bit-exact):
  request:  POST <endpoint>, body {"context": str, "hypothesis": str}
  response: 200, body {"entailment": float, "neutral": float, "contradiction": float}
A response whose probabilities sum within [0.99, 1.01] is normalized;
anything else is a protocol error.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
import time
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from math import log
from typing import Iterable, Sequence

import httpx

from .domain import Context, Label, LABEL_ORDER, Prediction
from .errors import RemoteProtocolError, TransportError, ValidationError
from .text import tokenize

MODEL_MAGIC = b"outfox-model 1\n"

DEFAULT_NEGATION_WORDS: tuple[str, ...] = (
    "no", "not", "never", "none", "nothing", "nobody", "nowhere",
    "neither", "nor", "without", "cannot", "n't",
)


def _context_text(context: Context | str) -> str:
    return context.text if isinstance(context, Context) else context


def hypothesis_grams(tokens: Sequence[str], order: int) -> list[str]:
    """Unigrams plus (for order 2) adjacent bigrams, as plain strings."""
    grams = list(tokens)
    if order >= 2:
        grams.extend(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))
    return grams


def overlap_bucket(context_tokens: Iterable[str], hyp_tokens: Sequence[str], bins: int) -> int:
    """Equal-width bucket of the fraction of hypothesis tokens found in the context."""
    if not hyp_tokens:
        return 0
    ctx = set(context_tokens)
    ratio = sum(1 for t in hyp_tokens if t in ctx) / len(hyp_tokens)
    return min(int(ratio * bins), bins - 1)


@dataclass(frozen=True)
class FeatureConfig:
    """Knobs of the builtin classifier. All defaults are deliberate choices."""

    ngram_order: int = 2
    smoothing: float = 1.0
    overlap_bins: int = 5
    negation_words: tuple[str, ...] = DEFAULT_NEGATION_WORDS

    def __post_init__(self) -> None:
        if self.ngram_order not in (1, 2):
            raise ValidationError("ngram_order must be 1 or 2")
        if self.smoothing <= 0:
            raise ValidationError("smoothing must be positive")
        if self.overlap_bins < 1:
            raise ValidationError("overlap_bins must be at least 1")


class BuiltinModel:
    """Additive-smoothed generative model over hypothesis grams + two features.

    Scoring rule, per label y (k = smoothing constant, V = global gram
    vocabulary size + 1 unseen slot, n_y = examples of label y, T_y =
    total gram count for label y, N = corpus size, B = overlap bins):

        score(y) = log (n_y + k)/(N + 3k)
                 + sum over hypothesis grams g of log (count(g,y) + k)/(T_y + kV)
                 + log (count(bucket,y) + k)/(n_y + kB)
                 + log (count(neg,y) + k)/(n_y + 2k)

    Probabilities are the softmax of the scores; smoothing keeps every
    probability strictly positive. An untrained model scores all labels
    identically and therefore predicts the uniform distribution.
    """

    def __init__(self, config: FeatureConfig | None = None, seed: int = 0) -> None:
        self.config = config or FeatureConfig()
        self.seed = seed
        self.example_counts: Counter[Label] = Counter()
        self.gram_counts: dict[Label, Counter[str]] = {lab: Counter() for lab in LABEL_ORDER}
        self.gram_totals: Counter[Label] = Counter()
        self.overlap_counts: dict[Label, Counter[int]] = {lab: Counter() for lab in LABEL_ORDER}
        self.negation_counts: dict[Label, Counter[bool]] = {lab: Counter() for lab in LABEL_ORDER}

    # -- training ---------------------------------------------------------

    def observe(self, context: Context | str, hypothesis: str, gold: Label) -> None:
        hyp_tokens = tokenize(hypothesis)
        ctx_tokens = tokenize(_context_text(context))
        self.example_counts[gold] += 1
        grams = hypothesis_grams(hyp_tokens, self.config.ngram_order)
        self.gram_counts[gold].update(grams)
        self.gram_totals[gold] += len(grams)
        self.overlap_counts[gold][overlap_bucket(ctx_tokens, hyp_tokens, self.config.overlap_bins)] += 1
        self.negation_counts[gold][self._has_negation(hyp_tokens)] += 1

    def _has_negation(self, hyp_tokens: Sequence[str]) -> bool:
        neg = set(self.config.negation_words)
        return any(t in neg for t in hyp_tokens)

    @property
    def vocabulary(self) -> set[str]:
        vocab: set[str] = set()
        for counts in self.gram_counts.values():
            vocab.update(counts)
        return vocab

    # -- inference --------------------------------------------------------

    def classify(self, context: Context | str, hypothesis: str) -> Prediction:
        if not hypothesis.strip():
            raise ValidationError("hypothesis must be non-empty")
        hyp_tokens = tokenize(hypothesis)
        ctx_tokens = tokenize(_context_text(context))
        grams = hypothesis_grams(hyp_tokens, self.config.ngram_order)
        bucket = overlap_bucket(ctx_tokens, hyp_tokens, self.config.overlap_bins)
        negated = self._has_negation(hyp_tokens)

        k = self.config.smoothing
        vocab_size = len(self.vocabulary) + 1
        total = sum(self.example_counts.values())
        scores: dict[Label, float] = {}
        for lab in LABEL_ORDER:
            n_y = self.example_counts[lab]
            score = log((n_y + k) / (total + 3 * k))
            denom = self.gram_totals[lab] + k * vocab_size
            for gram in grams:
                score += log((self.gram_counts[lab][gram] + k) / denom)
            score += log(
                (self.overlap_counts[lab][bucket] + k) / (n_y + k * self.config.overlap_bins)
            )
            score += log((self.negation_counts[lab][negated] + k) / (n_y + 2 * k))
            scores[lab] = score

        peak = max(scores.values())
        weights = {lab: math.exp(scores[lab] - peak) for lab in LABEL_ORDER}
        z = sum(weights.values())
        return Prediction({lab: weights[lab] / z for lab in LABEL_ORDER})

    # -- serialization ----------------------------------------------------

    def to_bytes(self) -> bytes:
        """Versioned, self-describing text artifact behind a magic header."""
        payload = {
            "seed": self.seed,
            "config": {
                "ngram_order": self.config.ngram_order,
                "smoothing": self.config.smoothing,
                "overlap_bins": self.config.overlap_bins,
                "negation_words": list(self.config.negation_words),
            },
            "example_counts": {lab.value: self.example_counts[lab] for lab in LABEL_ORDER},
            "gram_counts": {
                lab.value: dict(sorted(self.gram_counts[lab].items())) for lab in LABEL_ORDER
            },
            "gram_totals": {lab.value: self.gram_totals[lab] for lab in LABEL_ORDER},
            "overlap_counts": {
                lab.value: {str(b): n for b, n in sorted(self.overlap_counts[lab].items())}
                for lab in LABEL_ORDER
            },
            "negation_counts": {
                lab.value: {str(flag).lower(): n
                            for flag, n in sorted(self.negation_counts[lab].items())}
                for lab in LABEL_ORDER
            },
        }
        body = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
        return MODEL_MAGIC + body

    @classmethod
    def from_bytes(cls, blob: bytes) -> "BuiltinModel":
        if not blob.startswith(MODEL_MAGIC):
            raise ValidationError("not a model blob: bad magic header")
        payload = json.loads(blob[len(MODEL_MAGIC):].decode("utf-8"))
        config = FeatureConfig(
            ngram_order=payload["config"]["ngram_order"],
            smoothing=payload["config"]["smoothing"],
            overlap_bins=payload["config"]["overlap_bins"],
            negation_words=tuple(payload["config"]["negation_words"]),
        )
        model = cls(config, seed=payload["seed"])
        for lab in LABEL_ORDER:
            key = lab.value
            model.example_counts[lab] = payload["example_counts"][key]
            model.gram_counts[lab] = Counter(payload["gram_counts"][key])
            model.gram_totals[lab] = payload["gram_totals"][key]
            model.overlap_counts[lab] = Counter(
                {int(b): n for b, n in payload["overlap_counts"][key].items()}
            )
            model.negation_counts[lab] = Counter(
                {b == "true": n for b, n in payload["negation_counts"][key].items()}
            )
        return model


class ModelKind(Enum):
    BUILTIN = "builtin"
    REMOTE = "remote"


@dataclass(frozen=True)
class ModelSpec:
    """One adversary: either a local builtin model or a remote endpoint."""

    id: str
    kind: ModelKind
    model: BuiltinModel | None = None
    endpoint: str | None = None
    timeout: float = 10.0

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("model id must be non-empty")
        if self.kind is ModelKind.BUILTIN and self.model is None:
            raise ValidationError(f"builtin model {self.id} needs weights")
        if self.kind is ModelKind.REMOTE and not self.endpoint:
            raise ValidationError(f"remote model {self.id} needs an endpoint")


@dataclass(frozen=True)
class Ensemble:
    """Pool of adversaries; one member is drawn uniformly per attempt."""

    members: tuple[ModelSpec, ...]
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if not self.members:
            raise ValidationError("ensemble must have at least one member")
        ids = [m.id for m in self.members]
        if len(set(ids)) != len(ids):
            raise ValidationError("ensemble member ids must be unique")

    def rng(self) -> random.Random:
        return random.Random(self.rng_seed)


def pick_adversary(ensemble: Ensemble, turn_rng: random.Random) -> ModelSpec:
    """Uniform draw from the ensemble, one per turn."""
    return ensemble.members[turn_rng.randrange(len(ensemble.members))]


def classify(
    model: ModelSpec,
    context: Context | str,
    hypothesis: str,
    client: httpx.Client | None = None,
) -> Prediction:
    """Classify a (context, hypothesis) pair with whichever kind of model."""
    if not hypothesis.strip():
        raise ValidationError("hypothesis must be non-empty")
    if model.kind is ModelKind.BUILTIN:
        assert model.model is not None
        return model.model.classify(context, hypothesis)
    assert model.endpoint is not None
    return remote_classify(model.endpoint, context, hypothesis, model.timeout, client=client)


def train_builtin(
    corpus: Sequence[tuple[Context | str, str, Label]],
    config: FeatureConfig | None = None,
    seed: int = 0,
) -> ModelSpec:
    """Train the builtin classifier on (context, hypothesis, gold) triples.

    Deterministic given the corpus order and seed; retraining on identical
    inputs produces a byte-identical weights blob. A corpus with a single
    label class still trains (degenerate prior) but surfaces a warning.
    """
    if not corpus:
        raise ValidationError("training corpus must be non-empty")
    model = BuiltinModel(config, seed=seed)
    for context, hypothesis, gold in corpus:
        if gold is None:
            raise ValidationError("every training record needs a gold label")
        model.observe(context, hypothesis, gold)
    if len([lab for lab in LABEL_ORDER if model.example_counts[lab]]) == 1:
        warnings.warn("training corpus contains a single label class", stacklevel=2)
    blob_digest = hashlib.sha256(model.to_bytes()).hexdigest()[:12]
    return ModelSpec(id=f"builtin-{blob_digest}", kind=ModelKind.BUILTIN, model=model)


def untrained_spec(config: FeatureConfig | None = None, model_id: str = "builtin-uniform") -> ModelSpec:
    """A builtin model with zero counts: the uninformative uniform prior."""
    return ModelSpec(id=model_id, kind=ModelKind.BUILTIN, model=BuiltinModel(config))


def save_model(spec: ModelSpec, path: str) -> None:
    if spec.kind is not ModelKind.BUILTIN or spec.model is None:
        raise ValidationError("only builtin models can be saved")
    with open(path, "wb") as fh:
        fh.write(spec.model.to_bytes())


def load_model(path: str, model_id: str | None = None) -> ModelSpec:
    with open(path, "rb") as fh:
        blob = fh.read()
    model = BuiltinModel.from_bytes(blob)
    digest = hashlib.sha256(blob).hexdigest()[:12]
    return ModelSpec(id=model_id or f"builtin-{digest}", kind=ModelKind.BUILTIN, model=model)


def remote_classify(
    endpoint: str,
    context: Context | str,
    hypothesis: str,
    timeout: float = 10.0,
    client: httpx.Client | None = None,
) -> Prediction:
    """POST to a remote inference endpoint and parse the documented schema.

    Distinct failure modes: TransportError for timeouts and connection
    failures (carrying the endpoint and elapsed time), RemoteProtocolError
    for non-200 responses, unparseable bodies, missing labels, or
    probability sums outside [0.99, 1.01].
    """
    body = {"context": _context_text(context), "hypothesis": hypothesis}
    started = time.perf_counter()
    owned = client is None
    active = client or httpx.Client()
    try:
        response = active.post(endpoint, json=body, timeout=timeout)
    except httpx.TimeoutException as exc:
        raise TransportError(endpoint, time.perf_counter() - started, f"timeout: {exc}") from exc
    except httpx.TransportError as exc:
        raise TransportError(endpoint, time.perf_counter() - started, str(exc)) from exc
    finally:
        if owned:
            active.close()

    if response.status_code != 200:
        raise RemoteProtocolError(f"{endpoint} answered status {response.status_code}")
    try:
        data = response.json()
    except ValueError as exc:
        raise RemoteProtocolError(f"{endpoint} returned a non-JSON body") from exc
    if not isinstance(data, dict):
        raise RemoteProtocolError(f"{endpoint} returned {type(data).__name__}, expected an object")

    try:
        raw = {lab: float(data[lab.value]) for lab in LABEL_ORDER}
    except (KeyError, TypeError, ValueError) as exc:
        raise RemoteProtocolError(
            f"{endpoint} response must carry numeric fields "
            f"{[lab.value for lab in LABEL_ORDER]}, got keys {sorted(data)}"
        ) from exc
    if any(p < 0 for p in raw.values()):
        raise RemoteProtocolError(f"{endpoint} returned a negative probability")
    total = sum(raw.values())
    if not (0.99 <= total <= 1.01):
        raise RemoteProtocolError(f"{endpoint} probabilities sum to {total:.4f}, outside [0.99, 1.01]")
    return Prediction({lab: p / total for lab, p in raw.items()})
