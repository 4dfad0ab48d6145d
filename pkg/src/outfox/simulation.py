"""Closed-loop campaigns without humans.

Scripted writers attack the adversary through the same platform surface
real annotators would use; simulated verifiers judge fooling examples
against the template's gold label (not the writer's claim), so mislabeled
templates deliberately exercise the overrule and discard paths.

Everything is keyed off derive_seed, so a (config, seed) pair fully
determines the event log, byte for byte.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Protocol, Sequence

from .adversary import Ensemble, FeatureConfig, ModelSpec, train_builtin
from .analytics import RoundStats
from .domain import (
    Annotator,
    canonical_uid,
    Context,
    Genre,
    Label,
    LABEL_ORDER,
    Prediction,
    Role,
    RoundConfig,
)
from .errors import PoolExhaustedError, ValidationError
from .service import derive_seed, Platform
from .store import EventStore


# -- deterministic clock -----------------------------------------------------

class SimClock:
    """Monotonic fake clock; every tick advances by a seeded random pause."""

    def __init__(self, seed: int, low: float = 5.0, high: float = 180.0):
        self.t = 0.0
        self.low = low
        self.high = high
        self._rng = random.Random(seed)

    def tick(self) -> float:
        self.t += self._rng.uniform(self.low, self.high)
        return self.t

    def __call__(self) -> float:
        return self.t


# -- synthetic contexts and corpora -------------------------------------------

_NAMES = ("Arden", "Bellvue", "Corvia", "Dalton", "Elmsworth", "Farrow",
          "Glenhaven", "Harlow", "Ives", "Jarrow", "Kestrel", "Lundby")
_NOUNS = ("bridge", "library", "orchestra", "vineyard", "railway", "harbor",
          "factory", "garden", "tower", "market", "castle", "stadium",
          "museum", "canal", "mill", "observatory")
_VERBS = ("opened", "closed", "expanded", "reopened", "flooded", "hosted",
          "won", "lost", "moved", "burned")
_PLACES = ("the north district", "the old quarter", "the coastal road",
           "the valley", "the east side", "the southern plain")
_ADJECTIVES = ("large", "small", "new", "old", "famous", "quiet", "busy", "remote")
_FILLERS = ("economics", "politics", "weather", "sports", "music", "history",
            "cuisine", "travel", "science", "art", "farming", "shipping")


def make_contexts(
    round_number: int,
    count: int,
    seed: int,
    genres: Sequence[Genre] = (Genre.WIKI,),
) -> list[Context]:
    """Deterministic synthetic passages, cycled across the given genres."""
    rng = random.Random(derive_seed("contexts", str(round_number), str(seed)))
    contexts = []
    for i in range(count):
        name = rng.choice(_NAMES)
        noun = rng.choice(_NOUNS)
        verb = rng.choice(_VERBS)
        year = rng.randint(1820, 2015)
        visitors = rng.randint(120, 9800)
        adj = rng.choice(_ADJECTIVES)
        noun2 = rng.choice(_NOUNS)
        place = rng.choice(_PLACES)
        verb2 = rng.choice(_VERBS)
        text = (
            f"The {noun} of {name} {verb} in {year}. "
            f"It later {verb2} and drew {visitors} visitors to {place}. "
            f"Records also describe a {adj} {noun2} nearby."
        )
        contexts.append(
            Context(
                id=canonical_uid(["ctx", str(round_number), str(seed), str(i)]),
                text=text,
                genre=genres[i % len(genres)],
                source="synthetic",
                round=round_number,
            )
        )
    return contexts


def make_base_corpus(
    contexts: Sequence[Context], seed: int
) -> list[tuple[str, str, Label]]:
    """A small seed corpus, phrased unlike the writer templates on purpose.

    Keeping it tiny and off-distribution leaves the first-round adversary
    genuinely weak, the way a fresh base model would be.
    """
    rng = random.Random(derive_seed("base-corpus", str(seed)))
    corpus: list[tuple[str, str, Label]] = []
    for ctx in contexts:
        tokens = ctx.text.split()
        snippet = " ".join(tokens[: rng.randint(4, 7)]).rstrip(".,")
        filler = rng.choice(_FILLERS)
        corpus.append((ctx.text, f"{snippet}.", Label.ENTAILMENT))
        corpus.append((ctx.text, f"It is false that {snippet.lower()}.", Label.CONTRADICTION))
        corpus.append((ctx.text, f"The topic of {filler} dominates the region.", Label.NEUTRAL))
    return corpus


# -- writer strategies ---------------------------------------------------------

class AttemptOutcome(NamedTuple):
    hypothesis: str
    prediction: Prediction
    fooled: bool


class WriterStrategy(Protocol):
    def attempt(
        self, context_text: str, target: Label,
        history: Sequence[AttemptOutcome], rng: random.Random,
    ) -> tuple[str, Label]:
        """Return (hypothesis, gold label of the generated text)."""
        ...


DEFAULT_TEMPLATE_POOLS: dict[Label, tuple[str, ...]] = {
    Label.ENTAILMENT: (
        "The passage states that {snippet}.",
        "It is mentioned that {snippet}.",
        "According to the passage, {snippet}.",
        "The text confirms that {snippet}.",
        "As described, {snippet}.",
        "There is a mention of {snippet}.",
        "One learns that {snippet}.",
        "Readers are told that {snippet}.",
        "Evidently, {snippet}.",
        "{snippet}, which the text affirms.",
        # negation-bait: entailed statements that trip a negation feature
        "No one disputes that {snippet}.",
        "Nothing in the text contradicts that {snippet}.",
        "It is no exaggeration that {snippet}.",
    ),
    Label.CONTRADICTION: (
        "The passage never says that {snippet}.",
        "It is not true that {snippet}.",
        "Nothing about {snippet} is accurate.",
        "{snippet} did not happen.",
        "There was no question of {snippet}.",
        "At no point did {snippet} occur.",
        "Nobody can claim that {snippet}.",
        "{snippet} is denied outright by the text.",
        "It would be wrong to say {snippet}.",
        "Far from it: {snippet} never took place.",
        # hedge-bait: contradictions phrased with uncertainty markers
        "Reports suggest {snippet} never actually happened.",
        "{snippet} is possibly the opposite of what occurred.",
        "Some might argue {snippet}, yet it did not happen.",
    ),
    Label.NEUTRAL: (
        "Perhaps {snippet} involved {filler}.",
        "{snippet} might be related to {filler}.",
        "It is possible that {snippet} mattered to {filler}.",
        "Some say {snippet} concerned {filler}.",
        "{snippet} could matter for {filler} in {number} ways.",
        "Whether {snippet} helped {filler} is left open.",
        "{snippet} may have influenced {filler}.",
        "Opinions differ on how {snippet} relates to {filler}.",
        "{snippet} is arguably tied to {filler}.",
        "One could imagine {snippet} shaping {filler}.",
        # overlap-bait: high-overlap affirmative phrasing with an unstated claim
        "According to the passage, {snippet} was admired by {filler} experts.",
        "The text confirms that {snippet}, a {filler} landmark event.",
        "It is mentioned that {snippet} after a {filler} dispute.",
    ),
}


def _snippet(context_text: str, rng: random.Random) -> str:
    tokens = context_text.replace(".", " ").split()
    length = rng.randint(3, 6)
    start = rng.randrange(max(1, len(tokens) - length))
    return " ".join(tokens[start:start + length])


@dataclass(frozen=True)
class TemplateRandomStrategy:
    """Draw a template from the target label's pool and fill its slots.

    With mislabel_rate > 0 the draw occasionally comes from a different
    label's pool; the text stays consistent with that pool's gold label
    while the writer still claims the session target.
    """

    pools: Mapping[Label, Sequence[str]] = field(
        default_factory=lambda: dict(DEFAULT_TEMPLATE_POOLS)
    )
    mislabel_rate: float = 0.0

    def attempt(
        self, context_text: str, target: Label,
        history: Sequence[AttemptOutcome], rng: random.Random,
    ) -> tuple[str, Label]:
        gold = target
        if self.mislabel_rate > 0 and rng.random() < self.mislabel_rate:
            others = [lab for lab in LABEL_ORDER if lab is not target]
            gold = others[rng.randrange(len(others))]
        pool = list(self.pools.get(gold, ()))
        if not pool:
            raise ValidationError(f"no templates for label {gold.value}")
        template = pool[rng.randrange(len(pool))]
        hypothesis = template.format(
            snippet=_snippet(context_text, rng),
            filler=rng.choice(_FILLERS),
            number=rng.randint(2, 99),
        )
        return hypothesis, gold


_ANTONYMS = {
    "opened": "closed", "closed": "opened", "won": "lost", "lost": "won",
    "expanded": "shrank", "large": "small", "small": "large", "new": "old",
    "old": "new", "busy": "quiet", "quiet": "busy",
}

_CONTRADICTION_OPS = ("alter_number", "antonym_swap", "insert_negation")
_NEUTRAL_OPS = ("hedge", "extend_unknown")
_ENTAILMENT_OPS = ("restate", "trim")


@dataclass(frozen=True)
class PerturbationAttacker:
    """Hill-climbing writer: mutate the previous attempt using feedback.

    The first attempt applies the first applicable operator to a plain
    restatement of a context span. Later attempts prefer untried operators,
    then the operator whose past application most reduced the model's
    probability on the label it had predicted. Operators are chosen per
    target so the emitted text stays consistent with the claimed label:
    number alteration, antonym swap, and negation insertion all contradict
    the context; hedging keeps it neutral; restating keeps it entailed.
    """

    def attempt(
        self, context_text: str, target: Label,
        history: Sequence[AttemptOutcome], rng: random.Random,
    ) -> tuple[str, Label]:
        claim = self._base_claim(context_text)
        ops = {
            Label.CONTRADICTION: _CONTRADICTION_OPS,
            Label.NEUTRAL: _NEUTRAL_OPS,
            Label.ENTAILMENT: _ENTAILMENT_OPS,
        }[target]
        op = self._choose_op(ops, history, claim)
        hypothesis = self._apply(op, claim, history, rng)
        return hypothesis, target

    @staticmethod
    def _base_claim(context_text: str) -> str:
        """A factual span to perturb, anchored on a number when one exists."""
        tokens = context_text.replace(".", " ").split()
        for i, tok in enumerate(tokens):
            if any(ch.isdigit() for ch in tok):
                return " ".join(tokens[max(0, i - 5):i + 1])
        return " ".join(tokens[:6])

    def _choose_op(
        self, ops: Sequence[str], history: Sequence[AttemptOutcome], claim: str
    ) -> str:
        applicable = [op for op in ops if self._applicable(op, claim)]
        if not applicable:
            applicable = ["insert_negation"] if "insert_negation" in ops else list(ops)
        tried = [self._op_for_try(i, applicable) for i in range(len(history))]
        untried = [op for op in applicable if op not in tried]
        if untried:
            return untried[0]
        # all tried: keep the op that most reduced P(model's first predicted label)
        predicted = history[0].prediction.argmax
        reductions: dict[str, float] = {}
        for i in range(1, len(history)):
            drop = (history[i - 1].prediction.probabilities[predicted]
                    - history[i].prediction.probabilities[predicted])
            reductions[tried[i]] = max(reductions.get(tried[i], float("-inf")), drop)
        return max(applicable, key=lambda op: (reductions.get(op, float("-inf")), -applicable.index(op)))

    def _op_for_try(self, index: int, applicable: Sequence[str]) -> str:
        return applicable[index % len(applicable)]

    @staticmethod
    def _applicable(op: str, claim: str) -> bool:
        if op == "alter_number":
            return bool(re.search(r"\d", claim))
        if op == "antonym_swap":
            return any(tok in _ANTONYMS for tok in claim.lower().split())
        return True

    def _apply(
        self, op: str, claim: str, history: Sequence[AttemptOutcome], rng: random.Random
    ) -> str:
        if op == "alter_number":
            return re.sub(r"\d+", lambda m: str(int(m.group()) + 7), f"The record shows {claim}.", count=1)
        if op == "antonym_swap":
            words = claim.split()
            swapped = [(_ANTONYMS.get(w.lower(), w)) for w in words]
            return f"In fact, {' '.join(swapped)}."
        if op == "insert_negation":
            return f"It is not true that {claim}."
        if op == "hedge":
            return f"Perhaps {claim}, according to some accounts."
        if op == "extend_unknown":
            return f"{claim}, though its role in {rng.choice(_FILLERS)} is unstated."
        if op == "trim":
            return f"{' '.join(claim.split()[:4])}."
        return f"The passage states that {claim}."


# -- stub adversaries ----------------------------------------------------------

def _peaked(label: Label, peak: float = 0.9) -> Prediction:
    rest = (1.0 - peak) / 2
    return Prediction({lab: (peak if lab is label else rest) for lab in LABEL_ORDER})


class OracleStub:
    """Test double that sees the session target via the simulation driver.

    mode "echo" always predicts the target (never fooled); mode "avoid"
    always predicts a different label (fooled on every attempt).
    """

    def __init__(self, mode: str = "echo"):
        if mode not in ("echo", "avoid"):
            raise ValidationError(f"unknown stub mode {mode!r}")
        self.mode = mode
        self.target: Label = Label.ENTAILMENT
        self.id = f"stub-{mode}"

    def classify(self, context: Context | str, hypothesis: str) -> Prediction:
        if self.mode == "echo":
            return _peaked(self.target)
        index = LABEL_ORDER.index(self.target)
        return _peaked(LABEL_ORDER[(index + 1) % 3])


class NegationBlindStub:
    """Hand-built stub that catches numbers and antonyms but ignores negation.

    Altered numbers and swapped antonyms are detected as contradictions;
    anything else is judged purely on token overlap, so a negated
    restatement slips through as an entailment.
    """

    id = "stub-negation-blind"

    def classify(self, context: Context | str, hypothesis: str) -> Prediction:
        ctx_text = context.text if isinstance(context, Context) else context
        ctx_tokens = set(ctx_text.lower().replace(".", " ").split())
        hyp_tokens = hypothesis.lower().replace(".", " ").replace(",", " ").split()
        for tok in hyp_tokens:
            if tok.isdigit() and tok not in ctx_tokens:
                return _peaked(Label.CONTRADICTION)
            if tok in _ANTONYMS and _ANTONYMS[tok] in ctx_tokens and tok not in ctx_tokens:
                return _peaked(Label.CONTRADICTION)
        content = [t for t in hyp_tokens if t not in ("n't", "not", "never", "no")]
        if not content:
            return _peaked(Label.NEUTRAL)
        overlap = sum(1 for t in content if t in ctx_tokens) / len(content)
        return _peaked(Label.ENTAILMENT if overlap >= 0.4 else Label.NEUTRAL)


# -- populations ----------------------------------------------------------------

@dataclass
class SimVerifier:
    """Noisy judge: emits the gold label with probability `accuracy`,
    otherwise one of the other two labels uniformly."""

    annotator: Annotator
    accuracy: float = 1.0

    def verdict(self, gold: Label, rng: random.Random) -> Label:
        if rng.random() < self.accuracy:
            return gold
        others = [lab for lab in LABEL_ORDER if lab is not gold]
        return others[rng.randrange(2)]


@dataclass
class Population:
    writers: list[Annotator]
    verifiers: list[SimVerifier]
    strategy: WriterStrategy
    sessions: int = 10

    def roster(self) -> dict[str, Annotator]:
        roster = {w.id: w for w in self.writers}
        roster.update({v.annotator.id: v.annotator for v in self.verifiers})
        return roster


def make_population(
    n_writers: int,
    n_verifiers: int,
    sessions: int,
    strategy: WriterStrategy,
    exclusive_fraction: float = 0.0,
    verifier_accuracy: float = 1.0,
) -> Population:
    if n_writers < 1 or n_verifiers < 3:
        raise ValidationError("a campaign needs at least 1 writer and 3 verifiers")
    n_exclusive = round(n_writers * exclusive_fraction) if exclusive_fraction > 0 else 0
    writers = [
        Annotator(id=f"w{i:02d}", role=Role.WRITER, exclusive=i < n_exclusive)
        for i in range(n_writers)
    ]
    verifiers = [
        SimVerifier(Annotator(id=f"v{i:02d}", role=Role.VERIFIER), accuracy=verifier_accuracy)
        for i in range(n_verifiers)
    ]
    return Population(writers=writers, verifiers=verifiers, strategy=strategy, sessions=sessions)


# -- round and campaign drivers ---------------------------------------------------

def _normalize_adversary(adversary: object) -> tuple[dict[str, object], tuple[str, ...]]:
    if isinstance(adversary, Ensemble):
        return {m.id: m for m in adversary.members}, tuple(m.id for m in adversary.members)
    model_id = getattr(adversary, "id", "sim-adversary")
    return {model_id: adversary}, (str(model_id),)


def run_round(
    config: RoundConfig,
    adversary: object,
    population: Population,
    contexts: Sequence[Context],
    seed: int,
    store: EventStore | None = None,
) -> Platform:
    """Drive one full round (collect, verify, close, assemble) on a fresh platform.

    Returns the platform; its store holds the complete event log and its
    state everything analytics and assembly consume.
    """
    if not population.writers or len(population.verifiers) < 3:
        raise ValidationError("run_round needs at least 1 writer and 3 verifiers")
    registry, ensemble_ids = _normalize_adversary(adversary)
    config = replace(config, ensemble=ensemble_ids)
    clock = SimClock(derive_seed("clock", str(seed), str(config.round_number)))
    platform = Platform(
        store=store if store is not None else EventStore(None),
        roster=population.roster(),
        registry=registry,
        clock=clock,
    )
    for ctx in contexts:
        platform.add_context(ctx)
    platform.open_round(config)

    gold_by_example: dict[str, Label] = {}
    # seeded draw, not round-robin: a fixed writer rotation would alias
    # against the 3-label target balancing whenever len(writers) % 3 == 0
    writer_rng = random.Random(derive_seed("writer-order", str(seed), str(config.round_number)))
    for i in range(population.sessions):
        writer = population.writers[writer_rng.randrange(len(population.writers))]
        clock.tick()
        try:
            view = platform.open_session(writer.id, config.round_number)
        except PoolExhaustedError:
            break
        session_id = view["session_id"]
        target = Label(view["target"])
        for ref in registry.values():
            if isinstance(ref, OracleStub):
                ref.target = target
        history: list[AttemptOutcome] = []
        while True:
            attempt_rng = random.Random(
                derive_seed("writer", session_id, str(len(history) + 1), str(seed))
            )
            hypothesis, gold = population.strategy.attempt(
                view["context"], target, history, attempt_rng
            )
            clock.tick()
            feedback = platform.submit_attempt(session_id, hypothesis)
            example_id = canonical_uid([session_id, str(feedback["try_index"])])
            gold_by_example[example_id] = gold
            history.append(
                AttemptOutcome(
                    hypothesis,
                    Prediction.from_dict(feedback["probabilities"]),
                    feedback["fooled"],
                )
            )
            if feedback["fooled"]:
                clock.tick()
                platform.submit_reason(
                    session_id,
                    f"The model answered {Prediction.from_dict(feedback['probabilities']).argmax.value} "
                    f"although the hypothesis is {target.value}.",
                )
                break
            if feedback["tries_remaining"] == 0:
                break

    _drain_verification(platform, population, gold_by_example, config.round_number, seed, clock)
    clock.tick()
    platform.close_round(config.round_number)
    platform.assign_round_splits(config.round_number, seed)
    return platform


def _drain_verification(
    platform: Platform,
    population: Population,
    gold_by_example: Mapping[str, Label],
    round_number: int,
    seed: int,
    clock: SimClock,
) -> None:
    while True:
        progressed = False
        for verifier in population.verifiers:
            case = platform.next_case(verifier.annotator.id, round_number)
            if case is None:
                continue
            gold = gold_by_example[case["case_id"]]
            rng = random.Random(
                derive_seed("verdict", case["case_id"], verifier.annotator.id, str(seed))
            )
            clock.tick()
            platform.record_verdict(case["case_id"], verifier.annotator.id, verifier.verdict(gold, rng))
            progressed = True
        if not progressed:
            break


@dataclass
class RoundOutcome:
    round_number: int
    stats: RoundStats
    platform: Platform
    adversary_id: str
    training_pool_size: int


@dataclass
class CampaignResult:
    rounds: list[RoundOutcome]

    @property
    def stats(self) -> list[RoundStats]:
        return [r.stats for r in self.rounds]


def run_campaign(
    n_rounds: int,
    base_corpus: Sequence[tuple[str, str, Label]],
    population: Population,
    seed: int,
    dev_size: int = 0,
    test_size: int = 0,
    contexts_per_round: int = 40,
    genres: Sequence[Genre] = (Genre.WIKI,),
    exclusive_fraction: float = 0.0,
    feature_config: FeatureConfig | None = None,
) -> CampaignResult:
    """Run the never-ending loop at desk scale.

    After each round the builtin adversary is retrained on the base corpus
    plus every training-pool example collected so far, and the refreshed
    model becomes the next round's adversary.
    """
    if n_rounds < 2:
        raise ValidationError("a campaign needs at least 2 rounds")
    adversary = train_builtin(
        list(base_corpus), config=feature_config, seed=derive_seed("train", str(seed), "0")
    )
    pool: list[tuple[str, str, Label]] = list(base_corpus)
    outcomes: list[RoundOutcome] = []
    for round_number in range(1, n_rounds + 1):
        config = RoundConfig.for_round(
            round_number,
            genres={g: 1.0 for g in genres},
            dev_size=dev_size,
            test_size=test_size,
            exclusive_fraction=exclusive_fraction,
            rng_seed=derive_seed("round", str(seed), str(round_number)) % (2 ** 31),
        )
        contexts = make_contexts(round_number, contexts_per_round, seed, genres)
        platform = run_round(config, adversary, population, contexts, seed)
        stats = platform.round_stats(round_number)
        outcomes.append(
            RoundOutcome(
                round_number=round_number,
                stats=stats,
                platform=platform,
                adversary_id=adversary.id if isinstance(adversary, ModelSpec) else "stub",
                training_pool_size=len(pool),
            )
        )
        pool.extend(_training_examples(platform, round_number))
        adversary = train_builtin(
            pool, config=feature_config, seed=derive_seed("train", str(seed), str(round_number))
        )
    return CampaignResult(rounds=outcomes)


def _training_examples(platform: Platform, round_number: int) -> list[tuple[str, str, Label]]:
    from .assembly import Split

    round_state = platform.rounds[round_number]
    assert round_state.assignment is not None
    triples = []
    for eid in round_state.assignment.members(Split.TRAIN):
        example = round_state.examples[eid]
        context = platform.contexts[example.context_id]
        assert example.gold_label is not None
        triples.append((context.text, example.hypothesis, example.gold_label))
    return triples


# -- campaign spec files -----------------------------------------------------

@dataclass(frozen=True)
class CampaignSpec:
    """Everything a scripted campaign needs, loadable from one JSON file."""

    n_rounds: int = 3
    sessions_per_round: int = 40
    n_writers: int = 4
    n_verifiers: int = 4
    exclusive_fraction: float = 0.25
    verifier_accuracy: float = 0.95
    mislabel_rate: float = 0.0
    strategy: str = "template_random"
    dev_size: int = 0
    test_size: int = 0
    contexts_per_round: int = 40
    base_corpus_contexts: int = 4
    genres: tuple[Genre, ...] = (Genre.WIKI,)
    seed: int = 0


def parse_campaign_spec(data: Mapping[str, object]) -> CampaignSpec:
    from .domain import genre_from_token

    known = {f for f in CampaignSpec.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise ValidationError(f"unknown campaign spec fields: {sorted(unknown)}")
    kwargs: dict = dict(data)
    if "genres" in kwargs:
        kwargs["genres"] = tuple(genre_from_token(str(g)) for g in kwargs["genres"])
    spec = CampaignSpec(**kwargs)
    if spec.strategy not in ("template_random", "perturbation_attacker"):
        raise ValidationError(f"unknown strategy {spec.strategy!r}")
    if spec.n_rounds < 2:
        raise ValidationError("n_rounds must be at least 2")
    return spec


def run_campaign_from_spec(spec: CampaignSpec) -> CampaignResult:
    strategy: WriterStrategy
    if spec.strategy == "perturbation_attacker":
        strategy = PerturbationAttacker()
    else:
        strategy = TemplateRandomStrategy(mislabel_rate=spec.mislabel_rate)
    population = make_population(
        n_writers=spec.n_writers,
        n_verifiers=spec.n_verifiers,
        sessions=spec.sessions_per_round,
        strategy=strategy,
        exclusive_fraction=spec.exclusive_fraction,
        verifier_accuracy=spec.verifier_accuracy,
    )
    base_seed = derive_seed("base-contexts", str(spec.seed))
    base_contexts = make_contexts(
        1, max(2, spec.base_corpus_contexts), base_seed, spec.genres
    )
    base_corpus = make_base_corpus(base_contexts, spec.seed)
    return run_campaign(
        n_rounds=spec.n_rounds,
        base_corpus=base_corpus,
        population=population,
        seed=spec.seed,
        dev_size=spec.dev_size,
        test_size=spec.test_size,
        contexts_per_round=spec.contexts_per_round,
        genres=spec.genres,
        exclusive_fraction=spec.exclusive_fraction,
    )
