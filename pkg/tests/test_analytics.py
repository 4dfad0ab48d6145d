from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from outfox.analytics import (
    agreement_report,
    canonical_stats_json,
    compute_round_stats,
    default_wordlists,
    fleiss_kappa,
    InferenceTag,
    kappa_from_records,
    label_distribution,
    load_wordlists,
    RoundLog,
    tag_incidence,
    tag_sentence,
    TAG_NAMES,
)
from outfox.assembly import DatasetRecord
from outfox.collection import SessionState, WritingSession
from outfox.domain import Fate, HypothesisAttempt, Label, LABEL_ORDER
from outfox.errors import ValidationError

from util import make_context, make_example, peaked, wrong_for

E, N, C = Label.ENTAILMENT, Label.NEUTRAL, Label.CONTRADICTION


def _session(session_id: str, n_attempts: int, fooled_last: bool, target: Label = E):
    attempts = []
    for i in range(1, n_attempts + 1):
        fooled = fooled_last and i == n_attempts
        attempts.append(
            HypothesisAttempt(
                session_id=session_id,
                try_index=i,
                hypothesis=f"hypothesis {i} of {session_id}",
                prediction=wrong_for(target) if fooled else peaked(target),
                fooled=fooled,
                elapsed_seconds=10.0,
                timestamp=10.0 * i,
            )
        )
    state = SessionState.CLOSED_FOOLED if fooled_last else SessionState.CLOSED_EXHAUSTED
    return WritingSession(
        session_id=session_id, writer_id="w1", context_id="ctx-1", target=target,
        round_number=1, try_limit=max(5, n_attempts), opened_at=0.0,
        attempts=attempts, state=state,
    )


class TestComputeRoundStats:
    def test_synthetic_log_rates(self):
        # 20 attempts, 5 model-wrong; of the wrong ones 3 become B1/B2,
        # 1 is overruled (C), 1 discarded (D): unverified 25%, verified 15%
        sessions, examples = [], []
        for i in range(5):
            sessions.append(_session(f"s{i}", 3, fooled_last=True))
        sessions.append(_session("s5", 5, fooled_last=False))
        fates = [Fate.B1, Fate.B1, Fate.B2, Fate.C, Fate.D]
        for i, fate in enumerate(fates):
            gold = None if fate is Fate.D else (N if fate is Fate.C else E)
            verdicts = {
                Fate.B1: (E, E), Fate.B2: (E, C, E), Fate.C: (N, N), Fate.D: (N, C, E),
            }[fate]
            examples.append(
                make_example(f"f{i}", writer_label=E, fate=fate, gold=gold,
                             verdict_labels=verdicts, tries=3, seconds=30.0)
            )
        for i in range(5):  # fate-A examples from the exhausted session
            examples.append(make_example(f"a{i}", writer_label=E, fate=Fate.A))
        log = RoundLog(1, sessions, examples, {"ctx-1": make_context("ctx-1")})
        stats = compute_round_stats(log)
        assert stats.total_attempts == 20
        assert stats.unverified_error_rate == pytest.approx(0.25)
        assert stats.verified_error_rate == pytest.approx(0.15)
        assert stats.fate_counts == {"A": 5, "B1": 2, "B2": 1, "C": 1, "D": 1}

    def test_tries_and_seconds_over_verified_only(self):
        sessions = [_session(f"s{i}", 1, fooled_last=True) for i in range(3)]
        examples = [
            make_example("e1", fate=Fate.B1, verdict_labels=(E, E), tries=2, seconds=100.0),
            make_example("e2", fate=Fate.B1, verdict_labels=(E, E), tries=4, seconds=200.0),
            make_example("e3", fate=Fate.B2, verdict_labels=(E, C, E), tries=9, seconds=600.0),
            make_example("e4", writer_label=E, fate=Fate.C, gold=N, verdict_labels=(N, N),
                         tries=50, seconds=9999.0),  # C examples are excluded
        ]
        log = RoundLog(1, sessions, examples, {"ctx-1": make_context("ctx-1")})
        stats = compute_round_stats(log)
        assert stats.tries_mean == pytest.approx(5.0)
        assert stats.tries_median == pytest.approx(4.0)
        assert stats.seconds_mean == pytest.approx(300.0)
        assert stats.seconds_median == pytest.approx(200.0)
        assert stats.tries_histogram == {2: 1, 4: 1, 9: 1}

    def test_no_model_wrong_attempts(self):
        sessions = [_session("s0", 5, fooled_last=False)]
        examples = [make_example(f"a{i}", fate=Fate.A) for i in range(5)]
        log = RoundLog(1, sessions, examples, {"ctx-1": make_context("ctx-1")})
        stats = compute_round_stats(log)
        assert stats.unverified_error_rate == 0.0
        assert stats.verified_error_rate == 0.0
        assert stats.tries_mean is None
        assert stats.seconds_median is None

    def test_open_sessions_rejected(self):
        session = _session("s0", 2, fooled_last=False)
        session.state = SessionState.OPEN
        log = RoundLog(1, [session], [], {})
        with pytest.raises(ValidationError) as exc:
            compute_round_stats(log)
        assert "s0" in str(exc.value)

    def test_pending_examples_rejected_unless_allowed(self):
        sessions = [_session("s0", 1, fooled_last=True)]
        pending = make_example("p0")
        log = RoundLog(1, sessions, [pending], {"ctx-1": make_context("ctx-1")})
        with pytest.raises(ValidationError) as exc:
            compute_round_stats(log)
        assert "p0" in str(exc.value)
        stats = compute_round_stats(log, allow_pending=True)
        assert stats.n_collected == 0

    def test_verified_never_exceeds_unverified(self):
        rng = random.Random(5)
        for _ in range(25):
            sessions, examples = [], []
            for i in range(rng.randint(1, 8)):
                fooled = rng.random() < 0.5
                sessions.append(_session(f"s{i}", rng.randint(1, 5), fooled_last=fooled))
                if fooled:
                    fate = rng.choice([Fate.B1, Fate.B2, Fate.C, Fate.D])
                    gold = None if fate is Fate.D else (N if fate is Fate.C else E)
                    verdicts = {
                        Fate.B1: (E, E), Fate.B2: (E, C, E),
                        Fate.C: (N, N), Fate.D: (N, C, E),
                    }[fate]
                    examples.append(
                        make_example(f"x{i}", writer_label=E, fate=fate, gold=gold,
                                     verdict_labels=verdicts)
                    )
            log = RoundLog(1, sessions, examples, {"ctx-1": make_context("ctx-1")})
            stats = compute_round_stats(log)
            assert stats.verified_error_rate <= stats.unverified_error_rate + 1e-12

    def test_canonical_json_stable(self):
        sessions = [_session("s0", 2, fooled_last=False)]
        examples = [make_example("a0", fate=Fate.A), make_example("a1", fate=Fate.A)]
        log = RoundLog(1, sessions, examples, {"ctx-1": make_context("ctx-1")})
        assert canonical_stats_json(compute_round_stats(log)) == canonical_stats_json(
            compute_round_stats(log)
        )


def alternate_fleiss(ratings):
    """Second, independently structured implementation: matrix form."""
    categories = sorted({r for item in ratings for r in item}, key=str)
    n = len(ratings[0])
    n_items = len(ratings)
    table = [[item.count(cat) for cat in categories] for item in ratings]
    p_j = [sum(row[j] for row in table) / (n_items * n) for j in range(len(categories))]
    p_i = [(sum(c * c for c in row) - n) / (n * (n - 1)) for row in table]
    p_bar = sum(p_i) / n_items
    pe_bar = sum(p * p for p in p_j)
    if pe_bar == 1.0:
        return 1.0
    return (p_bar - pe_bar) / (1.0 - pe_bar)


class TestFleissKappa:
    def test_perfect_agreement(self):
        assert fleiss_kappa([[E, E, E], [N, N, N]]) == 1.0

    def test_hand_computed_zero(self):
        # P-bar = 0.5, Pe-bar = 0.5 -> kappa exactly 0
        assert fleiss_kappa([[E, E, E], [E, N, C]]) == pytest.approx(0.0, abs=1e-12)

    def test_single_item_identical(self):
        assert fleiss_kappa([[C, C]]) == 1.0

    def test_ragged_rejected(self):
        with pytest.raises(ValidationError):
            fleiss_kappa([[E, E], [E, N, C]])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            fleiss_kappa([])

    def test_single_rater_rejected(self):
        with pytest.raises(ValidationError):
            fleiss_kappa([[E]])

    def test_permutation_invariance(self):
        rng = random.Random(11)
        items = [[rng.choice(LABEL_ORDER) for _ in range(3)] for _ in range(40)]
        base = fleiss_kappa(items)
        shuffled_items = list(items)
        rng.shuffle(shuffled_items)
        assert fleiss_kappa(shuffled_items) == pytest.approx(base, abs=1e-12)
        within = [list(reversed(item)) for item in items]
        assert fleiss_kappa(within) == pytest.approx(base, abs=1e-12)

    def test_matches_independent_implementation_on_random_fixtures(self):
        rng = random.Random(99)
        for _ in range(1000):
            n_raters = rng.randint(2, 5)
            items = [
                [rng.choice(LABEL_ORDER) for _ in range(n_raters)]
                for _ in range(rng.randint(1, 30))
            ]
            assert fleiss_kappa(items) == pytest.approx(alternate_fleiss(items), abs=1e-9)


class TestAgreement:
    def test_all_agree(self):
        examples = [make_example("e1", writer_label=E, fate=Fate.B1, verdict_labels=(E, E))]
        from outfox.analytics import verifier_agreement

        assert verifier_agreement(examples) == 1.0

    def test_two_of_three(self):
        from outfox.analytics import verifier_agreement

        examples = [
            make_example("e1", writer_label=E, fate=Fate.B2, verdict_labels=(E, C, E))
        ]
        assert verifier_agreement(examples) == pytest.approx(2 / 3)

    def test_no_verdicts_rejected(self):
        from outfox.analytics import verifier_agreement

        with pytest.raises(ValidationError):
            verifier_agreement([make_example("e1", fate=Fate.A)])

    def test_agreement_report(self):
        examples = [
            make_example("e1", writer_label=E, fate=Fate.B1, verdict_labels=(E, E)),
            make_example("e2", writer_label=N, fate=Fate.B1, verdict_labels=(N, N)),
        ]
        report = agreement_report(examples)
        assert report.kappa == 1.0
        assert report.n_items == 2
        assert report.n_raters == 3
        assert report.verifier_author_agreement == 1.0

    def test_kappa_from_records(self):
        records = [
            DatasetRecord(uid="1", premise="p", hypothesis="h", label=E,
                          validator_labels=(E, E)),
            DatasetRecord(uid="2", premise="p", hypothesis="h", label=N,
                          validator_labels=(N, N)),
        ]
        assert kappa_from_records(records) == 1.0


class TestLabelDistribution:
    def test_counts(self):
        records = [
            DatasetRecord(uid=str(i), premise="p", hypothesis="h", label=lab)
            for i, lab in enumerate([E, E, N, C, C, C])
        ]
        assert label_distribution(records) == {E: 2, N: 1, C: 3}

    def test_empty_is_zeroes(self):
        assert label_distribution([]) == {E: 0, N: 0, C: 0}


class TestTagSentence:
    def test_negation_fixture(self):
        # "he" is on the shipped pronoun list, so the oracle yields both tags
        assert tag_sentence("He never left") == {"negation", "pronouns"}

    def test_melee_hypothesis_contains_and(self):
        tags = tag_sentence("Melee weapons are good for ranged and hand-to-hand combat.")
        assert "and" in tags
        assert tags == {"and"}

    def test_over_20_words(self):
        sentence = " ".join(f"word{i}" for i in range(25))
        assert "over_20_words" in tag_sentence(sentence)
        exactly_20 = " ".join(f"word{i}" for i in range(20))
        assert "over_20_words" not in tag_sentence(exactly_20)

    def test_numbers_by_digit_and_word(self):
        assert "numbers" in tag_sentence("The year was 1901")
        assert "numbers" in tag_sentence("He bought twelve apples")

    def test_contraction_negation(self):
        assert "negation" in tag_sentence("It doesn't matter")

    def test_case_insensitive(self):
        assert tag_sentence("NEVER AGAIN") == tag_sentence("never again")

    def test_or_and_wh(self):
        tags = tag_sentence("Who decided whether it was this or that")
        assert {"wh_words", "or"} <= tags

    def test_modals_and_quantifiers(self):
        tags = tag_sentence("Every visitor must leave")
        assert {"quantifiers", "modals"} <= tags

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            tag_sentence("   ")

    def test_known_vocabulary_only(self):
        assert set(TAG_NAMES) == {
            "negation", "and", "or", "numbers", "time",
            "wh_words", "pronouns", "quantifiers", "modals", "over_20_words",
        }

    def test_wordlist_override(self, tmp_path):
        path = tmp_path / "negation.txt"
        path.write_text("frobnicate\n")
        lists = load_wordlists({"negation": path})
        assert "negation" in tag_sentence("we frobnicate daily", lists)
        assert "negation" not in tag_sentence("never again", lists)


class TestTagIncidence:
    def test_hypothesis_percentage(self):
        records = [
            DatasetRecord(uid="1", premise="ctx one", hypothesis="he never left", label=E),
            DatasetRecord(uid="2", premise="ctx two", hypothesis="plain words here", label=E),
            DatasetRecord(uid="3", premise="ctx three", hypothesis="more plain words", label=E),
            DatasetRecord(uid="4", premise="ctx four", hypothesis="plainest of words", label=E),
        ]
        profile = tag_incidence(records)
        assert profile.hypothesis_pct["negation"] == pytest.approx(25.0)

    def test_contexts_counted_once(self):
        long_ctx = " ".join(f"tok{i}" for i in range(25))
        records = [
            DatasetRecord(uid=str(i), premise=long_ctx, hypothesis="short words", label=E)
            for i in range(10)
        ]
        profile = tag_incidence(records)
        assert profile.n_contexts == 1
        assert profile.context_pct["over_20_words"] == pytest.approx(100.0)

    def test_matches_brute_force_mean_of_indicators(self):
        rng = random.Random(3)
        vocab = ["never", "and", "or", "he", "we", "1901", "every", "might", "when", "plain"]
        records = [
            DatasetRecord(
                uid=str(i),
                premise=" ".join(rng.choices(vocab, k=rng.randint(3, 30))),
                hypothesis=" ".join(rng.choices(vocab, k=rng.randint(3, 30))),
                label=E,
            )
            for i in range(30)
        ]
        profile = tag_incidence(records)
        lists = default_wordlists()
        contexts = sorted({r.premise for r in records})
        for tag in TAG_NAMES:
            expected_h = 100.0 * sum(
                1 for r in records if tag in tag_sentence(r.hypothesis, lists)
            ) / len(records)
            expected_c = 100.0 * sum(
                1 for ctx in contexts if tag in tag_sentence(ctx, lists)
            ) / len(contexts)
            assert profile.hypothesis_pct[tag] == pytest.approx(expected_h)
            assert profile.context_pct[tag] == pytest.approx(expected_c)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            tag_incidence([])


def test_inference_tag_vocabulary_closed():
    assert {t.value for t in InferenceTag} == {
        "numerical_quantitative", "reference_names", "standard", "lexical",
        "tricky", "reasoning_facts", "quality",
    }
