import json
import math
import random

import pytest

from dubkit.alignment import AlignedSentence
from dubkit.confidence import (
    CLASS_CONFIDENT,
    CLASS_FLAGGED,
    COMBINATION_COSINE_ONLY,
    ConfidenceScore,
    DEFAULT_POLICIES,
    LabeledPair,
    LengthMismatch,
    MissingScore,
    ThresholdPolicy,
    calibrate,
    calibration_report,
    calibration_report_json,
    classify,
    confusion_report,
    default_policy,
    f1_optimal_threshold,
    fdr,
    load_labeled_pairs,
    render_calibration_table,
    round_trip_score,
)
from dubkit.providers.base import ProviderConfig
from dubkit.providers.similarity import TokenOverlapScorer
from dubkit.providers.translation import IdentityTranslator, MappingTranslator


def _aligned(original, translated, index=0):
    return AlignedSentence(
        index=index,
        original_text=original,
        translated_text=translated,
        slot_start_ms=0,
        slot_end_ms=1000,
    )


def _provider(cls, name, **options):
    config = ProviderConfig(kind="t", name=name, rate_limit=100000.0, options=options)
    return cls(config, sleep=lambda d: None)


def _score(f1, cosine=None):
    return ConfidenceScore(sentence_index=0, f1_score=f1, back_translated_text="b", cosine_score=cosine)


# -- scoring ----------------------------------------------------------------


def test_round_trip_scores_translation_not_original():
    # The back-translator only knows the translated text; mapping the
    # original would be a contract violation and must have no effect.
    back = _provider(
        MappingTranslator, "mapping",
        map={"Buenos días.": "Good morning.", "Good morning.": "WRONG"},
    )
    scorer = _provider(TokenOverlapScorer, "token-overlap")
    s = _aligned("Good morning.", "Buenos días.")
    c = round_trip_score(s, "en", "es", back, scorer)
    assert c.back_translated_text == "Good morning."
    assert c.f1_score == 1.0
    assert c.cosine_score is None


def test_round_trip_with_cosine_scorer():
    back = _provider(IdentityTranslator, "identity")
    scorer = _provider(TokenOverlapScorer, "token-overlap")
    s = _aligned("one two three", "one two three")
    c = round_trip_score(s, "en", "es", back, scorer, scorer)
    assert c.f1_score == 1.0
    assert c.cosine_score == 1.0


def test_round_trip_rejects_empty_translation():
    back = _provider(IdentityTranslator, "identity")
    scorer = _provider(TokenOverlapScorer, "token-overlap")
    with pytest.raises(ValueError):
        round_trip_score(_aligned("x", "  "), "en", "es", back, scorer)


def test_confidence_score_ranges():
    with pytest.raises(ValueError):
        _score(1.1)
    with pytest.raises(ValueError):
        _score(0.5, cosine=-1.5)
    assert _score(0.0, cosine=-1.0).f1_score == 0.0


# -- classification ------------------------------------------------------------


def test_default_policies_ship_reading_and_math():
    assert DEFAULT_POLICIES["reading"].f1_threshold == 0.955
    assert DEFAULT_POLICIES["reading"].cosine_threshold == 0.890
    assert DEFAULT_POLICIES["math"].f1_threshold == 0.959
    assert DEFAULT_POLICIES["math"].cosine_threshold == 0.931
    with pytest.raises(KeyError):
        default_policy("other")


def test_classify_boundary_is_confident():
    reading = default_policy("reading")
    math_ = default_policy("math")
    assert classify(_score(0.955), reading) == CLASS_CONFIDENT
    assert classify(_score(0.959), math_) == CLASS_CONFIDENT
    assert classify(_score(0.958), math_) == CLASS_FLAGGED
    assert classify(_score(math.nextafter(0.955, 0)), reading) == CLASS_FLAGGED


def test_classify_cosine_only_policy():
    policy = ThresholdPolicy("custom", cosine_threshold=0.9, combination=COMBINATION_COSINE_ONLY)
    assert classify(_score(0.0, cosine=0.9), policy) == CLASS_CONFIDENT
    assert classify(_score(1.0, cosine=0.89), policy) == CLASS_FLAGGED
    with pytest.raises(MissingScore):
        classify(_score(1.0), policy)


def test_policy_requires_a_threshold():
    with pytest.raises(ValueError):
        ThresholdPolicy("empty")
    with pytest.raises(ValueError):
        ThresholdPolicy("weird", f1_threshold=0.9, combination="both")


# -- confusion and fdr ---------------------------------------------------------


def test_confusion_report_counts():
    predictions = [True, True, False, False, True]
    truth = [True, False, True, False, True]
    report = confusion_report(predictions, truth)
    assert report["tp_pct"] == pytest.approx(40.0)
    assert report["fp_pct"] == pytest.approx(20.0)
    assert report["fn_pct"] == pytest.approx(20.0)
    assert report["tn_pct"] == pytest.approx(20.0)


def test_confusion_report_validates():
    with pytest.raises(LengthMismatch):
        confusion_report([True], [True, False])
    with pytest.raises(LengthMismatch):
        confusion_report([], [])


def test_confusion_percentages_sum_to_100():
    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(1, 40)
        predictions = [rng.random() < 0.5 for _ in range(n)]
        truth = [rng.random() < 0.5 for _ in range(n)]
        r = confusion_report(predictions, truth)
        assert r["tp_pct"] + r["fp_pct"] + r["fn_pct"] + r["tn_pct"] == pytest.approx(100.0)


def test_fdr_identities():
    assert fdr(71.2, 2.0) == pytest.approx(100 * 2.0 / 73.2)
    assert fdr(51.1, 2.0) == pytest.approx(100 * 2.0 / 53.1)
    assert fdr(0.0, 0.0) == 0.0
    assert fdr(50.0, 0.0) == 0.0


# -- calibration -----------------------------------------------------------------


def _brute_force_calibrate(labeled, target_fp_pct):
    """Independent oracle: ascending exhaustive sweep of every candidate."""
    scores = sorted({p.score for p in labeled})
    candidates = scores + [math.nextafter(scores[-1], math.inf)]
    n = len(labeled)
    for threshold in candidates:
        fp = sum(1 for p in labeled if p.score >= threshold and not p.is_match)
        if 100.0 * fp / n <= target_fp_pct:
            return threshold
    raise AssertionError("ceiling candidate is always feasible")


def _brute_force_f1(labeled):
    scores = sorted({p.score for p in labeled})
    candidates = scores + [math.nextafter(scores[-1], math.inf)]
    best = None
    for threshold in candidates:
        tp = sum(1 for p in labeled if p.score >= threshold and p.is_match)
        fp = sum(1 for p in labeled if p.score >= threshold and not p.is_match)
        fn = sum(1 for p in labeled if p.score < threshold and p.is_match)
        f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
        if best is None or f1 >= best[1]:  # ties resolve to the higher threshold
            best = (threshold, f1)
    return best


def _random_labeled(rng, n=None):
    n = n or rng.randint(2, 60)
    out = []
    for _ in range(n):
        is_match = rng.random() < 0.6
        base = 0.8 if is_match else 0.4
        score = min(1.0, max(0.0, rng.gauss(base, 0.2)))
        out.append(LabeledPair(score=round(score, 3), is_match=is_match))
    if not any(p.is_match for p in out):
        out[0] = LabeledPair(score=out[0].score, is_match=True)
    return out


def test_calibrate_worked_example():
    labeled = [LabeledPair(0.99, True), LabeledPair(0.98, True), LabeledPair(0.50, False)]
    result = calibrate(labeled, 0.0)
    assert result.threshold == 0.98
    assert result.fp_pct == 0.0
    assert result.tp_pct == pytest.approx(200 / 3)


def test_calibrate_when_no_observed_score_is_feasible():
    labeled = [LabeledPair(0.9, False), LabeledPair(0.8, True)]
    result = calibrate(labeled, 0.0)
    assert result.threshold > 0.9
    assert result.fp_pct == 0.0
    assert result.tp_pct == 0.0


def test_calibrate_matches_brute_force():
    rng = random.Random(41)
    for _ in range(150):
        labeled = _random_labeled(rng)
        target = rng.choice([0.0, 1.0, 2.0, 5.0, 10.0])
        result = calibrate(labeled, target)
        assert result.threshold == _brute_force_calibrate(labeled, target)
        assert result.fp_pct <= target + 1e-9


def test_f1_optimal_matches_brute_force():
    rng = random.Random(42)
    for _ in range(150):
        labeled = _random_labeled(rng)
        threshold, value = f1_optimal_threshold(labeled)
        oracle_threshold, oracle_value = _brute_force_f1(labeled)
        assert threshold == oracle_threshold
        assert value == pytest.approx(oracle_value)


def test_f1_optimal_tie_goes_to_higher_threshold():
    labeled = [LabeledPair(0.9, True), LabeledPair(0.9, False)]
    threshold, value = f1_optimal_threshold(labeled)
    assert threshold == 0.9
    assert value == pytest.approx(2 / 3)


def test_f1_optimal_needs_a_true_match():
    with pytest.raises(ValueError):
        f1_optimal_threshold([LabeledPair(0.5, False)])


def test_calibration_monotone_in_target():
    rng = random.Random(43)
    for _ in range(60):
        labeled = _random_labeled(rng)
        results = calibration_report(labeled, [1.0, 2.0, 3.0])
        thresholds = [r.threshold for r in results]
        tps = [r.tp_pct for r in results]
        assert thresholds == sorted(thresholds, reverse=True)
        assert tps == sorted(tps)


def test_calibration_result_fdr_consistent():
    labeled = [
        LabeledPair(0.99, True), LabeledPair(0.97, True), LabeledPair(0.96, False),
        LabeledPair(0.80, True), LabeledPair(0.40, False),
    ]
    result = calibrate(labeled, 20.0)
    assert result.fdr_pct == pytest.approx(fdr(result.tp_pct, result.fp_pct))


def test_labeled_pairs_file_round_trip(tmp_path):
    path = tmp_path / "labeled.json"
    path.write_text(json.dumps([
        {"score": 0.9, "is_match": True},
        {"score": 0.2, "is_match": False},
    ]), "utf-8")
    labeled = load_labeled_pairs(path)
    assert labeled == [LabeledPair(0.9, True), LabeledPair(0.2, False)]


def test_calibration_table_and_json_render():
    labeled = _random_labeled(random.Random(44), n=30)
    results = calibration_report(labeled, [1.0, 2.0, 3.0])
    table = render_calibration_table(results)
    lines = table.splitlines()
    assert lines[0].split() == ["Threshold", "TP%", "FP%", "FN%", "FDR%"]
    assert len(lines) == 2 + 3  # header, rule, one row per target
    doc = json.loads(calibration_report_json(results, [1.0, 2.0, 3.0]))
    assert [row["target_fp_pct"] for row in doc] == [1.0, 2.0, 3.0]
