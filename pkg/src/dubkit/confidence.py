"""Round-trip confidence scoring, threshold flagging, calibration, and
confusion/FDR reporting.

A sentence's confidence is the similarity between its original text and the
back-translation of its translated text.  Thresholds split sentences into
Confident and Flagged; calibration sweeps observed scores against labeled
data to hit a requested false-positive percentage.  All percentages use the
all-items denominator (count / total * 100), so false-discovery-rate
arithmetic composes directly: FDR = 100 * fp / (fp + tp).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from dubkit.alignment import AlignedSentence
from dubkit.providers.similarity import METRIC_COSINE, METRIC_F1, SimilarityScorer
from dubkit.providers.translation import Translator

SUBJECT_READING = "reading"
SUBJECT_MATH = "math"
SUBJECT_OTHER = "other"
SUBJECTS = (SUBJECT_READING, SUBJECT_MATH, SUBJECT_OTHER)

COMBINATION_F1_ONLY = "f1-only"
COMBINATION_COSINE_ONLY = "cosine-only"

CLASS_CONFIDENT = "Confident"
CLASS_FLAGGED = "Flagged"


class MissingScore(Exception):
    """The policy selects a score the ConfidenceScore does not carry."""


class LengthMismatch(Exception):
    """Prediction and truth vectors differ in length."""


@dataclass(frozen=True)
class ConfidenceScore:
    """Round-trip similarity values for one sentence."""

    sentence_index: int
    f1_score: float
    back_translated_text: str
    cosine_score: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.f1_score <= 1.0:
            raise ValueError(f"f1_score {self.f1_score} outside [0, 1]")
        if self.cosine_score is not None and not -1.0 <= self.cosine_score <= 1.0:
            raise ValueError(f"cosine_score {self.cosine_score} outside [-1, 1]")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Flagging thresholds for one subject.

    A score at or above the selected threshold is Confident; strictly below
    is Flagged (the >= convention makes a calibrated threshold itself pass).
    """

    subject: str
    f1_threshold: float | None = None
    cosine_threshold: float | None = None
    combination: str = COMBINATION_F1_ONLY

    def __post_init__(self):
        if self.f1_threshold is None and self.cosine_threshold is None:
            raise ValueError("policy needs at least one threshold")
        if self.combination not in (COMBINATION_F1_ONLY, COMBINATION_COSINE_ONLY):
            raise ValueError(f"unknown combination mode {self.combination!r}")


# Calibrated on the labeled study data; reading and math are the only
# subjects with shipped defaults.
DEFAULT_POLICIES = {
    SUBJECT_READING: ThresholdPolicy(SUBJECT_READING, f1_threshold=0.955, cosine_threshold=0.890),
    SUBJECT_MATH: ThresholdPolicy(SUBJECT_MATH, f1_threshold=0.959, cosine_threshold=0.931),
}


def default_policy(subject: str) -> ThresholdPolicy:
    try:
        return DEFAULT_POLICIES[subject]
    except KeyError:
        raise KeyError(
            f"no shipped threshold defaults for subject {subject!r}; configure one explicitly"
        ) from None


@dataclass(frozen=True)
class LabeledPair:
    """A similarity score with its ground-truth equivalence label."""

    score: float
    is_match: bool


@dataclass(frozen=True)
class CalibrationResult:
    """One calibrated operating point; percentages are of all items."""

    threshold: float
    tp_pct: float
    fp_pct: float
    fn_pct: float
    fdr_pct: float


def round_trip_score(
    s: AlignedSentence,
    source: str,
    target: str,
    translator: Translator,
    scorer: SimilarityScorer,
    cosine_scorer: SimilarityScorer | None = None,
) -> ConfidenceScore:
    """Back-translate the translated sentence and score it against the
    original.  The original text is never sent to the translator; only the
    forward translation makes the return trip.
    """
    if not s.translated_text or not s.translated_text.strip():
        raise ValueError(f"sentence {s.index} has an empty translation")
    back = translator.translate(s.translated_text, target, source)
    f1 = scorer.score(s.original_text, back, METRIC_F1)
    cosine = None
    if cosine_scorer is not None:
        cosine = cosine_scorer.score(s.original_text, back, METRIC_COSINE)
    return ConfidenceScore(
        sentence_index=s.index, f1_score=f1, back_translated_text=back, cosine_score=cosine
    )


def classify(c: ConfidenceScore, p: ThresholdPolicy) -> str:
    """``Confident`` iff the policy-selected score is at or above its
    threshold."""
    if p.combination == COMBINATION_F1_ONLY:
        if p.f1_threshold is None:
            raise MissingScore("policy is f1-only but carries no f1 threshold")
        value, threshold = c.f1_score, p.f1_threshold
    else:
        if p.cosine_threshold is None:
            raise MissingScore("policy is cosine-only but carries no cosine threshold")
        if c.cosine_score is None:
            raise MissingScore(f"sentence {c.sentence_index} has no cosine score")
        value, threshold = c.cosine_score, p.cosine_threshold
    return CLASS_CONFIDENT if value >= threshold else CLASS_FLAGGED


def confusion_report(predictions: list[bool], truth: list[bool]) -> dict[str, float]:
    """Percentages of all items, matching the labeled-study convention."""
    if len(predictions) != len(truth):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(truth)} truths")
    if not predictions:
        raise LengthMismatch("inputs are empty")
    total = len(truth)
    tp = fp = fn = tn = 0
    for pred, actual in zip(predictions, truth):
        if pred and actual:
            tp += 1
        elif pred and not actual:
            fp += 1
        elif not pred and actual:
            fn += 1
        else:
            tn += 1
    return {
        "tp_pct": 100.0 * tp / total,
        "fp_pct": 100.0 * fp / total,
        "fn_pct": 100.0 * fn / total,
        "tn_pct": 100.0 * tn / total,
    }


def fdr(tp_pct: float, fp_pct: float) -> float:
    """False discovery rate: false positives as a percentage of all
    perceived positives.  Zero when there are no perceived positives."""
    if tp_pct == 0 and fp_pct == 0:
        return 0.0
    return 100.0 * fp_pct / (fp_pct + tp_pct)


def _confusion_at(threshold: float, labeled: list[LabeledPair]) -> tuple[int, int, int]:
    tp = fp = fn = 0
    for pair in labeled:
        positive = pair.score >= threshold
        if positive and pair.is_match:
            tp += 1
        elif positive and not pair.is_match:
            fp += 1
        elif not positive and pair.is_match:
            fn += 1
    return tp, fp, fn


def _result_at(threshold: float, labeled: list[LabeledPair]) -> CalibrationResult:
    tp, fp, fn = _confusion_at(threshold, labeled)
    total = len(labeled)
    tp_pct = 100.0 * tp / total
    fp_pct = 100.0 * fp / total
    fn_pct = 100.0 * fn / total
    return CalibrationResult(
        threshold=threshold, tp_pct=tp_pct, fp_pct=fp_pct, fn_pct=fn_pct, fdr_pct=fdr(tp_pct, fp_pct)
    )


def calibrate(labeled: list[LabeledPair], target_fp_pct: float) -> CalibrationResult:
    """Smallest threshold whose false-positive percentage stays at or below
    the target; smallest feasible maximizes the true-positive percentage.

    Candidates are the observed score values plus one value just above the
    maximum (which always yields zero false positives, so a feasible
    threshold exists for any non-negative target).
    """
    if not labeled:
        raise ValueError("labeled set is empty")
    if not 0.0 <= target_fp_pct <= 100.0:
        raise ValueError(f"target_fp_pct {target_fp_pct} outside [0, 100]")
    scores = sorted({pair.score for pair in labeled})
    above_max = math.nextafter(scores[-1], math.inf)
    total = len(labeled)
    # Walk candidates in ascending order; fp only shrinks as the threshold
    # rises, so the first feasible candidate is the answer.
    for candidate in scores + [above_max]:
        _, fp, _ = _confusion_at(candidate, labeled)
        if 100.0 * fp / total <= target_fp_pct:
            return _result_at(candidate, labeled)
    raise AssertionError("unreachable: the above-max threshold has no false positives")


def f1_optimal_threshold(labeled: list[LabeledPair]) -> tuple[float, float]:
    """Threshold among observed scores maximizing classifier F1
    (= 2TP / (2TP + FP + FN), plain counts); ties break toward the higher
    threshold."""
    if not any(pair.is_match for pair in labeled):
        raise ValueError("labeled set contains no true matches")
    best_threshold = None
    best_f1 = -1.0
    for candidate in sorted({pair.score for pair in labeled}):
        tp, fp, fn = _confusion_at(candidate, labeled)
        denom = 2 * tp + fp + fn
        f1 = 2 * tp / denom if denom else 0.0
        if f1 >= best_f1:
            best_f1 = f1
            best_threshold = candidate
    assert best_threshold is not None
    return best_threshold, best_f1


def load_labeled_pairs(path: str | Path) -> list[LabeledPair]:
    """Read a labeled-pair corpus: JSON list of {score, is_match, ...}."""
    doc = json.loads(Path(path).read_text("utf-8"))
    if not isinstance(doc, list):
        raise ValueError("labeled corpus must be a JSON list")
    pairs = []
    for i, rec in enumerate(doc):
        if not isinstance(rec, dict) or "score" not in rec or "is_match" not in rec:
            raise ValueError(f"record {i} must be an object with 'score' and 'is_match'")
        pairs.append(LabeledPair(score=float(rec["score"]), is_match=bool(rec["is_match"])))
    return pairs


def calibration_report(
    labeled: list[LabeledPair], targets: list[float] = (1.0, 2.0, 3.0)
) -> list[CalibrationResult]:
    """One calibrated row per requested false-positive target."""
    return [calibrate(labeled, target) for target in targets]


def render_calibration_table(results: list[CalibrationResult]) -> str:
    """Aligned-column text table: threshold, TP%, FP%, FN%, FDR% per row."""
    header = ("Threshold", "TP%", "FP%", "FN%", "FDR%")
    rows = [
        (
            f"{r.threshold:.4f}",
            f"{r.tp_pct:.1f}",
            f"{r.fp_pct:.1f}",
            f"{r.fn_pct:.1f}",
            f"{r.fdr_pct:.2f}",
        )
        for r in results
    ]
    widths = [max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i]) for i in range(5)]
    lines = [
        "  ".join(header[i].rjust(widths[i]) for i in range(5)),
        "  ".join("-" * widths[i] for i in range(5)),
    ]
    for row in rows:
        lines.append("  ".join(row[i].rjust(widths[i]) for i in range(5)))
    return "\n".join(lines)


def calibration_report_json(results: list[CalibrationResult], targets: list[float]) -> str:
    payload = [
        {
            "target_fp_pct": target,
            "threshold": r.threshold,
            "tp_pct": r.tp_pct,
            "fp_pct": r.fp_pct,
            "fn_pct": r.fn_pct,
            "fdr_pct": r.fdr_pct,
        }
        for target, r in zip(targets, results)
    ]
    return json.dumps(payload, indent=2) + "\n"
