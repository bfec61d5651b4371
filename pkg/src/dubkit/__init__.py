"""dubkit: toolkit for localizing timestamped educational-video transcripts.

Pipeline stages: transcript ingestion, document-level translation with 1:1
sentence re-alignment, round-trip confidence scoring, audio/video sync
planning, edit-decision-list emission, and a contribution service through
which humans correct flagged sentences.
"""

__version__ = "0.1.0"

from dubkit.transcript import Transcript, TranscriptSegment, parse_transcript, serialize_transcript
from dubkit.alignment import AlignedSentence, align, merge_segments, split_sentences
from dubkit.confidence import (
    CalibrationResult,
    ConfidenceScore,
    LabeledPair,
    ThresholdPolicy,
    calibrate,
    classify,
    confusion_report,
    f1_optimal_threshold,
    fdr,
)
from dubkit.sync import SyncEntry, SyncPlan, plan_timeline, stream_durations
from dubkit.assembly import EditDecisionList, emit_edl

__all__ = [
    "Transcript",
    "TranscriptSegment",
    "parse_transcript",
    "serialize_transcript",
    "AlignedSentence",
    "align",
    "merge_segments",
    "split_sentences",
    "ConfidenceScore",
    "ThresholdPolicy",
    "LabeledPair",
    "CalibrationResult",
    "calibrate",
    "classify",
    "confusion_report",
    "f1_optimal_threshold",
    "fdr",
    "SyncEntry",
    "SyncPlan",
    "plan_timeline",
    "stream_durations",
    "EditDecisionList",
    "emit_edl",
]
