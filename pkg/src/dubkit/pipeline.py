"""Per-video and per-category orchestration of the full localization flow:
parse -> merge -> translate -> split -> align -> score/classify ->
synthesize -> plan -> EDL -> (optional) render.

Every stage writes its artifact under ``<out>/<video_id>/`` and is skipped
on re-runs when the artifact exists and its recorded input hash matches, so
provider calls are never repeated for unchanged inputs.  Failures surface
as status values, never as process aborts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from dubkit.alignment import AlignedSentence, AlignmentMismatch, align, merge_segments, split_sentences
from dubkit.assembly import DurationDrift, ToolFailure, assemble, emit_edl, serialize_edl
from dubkit.config import PipelineConfig
from dubkit.confidence import CLASS_FLAGGED, ConfidenceScore, classify, round_trip_score
from dubkit.providers.base import ProviderError
from dubkit.providers.speech import AudioAsset
from dubkit.sync import plan_timeline, serialize_plan
from dubkit.transcript import load_transcript, serialize_transcript

logger = logging.getLogger(__name__)

STATUS_COMPLETED = "completed"
STATUS_EXCLUDED_ALIGNMENT = "excluded-alignment"
STATUS_FAILED_PROVIDER = "failed-provider"
STATUS_FAILED_ASSEMBLY = "failed-assembly"


@dataclass(frozen=True)
class SentenceOutcome:
    """One sentence after scoring: classification is always present; the
    score is absent when providers failed (treated as Flagged)."""

    aligned: AlignedSentence
    score: ConfidenceScore | None
    classification: str
    error: str | None = None


@dataclass
class PipelineResult:
    video_id: str
    status: str
    sentences: list[SentenceOutcome] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)
    failure: str | None = None


@dataclass
class CategoryReport:
    """Aggregate statistics for one (subject, grade, language, model) cell."""

    category: str
    fields: dict[str, str]
    videos_processed: int
    videos_excluded: int
    videos_failed: int
    sentence_count: int
    f1_mean: float | None
    f1_median: float | None
    f1_stddev: float | None
    cosine_mean: float | None
    cosine_median: float | None
    cosine_stddev: float | None
    correct_translation_percentage: float | None


def _hash_payload(*parts: object) -> str:
    blob = json.dumps(parts, ensure_ascii=False, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class _StageCache:
    """Skip a stage when its artifact exists and inputs are unchanged."""

    def __init__(self, build_dir: Path):
        self._path = build_dir / "stage_hashes.json"
        self._hashes: dict[str, str] = {}
        if self._path.exists():
            try:
                self._hashes = json.loads(self._path.read_text("utf-8"))
            except (json.JSONDecodeError, OSError):
                self._hashes = {}

    def run(self, name: str, input_hash: str, artifact: Path, compute, write, read):
        if artifact.exists() and self._hashes.get(name) == input_hash:
            logger.debug("stage %s unchanged, reusing %s", name, artifact.name)
            return read(artifact)
        value = compute()
        write(artifact, value)
        self._hashes[name] = input_hash
        self._path.write_text(json.dumps(self._hashes, indent=2, sort_keys=True) + "\n", "utf-8")
        return value


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n", "utf-8")


def _score_sentences(aligned, config: PipelineConfig, providers, policy, failures):
    outcomes = []
    for sentence in aligned:
        try:
            score = round_trip_score(
                sentence,
                config.source_language,
                config.target_language,
                providers.back_translator,
                providers.scorer,
                providers.cosine_scorer,
            )
            label = classify(score, policy)
            outcomes.append(
                SentenceOutcome(
                    aligned=AlignedSentence(
                        index=sentence.index,
                        original_text=sentence.original_text,
                        translated_text=sentence.translated_text,
                        slot_start_ms=sentence.slot_start_ms,
                        slot_end_ms=sentence.slot_end_ms,
                        back_translated_text=score.back_translated_text,
                    ),
                    score=score,
                    classification=label,
                )
            )
        except ProviderError as exc:
            # Score unavailable: conservatively flagged for human review.
            failures.append(f"sentence {sentence.index}: score unavailable: {exc}")
            outcomes.append(
                SentenceOutcome(
                    aligned=sentence, score=None, classification=CLASS_FLAGGED, error=str(exc)
                )
            )
    return outcomes


def _outcomes_payload(outcomes: list[SentenceOutcome]) -> list[dict]:
    return [
        {
            "index": o.aligned.index,
            "original_text": o.aligned.original_text,
            "translated_text": o.aligned.translated_text,
            "back_translated_text": o.aligned.back_translated_text,
            "slot_start_ms": o.aligned.slot_start_ms,
            "slot_end_ms": o.aligned.slot_end_ms,
            "f1": o.score.f1_score if o.score else None,
            "cosine": o.score.cosine_score if o.score else None,
            "classification": o.classification,
            "error": o.error,
        }
        for o in outcomes
    ]


def _with_current_slots(
    outcomes: list[SentenceOutcome], aligned: list[AlignedSentence]
) -> list[SentenceOutcome]:
    by_index = {s.index: s for s in aligned}
    refreshed = []
    for o in outcomes:
        fresh = by_index.get(o.aligned.index)
        if fresh is None or (fresh.slot_start_ms, fresh.slot_end_ms) == (
            o.aligned.slot_start_ms,
            o.aligned.slot_end_ms,
        ):
            refreshed.append(o)
            continue
        refreshed.append(
            SentenceOutcome(
                aligned=AlignedSentence(
                    index=fresh.index,
                    original_text=fresh.original_text,
                    translated_text=fresh.translated_text,
                    slot_start_ms=fresh.slot_start_ms,
                    slot_end_ms=fresh.slot_end_ms,
                    back_translated_text=o.aligned.back_translated_text,
                ),
                score=o.score,
                classification=o.classification,
                error=o.error,
            )
        )
    return refreshed


def _outcomes_from_payload(payload: list[dict]) -> list[SentenceOutcome]:
    outcomes = []
    for rec in payload:
        aligned = AlignedSentence(
            index=rec["index"],
            original_text=rec["original_text"],
            translated_text=rec["translated_text"],
            slot_start_ms=rec["slot_start_ms"],
            slot_end_ms=rec["slot_end_ms"],
            back_translated_text=rec.get("back_translated_text"),
        )
        score = None
        if rec.get("f1") is not None:
            score = ConfidenceScore(
                sentence_index=rec["index"],
                f1_score=rec["f1"],
                back_translated_text=rec.get("back_translated_text") or "",
                cosine_score=rec.get("cosine"),
            )
        outcomes.append(
            SentenceOutcome(
                aligned=aligned,
                score=score,
                classification=rec["classification"],
                error=rec.get("error"),
            )
        )
    return outcomes


def run_video(
    transcript_path: str | Path,
    config: PipelineConfig,
    out_dir: str | Path,
    *,
    parse_kwargs: dict | None = None,
) -> PipelineResult:
    """Localize one video; all artifacts land under ``out_dir/<video_id>/``."""
    providers = config.build_providers()
    policy = config.policy()
    abbreviations = config.abbreviations()

    transcript = load_transcript(transcript_path, **(parse_kwargs or {}))
    build_dir = Path(out_dir) / transcript.video_id
    build_dir.mkdir(parents=True, exist_ok=True)
    cache = _StageCache(build_dir)
    failures: list[str] = []
    artifacts: dict[str, str] = {}

    transcript_artifact = build_dir / "transcript.json"
    transcript_artifact.write_text(serialize_transcript(transcript), "utf-8")
    artifacts["transcript"] = str(transcript_artifact)

    result = PipelineResult(video_id=transcript.video_id, status=STATUS_COMPLETED, artifacts=artifacts)

    document = merge_segments(transcript)
    try:
        translated_doc = cache.run(
            "translate",
            _hash_payload(document, providers.translator.config.name, config.source_language, config.target_language),
            build_dir / "translated.json",
            lambda: providers.translator.translate(document, config.source_language, config.target_language),
            lambda path, value: _write_json(
                path,
                {"source_document": document, "translated_document": value},
            ),
            lambda path: json.loads(path.read_text("utf-8"))["translated_document"],
        )
    except ProviderError as exc:
        failures.append(f"document translation failed: {exc}")
        _flush_failures(build_dir, failures)
        result.status = STATUS_FAILED_PROVIDER
        result.failure = str(exc)
        return result
    artifacts["translated"] = str(build_dir / "translated.json")

    translated_sentences = split_sentences(translated_doc, config.target_language, abbreviations)
    try:
        aligned = align(transcript, translated_sentences)
    except AlignmentMismatch as exc:
        failures.append(f"alignment mismatch: {exc}")
        _flush_failures(build_dir, failures)
        result.status = STATUS_EXCLUDED_ALIGNMENT
        result.failure = str(exc)
        return result

    scores_hash = _hash_payload(
        [(s.index, s.original_text, s.translated_text) for s in aligned],
        providers.back_translator.config.name,
        providers.scorer.config.name,
        providers.cosine_scorer.config.name if providers.cosine_scorer else None,
        policy.subject,
        policy.f1_threshold,
        policy.cosine_threshold,
        policy.combination,
    )
    outcomes = cache.run(
        "scores",
        scores_hash,
        build_dir / "scores.json",
        lambda: _score_sentences(aligned, config, providers, policy, failures),
        lambda path, value: _write_json(path, _outcomes_payload(value)),
        lambda path: _outcomes_from_payload(json.loads(path.read_text("utf-8"))),
    )
    # The cache keys on sentence texts, not slots, so a retiming-only change
    # reuses scores; refresh the slot fields from the current alignment.
    outcomes = _with_current_slots(outcomes, aligned)
    scores_path = build_dir / "scores.json"
    serialized = json.dumps(_outcomes_payload(outcomes), ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    if scores_path.read_text("utf-8") != serialized:
        scores_path.write_text(serialized, "utf-8")
    result.sentences = outcomes
    artifacts["scores"] = str(scores_path)

    audio_dir = build_dir / "audio"
    assets: list[AudioAsset] = []
    try:
        for sentence in aligned:
            asset = providers.synthesizer.synthesize(
                sentence.translated_text,
                config.target_language,
                audio_dir,
                sentence_index=sentence.index,
            )
            # Store build-dir-relative paths so artifacts are byte-stable
            # across checkouts and re-runs in fresh directories.
            assets.append(
                AudioAsset(
                    sentence_index=asset.sentence_index,
                    path=asset.path.relative_to(build_dir),
                    duration_ms=asset.duration_ms,
                    language=asset.language,
                )
            )
    except ProviderError as exc:
        failures.append(f"speech synthesis failed: {exc}")
        _flush_failures(build_dir, failures)
        result.status = STATUS_FAILED_PROVIDER
        result.failure = str(exc)
        return result

    plan = plan_timeline(aligned, assets, transcript.video_duration_ms, video_id=transcript.video_id)
    plan_path = build_dir / "plan.json"
    plan_path.write_text(serialize_plan(plan), "utf-8")
    artifacts["plan"] = str(plan_path)

    source_video = config.source_video or f"{transcript.video_id}.mp4"
    edl = emit_edl(plan, source_video, assets)
    edl_path = build_dir / "edl.json"
    edl_path.write_text(serialize_edl(edl), "utf-8")
    artifacts["edl"] = str(edl_path)

    if config.render:
        try:
            rendered = assemble(edl, config.tool_config(), build_dir)
            artifacts["video"] = str(rendered)
        except (ToolFailure, DurationDrift) as exc:
            failures.append(f"assembly failed: {exc}")
            _flush_failures(build_dir, failures)
            result.status = STATUS_FAILED_ASSEMBLY
            result.failure = str(exc)
            return result

    _flush_failures(build_dir, failures)
    return result


def _flush_failures(build_dir: Path, failures: list[str]) -> None:
    if failures:
        with (build_dir / "failures.log").open("a", encoding="utf-8") as fh:
            for line in failures:
                fh.write(line + "\n")


def load_manifest(path: str | Path) -> list[dict]:
    doc = json.loads(Path(path).read_text("utf-8"))
    if not isinstance(doc, list):
        raise ValueError("manifest must be a JSON list")
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict) or "transcript" not in entry:
            raise ValueError(f"manifest entry {i} must be an object with a 'transcript' path")
    return doc


def category_label(fields: dict[str, str]) -> str:
    order = ("subject", "grade", "language", "model")
    parts = [str(fields[k]) for k in order if k in fields]
    parts.extend(str(v) for k, v in sorted(fields.items()) if k not in order)
    return "/".join(parts) if parts else "all"


def run_category(
    manifest_path: str | Path,
    config: PipelineConfig,
    out_dir: str | Path,
) -> tuple[list[CategoryReport], list[PipelineResult]]:
    """Run every manifest entry and aggregate Table-style statistics per
    category cell.  Per-video failures are tallied, never fatal."""
    entries = load_manifest(manifest_path)

    def _one(entry: dict) -> PipelineResult:
        try:
            return run_video(entry["transcript"], config, out_dir, parse_kwargs=entry.get("parse"))
        except Exception as exc:  # totality: a broken input never kills the batch
            logger.exception("video %s failed", entry["transcript"])
            return PipelineResult(
                video_id=str(entry.get("video_id", entry["transcript"])),
                status=STATUS_FAILED_PROVIDER,
                failure=str(exc),
            )

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        results = list(pool.map(_one, entries))

    groups: dict[str, tuple[dict, list[PipelineResult]]] = {}
    for entry, result in zip(entries, results):
        fields = {str(k): str(v) for k, v in entry.get("category", {}).items()}
        label = category_label(fields)
        groups.setdefault(label, (fields, []))[1].append(result)

    reports = [_aggregate(label, fields, rs) for label, (fields, rs) in groups.items()]
    return reports, results


def _aggregate(label: str, fields: dict, results: list[PipelineResult]) -> CategoryReport:
    completed = [r for r in results if r.status == STATUS_COMPLETED]
    excluded = sum(1 for r in results if r.status == STATUS_EXCLUDED_ALIGNMENT)
    failed = sum(1 for r in results if r.status in (STATUS_FAILED_PROVIDER, STATUS_FAILED_ASSEMBLY))

    f1_values: list[float] = []
    cosine_values: list[float] = []
    classified = 0
    confident = 0
    for result in completed:
        for outcome in result.sentences:
            classified += 1
            if outcome.classification != CLASS_FLAGGED:
                confident += 1
            if outcome.score is not None:
                f1_values.append(outcome.score.f1_score)
                if outcome.score.cosine_score is not None:
                    cosine_values.append(outcome.score.cosine_score)

    def _stats(values: list[float]):
        if not values:
            return None, None, None
        return (
            statistics.mean(values),
            statistics.median_low(values),  # lower median, stated convention
            statistics.pstdev(values),
        )

    f1_mean, f1_median, f1_stddev = _stats(f1_values)
    cos_mean, cos_median, cos_stddev = _stats(cosine_values)
    return CategoryReport(
        category=label,
        fields=fields,
        videos_processed=len(completed),
        videos_excluded=excluded,
        videos_failed=failed,
        sentence_count=classified,
        f1_mean=f1_mean,
        f1_median=f1_median,
        f1_stddev=f1_stddev,
        cosine_mean=cos_mean,
        cosine_median=cos_median,
        cosine_stddev=cos_stddev,
        correct_translation_percentage=(confident / classified) if classified else None,
    )


def render_category_table(reports: list[CategoryReport]) -> str:
    """Aligned text table, one category per row, statistics as columns."""
    header = (
        "Category",
        "Videos",
        "Excl",
        "Fail",
        "Sentences",
        "Mean F1",
        "Median F1",
        "StdDev F1",
        "Mean Cos",
        "Median Cos",
        "StdDev Cos",
        "CTP",
    )

    def _fmt(v, digits=3):
        return "-" if v is None else f"{v:.{digits}f}"

    rows = [
        (
            r.category,
            str(r.videos_processed),
            str(r.videos_excluded),
            str(r.videos_failed),
            str(r.sentence_count),
            _fmt(r.f1_mean),
            _fmt(r.f1_median),
            _fmt(r.f1_stddev),
            _fmt(r.cosine_mean),
            _fmt(r.cosine_median),
            _fmt(r.cosine_stddev),
            _fmt(r.correct_translation_percentage),
        )
        for r in reports
    ]
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines = [
        "  ".join(header[i].ljust(widths[i]) for i in range(len(header))).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(header))),
    ]
    for row in rows:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(header))).rstrip())
    return "\n".join(lines)


def report_to_dict(r: CategoryReport) -> dict:
    return {
        "category": r.category,
        "fields": r.fields,
        "videos_processed": r.videos_processed,
        "videos_excluded": r.videos_excluded,
        "videos_failed": r.videos_failed,
        "sentence_count": r.sentence_count,
        "f1_mean": r.f1_mean,
        "f1_median": r.f1_median,
        "f1_stddev": r.f1_stddev,
        "cosine_mean": r.cosine_mean,
        "cosine_median": r.cosine_median,
        "cosine_stddev": r.cosine_stddev,
        "correct_translation_percentage": r.correct_translation_percentage,
    }
