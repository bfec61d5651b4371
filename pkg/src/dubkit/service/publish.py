"""Seed the contribution store from a pipeline build directory.

Publishing copies a video's sentences, translations, and round-trip scores
into the store so contributors can review them; current_f1 starts at the
machine translation's score and only ever rises from there.
"""

from __future__ import annotations

import json
from pathlib import Path

from dubkit.confidence import ThresholdPolicy
from dubkit.service.store import Store, VideoRecord


def publish_build(
    store: Store,
    build_dir: str | Path,
    policy: ThresholdPolicy,
    *,
    source_language: str,
    target_language: str,
    title: str = "",
) -> VideoRecord:
    """Register one build directory's video and sentences in the store.

    Expects the pipeline's ``transcript.json`` and ``scores.json`` artifacts.
    Re-publishing replaces the video's rows wholesale (fresh review state).
    """
    build_dir = Path(build_dir)
    if policy.f1_threshold is None:
        raise ValueError("publishing requires a policy with an f1 threshold")

    transcript = json.loads((build_dir / "transcript.json").read_text("utf-8"))
    scores = json.loads((build_dir / "scores.json").read_text("utf-8"))
    if not scores:
        raise ValueError(f"{build_dir} has an empty scores.json")

    video = store.add_video(
        transcript["video_id"],
        source_language=source_language,
        target_language=target_language,
        subject=policy.subject,
        f1_threshold=policy.f1_threshold,
        video_duration_ms=_duration_ms(transcript),
        title=title,
        build_dir=str(build_dir),
    )
    for row in scores:
        store.add_sentence(
            video.video_id,
            row["index"],
            original_text=row["original_text"],
            current_translation=row["translated_text"],
            current_f1=row.get("f1"),
            slot_start_ms=row["slot_start_ms"],
            slot_end_ms=row["slot_end_ms"],
        )

    artifact = _existing_artifact(build_dir)
    if artifact is not None:
        store.set_artifact(video.video_id, str(artifact), 1)
    store.audit(
        actor="publisher",
        action="video-published",
        video_id=video.video_id,
        details={"sentences": len(scores), "build_dir": str(build_dir)},
    )
    return store.get_video(video.video_id)


def _duration_ms(transcript: dict) -> int:
    # transcript.json stores seconds; sentences and plans use milliseconds.
    from dubkit.transcript import seconds_to_ms

    return seconds_to_ms(transcript["video_duration"])


def _existing_artifact(build_dir: Path) -> Path | None:
    for name in ("out.mp4", "out.mkv", "edl.json"):
        candidate = build_dir / name
        if candidate.exists():
            return candidate
    return None
