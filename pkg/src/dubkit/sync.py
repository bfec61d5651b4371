"""Freeze-frame / silence-pause timeline planning.

Each sentence owns a slot of the original video.  When its translated audio
overruns the slot, the frame at the slot end is held until the audio
finishes; when the audio underruns, silence pads the difference.  All
arithmetic is in integer milliseconds, so the video and audio streams of a
valid plan are equal to the millisecond, not approximately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from dubkit.alignment import AlignedSentence
from dubkit.providers.speech import AudioAsset


class InputMismatch(Exception):
    """Aligned sentences and audio assets disagree in length or index."""


class SlotCoverage(Exception):
    """Sentence slots do not partition the video timeline."""


@dataclass(frozen=True)
class SyncEntry:
    """One sentence's contribution to the output timeline.

    Exactly one of ``freeze_ms`` / ``pause_ms`` may be positive: the frame
    at ``source_end_ms`` is held while overlong audio finishes, or silence
    is appended after short audio.
    """

    sentence_index: int
    source_start_ms: int
    source_end_ms: int
    audio_path: str
    audio_duration_ms: int
    freeze_ms: int
    pause_ms: int

    @property
    def slot_ms(self) -> int:
        return self.source_end_ms - self.source_start_ms

    @property
    def output_ms(self) -> int:
        return self.slot_ms + self.freeze_ms


@dataclass(frozen=True)
class SyncPlan:
    """The full synchronized timeline for one video."""

    video_id: str
    pre_roll_ms: int
    entries: tuple[SyncEntry, ...]
    total_duration_ms: int


def plan_timeline(
    aligned: list[AlignedSentence],
    audio: list[AudioAsset],
    video_duration_ms: int,
    *,
    video_id: str = "",
) -> SyncPlan:
    """Compute the per-sentence freeze/pause timeline.

    ``aligned[i]`` and ``audio[i]`` must describe the same sentence, and the
    slots must partition [first slot start, video duration).
    """
    if not aligned or len(aligned) != len(audio):
        raise InputMismatch(f"{len(aligned)} aligned sentences vs {len(audio)} audio assets")
    expected_start = aligned[0].slot_start_ms
    if expected_start < 0:
        raise SlotCoverage(f"first slot starts at {expected_start} ms")
    entries = []
    for sentence, asset in zip(aligned, audio):
        if asset.sentence_index != sentence.index:
            raise InputMismatch(
                f"audio asset index {asset.sentence_index} does not match sentence {sentence.index}"
            )
        if asset.duration_ms <= 0:
            raise InputMismatch(f"audio for sentence {sentence.index} has non-positive duration")
        if sentence.slot_start_ms != expected_start:
            raise SlotCoverage(
                f"slot for sentence {sentence.index} starts at {sentence.slot_start_ms} ms, "
                f"expected {expected_start} ms"
            )
        if sentence.slot_end_ms <= sentence.slot_start_ms:
            raise SlotCoverage(f"slot for sentence {sentence.index} is empty or inverted")
        gap = sentence.slot_end_ms - sentence.slot_start_ms
        overrun = asset.duration_ms - gap
        entries.append(
            SyncEntry(
                sentence_index=sentence.index,
                source_start_ms=sentence.slot_start_ms,
                source_end_ms=sentence.slot_end_ms,
                audio_path=str(asset.path),
                audio_duration_ms=asset.duration_ms,
                freeze_ms=max(0, overrun),
                pause_ms=max(0, -overrun),
            )
        )
        expected_start = sentence.slot_end_ms
    if expected_start != video_duration_ms:
        raise SlotCoverage(
            f"last slot ends at {expected_start} ms, video duration is {video_duration_ms} ms"
        )
    pre_roll = aligned[0].slot_start_ms
    total = pre_roll + sum(max(e.slot_ms, e.audio_duration_ms) for e in entries)
    return SyncPlan(
        video_id=video_id, pre_roll_ms=pre_roll, entries=tuple(entries), total_duration_ms=total
    )


def stream_durations(p: SyncPlan) -> dict[str, int]:
    """Video and audio stream lengths implied by the plan; equal in every
    valid plan (the synchronization guarantee)."""
    video = p.pre_roll_ms + sum(e.slot_ms + e.freeze_ms for e in p.entries)
    audio = p.pre_roll_ms + sum(e.audio_duration_ms + e.pause_ms for e in p.entries)
    return {"video_stream_ms": video, "audio_stream_ms": audio}


def plan_to_dict(p: SyncPlan) -> dict:
    return {
        "video_id": p.video_id,
        "pre_roll_ms": p.pre_roll_ms,
        "total_duration_ms": p.total_duration_ms,
        "entries": [
            {
                "sentence_index": e.sentence_index,
                "source_start_ms": e.source_start_ms,
                "source_end_ms": e.source_end_ms,
                "audio_path": e.audio_path,
                "audio_duration_ms": e.audio_duration_ms,
                "freeze_ms": e.freeze_ms,
                "pause_ms": e.pause_ms,
            }
            for e in p.entries
        ],
    }


def plan_from_dict(doc: dict) -> SyncPlan:
    return SyncPlan(
        video_id=doc["video_id"],
        pre_roll_ms=int(doc["pre_roll_ms"]),
        total_duration_ms=int(doc["total_duration_ms"]),
        entries=tuple(
            SyncEntry(
                sentence_index=int(e["sentence_index"]),
                source_start_ms=int(e["source_start_ms"]),
                source_end_ms=int(e["source_end_ms"]),
                audio_path=e["audio_path"],
                audio_duration_ms=int(e["audio_duration_ms"]),
                freeze_ms=int(e["freeze_ms"]),
                pause_ms=int(e["pause_ms"]),
            )
            for e in doc["entries"]
        ),
    )


def serialize_plan(p: SyncPlan) -> str:
    return json.dumps(plan_to_dict(p), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def load_plan(path: str | Path) -> SyncPlan:
    return plan_from_dict(json.loads(Path(path).read_text("utf-8")))
