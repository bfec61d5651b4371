"""Parse, validate, and serialize timestamped video transcripts.

Two interchange formats are supported:

* ``canonical-json`` -- the storage format::

      {"video_id": "...", "language": "en", "video_duration": 283.5,
       "segments": [{"start": 0.0, "text": "One sentence."}, ...]}

* ``timed-lines`` -- one record per line, ``<seconds>|<text>``, lines
  starting with ``#`` are comments.  Video id, language, and duration are
  supplied out-of-band (CLI flags / keyword arguments).

Timestamps are stored internally as integer milliseconds so round-trips are
deterministic; files expose seconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation

FORMAT_CANONICAL_JSON = "canonical-json"
FORMAT_TIMED_LINES = "timed-lines"
FORMATS = (FORMAT_CANONICAL_JSON, FORMAT_TIMED_LINES)


class TranscriptError(Exception):
    """Base class for transcript parse/validation failures."""


class EmptyTranscript(TranscriptError):
    """Input contains no segments."""


class NonMonotonicTimestamps(TranscriptError):
    """Segment start times are not strictly increasing."""


class MalformedEntry(TranscriptError):
    """A record fails the format grammar or field constraints.

    ``record_index`` names the offending record (0-based, in file order).
    """

    def __init__(self, record_index: int, reason: str):
        self.record_index = record_index
        self.reason = reason
        super().__init__(f"record {record_index}: {reason}")


class DurationMissing(TranscriptError):
    """No video duration available (file field or out-of-band value)."""


def seconds_to_ms(value: float | int | str) -> int:
    """Convert a decimal seconds value to integer milliseconds.

    Goes through ``Decimal`` on the shortest string form so that values like
    ``3.2`` land on exactly 3200 ms instead of a float-drifted neighbour.
    """
    if isinstance(value, str):
        dec = Decimal(value)
    else:
        dec = Decimal(repr(float(value)))
    return int((dec * 1000).to_integral_value(rounding="ROUND_HALF_UP"))


def ms_to_seconds(ms: int) -> float:
    """Milliseconds to seconds; exact at 1 ms granularity for serialization."""
    return ms / 1000.0


@dataclass(frozen=True)
class TranscriptSegment:
    """One transcript sentence mapped to the timestamp it was spoken at."""

    index: int
    start_ms: int
    text: str

    @property
    def start_seconds(self) -> float:
        return ms_to_seconds(self.start_ms)


@dataclass(frozen=True)
class Transcript:
    """A validated transcript for one video.

    Invariants (enforced on construction): non-empty segment list, strictly
    increasing start times, every start time before ``video_duration_ms``,
    indexes 0..n-1 with no gaps, non-blank single-line text.
    """

    video_id: str
    language: str
    video_duration_ms: int
    segments: tuple[TranscriptSegment, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise EmptyTranscript("transcript has no segments")
        if self.video_duration_ms <= 0:
            raise MalformedEntry(0, f"video_duration must be positive, got {self.video_duration_ms} ms")
        prev_start = None
        for pos, seg in enumerate(self.segments):
            if seg.index != pos:
                raise MalformedEntry(pos, f"segment index {seg.index} does not match position {pos}")
            if not seg.text or not seg.text.strip():
                raise MalformedEntry(pos, "segment text is empty")
            if "\n" in seg.text or "\r" in seg.text:
                raise MalformedEntry(pos, "segment text contains a line break")
            if seg.start_ms < 0:
                raise MalformedEntry(pos, f"start time {seg.start_ms} ms is negative")
            if seg.start_ms >= self.video_duration_ms:
                raise MalformedEntry(
                    pos,
                    f"start time {seg.start_ms} ms is not before video duration {self.video_duration_ms} ms",
                )
            if prev_start is not None and seg.start_ms <= prev_start:
                raise NonMonotonicTimestamps(
                    f"segment {pos} starts at {seg.start_ms} ms, not after previous {prev_start} ms"
                )
            prev_start = seg.start_ms

    @property
    def video_duration_seconds(self) -> float:
        return ms_to_seconds(self.video_duration_ms)


def _decode(raw: bytes | str) -> str:
    if isinstance(raw, str):
        return raw
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedEntry(0, f"input is not valid UTF-8: {exc}") from None


def _segment_from_json(pos: int, record: object) -> TranscriptSegment:
    if not isinstance(record, dict):
        raise MalformedEntry(pos, f"segment must be an object, got {type(record).__name__}")
    if "start" not in record:
        raise MalformedEntry(pos, "segment lacks a 'start' field")
    if "text" not in record:
        raise MalformedEntry(pos, "segment lacks a 'text' field")
    start = record["start"]
    if isinstance(start, bool) or not isinstance(start, (int, float)):
        raise MalformedEntry(pos, f"'start' must be a number, got {start!r}")
    text = record["text"]
    if not isinstance(text, str):
        raise MalformedEntry(pos, f"'text' must be a string, got {type(text).__name__}")
    try:
        start_ms = seconds_to_ms(start)
    except (InvalidOperation, ValueError, OverflowError):
        raise MalformedEntry(pos, f"'start' value {start!r} is not a finite time") from None
    return TranscriptSegment(index=pos, start_ms=start_ms, text=text.strip())


def _parse_canonical_json(text: str) -> Transcript:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedEntry(0, f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedEntry(0, f"top-level value must be an object, got {type(doc).__name__}")
    if "video_duration" not in doc or doc["video_duration"] is None:
        raise DurationMissing("canonical-json input lacks 'video_duration'")
    duration = doc["video_duration"]
    if isinstance(duration, bool) or not isinstance(duration, (int, float)):
        raise MalformedEntry(0, f"'video_duration' must be a number, got {duration!r}")
    video_id = doc.get("video_id", "")
    language = doc.get("language", "")
    if not isinstance(video_id, str) or not video_id:
        raise MalformedEntry(0, "'video_id' must be a non-empty string")
    if not isinstance(language, str) or not language:
        raise MalformedEntry(0, "'language' must be a non-empty string")
    segments_raw = doc.get("segments")
    if segments_raw is None:
        raise EmptyTranscript("canonical-json input lacks 'segments'")
    if not isinstance(segments_raw, list):
        raise MalformedEntry(0, f"'segments' must be a list, got {type(segments_raw).__name__}")
    if not segments_raw:
        raise EmptyTranscript("'segments' is empty")
    try:
        duration_ms = seconds_to_ms(duration)
    except (InvalidOperation, ValueError, OverflowError):
        raise MalformedEntry(0, f"'video_duration' value {duration!r} is not a finite time") from None
    segments = [_segment_from_json(pos, rec) for pos, rec in enumerate(segments_raw)]
    return Transcript(
        video_id=video_id,
        language=language,
        video_duration_ms=duration_ms,
        segments=tuple(segments),
    )


def _parse_timed_lines(
    text: str,
    video_id: str,
    language: str,
    video_duration: float | None,
) -> Transcript:
    if video_duration is None:
        raise DurationMissing("timed-lines input needs an out-of-band video duration")
    try:
        duration_ms = seconds_to_ms(video_duration)
    except (InvalidOperation, ValueError, OverflowError):
        raise MalformedEntry(0, f"video duration {video_duration!r} is not a finite time") from None
    segments: list[TranscriptSegment] = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        pos = len(segments)
        if "|" not in stripped:
            raise MalformedEntry(pos, f"expected '<seconds>|<text>', got {stripped!r}")
        time_part, text_part = stripped.split("|", 1)
        try:
            start_ms = seconds_to_ms(time_part.strip())
        except (InvalidOperation, ValueError, OverflowError):
            raise MalformedEntry(pos, f"unparseable time {time_part.strip()!r}") from None
        segments.append(TranscriptSegment(index=pos, start_ms=start_ms, text=text_part.strip()))
    if not segments:
        raise EmptyTranscript("timed-lines input has no records")
    return Transcript(
        video_id=video_id,
        language=language,
        video_duration_ms=duration_ms,
        segments=tuple(segments),
    )


def parse_transcript(
    raw: bytes | str,
    format: str = FORMAT_CANONICAL_JSON,
    *,
    video_id: str = "untitled",
    language: str = "und",
    video_duration: float | None = None,
) -> Transcript:
    """Parse ``raw`` into a validated :class:`Transcript`.

    For ``timed-lines`` the video id, language, and duration come from the
    keyword arguments; for ``canonical-json`` they come from the file and the
    keywords are ignored.

    Raises :class:`EmptyTranscript`, :class:`NonMonotonicTimestamps`,
    :class:`MalformedEntry`, or :class:`DurationMissing`; never anything else
    regardless of input bytes.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown transcript format {format!r}")
    text = _decode(raw)
    if format == FORMAT_CANONICAL_JSON:
        return _parse_canonical_json(text)
    return _parse_timed_lines(text, video_id, language, video_duration)


def _format_seconds(ms: int) -> str:
    sign = "-" if ms < 0 else ""
    ms = abs(ms)
    return f"{sign}{ms // 1000}.{ms % 1000:03d}"


def transcript_to_dict(t: Transcript) -> dict:
    """Canonical-json object form (seconds as floats)."""
    return {
        "video_id": t.video_id,
        "language": t.language,
        "video_duration": t.video_duration_ms / 1000.0,
        "segments": [{"start": seg.start_ms / 1000.0, "text": seg.text} for seg in t.segments],
    }


def serialize_transcript(t: Transcript, format: str = FORMAT_CANONICAL_JSON) -> str:
    """Serialize ``t`` so that re-parsing yields an equal transcript.

    ``timed-lines`` output embeds a comment header noting the out-of-band
    fields for human readers; parsers skip it.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown transcript format {format!r}")
    if format == FORMAT_CANONICAL_JSON:
        return json.dumps(transcript_to_dict(t), ensure_ascii=False, indent=2) + "\n"
    lines = [
        f"# video_id={t.video_id} language={t.language} duration={_format_seconds(t.video_duration_ms)}"
    ]
    for seg in t.segments:
        lines.append(f"{_format_seconds(seg.start_ms)}|{seg.text}")
    return "\n".join(lines) + "\n"


def load_transcript(path, **kwargs) -> Transcript:
    """Read a transcript file, picking the format from the extension."""
    from pathlib import Path

    p = Path(path)
    fmt = FORMAT_CANONICAL_JSON if p.suffix.lower() == ".json" else FORMAT_TIMED_LINES
    return parse_transcript(p.read_bytes(), fmt, **kwargs)
