import json
import random

import pytest

from dubkit.transcript import (
    DurationMissing,
    EmptyTranscript,
    FORMAT_CANONICAL_JSON,
    FORMAT_TIMED_LINES,
    MalformedEntry,
    NonMonotonicTimestamps,
    Transcript,
    TranscriptError,
    TranscriptSegment,
    load_transcript,
    parse_transcript,
    seconds_to_ms,
    serialize_transcript,
)

CANONICAL = json.dumps(
    {
        "video_id": "abc123",
        "language": "en",
        "video_duration": 283.5,
        "segments": [
            {"start": 0.0, "text": "One sentence."},
            {"start": 4.25, "text": "Two sentences."},
            {"start": 9.0, "text": "Three."},
        ],
    }
)


def test_canonical_json_parses():
    t = parse_transcript(CANONICAL)
    assert t.video_id == "abc123"
    assert t.language == "en"
    assert t.video_duration_ms == 283500
    assert [s.start_ms for s in t.segments] == [0, 4250, 9000]
    assert t.segments[1].text == "Two sentences."


def test_timed_lines_parses():
    raw = "# header comment\n0.0|Hello.\n\n3.2|World.\n"
    t = parse_transcript(raw, FORMAT_TIMED_LINES, video_id="v", language="en", video_duration=10)
    assert [s.start_ms for s in t.segments] == [0, 3200]
    assert [s.text for s in t.segments] == ["Hello.", "World."]
    assert t.video_duration_ms == 10000


def test_seconds_to_ms_is_exact():
    assert seconds_to_ms(3.2) == 3200
    assert seconds_to_ms(283.5) == 283500
    assert seconds_to_ms("0.0005") == 1  # round half up at sub-ms precision
    assert seconds_to_ms(0.001) == 1
    assert seconds_to_ms(59) == 59000


def test_round_trip_both_formats():
    t = parse_transcript(CANONICAL)
    again = parse_transcript(serialize_transcript(t, FORMAT_CANONICAL_JSON))
    assert again == t
    timed = serialize_transcript(t, FORMAT_TIMED_LINES)
    again = parse_transcript(
        timed,
        FORMAT_TIMED_LINES,
        video_id=t.video_id,
        language=t.language,
        video_duration=t.video_duration_ms / 1000.0,
    )
    assert again == t


def test_random_round_trip_property():
    rng = random.Random(20260825)
    for _ in range(300):
        n = rng.randint(1, 20)
        starts = sorted(rng.sample(range(0, 4_000_000), n))
        duration_ms = starts[-1] + rng.randint(1, 600_000)
        segments = tuple(
            TranscriptSegment(
                index=i,
                start_ms=start,
                text="w" + "".join(rng.choice("abc xyz.,!?") for _ in range(rng.randint(0, 30))).strip() + "w",
            )
            for i, start in enumerate(starts)
        )
        t = Transcript(video_id="rt", language="en", video_duration_ms=duration_ms, segments=segments)
        assert parse_transcript(serialize_transcript(t)) == t
        timed = serialize_transcript(t, FORMAT_TIMED_LINES)
        assert (
            parse_transcript(
                timed, FORMAT_TIMED_LINES, video_id="rt", language="en",
                video_duration=duration_ms / 1000.0,
            )
            == t
        )


def test_empty_inputs_rejected():
    with pytest.raises(MalformedEntry):
        parse_transcript("")
    with pytest.raises(EmptyTranscript):
        parse_transcript('{"video_id": "v", "language": "en", "video_duration": 5, "segments": []}')
    with pytest.raises(EmptyTranscript):
        parse_transcript("# nothing\n\n", FORMAT_TIMED_LINES, video_duration=5)


def test_duration_required():
    with pytest.raises(DurationMissing):
        parse_transcript("0.0|Hi.", FORMAT_TIMED_LINES)
    with pytest.raises(DurationMissing):
        parse_transcript('{"video_id": "v", "language": "en", "segments": [{"start": 0, "text": "x"}]}')


def test_non_monotonic_rejected():
    doc = {
        "video_id": "v",
        "language": "en",
        "video_duration": 30,
        "segments": [{"start": 5.0, "text": "a"}, {"start": 5.0, "text": "b"}],
    }
    with pytest.raises(NonMonotonicTimestamps):
        parse_transcript(json.dumps(doc))
    doc["segments"][1]["start"] = 4.0
    with pytest.raises(NonMonotonicTimestamps):
        parse_transcript(json.dumps(doc))


def test_start_must_precede_duration():
    doc = {
        "video_id": "v",
        "language": "en",
        "video_duration": 10,
        "segments": [{"start": 10.0, "text": "too late"}],
    }
    with pytest.raises(MalformedEntry):
        parse_transcript(json.dumps(doc))


def test_malformed_segments_carry_record_index():
    doc = {
        "video_id": "v",
        "language": "en",
        "video_duration": 10,
        "segments": [{"start": 0, "text": "ok"}, {"start": 1}],
    }
    with pytest.raises(MalformedEntry) as err:
        parse_transcript(json.dumps(doc))
    assert err.value.record_index == 1


def test_blank_and_multiline_text_rejected():
    base = {"video_id": "v", "language": "en", "video_duration": 10}
    with pytest.raises(MalformedEntry):
        parse_transcript(json.dumps({**base, "segments": [{"start": 0, "text": "   "}]}))
    with pytest.raises(MalformedEntry):
        parse_transcript(json.dumps({**base, "segments": [{"start": 0, "text": "a\nb"}]}))


def test_invalid_utf8_is_malformed_not_crash():
    with pytest.raises(MalformedEntry) as err:
        parse_transcript(b"\xff\xfe\x00bad")
    assert err.value.record_index == 0


def test_timed_lines_bad_records():
    with pytest.raises(MalformedEntry):
        parse_transcript("no pipe here", FORMAT_TIMED_LINES, video_duration=5)
    with pytest.raises(MalformedEntry):
        parse_transcript("abc|text", FORMAT_TIMED_LINES, video_duration=5)


def test_segment_index_must_match_position():
    with pytest.raises(MalformedEntry):
        Transcript(
            video_id="v",
            language="en",
            video_duration_ms=5000,
            segments=(TranscriptSegment(index=1, start_ms=0, text="x"),),
        )


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        parse_transcript("{}", "srt")


def test_fuzz_random_bytes_never_crash():
    rng = random.Random(0xFADE)
    pieces = [b"{", b"}", b"[", b"]", b'"video_id"', b'"segments"', b'"start"', b'"text"',
              b":", b",", b"0.5", b"|", b"\n", b"#", b"\xff", b"\x00", b"abc", b"1e309"]
    for i in range(2000):
        blob = b"".join(rng.choice(pieces) for _ in range(rng.randint(0, 40)))
        fmt = FORMAT_CANONICAL_JSON if i % 2 == 0 else FORMAT_TIMED_LINES
        try:
            t = parse_transcript(blob, fmt, video_duration=30)
            assert isinstance(t, Transcript)
        except TranscriptError:
            pass


def test_load_transcript_picks_format_by_suffix(tmp_path):
    json_path = tmp_path / "a.json"
    json_path.write_text(CANONICAL, "utf-8")
    assert load_transcript(json_path).video_id == "abc123"

    lines_path = tmp_path / "b.txt"
    lines_path.write_text("0.0|Hi there.\n", "utf-8")
    t = load_transcript(lines_path, video_id="b", language="en", video_duration=4)
    assert t.video_id == "b"
    assert t.segments[0].text == "Hi there."
