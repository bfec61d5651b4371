"""Shared fixture helpers: transcript builders and offline provider sets."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from dubkit.config import PipelineConfig
from dubkit.transcript import Transcript, TranscriptSegment

FAST = {"rate_limit": 100000.0}

OFFLINE_PROVIDERS = {
    "translation": {"name": "identity", **FAST},
    "speech": {"name": "mock", **FAST},
    "similarity": {"name": "token-overlap", **FAST},
    "cosine_similarity": {"name": "token-cosine", **FAST},
}

_WORDS = (
    "the quick brown fox jumps over lazy dog a small red apple sits on "
    "green table we count three four five numbers together today"
).split()


def offline_config(**overrides) -> PipelineConfig:
    providers = {k: dict(v) for k, v in OFFLINE_PROVIDERS.items()}
    providers.update(overrides.pop("providers", {}))
    return PipelineConfig(
        source_language=overrides.pop("source_language", "en"),
        target_language=overrides.pop("target_language", "es"),
        providers=providers,
        **overrides,
    )


def make_transcript(n: int = 3, *, video_id: str = "vid", start_step_ms: int = 4000) -> Transcript:
    segments = [
        TranscriptSegment(index=i, start_ms=i * start_step_ms, text=f"Sentence number {i} is spoken here.")
        for i in range(n)
    ]
    return Transcript(
        video_id=video_id,
        language="en",
        video_duration_ms=n * start_step_ms + 2000,
        segments=tuple(segments),
    )


def random_sentence(rng: random.Random, min_words: int = 2, max_words: int = 6) -> str:
    words = [rng.choice(_WORDS) for _ in range(rng.randint(min_words, max_words))]
    return " ".join(words).capitalize() + "."


def random_transcript(rng: random.Random, *, video_id: str, max_segments: int = 6) -> Transcript:
    n = rng.randint(1, max_segments)
    starts = sorted(rng.sample(range(0, 60000, 250), n))
    segments = [
        TranscriptSegment(index=i, start_ms=start, text=random_sentence(rng))
        for i, start in enumerate(starts)
    ]
    duration = starts[-1] + rng.randint(1000, 8000)
    return Transcript(
        video_id=video_id, language="en", video_duration_ms=duration, segments=tuple(segments)
    )


def write_transcript_json(path: Path, t: Transcript) -> Path:
    from dubkit.transcript import serialize_transcript

    path.write_text(serialize_transcript(t), "utf-8")
    return path


def write_manifest(path: Path, entries: list[dict]) -> Path:
    path.write_text(json.dumps(entries, indent=2) + "\n", "utf-8")
    return path


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xD0BB)
