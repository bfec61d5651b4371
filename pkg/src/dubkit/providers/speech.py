"""Speech synthesis contract and the offline mock provider.

The mock writes silent mono 16-bit PCM WAV at 24 kHz with a deterministic
duration model: 60 ms per character of the stripped sentence, floor 200 ms.
Real TTS services plug in behind the same contract via HTTP adapters.
"""

from __future__ import annotations

import hashlib
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import requests

from dubkit.providers.base import (
    AudioDecodeError,
    ProviderClient,
    ProviderRejected,
    ProviderUnavailable,
    RateLimited,
)

SAMPLE_RATE = 24_000
SAMPLE_WIDTH = 2  # bytes, 16-bit PCM
CHANNELS = 1

MOCK_MS_PER_CHAR = 60
MOCK_MIN_MS = 200


@dataclass(frozen=True)
class AudioAsset:
    """One synthesized sentence on disk."""

    sentence_index: int
    path: Path
    duration_ms: int
    language: str

    @property
    def duration_seconds(self) -> float:
        return self.duration_ms / 1000.0


def wav_duration_ms(path: str | Path) -> int:
    """Decode a WAV header and return its duration in milliseconds."""
    try:
        with wave.open(str(path), "rb") as wf:
            frames = wf.getnframes()
            rate = wf.getframerate()
    except (OSError, wave.Error, EOFError) as exc:
        raise AudioDecodeError(f"{path}: {exc}") from exc
    if rate <= 0:
        raise AudioDecodeError(f"{path}: invalid frame rate {rate}")
    return round(frames * 1000 / rate)


def write_silence_wav(path: Path, duration_ms: int) -> None:
    frames = duration_ms * SAMPLE_RATE // 1000
    path.parent.mkdir(parents=True, exist_ok=True)
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(CHANNELS)
        wf.setsampwidth(SAMPLE_WIDTH)
        wf.setframerate(SAMPLE_RATE)
        wf.writeframes(b"\x00" * (frames * SAMPLE_WIDTH * CHANNELS))


def asset_filename(sentence_index: int, text: str, language: str) -> str:
    digest = hashlib.sha1(f"{language}\x00{text}".encode("utf-8")).hexdigest()[:10]
    return f"{sentence_index:03d}_{digest}.wav"


class SpeechSynthesizer(ProviderClient):
    """Synthesize one sentence to an audio file and report its duration."""

    def synthesize(
        self, text: str, language: str, out_dir: str | Path, *, sentence_index: int = 0
    ) -> AudioAsset:
        if not text or not text.strip():
            raise ValueError("text must be non-empty")
        out_path = Path(out_dir) / asset_filename(sentence_index, text, language)
        if not out_path.exists():
            self._guarded(lambda: self._synthesize(text, language, out_path))
        duration = wav_duration_ms(out_path)
        return AudioAsset(
            sentence_index=sentence_index, path=out_path, duration_ms=duration, language=language
        )

    def _synthesize(self, text: str, language: str, out_path: Path) -> None:
        raise NotImplementedError


class MockSpeechSynthesizer(SpeechSynthesizer):
    """Silent waveform whose duration follows the documented mock model."""

    def _synthesize(self, text, language, out_path):
        write_silence_wav(out_path, self.mock_duration_ms(text))

    @staticmethod
    def mock_duration_ms(text: str) -> int:
        return max(MOCK_MIN_MS, MOCK_MS_PER_CHAR * len(text.strip()))


class HttpSpeechSynthesizer(SpeechSynthesizer):
    """POSTs ``{"text", "language"}`` to ``endpoint``; the response body is
    the WAV payload."""

    def _synthesize(self, text, language, out_path):
        headers = {}
        token = self.config.resolve_auth()
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = requests.post(
                self.config.endpoint,
                json={"text": text, "language": language},
                headers=headers,
                timeout=self.config.timeout,
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(str(exc)) from exc
        if resp.status_code == 429:
            raise RateLimited(f"{self.config.name}: HTTP 429")
        if 400 <= resp.status_code < 500:
            raise ProviderRejected(f"{self.config.name}: HTTP {resp.status_code}")
        if resp.status_code >= 500:
            raise ProviderUnavailable(f"{self.config.name}: HTTP {resp.status_code}")
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(resp.content)


def synthesize(
    text: str,
    language: str,
    provider: SpeechSynthesizer,
    out_dir: str | Path,
    *,
    sentence_index: int = 0,
) -> AudioAsset:
    """Function-style convenience over ``provider.synthesize(...)``."""
    return provider.synthesize(text, language, out_dir, sentence_index=sentence_index)


SYNTHESIZERS: dict[str, Callable[..., SpeechSynthesizer]] = {
    "mock": MockSpeechSynthesizer,
    "http": HttpSpeechSynthesizer,
}
