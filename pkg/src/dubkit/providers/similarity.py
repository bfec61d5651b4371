"""Sentence-pair similarity providers.

Neural scorers (embedding-based F1 / cosine models) run out-of-process
behind a one-request-per-line JSON protocol, over a spawned subprocess's
standard streams or HTTP: request ``{"a", "b", "metric"}``, response
``{"score"}``.  A deterministic token-overlap scorer ships in-repo as the
reference f1-role provider so everything runs offline.

Reference tokenizer (fixed before implementation, against hand-tokenized
pairs): lowercase, split on whitespace, strip punctuation from token edges,
keep word-internal apostrophes so contractions stay whole ("we'd" differs
from "we'll" and from "we"); U+2019 is normalized to the ASCII apostrophe.
The score counts unique tokens: F1 = 2|A∩B| / (|A|+|B|) over token sets.
"""

from __future__ import annotations

import json
import logging
import math
import shlex
import subprocess
import threading
from typing import Callable

import requests

from dubkit.providers.base import (
    ProviderClient,
    ProviderConfig,
    ProviderRejected,
    ProviderUnavailable,
    RateLimited,
)

logger = logging.getLogger(__name__)

METRIC_F1 = "f1"
METRIC_COSINE = "cosine"
METRICS = (METRIC_F1, METRIC_COSINE)

_EDGE_PUNCT = ".,!?;:\"()[]{}«»“”‘’'`~…。！？、，"


def reference_tokens(sentence: str) -> list[str]:
    """The documented reference tokenization, in input order."""
    out = []
    for raw in sentence.lower().replace("’", "'").split():
        token = raw.strip(_EDGE_PUNCT)
        if token:
            out.append(token)
    return out


def token_overlap_f1(a: str, b: str) -> float:
    """Unique-token overlap F1 of two sentences; symmetric, in [0, 1]."""
    ta, tb = set(reference_tokens(a)), set(reference_tokens(b))
    if not ta and not tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    return 2 * len(ta & tb) / (len(ta) + len(tb))


def token_cosine(a: str, b: str) -> float:
    """Cosine similarity of token-count vectors; the cosine-role reference."""
    from collections import Counter

    ca, cb = Counter(reference_tokens(a)), Counter(reference_tokens(b))
    if not ca or not cb:
        return 1.0 if ca == cb else 0.0
    dot = sum(ca[t] * cb[t] for t in ca.keys() & cb.keys())
    na = sum(v * v for v in ca.values())
    nb = sum(v * v for v in cb.values())
    # One sqrt over the integer product keeps identical vectors at exactly 1.0.
    return dot / math.sqrt(na * nb)


def _clamp(score: float, metric: str, name: str) -> float:
    lo = 0.0 if metric == METRIC_F1 else -1.0
    if lo <= score <= 1.0:
        return score
    clamped = min(1.0, max(lo, score))
    logger.warning("provider %s returned out-of-range %s score %r; clamped to %r", name, metric, score, clamped)
    return clamped


class SimilarityScorer(ProviderClient):
    """Score a sentence pair under a metric; f1 in [0,1], cosine in [-1,1]."""

    def score(self, a: str, b: str, metric: str = METRIC_F1) -> float:
        if not a or not b:
            raise ValueError("both sentences must be non-empty")
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}")
        raw = self._guarded(lambda: self._score(a, b, metric))
        return _clamp(float(raw), metric, self.config.name)

    def _score(self, a: str, b: str, metric: str) -> float:
        raise NotImplementedError

    def close(self) -> None:  # sidecars override
        pass


class TokenOverlapScorer(SimilarityScorer):
    """In-repo reference scorer: f1 by unique-token overlap, cosine by
    token-count vectors."""

    def _score(self, a, b, metric):
        return token_overlap_f1(a, b) if metric == METRIC_F1 else token_cosine(a, b)


class TokenCosineScorer(TokenOverlapScorer):
    """Alias registered under its own name so configs read naturally when
    the cosine role is wanted."""


class SubprocessSimilarityScorer(SimilarityScorer):
    """Spawns ``endpoint`` as a sidecar and speaks the line protocol over
    its standard streams.  Non-zero exit or a malformed line raises
    ``ProviderUnavailable``; the process is restarted on the next call."""

    def __init__(self, config: ProviderConfig, **kwargs):
        super().__init__(config, **kwargs)
        self._proc: subprocess.Popen | None = None
        self._proc_lock = threading.Lock()

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            argv = shlex.split(self.config.endpoint)
            try:
                self._proc = subprocess.Popen(
                    argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                self._proc = None
                raise ProviderUnavailable(f"cannot spawn sidecar {argv!r}: {exc}") from exc
        return self._proc

    def _score(self, a, b, metric):
        with self._proc_lock:
            proc = self._ensure_proc()
            request = json.dumps({"a": a, "b": b, "metric": metric}, ensure_ascii=False)
            try:
                assert proc.stdin is not None and proc.stdout is not None
                proc.stdin.write(request + "\n")
                proc.stdin.flush()
                line = proc.stdout.readline()
            except (OSError, ValueError) as exc:
                self._terminate()
                raise ProviderUnavailable(f"sidecar I/O failed: {exc}") from exc
            if not line:
                code = proc.poll()
                self._terminate()
                raise ProviderUnavailable(f"sidecar closed its stream (exit={code})")
            try:
                return float(json.loads(line)["score"])
            except (ValueError, KeyError, TypeError) as exc:
                self._terminate()
                raise ProviderUnavailable(f"malformed sidecar line {line!r}") from exc

    def _terminate(self) -> None:
        if self._proc is not None:
            try:
                self._proc.kill()
                self._proc.wait(timeout=5)
            except OSError:
                pass
            self._proc = None

    def close(self) -> None:
        with self._proc_lock:
            if self._proc is not None and self._proc.poll() is None:
                try:
                    assert self._proc.stdin is not None
                    self._proc.stdin.close()
                    self._proc.wait(timeout=5)
                except (OSError, subprocess.TimeoutExpired):
                    self._terminate()
                    return
            self._proc = None


class HttpSimilarityScorer(SimilarityScorer):
    """POSTs one request object per call to ``endpoint``."""

    def _score(self, a, b, metric):
        headers = {}
        token = self.config.resolve_auth()
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = requests.post(
                self.config.endpoint,
                json={"a": a, "b": b, "metric": metric},
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
        try:
            return float(resp.json()["score"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"{self.config.name}: malformed response") from exc


def similarity(a: str, b: str, metric: str, provider: SimilarityScorer) -> float:
    """Function-style convenience over ``provider.score(a, b, metric)``."""
    return provider.score(a, b, metric)


SCORERS: dict[str, Callable[..., SimilarityScorer]] = {
    "token-overlap": TokenOverlapScorer,
    "token-cosine": TokenCosineScorer,
    "subprocess": SubprocessSimilarityScorer,
    "http": HttpSimilarityScorer,
}
