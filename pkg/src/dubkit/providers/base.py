"""Provider plumbing shared by translation, speech, and similarity clients:
configuration records, the error taxonomy, rate limiting, and retries.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, TypeVar

logger = logging.getLogger(__name__)

KIND_TRANSLATION = "translation"
KIND_SPEECH = "speech"
KIND_SIMILARITY = "similarity"

DEFAULT_RETRY_ATTEMPTS = 5
DEFAULT_RETRY_BASE_DELAY = 1.0
DEFAULT_RETRY_FACTOR = 2.0


class ProviderError(Exception):
    """Base class for provider call failures."""


class ProviderUnavailable(ProviderError):
    """Network failure, timeout, or 5xx-class response; retryable."""


class ProviderRejected(ProviderError):
    """4xx-class response; the request is wrong, never retried."""


class RateLimited(ProviderError):
    """Remote rate limit hit; the caller must back off before retrying."""


class AudioDecodeError(ProviderError):
    """An audio file was written but its duration could not be read."""


@dataclass(frozen=True)
class ProviderConfig:
    """How to reach one external provider.

    ``endpoint`` is a URL for HTTP providers or a command line for sidecar
    subprocesses; ``auth`` is an opaque secret reference (``env:NAME`` reads
    an environment variable).  ``options`` carries adapter-specific settings
    such as a dictionary-translator table.
    """

    kind: str
    name: str
    endpoint: str = ""
    auth: str | None = None
    rate_limit: float = 10.0
    timeout: float = 30.0
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ValueError(f"rate_limit must be positive, got {self.rate_limit}")
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")

    def resolve_auth(self) -> str | None:
        if self.auth and self.auth.startswith("env:"):
            return os.environ.get(self.auth[4:])
        return self.auth


class RateLimiter:
    """Serializes calls so that N of them span at least (N-1)/rate seconds."""

    def __init__(self, rate_per_second: float, *, clock=time.monotonic, sleep=time.sleep):
        if rate_per_second <= 0:
            raise ValueError("rate must be positive")
        self._interval = 1.0 / rate_per_second
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_slot = 0.0

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            slot = max(now, self._next_slot)
            self._next_slot = slot + self._interval
            delay = slot - now
        if delay > 0:
            self._sleep(delay)


T = TypeVar("T")


def with_retries(
    fn: Callable[[], T],
    *,
    attempts: int = DEFAULT_RETRY_ATTEMPTS,
    base_delay: float = DEFAULT_RETRY_BASE_DELAY,
    factor: float = DEFAULT_RETRY_FACTOR,
    sleep: Callable[[float], None] = time.sleep,
) -> T:
    """Run ``fn``, retrying transient failures with exponential backoff.

    ``ProviderUnavailable`` and ``RateLimited`` are retried (delays 1, 2, 4,
    8 s by default); ``ProviderRejected`` propagates immediately.
    """
    delay = base_delay
    for attempt in range(1, attempts + 1):
        try:
            return fn()
        except (ProviderUnavailable, RateLimited) as exc:
            if attempt == attempts:
                raise
            logger.warning("provider call failed (attempt %d/%d): %s", attempt, attempts, exc)
            sleep(delay)
            delay *= factor
    raise AssertionError("unreachable")


class ProviderClient:
    """Base for provider clients: owns the config and the rate limiter.

    ``_guarded`` wraps one raw provider call with rate limiting and the
    retry policy; subclasses route their operations through it.
    """

    def __init__(self, config: ProviderConfig, *, sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self._sleep = sleep
        self._limiter = RateLimiter(config.rate_limit, sleep=sleep)

    def _guarded(self, fn: Callable[[], T]) -> T:
        def attempt() -> T:
            self._limiter.acquire()
            return fn()

        return with_retries(attempt, sleep=self._sleep)
