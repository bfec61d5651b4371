"""Translation provider contract, reference/mock implementations, and the
HTTP adapter.

The mocks keep the whole test suite and offline runs free of paid APIs: an
identity translator, a token-table dictionary, an exact-sentence mapping
(for scripted back-translations), and two adversarial translators whose
output defeats 1:1 sentence alignment.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Callable

import requests

from dubkit.providers.base import (
    ProviderClient,
    ProviderConfig,
    ProviderRejected,
    ProviderUnavailable,
    RateLimited,
)


class Translator(ProviderClient):
    """Translate document text between languages."""

    def translate(self, text: str, source: str, target: str) -> str:
        if not text:
            raise ValueError("text must be non-empty")
        if source == target:
            raise ValueError(f"source and target language are both {source!r}")
        return self._guarded(lambda: self._translate(text, source, target)).rstrip()

    def _translate(self, text: str, source: str, target: str) -> str:
        raise NotImplementedError


class IdentityTranslator(Translator):
    """Returns the input unchanged; the offline baseline."""

    def _translate(self, text, source, target):
        return text


class DictionaryTranslator(Translator):
    """Whole-token lookup against a fixed table; unknown tokens pass through.

    The table comes from ``options["table"]`` or, when absent, from the JSON
    file named by ``endpoint``.  Keys are matched lowercase; trailing
    punctuation on a token is preserved.
    """

    def __init__(self, config: ProviderConfig, **kwargs):
        super().__init__(config, **kwargs)
        table = config.options.get("table")
        if table is None:
            table = json.loads(Path(config.endpoint).read_text("utf-8"))
        self._table = {str(k).lower(): str(v) for k, v in table.items()}

    def _translate(self, text, source, target):
        out = []
        for token in text.split(" "):
            core = token.strip(".,!?;:\"'")
            repl = self._table.get(core.lower())
            out.append(token.replace(core, repl) if repl is not None and core else token)
        return " ".join(out)


class MappingTranslator(Translator):
    """Exact-text mapping with identity fallback.

    Used to script specific back-translations (e.g. a homonym confusion) in
    fixtures: forward document text falls through unchanged while one
    sentence is rewritten on the return trip.
    """

    def __init__(self, config: ProviderConfig, **kwargs):
        super().__init__(config, **kwargs)
        self._map = {str(k): str(v) for k, v in config.options.get("map", {}).items()}

    def _translate(self, text, source, target):
        return self._map.get(text, text)


class SentenceMergingTranslator(Translator):
    """Adversarial mock: erases the first sentence boundary so the split
    yields one sentence fewer than the original segment count."""

    _BOUNDARY = re.compile(r"([.!?]) ")

    def _translate(self, text, source, target):
        return self._BOUNDARY.sub(r" ", text, count=1)


class SentenceSplittingTranslator(Translator):
    """Adversarial mock: turns the first inter-word space into a sentence
    boundary, yielding one sentence more than the segment count."""

    def _translate(self, text, source, target):
        return text.replace(" ", ". ", 1)


class HttpTranslator(Translator):
    """POSTs ``{"text", "source", "target"}`` to ``endpoint`` and expects
    ``{"translation": "..."}`` back.  Adapter-specific shapes for real
    services belong in subclasses."""

    def _translate(self, text, source, target):
        return self._post({"text": text, "source": source, "target": target})

    def _post(self, payload: dict) -> str:
        headers = {}
        token = self.config.resolve_auth()
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            resp = requests.post(
                self.config.endpoint, json=payload, headers=headers, timeout=self.config.timeout
            )
        except requests.RequestException as exc:
            raise ProviderUnavailable(str(exc)) from exc
        if resp.status_code == 429:
            raise RateLimited(f"{self.config.name}: HTTP 429")
        if 400 <= resp.status_code < 500:
            raise ProviderRejected(f"{self.config.name}: HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 500:
            raise ProviderUnavailable(f"{self.config.name}: HTTP {resp.status_code}")
        try:
            return str(resp.json()["translation"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProviderUnavailable(f"{self.config.name}: malformed response") from exc


def translate(text: str, source: str, target: str, provider: Translator) -> str:
    """Function-style convenience over ``provider.translate(...)``."""
    return provider.translate(text, source, target)


TRANSLATORS: dict[str, Callable[..., Translator]] = {
    "identity": IdentityTranslator,
    "dictionary": DictionaryTranslator,
    "mapping": MappingTranslator,
    "merge-sentences": SentenceMergingTranslator,
    "split-sentences": SentenceSplittingTranslator,
    "http": HttpTranslator,
}
