"""Build provider clients from configuration records."""

from __future__ import annotations

from typing import Any

from dubkit.providers.base import (
    KIND_SIMILARITY,
    KIND_SPEECH,
    KIND_TRANSLATION,
    ProviderConfig,
)
from dubkit.providers.similarity import SCORERS, SimilarityScorer
from dubkit.providers.speech import SYNTHESIZERS, SpeechSynthesizer
from dubkit.providers.translation import TRANSLATORS, Translator


class UnknownProvider(Exception):
    pass


def provider_config_from_dict(kind: str, data: dict[str, Any]) -> ProviderConfig:
    known = {"name", "endpoint", "auth", "rate_limit", "timeout"}
    options = {k: v for k, v in data.items() if k not in known and k != "kind"}
    return ProviderConfig(
        kind=kind,
        name=str(data["name"]),
        endpoint=str(data.get("endpoint", "")),
        auth=data.get("auth"),
        rate_limit=float(data.get("rate_limit", 10.0)),
        timeout=float(data.get("timeout", 30.0)),
        options=options,
    )


def build_translator(config: ProviderConfig, **kwargs) -> Translator:
    try:
        cls = TRANSLATORS[config.name]
    except KeyError:
        raise UnknownProvider(f"no translation provider named {config.name!r}") from None
    return cls(config, **kwargs)


def build_synthesizer(config: ProviderConfig, **kwargs) -> SpeechSynthesizer:
    try:
        cls = SYNTHESIZERS[config.name]
    except KeyError:
        raise UnknownProvider(f"no speech provider named {config.name!r}") from None
    return cls(config, **kwargs)


def build_scorer(config: ProviderConfig, **kwargs) -> SimilarityScorer:
    try:
        cls = SCORERS[config.name]
    except KeyError:
        raise UnknownProvider(f"no similarity provider named {config.name!r}") from None
    return cls(config, **kwargs)


def translator_from_dict(data: dict[str, Any], **kwargs) -> Translator:
    return build_translator(provider_config_from_dict(KIND_TRANSLATION, data), **kwargs)


def synthesizer_from_dict(data: dict[str, Any], **kwargs) -> SpeechSynthesizer:
    return build_synthesizer(provider_config_from_dict(KIND_SPEECH, data), **kwargs)


def scorer_from_dict(data: dict[str, Any], **kwargs) -> SimilarityScorer:
    return build_scorer(provider_config_from_dict(KIND_SIMILARITY, data), **kwargs)
