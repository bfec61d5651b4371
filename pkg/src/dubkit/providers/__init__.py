"""Pluggable provider contracts plus deterministic in-repo references."""

from dubkit.providers.base import (
    AudioDecodeError,
    ProviderConfig,
    ProviderError,
    ProviderRejected,
    ProviderUnavailable,
    RateLimited,
    RateLimiter,
    with_retries,
)
from dubkit.providers.similarity import (
    SimilarityScorer,
    TokenOverlapScorer,
    similarity,
    token_overlap_f1,
)
from dubkit.providers.speech import AudioAsset, MockSpeechSynthesizer, SpeechSynthesizer, synthesize
from dubkit.providers.translation import IdentityTranslator, Translator, translate
from dubkit.providers.registry import (
    UnknownProvider,
    build_scorer,
    build_synthesizer,
    build_translator,
    scorer_from_dict,
    synthesizer_from_dict,
    translator_from_dict,
)

__all__ = [
    "AudioAsset",
    "AudioDecodeError",
    "IdentityTranslator",
    "MockSpeechSynthesizer",
    "ProviderConfig",
    "ProviderError",
    "ProviderRejected",
    "ProviderUnavailable",
    "RateLimited",
    "RateLimiter",
    "SimilarityScorer",
    "SpeechSynthesizer",
    "TokenOverlapScorer",
    "Translator",
    "UnknownProvider",
    "build_scorer",
    "build_synthesizer",
    "build_translator",
    "scorer_from_dict",
    "similarity",
    "synthesize",
    "synthesizer_from_dict",
    "token_overlap_f1",
    "translate",
    "translator_from_dict",
    "with_retries",
]
