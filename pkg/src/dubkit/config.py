"""Pipeline configuration: a canonical JSON file naming providers,
threshold policies, languages, and worker counts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from dubkit.alignment import default_abbreviations, load_abbreviations
from dubkit.assembly import ToolConfig
from dubkit.confidence import DEFAULT_POLICIES, ThresholdPolicy
from dubkit.providers.registry import scorer_from_dict, synthesizer_from_dict, translator_from_dict
from dubkit.providers.similarity import SimilarityScorer
from dubkit.providers.speech import SpeechSynthesizer
from dubkit.providers.translation import Translator


class ConfigError(Exception):
    pass


@dataclass
class ProviderSet:
    """Instantiated provider clients for one pipeline run."""

    translator: Translator
    back_translator: Translator
    synthesizer: SpeechSynthesizer
    scorer: SimilarityScorer
    cosine_scorer: SimilarityScorer | None = None


@dataclass
class PipelineConfig:
    source_language: str
    target_language: str
    subject: str = "reading"
    providers: dict[str, dict[str, Any]] = field(default_factory=dict)
    policies: dict[str, dict[str, Any]] = field(default_factory=dict)
    abbreviations_path: str | None = None
    workers: int = 4
    render: bool = False
    tool: dict[str, Any] | None = None
    source_video: str | None = None

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "PipelineConfig":
        try:
            return cls(
                source_language=doc["source_language"],
                target_language=doc["target_language"],
                subject=doc.get("subject", "reading"),
                providers=doc.get("providers", {}),
                policies=doc.get("policies", {}),
                abbreviations_path=doc.get("abbreviations_path"),
                workers=int(doc.get("workers", 4)),
                render=bool(doc.get("render", False)),
                tool=doc.get("tool"),
                source_video=doc.get("source_video"),
            )
        except KeyError as exc:
            raise ConfigError(f"config lacks required field {exc.args[0]!r}") from None

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        try:
            doc = json.loads(Path(path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def build_providers(self) -> ProviderSet:
        try:
            translation = self.providers["translation"]
            speech = self.providers["speech"]
            similarity = self.providers["similarity"]
        except KeyError as exc:
            raise ConfigError(f"config names no {exc.args[0]!r} provider") from None
        translator = translator_from_dict(translation)
        # Back-translation defaults to the forward provider unless overridden.
        back_cfg = self.providers.get("back_translation")
        back_translator = translator_from_dict(back_cfg) if back_cfg else translator
        cosine_cfg = self.providers.get("cosine_similarity")
        return ProviderSet(
            translator=translator,
            back_translator=back_translator,
            synthesizer=synthesizer_from_dict(speech),
            scorer=scorer_from_dict(similarity),
            cosine_scorer=scorer_from_dict(cosine_cfg) if cosine_cfg else None,
        )

    def policy(self, subject: str | None = None) -> ThresholdPolicy:
        """Resolve the flagging policy: config override first, then the
        shipped defaults (reading and math only)."""
        subject = subject or self.subject
        override = self.policies.get(subject)
        if override is not None:
            return ThresholdPolicy(
                subject=subject,
                f1_threshold=override.get("f1_threshold"),
                cosine_threshold=override.get("cosine_threshold"),
                combination=override.get("combination", "f1-only"),
            )
        if subject in DEFAULT_POLICIES:
            return DEFAULT_POLICIES[subject]
        raise ConfigError(
            f"no threshold policy for subject {subject!r}: ship defaults cover "
            f"'reading' and 'math'; others need an explicit 'policies' entry"
        )

    def abbreviations(self):
        if self.abbreviations_path:
            return load_abbreviations(self.abbreviations_path)
        return default_abbreviations()

    def tool_config(self) -> ToolConfig:
        if not self.tool:
            return ToolConfig()
        known = {f for f in ToolConfig.__dataclass_fields__}
        kwargs = {}
        for key, value in self.tool.items():
            if key not in known:
                raise ConfigError(f"unknown tool config field {key!r}")
            kwargs[key] = tuple(value) if isinstance(value, list) else value
        return ToolConfig(**kwargs)
