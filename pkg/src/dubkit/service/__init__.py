"""Persistence, crawler, and HTTP API for crowdsourced translation review."""

from dubkit.service.auth import Forbidden, TokenAuth, Unauthenticated
from dubkit.service.crawler import (
    CrawlerLoop,
    CrawlerReport,
    crawler_pass,
    process_queued_tasks,
    recompile,
)
from dubkit.service.publish import publish_build
from dubkit.service.store import (
    Contribution,
    EmptyProposal,
    InvalidTransition,
    NoOpProposal,
    RecompileTask,
    SentenceRecord,
    ServiceError,
    Store,
    UnknownContribution,
    UnknownSentence,
    UnknownTask,
    UnknownVideo,
    VideoRecord,
    sentence_id_for,
)

__all__ = [
    "Contribution",
    "CrawlerLoop",
    "CrawlerReport",
    "EmptyProposal",
    "Forbidden",
    "InvalidTransition",
    "NoOpProposal",
    "RecompileTask",
    "SentenceRecord",
    "ServiceError",
    "Store",
    "TokenAuth",
    "Unauthenticated",
    "UnknownContribution",
    "UnknownSentence",
    "UnknownTask",
    "UnknownVideo",
    "VideoRecord",
    "crawler_pass",
    "create_app",
    "process_queued_tasks",
    "publish_build",
    "recompile",
    "sentence_id_for",
]


def create_app(*args, **kwargs):
    # Imported lazily so the core pipeline works without fastapi installed.
    from dubkit.service.app import create_app as _create_app

    return _create_app(*args, **kwargs)
