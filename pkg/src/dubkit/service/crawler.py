"""Periodic evaluation of pending contributions and video recompilation.

Each pass back-translates every pending proposal, scores it against the
sentence's original text, and promotes at most one strict winner per
sentence.  Videos with at least one acceptance get a recompile task; the
recompiler rebuilds audio, timeline, and EDL from the store's current
texts, leaving prior artifact versions on disk.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from dubkit.alignment import AlignedSentence
from dubkit.assembly import ToolConfig, emit_edl, media_tool_available, serialize_edl, assemble
from dubkit.config import ProviderSet
from dubkit.providers.base import ProviderError
from dubkit.providers.similarity import METRIC_F1
from dubkit.providers.speech import AudioAsset
from dubkit.service.store import (
    RecompileTask,
    STATE_REJECTED,
    STATE_SUPERSEDED,
    Store,
    TASK_DONE,
    TASK_FAILED,
)
from dubkit.sync import plan_timeline, serialize_plan

logger = logging.getLogger(__name__)


@dataclass
class CrawlerReport:
    """Outcome of one crawler pass; ``tasks`` lists the queued recompiles."""

    evaluated: int = 0
    accepted: int = 0
    rejected: int = 0
    superseded: int = 0
    errors: list[str] = field(default_factory=list)
    tasks: list[RecompileTask] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "evaluated": self.evaluated,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "superseded": self.superseded,
            "errors": list(self.errors),
            "tasks": [
                {"task_id": t.task_id, "video_id": t.video_id, "state": t.state}
                for t in self.tasks
            ],
        }


def crawler_pass(store: Store, providers: ProviderSet) -> CrawlerReport:
    """Score pending contributions and accept the strict winners.

    Provider failures leave the affected contributions pending for the next
    pass.  The store's pass lock keeps concurrent invocations serialized.
    """
    report = CrawlerReport()
    with store.crawler_lock:
        by_sentence: dict[str, list] = {}
        for contribution in store.pending_contributions():
            by_sentence.setdefault(contribution.sentence_id, []).append(contribution)

        accepted_by_video: dict[str, list[int]] = {}
        for sentence_id, group in by_sentence.items():
            sentence = store.get_sentence(sentence_id)
            video = store.get_video(sentence.video_id)

            scored = []
            for contribution in group:
                try:
                    back = providers.back_translator.translate(
                        contribution.proposed_text,
                        video.target_language,
                        video.source_language,
                    )
                    f1 = providers.scorer.score(sentence.original_text, back, METRIC_F1)
                except ProviderError as exc:
                    # Stays pending; the next pass retries it.
                    report.errors.append(f"contribution {contribution.contribution_id}: {exc}")
                    logger.warning(
                        "crawler: contribution %s left pending: %s",
                        contribution.contribution_id,
                        exc,
                    )
                    continue
                report.evaluated += 1
                scored.append((contribution, f1))

            if not scored:
                continue

            # Highest score wins; earliest submission, then lowest id, break ties.
            scored.sort(key=lambda cf: (-cf[1], cf[0].submitted_at, cf[0].contribution_id))
            winner, winner_f1 = scored[0]
            old_f1 = sentence.current_f1
            surpasses = old_f1 is None or winner_f1 > old_f1

            if surpasses:
                store.accept_contribution(winner.contribution_id, winner_f1)
                report.accepted += 1
                accepted_by_video.setdefault(sentence.video_id, []).append(
                    winner.contribution_id
                )
                losers = scored[1:]
            else:
                losers = scored

            for contribution, f1 in losers:
                beat_old = old_f1 is None or f1 > old_f1
                if surpasses and beat_old:
                    state = STATE_SUPERSEDED
                    report.superseded += 1
                else:
                    state = STATE_REJECTED
                    report.rejected += 1
                store.resolve_contribution(contribution.contribution_id, state, f1)

        for video_id, contribution_ids in sorted(accepted_by_video.items()):
            report.tasks.append(store.queue_recompile(video_id, contribution_ids))

    return report


def recompile(
    store: Store,
    task: RecompileTask,
    providers: ProviderSet,
    *,
    tool_config: ToolConfig | None = None,
    render: bool = False,
) -> RecompileTask:
    """Rebuild one video's artifacts from the store's current sentence texts.

    Translation and alignment are skipped (texts are authoritative in the
    store); synthesis reuses unchanged audio via content-addressed names.
    Output files carry a version suffix so prior versions stay available.
    Failures mark the task failed and leave sentences untouched.
    """
    task = store.mark_task_running(task.task_id)
    video = store.get_video(task.video_id)
    try:
        if not video.build_dir:
            raise RuntimeError(f"video {video.video_id!r} has no build directory on record")
        build_dir = Path(video.build_dir)
        sentences = store.list_sentences(video.video_id)
        if not sentences:
            raise RuntimeError(f"video {video.video_id!r} has no sentences")

        aligned = [
            AlignedSentence(
                index=s.index,
                original_text=s.original_text,
                translated_text=s.current_translation,
                slot_start_ms=s.slot_start_ms,
                slot_end_ms=s.slot_end_ms,
            )
            for s in sentences
        ]

        audio_dir = build_dir / "audio"
        assets: list[AudioAsset] = []
        for sentence in aligned:
            asset = providers.synthesizer.synthesize(
                sentence.translated_text,
                video.target_language,
                audio_dir,
                sentence_index=sentence.index,
            )
            assets.append(
                AudioAsset(
                    sentence_index=asset.sentence_index,
                    path=asset.path.relative_to(build_dir),
                    duration_ms=asset.duration_ms,
                    language=asset.language,
                )
            )

        version = video.artifact_version + 1
        plan = plan_timeline(
            aligned, assets, video.video_duration_ms, video_id=video.video_id
        )
        plan_path = build_dir / f"plan.v{version}.json"
        plan_path.write_text(serialize_plan(plan), "utf-8")

        source_video = f"{video.video_id}.mp4"
        edl = emit_edl(plan, source_video, assets)
        edl_path = build_dir / f"edl.v{version}.json"
        edl_path.write_text(serialize_edl(edl), "utf-8")
        artifact = edl_path

        if render and media_tool_available(tool_config or ToolConfig()):
            config = tool_config or ToolConfig()
            artifact = assemble(
                edl, config, build_dir, out_path=build_dir / f"out.v{version}.{config.output_ext}"
            )

        store.set_artifact(video.video_id, str(artifact), version)
        return store.finish_task(task.task_id, TASK_DONE)
    except Exception as exc:
        logger.exception("recompile of %s failed", task.video_id)
        return store.finish_task(task.task_id, TASK_FAILED, error=str(exc))


def process_queued_tasks(
    store: Store,
    providers: ProviderSet,
    *,
    tool_config: ToolConfig | None = None,
    render: bool = False,
) -> list[RecompileTask]:
    """Drain the queue one task at a time; returns finished tasks."""
    finished = []
    while True:
        task = store.claim_next_task()
        if task is None:
            return finished
        finished.append(
            recompile(store, task, providers, tool_config=tool_config, render=render)
        )


class CrawlerLoop(threading.Thread):
    """Background thread running crawler passes on a fixed interval."""

    def __init__(
        self,
        store: Store,
        providers: ProviderSet,
        *,
        interval: float = 600.0,
        render: bool = False,
        tool_config: ToolConfig | None = None,
    ):
        super().__init__(name="crawler", daemon=True)
        self.store = store
        self.providers = providers
        self.interval = interval
        self.render = render
        self.tool_config = tool_config
        self._stop = threading.Event()

    def run(self) -> None:
        while not self._stop.is_set():
            try:
                report = crawler_pass(self.store, self.providers)
                if report.tasks:
                    process_queued_tasks(
                        self.store,
                        self.providers,
                        tool_config=self.tool_config,
                        render=self.render,
                    )
            except Exception:
                logger.exception("crawler pass failed")
            self._stop.wait(self.interval)

    def stop(self, timeout: float | None = 5.0) -> None:
        self._stop.set()
        self.join(timeout=timeout)
