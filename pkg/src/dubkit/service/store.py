"""Embedded relational store for the contribution service.

One sqlite3 database holds videos, their sentences, user contributions,
recompile tasks, and an append-only audit log.  All mutations run inside a
process-wide lock plus a sqlite transaction, so concurrent HTTP handlers
and the crawler see serialized state.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

STATE_PENDING = "pending"
STATE_ACCEPTED = "accepted"
STATE_REJECTED = "rejected"
STATE_SUPERSEDED = "superseded"

TASK_QUEUED = "queued"
TASK_RUNNING = "running"
TASK_DONE = "done"
TASK_FAILED = "failed"


class ServiceError(Exception):
    """Base for service-level failures; carries an HTTP-ready status."""

    status = 500

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}


class UnknownVideo(ServiceError):
    status = 404


class UnknownSentence(ServiceError):
    status = 404


class UnknownContribution(ServiceError):
    status = 404


class UnknownTask(ServiceError):
    status = 404


class EmptyProposal(ServiceError):
    status = 422


class NoOpProposal(ServiceError):
    status = 422


class InvalidTransition(ServiceError):
    status = 409


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    title: str
    source_language: str
    target_language: str
    subject: str
    f1_threshold: float
    video_duration_ms: int
    build_dir: str | None
    artifact_path: str | None
    artifact_version: int
    published_at: str


@dataclass(frozen=True)
class SentenceRecord:
    sentence_id: str
    video_id: str
    index: int
    original_text: str
    current_translation: str
    current_f1: float | None
    flagged: bool
    version: int
    slot_start_ms: int
    slot_end_ms: int


@dataclass(frozen=True)
class Contribution:
    contribution_id: int
    sentence_id: str
    user_id: str
    proposed_text: str
    submitted_at: str
    round_trip_f1: float | None
    state: str


@dataclass(frozen=True)
class RecompileTask:
    task_id: int
    video_id: str
    triggered_by: tuple[int, ...]
    state: str
    created_at: str
    updated_at: str
    error: str | None = None


def sentence_id_for(video_id: str, index: int) -> str:
    return f"{video_id}:{index}"


_SCHEMA = """
CREATE TABLE IF NOT EXISTS videos (
    video_id TEXT PRIMARY KEY,
    title TEXT NOT NULL DEFAULT '',
    source_language TEXT NOT NULL,
    target_language TEXT NOT NULL,
    subject TEXT NOT NULL,
    f1_threshold REAL NOT NULL,
    video_duration_ms INTEGER NOT NULL,
    build_dir TEXT,
    artifact_path TEXT,
    artifact_version INTEGER NOT NULL DEFAULT 0,
    published_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sentences (
    sentence_id TEXT PRIMARY KEY,
    video_id TEXT NOT NULL REFERENCES videos(video_id),
    idx INTEGER NOT NULL,
    original_text TEXT NOT NULL,
    current_translation TEXT NOT NULL,
    current_f1 REAL,
    flagged INTEGER NOT NULL,
    version INTEGER NOT NULL DEFAULT 1,
    slot_start_ms INTEGER NOT NULL,
    slot_end_ms INTEGER NOT NULL,
    UNIQUE(video_id, idx)
);
CREATE TABLE IF NOT EXISTS contributions (
    contribution_id INTEGER PRIMARY KEY AUTOINCREMENT,
    sentence_id TEXT NOT NULL REFERENCES sentences(sentence_id),
    user_id TEXT NOT NULL,
    proposed_text TEXT NOT NULL,
    submitted_at TEXT NOT NULL,
    round_trip_f1 REAL,
    state TEXT NOT NULL DEFAULT 'pending',
    UNIQUE(sentence_id, user_id, proposed_text)
);
CREATE TABLE IF NOT EXISTS tasks (
    task_id INTEGER PRIMARY KEY AUTOINCREMENT,
    video_id TEXT NOT NULL REFERENCES videos(video_id),
    triggered_by TEXT NOT NULL DEFAULT '[]',
    state TEXT NOT NULL DEFAULT 'queued',
    created_at TEXT NOT NULL,
    updated_at TEXT NOT NULL,
    error TEXT
);
CREATE UNIQUE INDEX IF NOT EXISTS one_active_task_per_video
    ON tasks(video_id) WHERE state IN ('queued', 'running');
CREATE TABLE IF NOT EXISTS audit_log (
    entry_id INTEGER PRIMARY KEY AUTOINCREMENT,
    at TEXT NOT NULL,
    actor TEXT NOT NULL,
    action TEXT NOT NULL,
    sentence_id TEXT,
    video_id TEXT,
    details TEXT NOT NULL DEFAULT '{}'
);
"""


class Store:
    """Thread-safe persistence facade over sqlite3.

    Pass ``":memory:"`` for throwaway test stores.  ``clock`` is injectable
    so tests can pin timestamps; it must return an aware UTC datetime.
    """

    def __init__(self, path: str | Path = ":memory:", *, clock=None):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA foreign_keys = ON")
        self._lock = threading.RLock()
        self.crawler_lock = threading.Lock()
        self._clock = clock or (lambda: datetime.now(timezone.utc))
        with self._lock, self._conn:
            self._conn.executescript(_SCHEMA)

    def close(self) -> None:
        self._conn.close()

    def _now(self) -> str:
        return self._clock().isoformat()

    # -- videos --------------------------------------------------------

    def add_video(
        self,
        video_id: str,
        *,
        source_language: str,
        target_language: str,
        subject: str,
        f1_threshold: float,
        video_duration_ms: int,
        title: str = "",
        build_dir: str | None = None,
    ) -> VideoRecord:
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO videos (video_id, title, source_language,"
                " target_language, subject, f1_threshold, video_duration_ms,"
                " build_dir, artifact_path, artifact_version, published_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?, NULL, 0, ?)",
                (
                    video_id,
                    title,
                    source_language,
                    target_language,
                    subject,
                    f1_threshold,
                    video_duration_ms,
                    build_dir,
                    self._now(),
                ),
            )
        return self.get_video(video_id)

    def get_video(self, video_id: str) -> VideoRecord:
        row = self._conn.execute(
            "SELECT * FROM videos WHERE video_id = ?", (video_id,)
        ).fetchone()
        if row is None:
            raise UnknownVideo(f"no video {video_id!r}")
        return _video_from_row(row)

    def list_videos(self) -> list[dict]:
        rows = self._conn.execute(
            "SELECT v.*, COUNT(s.sentence_id) AS sentence_count,"
            " COALESCE(SUM(s.flagged), 0) AS flagged_count"
            " FROM videos v LEFT JOIN sentences s ON s.video_id = v.video_id"
            " GROUP BY v.video_id ORDER BY v.video_id"
        ).fetchall()
        out = []
        for row in rows:
            record = _video_from_row(row)
            out.append(
                {
                    "video_id": record.video_id,
                    "title": record.title,
                    "source_language": record.source_language,
                    "target_language": record.target_language,
                    "subject": record.subject,
                    "sentence_count": row["sentence_count"],
                    "flagged_count": row["flagged_count"],
                    "artifact_version": record.artifact_version,
                }
            )
        return out

    def set_artifact(self, video_id: str, path: str, version: int) -> None:
        with self._lock, self._conn:
            cur = self._conn.execute(
                "UPDATE videos SET artifact_path = ?, artifact_version = ? WHERE video_id = ?",
                (path, version, video_id),
            )
            if cur.rowcount == 0:
                raise UnknownVideo(f"no video {video_id!r}")

    # -- sentences ------------------------------------------------------

    def add_sentence(
        self,
        video_id: str,
        index: int,
        *,
        original_text: str,
        current_translation: str,
        current_f1: float | None,
        slot_start_ms: int,
        slot_end_ms: int,
    ) -> SentenceRecord:
        video = self.get_video(video_id)
        flagged = current_f1 is None or current_f1 < video.f1_threshold
        sid = sentence_id_for(video_id, index)
        with self._lock, self._conn:
            self._conn.execute(
                "INSERT OR REPLACE INTO sentences (sentence_id, video_id, idx,"
                " original_text, current_translation, current_f1, flagged,"
                " version, slot_start_ms, slot_end_ms)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, 1, ?, ?)",
                (
                    sid,
                    video_id,
                    index,
                    original_text,
                    current_translation,
                    current_f1,
                    int(flagged),
                    slot_start_ms,
                    slot_end_ms,
                ),
            )
        return self.get_sentence(sid)

    def get_sentence(self, sentence_id: str) -> SentenceRecord:
        row = self._conn.execute(
            "SELECT * FROM sentences WHERE sentence_id = ?", (sentence_id,)
        ).fetchone()
        if row is None:
            raise UnknownSentence(f"no sentence {sentence_id!r}")
        return _sentence_from_row(row)

    def list_sentences(self, video_id: str) -> list[SentenceRecord]:
        self.get_video(video_id)
        rows = self._conn.execute(
            "SELECT * FROM sentences WHERE video_id = ? ORDER BY idx", (video_id,)
        ).fetchall()
        return [_sentence_from_row(r) for r in rows]

    # -- contributions --------------------------------------------------

    def submit_contribution(self, sentence_id: str, user_id: str, proposed_text: str) -> Contribution:
        if not proposed_text or not proposed_text.strip():
            raise EmptyProposal("proposed_text must be non-empty")
        proposed_text = proposed_text.strip()
        sentence = self.get_sentence(sentence_id)
        if proposed_text == sentence.current_translation:
            raise NoOpProposal("proposed_text equals the current translation")
        with self._lock, self._conn:
            existing = self._conn.execute(
                "SELECT * FROM contributions WHERE sentence_id = ? AND user_id = ?"
                " AND proposed_text = ?",
                (sentence_id, user_id, proposed_text),
            ).fetchone()
            if existing is not None:
                return _contribution_from_row(existing)
            cur = self._conn.execute(
                "INSERT INTO contributions (sentence_id, user_id, proposed_text,"
                " submitted_at, state) VALUES (?, ?, ?, ?, 'pending')",
                (sentence_id, user_id, proposed_text, self._now()),
            )
            contribution_id = cur.lastrowid
        return self.get_contribution(contribution_id)

    def get_contribution(self, contribution_id: int) -> Contribution:
        row = self._conn.execute(
            "SELECT * FROM contributions WHERE contribution_id = ?", (contribution_id,)
        ).fetchone()
        if row is None:
            raise UnknownContribution(f"no contribution {contribution_id}")
        return _contribution_from_row(row)

    def contributions_for_user(self, user_id: str) -> list[Contribution]:
        rows = self._conn.execute(
            "SELECT * FROM contributions WHERE user_id = ? ORDER BY contribution_id",
            (user_id,),
        ).fetchall()
        return [_contribution_from_row(r) for r in rows]

    def pending_contributions(self) -> list[Contribution]:
        rows = self._conn.execute(
            "SELECT * FROM contributions WHERE state = 'pending'"
            " ORDER BY sentence_id, submitted_at, contribution_id"
        ).fetchall()
        return [_contribution_from_row(r) for r in rows]

    def accept_contribution(self, contribution_id: int, round_trip_f1: float) -> SentenceRecord:
        """Promote a pending contribution: rewrite the sentence, bump its
        version, re-evaluate the flag, and audit the change.  Quality is
        monotone: acceptance at or below the current score is refused.
        """
        with self._lock, self._conn:
            contribution = self.get_contribution(contribution_id)
            if contribution.state != STATE_PENDING:
                raise InvalidTransition(
                    f"contribution {contribution_id} is {contribution.state}, not pending"
                )
            sentence = self.get_sentence(contribution.sentence_id)
            if sentence.current_f1 is not None and round_trip_f1 <= sentence.current_f1:
                raise InvalidTransition(
                    f"score {round_trip_f1} does not surpass current {sentence.current_f1}"
                )
            video = self.get_video(sentence.video_id)
            flagged = round_trip_f1 < video.f1_threshold
            self._conn.execute(
                "UPDATE sentences SET current_translation = ?, current_f1 = ?,"
                " flagged = ?, version = version + 1 WHERE sentence_id = ?",
                (
                    contribution.proposed_text,
                    round_trip_f1,
                    int(flagged),
                    sentence.sentence_id,
                ),
            )
            self._conn.execute(
                "UPDATE contributions SET state = 'accepted', round_trip_f1 = ?"
                " WHERE contribution_id = ?",
                (round_trip_f1, contribution_id),
            )
            self._audit_locked(
                actor=contribution.user_id,
                action="contribution-accepted",
                sentence_id=sentence.sentence_id,
                video_id=sentence.video_id,
                details={
                    "contribution_id": contribution_id,
                    "old_text": sentence.current_translation,
                    "new_text": contribution.proposed_text,
                    "old_f1": sentence.current_f1,
                    "new_f1": round_trip_f1,
                    "old_version": sentence.version,
                    "new_version": sentence.version + 1,
                },
            )
        return self.get_sentence(contribution.sentence_id)

    def resolve_contribution(self, contribution_id: int, state: str, round_trip_f1: float | None) -> None:
        """Close out a losing contribution as rejected or superseded."""
        if state not in (STATE_REJECTED, STATE_SUPERSEDED):
            raise ValueError(f"resolve_contribution cannot set state {state!r}")
        with self._lock, self._conn:
            contribution = self.get_contribution(contribution_id)
            if contribution.state != STATE_PENDING:
                raise InvalidTransition(
                    f"contribution {contribution_id} is {contribution.state}, not pending"
                )
            self._conn.execute(
                "UPDATE contributions SET state = ?, round_trip_f1 = ?"
                " WHERE contribution_id = ?",
                (state, round_trip_f1, contribution_id),
            )
            self._audit_locked(
                actor=contribution.user_id,
                action=f"contribution-{state}",
                sentence_id=contribution.sentence_id,
                details={"contribution_id": contribution_id, "round_trip_f1": round_trip_f1},
            )

    # -- recompile tasks -------------------------------------------------

    def queue_recompile(self, video_id: str, triggered_by: list[int]) -> RecompileTask:
        """Queue a task, or fold the trigger list into the video's existing
        queued task.  The partial unique index guarantees at most one
        queued-or-running task per video even across processes.
        """
        self.get_video(video_id)
        now = self._now()
        with self._lock, self._conn:
            active = self._conn.execute(
                "SELECT * FROM tasks WHERE video_id = ? AND state IN ('queued', 'running')",
                (video_id,),
            ).fetchone()
            if active is not None:
                merged = sorted(set(json.loads(active["triggered_by"])) | set(triggered_by))
                self._conn.execute(
                    "UPDATE tasks SET triggered_by = ?, updated_at = ? WHERE task_id = ?",
                    (json.dumps(merged), now, active["task_id"]),
                )
                return self.get_task(active["task_id"])
            cur = self._conn.execute(
                "INSERT INTO tasks (video_id, triggered_by, state, created_at, updated_at)"
                " VALUES (?, ?, 'queued', ?, ?)",
                (video_id, json.dumps(sorted(set(triggered_by))), now, now),
            )
            task_id = cur.lastrowid
            self._audit_locked(
                actor="crawler",
                action="recompile-queued",
                video_id=video_id,
                details={"task_id": task_id, "triggered_by": sorted(set(triggered_by))},
            )
        return self.get_task(task_id)

    def get_task(self, task_id: int) -> RecompileTask:
        row = self._conn.execute("SELECT * FROM tasks WHERE task_id = ?", (task_id,)).fetchone()
        if row is None:
            raise UnknownTask(f"no task {task_id}")
        return _task_from_row(row)

    def list_tasks(self, video_id: str | None = None) -> list[RecompileTask]:
        if video_id is None:
            rows = self._conn.execute("SELECT * FROM tasks ORDER BY task_id").fetchall()
        else:
            rows = self._conn.execute(
                "SELECT * FROM tasks WHERE video_id = ? ORDER BY task_id", (video_id,)
            ).fetchall()
        return [_task_from_row(r) for r in rows]

    def mark_task_running(self, task_id: int) -> RecompileTask:
        with self._lock, self._conn:
            task = self.get_task(task_id)
            if task.state == TASK_RUNNING:
                return task
            if task.state != TASK_QUEUED:
                raise InvalidTransition(f"task {task_id} is {task.state}, not queued")
            self._conn.execute(
                "UPDATE tasks SET state = 'running', updated_at = ? WHERE task_id = ?",
                (self._now(), task_id),
            )
        return self.get_task(task_id)

    def claim_next_task(self) -> RecompileTask | None:
        with self._lock, self._conn:
            row = self._conn.execute(
                "SELECT * FROM tasks WHERE state = 'queued' ORDER BY task_id LIMIT 1"
            ).fetchone()
            if row is None:
                return None
            self._conn.execute(
                "UPDATE tasks SET state = 'running', updated_at = ? WHERE task_id = ?",
                (self._now(), row["task_id"]),
            )
        return self.get_task(row["task_id"])

    def finish_task(self, task_id: int, state: str, *, error: str | None = None) -> RecompileTask:
        if state not in (TASK_DONE, TASK_FAILED):
            raise ValueError(f"finish_task cannot set state {state!r}")
        with self._lock, self._conn:
            task = self.get_task(task_id)
            if task.state != TASK_RUNNING:
                raise InvalidTransition(f"task {task_id} is {task.state}, not running")
            self._conn.execute(
                "UPDATE tasks SET state = ?, error = ?, updated_at = ? WHERE task_id = ?",
                (state, error, self._now(), task_id),
            )
            self._audit_locked(
                actor="recompiler",
                action=f"recompile-{state}",
                video_id=task.video_id,
                details={"task_id": task_id, "error": error},
            )
        return self.get_task(task_id)

    # -- audit ------------------------------------------------------------

    def _audit_locked(self, *, actor, action, sentence_id=None, video_id=None, details=None):
        self._conn.execute(
            "INSERT INTO audit_log (at, actor, action, sentence_id, video_id, details)"
            " VALUES (?, ?, ?, ?, ?, ?)",
            (self._now(), actor, action, sentence_id, video_id, json.dumps(details or {})),
        )

    def audit(self, *, actor, action, sentence_id=None, video_id=None, details=None) -> None:
        with self._lock, self._conn:
            self._audit_locked(
                actor=actor,
                action=action,
                sentence_id=sentence_id,
                video_id=video_id,
                details=details,
            )

    def audit_entries(self, *, sentence_id: str | None = None, action: str | None = None) -> list[dict]:
        query = "SELECT * FROM audit_log"
        clauses, params = [], []
        if sentence_id is not None:
            clauses.append("sentence_id = ?")
            params.append(sentence_id)
        if action is not None:
            clauses.append("action = ?")
            params.append(action)
        if clauses:
            query += " WHERE " + " AND ".join(clauses)
        query += " ORDER BY entry_id"
        rows = self._conn.execute(query, params).fetchall()
        return [
            {
                "entry_id": r["entry_id"],
                "at": r["at"],
                "actor": r["actor"],
                "action": r["action"],
                "sentence_id": r["sentence_id"],
                "video_id": r["video_id"],
                "details": json.loads(r["details"]),
            }
            for r in rows
        ]


def _video_from_row(row: sqlite3.Row) -> VideoRecord:
    return VideoRecord(
        video_id=row["video_id"],
        title=row["title"],
        source_language=row["source_language"],
        target_language=row["target_language"],
        subject=row["subject"],
        f1_threshold=row["f1_threshold"],
        video_duration_ms=row["video_duration_ms"],
        build_dir=row["build_dir"],
        artifact_path=row["artifact_path"],
        artifact_version=row["artifact_version"],
        published_at=row["published_at"],
    )


def _sentence_from_row(row: sqlite3.Row) -> SentenceRecord:
    return SentenceRecord(
        sentence_id=row["sentence_id"],
        video_id=row["video_id"],
        index=row["idx"],
        original_text=row["original_text"],
        current_translation=row["current_translation"],
        current_f1=row["current_f1"],
        flagged=bool(row["flagged"]),
        version=row["version"],
        slot_start_ms=row["slot_start_ms"],
        slot_end_ms=row["slot_end_ms"],
    )


def _contribution_from_row(row: sqlite3.Row) -> Contribution:
    return Contribution(
        contribution_id=row["contribution_id"],
        sentence_id=row["sentence_id"],
        user_id=row["user_id"],
        proposed_text=row["proposed_text"],
        submitted_at=row["submitted_at"],
        round_trip_f1=row["round_trip_f1"],
        state=row["state"],
    )


def _task_from_row(row: sqlite3.Row) -> RecompileTask:
    return RecompileTask(
        task_id=row["task_id"],
        video_id=row["video_id"],
        triggered_by=tuple(json.loads(row["triggered_by"])),
        state=row["state"],
        created_at=row["created_at"],
        updated_at=row["updated_at"],
        error=row["error"],
    )
