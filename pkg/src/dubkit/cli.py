"""Command line entry points.

Subcommands mirror the pipeline stages an operator actually runs:

* ``run``       localize one transcript into a build directory
* ``report``    batch-run a manifest and print per-category statistics
* ``calibrate`` fit flagging thresholds from labeled score pairs
* ``publish``   seed the contribution store from a build directory
* ``crawl``     execute one crawler pass (and optionally recompile)
* ``serve``     start the contribution HTTP service

Without ``--config`` the offline provider set is used (identity translation,
silent mock speech, token-overlap scoring), which exercises every stage
without network access.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from dubkit.config import ConfigError, PipelineConfig
from dubkit.confidence import (
    calibration_report,
    calibration_report_json,
    f1_optimal_threshold,
    load_labeled_pairs,
    render_calibration_table,
)
from dubkit.pipeline import (
    STATUS_COMPLETED,
    render_category_table,
    report_to_dict,
    run_category,
    run_video,
)

# Local mocks need no throttling; the generous rate keeps demo runs instant.
OFFLINE_PROVIDERS = {
    "translation": {"name": "identity", "rate_limit": 1000.0},
    "speech": {"name": "mock", "rate_limit": 1000.0},
    "similarity": {"name": "token-overlap", "rate_limit": 1000.0},
    "cosine_similarity": {"name": "token-cosine", "rate_limit": 1000.0},
}


def _load_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        config = PipelineConfig.from_file(args.config)
    else:
        # Offline demo defaults; the identity translator keeps text as-is,
        # so distinct codes still produce a valid (trivial) round trip.
        source = getattr(args, "source", None) or "en"
        target = getattr(args, "target", None) or "es"
        config = PipelineConfig(
            source_language=source,
            target_language=target,
            providers=dict(OFFLINE_PROVIDERS),
        )
    if getattr(args, "source", None):
        config.source_language = args.source
    if getattr(args, "target", None):
        config.target_language = args.target
    if getattr(args, "subject", None):
        config.subject = args.subject
    if getattr(args, "source_video", None):
        config.source_video = args.source_video
    if getattr(args, "render", False):
        config.render = True
    return config


def _parse_kwargs(args) -> dict:
    kwargs = {}
    if getattr(args, "video_id", None):
        kwargs["video_id"] = args.video_id
    if getattr(args, "language", None):
        kwargs["language"] = args.language
    if getattr(args, "duration", None) is not None:
        kwargs["video_duration"] = args.duration
    return kwargs


def cmd_run(args) -> int:
    config = _load_config(args)
    result = run_video(args.transcript, config, args.out, parse_kwargs=_parse_kwargs(args))
    flagged = sum(1 for s in result.sentences if s.classification != "Confident")
    print(f"video:    {result.video_id}")
    print(f"status:   {result.status}")
    if result.sentences:
        print(f"sentences: {len(result.sentences)} ({flagged} flagged)")
    for kind, path in sorted(result.artifacts.items()):
        print(f"artifact: {kind}: {path}")
    if result.failure:
        print(f"failure:  {result.failure}", file=sys.stderr)
    return 0 if result.status == STATUS_COMPLETED else 1


def cmd_report(args) -> int:
    config = _load_config(args)
    reports, results = run_category(args.manifest, config, args.out)
    print(render_category_table(reports))
    failures = [r for r in results if r.status != STATUS_COMPLETED]
    if failures:
        print()
        for r in failures:
            print(f"{r.video_id}: {r.status}" + (f" ({r.failure})" if r.failure else ""))
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps([report_to_dict(r) for r in reports], indent=2, sort_keys=True) + "\n",
            "utf-8",
        )
        print(f"\nwrote {args.json_out}")
    return 0


def cmd_calibrate(args) -> int:
    labeled = load_labeled_pairs(args.labeled)
    targets = args.target_fp or [1.0, 2.0, 3.0]
    results = calibration_report(labeled, targets)
    print(render_calibration_table(results))
    threshold, best_f1 = f1_optimal_threshold(labeled)
    print(f"\nf1-optimal threshold: {threshold:.6g} (classifier F1 {best_f1:.3f})")
    if args.json_out:
        Path(args.json_out).write_text(calibration_report_json(results, targets), "utf-8")
        print(f"wrote {args.json_out}")
    return 0


def cmd_publish(args) -> int:
    from dubkit.service.publish import publish_build
    from dubkit.service.store import Store

    config = _load_config(args)
    store = Store(args.store)
    try:
        video = publish_build(
            store,
            args.build,
            config.policy(),
            source_language=config.source_language,
            target_language=config.target_language,
            title=args.title or "",
        )
        sentences = store.list_sentences(video.video_id)
        flagged = sum(1 for s in sentences if s.flagged)
        print(f"published {video.video_id}: {len(sentences)} sentences ({flagged} flagged)")
    finally:
        store.close()
    return 0


def cmd_crawl(args) -> int:
    from dubkit.service.crawler import crawler_pass, process_queued_tasks
    from dubkit.service.store import Store

    config = _load_config(args)
    providers = config.build_providers()
    store = Store(args.store)
    try:
        report = crawler_pass(store, providers)
        print(
            f"evaluated {report.evaluated}, accepted {report.accepted},"
            f" rejected {report.rejected}, superseded {report.superseded}"
        )
        for line in report.errors:
            print(f"error: {line}", file=sys.stderr)
        if report.tasks and not args.no_recompile:
            finished = process_queued_tasks(
                store, providers, tool_config=config.tool_config(), render=config.render
            )
            for task in finished:
                print(f"recompile {task.video_id}: {task.state}")
    finally:
        store.close()
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from dubkit.service import create_app
    from dubkit.service.auth import TokenAuth
    from dubkit.service.crawler import CrawlerLoop
    from dubkit.service.store import Store

    config = _load_config(args)
    providers = config.build_providers()
    store = Store(args.store)
    try:
        auth = TokenAuth.from_file(args.tokens)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"cannot load tokens from {args.tokens}: {exc}") from exc
    app = create_app(store, auth, providers)

    loop = None
    if args.interval > 0:
        loop = CrawlerLoop(
            store,
            providers,
            interval=args.interval,
            render=config.render,
            tool_config=config.tool_config(),
        )
        loop.start()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    finally:
        if loop is not None:
            loop.stop()
        store.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dubkit", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_options(p, *, languages=True):
        p.add_argument("--config", help="pipeline config JSON")
        if languages:
            p.add_argument("--source", help="source language code (overrides config)")
            p.add_argument("--target", help="target language code (overrides config)")
            p.add_argument(
                "--subject",
                choices=["reading", "math", "other"],
                help="threshold policy subject (overrides config)",
            )

    p_run = sub.add_parser("run", help="localize one transcript")
    p_run.add_argument("--transcript", required=True, help="transcript file (.json or timed-lines)")
    p_run.add_argument("--out", required=True, help="output root; artifacts land in <out>/<video_id>/")
    add_config_options(p_run)
    p_run.add_argument("--video-id", help="video id for timed-lines input")
    p_run.add_argument("--language", help="transcript language for timed-lines input")
    p_run.add_argument("--duration", type=float, help="video duration in seconds for timed-lines input")
    p_run.add_argument("--source-video", help="source video path recorded in the EDL")
    p_run.add_argument("--render", action="store_true", help="invoke the media tool after EDL emission")
    p_run.set_defaults(func=cmd_run)

    p_report = sub.add_parser("report", help="run a manifest and print category statistics")
    p_report.add_argument("--manifest", required=True, help="JSON list of {transcript, category}")
    p_report.add_argument("--out", required=True, help="output root for per-video build dirs")
    add_config_options(p_report)
    p_report.add_argument("--json-out", help="also write the report as JSON")
    p_report.set_defaults(func=cmd_report)

    p_cal = sub.add_parser("calibrate", help="fit thresholds from labeled scores")
    p_cal.add_argument("--labeled", required=True, help="JSON list of {score, is_match}")
    p_cal.add_argument(
        "--target-fp",
        type=float,
        action="append",
        help="false-positive ceiling in percent (repeatable; default 1 2 3)",
    )
    p_cal.add_argument("--json-out", help="also write results as JSON")
    p_cal.set_defaults(func=cmd_calibrate)

    p_pub = sub.add_parser("publish", help="seed the contribution store from a build dir")
    p_pub.add_argument("--build", required=True, help="per-video build directory")
    p_pub.add_argument("--store", required=True, help="sqlite database path")
    p_pub.add_argument("--title", help="human-readable video title")
    add_config_options(p_pub)
    p_pub.set_defaults(func=cmd_publish)

    p_crawl = sub.add_parser("crawl", help="run one crawler pass")
    p_crawl.add_argument("--store", required=True, help="sqlite database path")
    p_crawl.add_argument("--no-recompile", action="store_true", help="queue tasks without running them")
    p_crawl.add_argument("--render", action="store_true", help="render recompiled videos")
    add_config_options(p_crawl)
    p_crawl.set_defaults(func=cmd_crawl)

    p_serve = sub.add_parser("serve", help="start the contribution HTTP service")
    p_serve.add_argument("--store", required=True, help="sqlite database path")
    p_serve.add_argument("--tokens", required=True, help="token file: {tokens, admin_tokens}")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8400)
    p_serve.add_argument(
        "--interval",
        type=float,
        default=600.0,
        help="crawler pass interval in seconds (0 disables the background crawler)",
    )
    p_serve.add_argument("--render", action="store_true", help="render recompiled videos")
    add_config_options(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
