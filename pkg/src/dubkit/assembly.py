"""Edit-decision-list emission and the external media tool driver.

The EDL is the testable boundary: a deterministic, serializable transcript
of the sync plan (play-segment / hold-frame ops on the video track,
audio-clip / silence ops on the audio track).  Rendering shells out to an
ffmpeg-style tool through a command template; all logic this side of the
subprocess is verifiable without media codecs.
"""

from __future__ import annotations

import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from dubkit.providers.speech import SAMPLE_RATE, AudioAsset
from dubkit.sync import SyncPlan

OP_PLAY = "play-segment"
OP_HOLD = "hold-frame"
OP_AUDIO = "audio-clip"
OP_SILENCE = "silence"


class MissingAsset(Exception):
    """A plan entry references an audio asset that was not supplied."""


class ToolFailure(Exception):
    """The media tool is unusable: missing inputs, missing binary, or a
    non-zero exit (stderr attached)."""


class DurationDrift(Exception):
    """The rendered container duration strayed from the planned duration."""


@dataclass(frozen=True)
class EditDecisionList:
    """Ordered assembly instructions for one video; params in milliseconds."""

    video_id: str
    source_video: str
    ops: tuple[dict, ...]


def emit_edl(
    p: SyncPlan, source_video: str | Path, audio_assets: list[AudioAsset]
) -> EditDecisionList:
    """Transcribe a sync plan into assembly ops.

    Identical inputs yield byte-identical serialized EDLs.  Every entry's
    audio reference must resolve to a supplied asset record.
    """
    by_index = {a.sentence_index: a for a in audio_assets}
    ops: list[dict] = []
    if p.pre_roll_ms > 0:
        ops.append({"kind": OP_PLAY, "start_ms": 0, "end_ms": p.pre_roll_ms})
        ops.append({"kind": OP_SILENCE, "duration_ms": p.pre_roll_ms})
    for entry in p.entries:
        asset = by_index.get(entry.sentence_index)
        if asset is None or str(asset.path) != entry.audio_path:
            raise MissingAsset(
                f"no audio asset for sentence {entry.sentence_index} at {entry.audio_path!r}"
            )
        ops.append({"kind": OP_PLAY, "start_ms": entry.source_start_ms, "end_ms": entry.source_end_ms})
        if entry.freeze_ms > 0:
            ops.append({"kind": OP_HOLD, "at_ms": entry.source_end_ms, "duration_ms": entry.freeze_ms})
        ops.append({"kind": OP_AUDIO, "path": entry.audio_path, "duration_ms": entry.audio_duration_ms})
        if entry.pause_ms > 0:
            ops.append({"kind": OP_SILENCE, "duration_ms": entry.pause_ms})
    return EditDecisionList(video_id=p.video_id, source_video=str(source_video), ops=tuple(ops))


def track_durations(edl: EditDecisionList) -> dict[str, int]:
    video = audio = 0
    for op in edl.ops:
        if op["kind"] == OP_PLAY:
            video += op["end_ms"] - op["start_ms"]
        elif op["kind"] == OP_HOLD:
            video += op["duration_ms"]
        elif op["kind"] == OP_AUDIO:
            audio += op["duration_ms"]
        elif op["kind"] == OP_SILENCE:
            audio += op["duration_ms"]
    return {"video_track_ms": video, "audio_track_ms": audio}


def edl_to_dict(edl: EditDecisionList) -> dict:
    return {
        "video_id": edl.video_id,
        "source_video": edl.source_video,
        "ops": list(edl.ops),
    }


def edl_from_dict(doc: dict) -> EditDecisionList:
    return EditDecisionList(
        video_id=doc["video_id"],
        source_video=doc["source_video"],
        ops=tuple(dict(op) for op in doc["ops"]),
    )


def serialize_edl(edl: EditDecisionList) -> str:
    return json.dumps(edl_to_dict(edl), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def load_edl(path: str | Path) -> EditDecisionList:
    return edl_from_dict(json.loads(Path(path).read_text("utf-8")))


DEFAULT_COMMAND_TEMPLATE = [
    "{tool}",
    "-y",
    "-hide_banner",
    "-loglevel",
    "error",
    "{input_args}",
    "-filter_complex_script",
    "{script}",
    "-map",
    "[vout]",
    "-map",
    "[aout]",
    "{codec_args}",
    "{output}",
]

DEFAULT_PROBE_TEMPLATE = [
    "{probe}",
    "-v",
    "error",
    "-show_entries",
    "format=duration",
    "-of",
    "csv=p=0",
    "{output}",
]

DEFAULT_CODEC_ARGS = ["-c:v", "libx264", "-pix_fmt", "yuv420p", "-c:a", "aac", "-ar", str(SAMPLE_RATE)]


@dataclass(frozen=True)
class ToolConfig:
    """External media processor invocation, web-playable defaults."""

    tool: str = "ffmpeg"
    probe: str = "ffprobe"
    output_ext: str = "mp4"
    command_template: tuple[str, ...] = tuple(DEFAULT_COMMAND_TEMPLATE)
    probe_template: tuple[str, ...] = tuple(DEFAULT_PROBE_TEMPLATE)
    codec_args: tuple[str, ...] = tuple(DEFAULT_CODEC_ARGS)
    duration_tolerance_ms: int = 50


def _sec(ms: int) -> str:
    return f"{ms // 1000}.{ms % 1000:03d}"


def build_filter_script(edl: EditDecisionList) -> str:
    """Render the EDL as an ffmpeg filter graph (deterministic text).

    Input 0 is the source video; audio clips are inputs 1.. in first-use
    order (see :func:`audio_input_paths`).
    """
    input_index = {path: i + 1 for i, path in enumerate(audio_input_paths(edl))}
    video_chains: list[str] = []
    audio_chains: list[str] = []
    lines: list[str] = []
    pending_audio = False
    for op in edl.ops:
        kind = op["kind"]
        if kind == OP_PLAY:
            label = f"v{len(video_chains)}"
            lines.append(
                f"[0:v]trim=start={_sec(op['start_ms'])}:end={_sec(op['end_ms'])},"
                f"setpts=PTS-STARTPTS[{label}];"
            )
            video_chains.append(label)
            pending_audio = False
        elif kind == OP_HOLD:
            # Extend the chain just emitted with a last-frame hold.
            label = video_chains[-1]
            lines[-1] = lines[-1].replace(
                f"[{label}];",
                f",tpad=stop_mode=clone:stop_duration={_sec(op['duration_ms'])}[{label}];",
            )
            pending_audio = False
        elif kind == OP_AUDIO:
            label = f"a{len(audio_chains)}"
            idx = input_index[op["path"]]
            lines.append(f"[{idx}:a]aresample={SAMPLE_RATE},asetpts=PTS-STARTPTS[{label}];")
            audio_chains.append(label)
            pending_audio = True
        elif kind == OP_SILENCE:
            if pending_audio:
                label = audio_chains[-1]
                lines[-1] = lines[-1].replace(
                    f"[{label}];", f",apad=pad_dur={_sec(op['duration_ms'])}[{label}];"
                )
            else:
                label = f"a{len(audio_chains)}"
                lines.append(
                    f"anullsrc=channel_layout=mono:sample_rate={SAMPLE_RATE},"
                    f"atrim=duration={_sec(op['duration_ms'])}[{label}];"
                )
                audio_chains.append(label)
            pending_audio = False
    lines.append("".join(f"[{v}]" for v in video_chains) + f"concat=n={len(video_chains)}:v=1:a=0[vout];")
    lines.append("".join(f"[{a}]" for a in audio_chains) + f"concat=n={len(audio_chains)}:v=0:a=1[aout]")
    return "\n".join(lines) + "\n"


def audio_input_paths(edl: EditDecisionList) -> list[str]:
    """Audio file paths in first-use order (subprocess input ordering)."""
    seen: list[str] = []
    for op in edl.ops:
        if op["kind"] == OP_AUDIO and op["path"] not in seen:
            seen.append(op["path"])
    return seen


def _expand_template(
    template: tuple[str, ...], mapping: dict[str, str], list_slots: dict[str, list[str]]
) -> list[str]:
    argv: list[str] = []
    for token in template:
        if token in list_slots:
            argv.extend(list_slots[token])
        else:
            argv.append(token.format_map(mapping))
    return argv


def assemble(
    edl: EditDecisionList,
    tool_config: ToolConfig,
    base_dir: str | Path,
    out_path: str | Path | None = None,
) -> Path:
    """Render the EDL; returns the output path.

    Relative media paths resolve against ``base_dir``.  The rendered
    container duration must match the EDL track duration within the
    configured tolerance.
    """
    base = Path(base_dir)
    source = Path(edl.source_video)
    if not source.is_absolute():
        source = base / source
    if not source.exists():
        raise ToolFailure(f"source video not found: {source}")
    audio_paths = []
    for rel in audio_input_paths(edl):
        p = Path(rel)
        if not p.is_absolute():
            p = base / p
        if not p.exists():
            raise ToolFailure(f"audio asset not found: {p}")
        audio_paths.append(p)

    script_path = base / f"{edl.video_id or 'edl'}.filter"
    script_path.write_text(build_filter_script(edl), encoding="utf-8")
    if out_path is None:
        out_path = base / f"out.{tool_config.output_ext}"
    out_path = Path(out_path)

    input_args = ["-i", str(source)]
    for p in audio_paths:
        input_args.extend(["-i", str(p)])
    argv = _expand_template(
        tool_config.command_template,
        {"tool": tool_config.tool, "script": str(script_path), "output": str(out_path)},
        {"{input_args}": input_args, "{codec_args}": list(tool_config.codec_args)},
    )
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise ToolFailure(f"cannot run media tool {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise ToolFailure(f"media tool exited {proc.returncode}: {proc.stderr.strip()[:2000]}")

    rendered_ms = probe_duration_ms(out_path, tool_config)
    planned_ms = track_durations(edl)["video_track_ms"]
    if abs(rendered_ms - planned_ms) > tool_config.duration_tolerance_ms:
        raise DurationDrift(
            f"rendered {rendered_ms} ms vs planned {planned_ms} ms "
            f"(tolerance {tool_config.duration_tolerance_ms} ms)"
        )
    return out_path


def probe_duration_ms(path: str | Path, tool_config: ToolConfig) -> int:
    argv = _expand_template(
        tool_config.probe_template, {"probe": tool_config.probe, "output": str(path)}, {}
    )
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise ToolFailure(f"cannot run probe {argv[0]!r}: {exc}") from exc
    if proc.returncode != 0:
        raise ToolFailure(f"probe exited {proc.returncode}: {proc.stderr.strip()[:500]}")
    try:
        return round(float(proc.stdout.strip().splitlines()[0]) * 1000)
    except (ValueError, IndexError) as exc:
        raise ToolFailure(f"unparseable probe output {proc.stdout!r}") from exc


def media_tool_available(tool_config: ToolConfig | None = None) -> bool:
    """True when both the renderer and the probe are on PATH."""
    import shutil

    tc = tool_config or ToolConfig()
    return shutil.which(tc.tool) is not None and shutil.which(tc.probe) is not None
