"""Scene segmentation from per-frame luma statistics.

Frame statistics arrive as line records produced by an external decoder
(see the orchestrator); this module is pure. A cut is declared before every
frame whose mean absolute luma difference against the previous frame exceeds
the threshold, on the 0-255 luma scale. Runs shorter than a minimum number of
frames merge forward into the following scene, which suppresses flash-frame
double cuts; a trailing short run is kept, since nothing follows it. The
resulting scenes tile the timeline from 0 to the final frame timestamp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ClipOutOfRange
from .subtitles import TimeSpan

SCENE_THRESHOLD_DEFAULT = 40.0
MIN_SCENE_FRAMES = 10


@dataclass(frozen=True)
class FrameStat:
    frame_index: int
    timestamp_ms: int
    mean_abs_luma_diff: float  # vs previous frame; 0 for the first frame

    def __post_init__(self) -> None:
        if self.mean_abs_luma_diff < 0:
            raise ValueError("luma difference must be non-negative")


@dataclass(frozen=True)
class Scene:
    id: int
    span: TimeSpan


def parse_frame_stats(text: str) -> list[FrameStat]:
    """Parse 'frame_index,timestamp_ms,diff' lines; '#' lines are comments."""
    stats: list[FrameStat] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"line {lineno}: expected 3 comma-separated fields")
        try:
            stat = FrameStat(int(parts[0]), int(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if stats:
            if stat.frame_index <= stats[-1].frame_index:
                raise ValueError(f"line {lineno}: frame indices must increase")
            if stat.timestamp_ms < stats[-1].timestamp_ms:
                raise ValueError(f"line {lineno}: timestamps must not decrease")
        stats.append(stat)
    return stats


def format_frame_stats(stats: Sequence[FrameStat]) -> str:
    lines = [
        f"{s.frame_index},{s.timestamp_ms},{float(s.mean_abs_luma_diff)!r}"
        for s in stats
    ]
    return "\n".join(lines) + "\n" if lines else ""


def detect_scenes(
    stats: Sequence[FrameStat], threshold: float = SCENE_THRESHOLD_DEFAULT
) -> list[Scene]:
    """Cut wherever the luma difference exceeds threshold, left to right.

    A candidate cut is accepted only when at least MIN_SCENE_FRAMES frames
    have passed since the current scene started; rejected cuts merge their
    would-be scene into the following one. Greedy left-to-right acceptance
    keeps the accepted set as large as possible, so raising the threshold
    never increases the scene count.
    """
    if not stats:
        raise ValueError("need at least one frame stat")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    final_ts = stats[-1].timestamp_ms
    if final_ts <= 0:
        raise ValueError("film duration is zero; cannot form scenes")

    scene_start_index = stats[0].frame_index
    cut_times: list[int] = []
    for stat in stats[1:]:
        if stat.mean_abs_luma_diff > threshold:
            if stat.frame_index - scene_start_index >= MIN_SCENE_FRAMES:
                cut_times.append(stat.timestamp_ms)
                scene_start_index = stat.frame_index

    boundaries = [0]
    for ts in cut_times:
        if boundaries[-1] < ts < final_ts:
            boundaries.append(ts)
    boundaries.append(final_ts)
    return [
        Scene(id=i, span=TimeSpan(boundaries[i], boundaries[i + 1]))
        for i in range(len(boundaries) - 1)
    ]


def enclosing_scene(scenes: Sequence[Scene], clip: TimeSpan) -> Scene:
    """The scene with the largest temporal overlap; ties go to the earlier one."""
    if not scenes:
        raise ValueError("empty scene list")
    if clip.start_ms < scenes[0].span.start_ms or clip.end_ms > scenes[-1].span.end_ms:
        raise ClipOutOfRange(
            f"clip {clip.start_ms}..{clip.end_ms} ms outside the film timeline"
        )
    best = scenes[0]
    best_overlap = best.span.overlap_ms(clip)
    for scene in scenes[1:]:
        overlap = scene.span.overlap_ms(clip)
        if overlap > best_overlap:
            best = scene
            best_overlap = overlap
    return best
