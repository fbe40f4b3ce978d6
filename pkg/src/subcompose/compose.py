"""Edit-decision-list planning for the two artifact types.

A film tribute fills a song's length with the film's most central clips whose
scene audio matches the song's emotion vector; a science talk replaces each
summarized lecture sentence with its best-ranked unused documentary sentence.
Both planners are pure: they turn rankings, similarity evidence, and scene
maps into an EditDecisionList, and never touch media themselves.
"""

from __future__ import annotations

import logging
import shlex
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .audio import (
    EMOTION_SIMILARITY_THRESHOLD,
    EmotionVector,
    ReferenceStats,
    emotion_similarity,
)
from .errors import NoQualifyingClips
from .ranking import (
    SUPPORT_THRESHOLD_DEFAULT,
    RankedList,
    support_set_rank,
    tfidf_vectors,
)
from .scenes import Scene, enclosing_scene
from .subtitles import Sentence, TimeSpan
from .topics import CandidateSet

logger = logging.getLogger(__name__)

EDL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Clip:
    source_id: str
    span: TimeSpan
    origin_sentence_id: int
    rank_score: float


@dataclass(frozen=True)
class AudioTrack:
    source_id: str
    span: TimeSpan


@dataclass(frozen=True)
class EditDecisionList:
    entries: tuple[Clip, ...]
    audio_track: AudioTrack | None = None
    sources: tuple[tuple[str, str], ...] = ()  # (source_id, file path)
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        by_source: dict[str, list[TimeSpan]] = {}
        for clip in self.entries:
            by_source.setdefault(clip.source_id, []).append(clip.span)
        for source_id, spans in by_source.items():
            spans.sort(key=lambda s: s.start_ms)
            for a, b in zip(spans, spans[1:]):
                if b.start_ms < a.end_ms:
                    raise ValueError(
                        f"overlapping entries from source {source_id!r}"
                    )

    @property
    def total_duration_ms(self) -> int:
        return sum(clip.span.duration_ms for clip in self.entries)


# tribute planning


def _uncovered_parts(
    span: TimeSpan, covered: list[tuple[int, int]]
) -> list[tuple[int, int]]:
    """Sub-intervals of span not covered yet; covered is sorted and disjoint."""
    parts: list[tuple[int, int]] = []
    cursor = span.start_ms
    for start, end in covered:
        if end <= cursor:
            continue
        if start >= span.end_ms:
            break
        if start > cursor:
            parts.append((cursor, min(start, span.end_ms)))
        cursor = max(cursor, end)
        if cursor >= span.end_ms:
            break
    if cursor < span.end_ms:
        parts.append((cursor, span.end_ms))
    return parts


def _cover(covered: list[tuple[int, int]], start: int, end: int) -> None:
    """Insert [start, end) into the sorted disjoint interval list, merging."""
    merged: list[tuple[int, int]] = []
    for s, e in covered:
        if e < start or s > end:
            merged.append((s, e))
        else:
            start = min(start, s)
            end = max(end, e)
    merged.append((start, end))
    merged.sort()
    covered[:] = merged


def plan_tribute(
    ranked: RankedList,
    sentences: Sequence[Sentence],
    scenes: Sequence[Scene],
    scene_vectors: Mapping[int, EmotionVector],
    song_vector: EmotionVector,
    song_duration_ms: int,
    threshold: float = EMOTION_SIMILARITY_THRESHOLD,
    *,
    film_source_id: str = "film",
    song_source_id: str = "song",
    reference_stats: ReferenceStats | None = None,
) -> EditDecisionList:
    """Fill the song's length with emotion-matched clips, rank order first.

    Sentences are visited in rank order; a sentence's clip qualifies when its
    enclosing scene's emotion vector is similar to the song's above threshold
    (z-normalized against the film's own scene statistics unless
    reference_stats is given). Qualifying clips accumulate until the song is
    filled; the last one is trimmed at its end to fit exactly. Overlapping
    admitted clips merge into one entry; output is chronological. A sentence
    span outside the scene timeline is skipped with a warning.
    """
    if song_duration_ms <= 0:
        raise ValueError("song duration must be positive")
    if reference_stats is None:
        reference_stats = ReferenceStats.from_vectors(
            [scene_vectors[sid] for sid in sorted(scene_vectors)]
        )
    film_end = scenes[-1].span.end_ms if scenes else 0
    warnings = list(ranked.warnings)

    qualifying: list[tuple[TimeSpan, int, float]] = []
    for index, score in ranked.items:
        sentence = sentences[index]
        start = max(sentence.span.start_ms, 0)
        end = min(sentence.span.end_ms, film_end)
        if start >= end:
            warnings.append(
                f"clip-outside-film: sentence {sentence.id} lies beyond the "
                "frame statistics, skipped"
            )
            continue
        span = TimeSpan(start, end)
        scene = enclosing_scene(scenes, span)
        similarity = emotion_similarity(
            scene_vectors[scene.id], song_vector, reference_stats
        )
        if similarity > threshold:
            qualifying.append((span, sentence.id, score))

    if not qualifying:
        raise NoQualifyingClips(
            f"no clip's scene matches the song above threshold {threshold}"
        )

    covered: list[tuple[int, int]] = []
    covered_total = 0
    admissions: list[tuple[int, int, int, float]] = []  # (start, end, sent_id, score)
    for span, sentence_id, score in qualifying:
        if covered_total >= song_duration_ms:
            break
        parts = _uncovered_parts(span, covered)
        added = sum(e - s for s, e in parts)
        if added == 0:
            continue
        if covered_total + added > song_duration_ms:
            # trim at the end: keep uncovered time up to exactly the remainder
            needed = song_duration_ms - covered_total
            acc = 0
            trimmed_end = span.start_ms
            for s, e in parts:
                if acc + (e - s) >= needed:
                    trimmed_end = s + (needed - acc)
                    break
                acc += e - s
            span = TimeSpan(span.start_ms, trimmed_end)
            added = needed
        admissions.append((span.start_ms, span.end_ms, sentence_id, score))
        _cover(covered, span.start_ms, span.end_ms)
        covered_total += added

    if covered_total < song_duration_ms:
        warnings.append(
            f"partial-fill: qualifying footage totals {covered_total} ms of a "
            f"{song_duration_ms} ms song"
        )

    # merge overlapping admissions (touching clips stay separate entries)
    ordered = sorted(range(len(admissions)), key=lambda i: admissions[i][0])
    entries: list[Clip] = []
    group: list[int] = []
    group_end = None
    for i in ordered:
        start, end, _, _ = admissions[i]
        if group and start < group_end:
            group.append(i)
            group_end = max(group_end, end)
        else:
            if group:
                entries.append(_merge_group(admissions, group, group_end, film_source_id))
            group = [i]
            group_end = end
    if group:
        entries.append(_merge_group(admissions, group, group_end, film_source_id))

    return EditDecisionList(
        entries=tuple(entries),
        audio_track=AudioTrack(song_source_id, TimeSpan(0, song_duration_ms)),
        warnings=tuple(warnings),
    )


def _merge_group(
    admissions: list[tuple[int, int, int, float]],
    group: list[int],
    group_end: int,
    source_id: str,
) -> Clip:
    lead = min(group)  # earliest admitted = highest ranked contributor
    start = min(admissions[i][0] for i in group)
    _, _, sentence_id, score = admissions[lead]
    return Clip(
        source_id=source_id,
        span=TimeSpan(start, group_end),
        origin_sentence_id=sentence_id,
        rank_score=score,
    )


# talk planning


@dataclass(frozen=True)
class PoolRanking:
    """Support-set ranking over the deduplicated candidate pool."""

    keys: tuple[tuple[str, int], ...]  # pool index -> (documentary, sentence)
    ranking: RankedList
    positions: dict[tuple[str, int], int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "positions",
            {
                self.keys[index]: pos
                for pos, (index, _) in enumerate(self.ranking.items)
            },
        )

    def position(self, key: tuple[str, int]) -> int:
        return self.positions[key]

    def score(self, key: tuple[str, int]) -> float:
        return self.ranking.items[self.position(key)][1]


def rank_candidates(
    candidate_sets: Sequence[CandidateSet],
    documentary_sentences: Mapping[tuple[str, int], str],
    support_threshold: float = SUPPORT_THRESHOLD_DEFAULT,
) -> PoolRanking:
    """Rank the union of all candidates with the centrality summarizer.

    The pool is deduplicated and ordered by (documentary, sentence) before
    ranking, so the outcome is independent of candidate-set order.
    """
    pool = sorted({key[:2] for cs in candidate_sets for key in cs.candidates})
    if not pool:
        raise ValueError("candidate sets contain no candidates")
    texts = [documentary_sentences[(doc_id, sent_id)] for doc_id, sent_id in pool]
    vectors = tfidf_vectors(texts)
    ranking = support_set_rank(vectors, threshold=support_threshold)
    return PoolRanking(keys=tuple(pool), ranking=ranking)


def plan_talk(
    lecture_sentences_in_order: Sequence[int],
    candidate_sets: Sequence[CandidateSet],
    pool_ranking: PoolRanking,
    documentary_clips: Mapping[tuple[str, int], TimeSpan],
    *,
    audio_track: AudioTrack | None = None,
) -> EditDecisionList:
    """One documentary clip per lecture sentence, lecture order preserved.

    Each sentence takes the highest-pool-ranked candidate from its own set
    that is still unused; a candidate whose clip would overlap an
    already-emitted clip from the same documentary is passed over as well,
    keeping entries non-overlapping. A sentence with nothing left emits no
    entry and is logged.
    """
    sets_by_sentence = {cs.lecture_sentence_id: cs for cs in candidate_sets}
    used: set[tuple[str, int]] = set()
    emitted_spans: dict[str, list[TimeSpan]] = {}
    entries: list[Clip] = []
    warnings = list(pool_ranking.ranking.warnings)

    for lecture_id in lecture_sentences_in_order:
        candidate_set = sets_by_sentence.get(lecture_id)
        ordered = (
            sorted(
                (key[:2] for key in candidate_set.candidates),
                key=pool_ranking.position,
            )
            if candidate_set is not None
            else []
        )
        chosen = None
        for key in ordered:
            if key in used:
                continue
            span = documentary_clips[key]
            if any(
                span.overlap_ms(prev) > 0 for prev in emitted_spans.get(key[0], [])
            ):
                logger.debug(
                    "candidate %r overlaps earlier footage, passed over", key
                )
                continue
            chosen = key
            break
        if chosen is None:
            message = f"starved: lecture sentence {lecture_id} has no unused candidate"
            warnings.append(message)
            logger.info(message)
            continue
        used.add(chosen)
        span = documentary_clips[chosen]
        emitted_spans.setdefault(chosen[0], []).append(span)
        entries.append(
            Clip(
                source_id=chosen[0],
                span=span,
                origin_sentence_id=chosen[1],
                rank_score=pool_ranking.score(chosen),
            )
        )

    return EditDecisionList(
        entries=tuple(entries), audio_track=audio_track, warnings=tuple(warnings)
    )


# EDL text format


def serialize_edl(edl: EditDecisionList) -> str:
    """Canonical structured-text form; parse_edl inverts it exactly."""
    lines = [f"edl {EDL_FORMAT_VERSION}", f"duration\t{edl.total_duration_ms}"]
    for source_id, path in sorted(edl.sources):
        lines.append(f"source\t{source_id}\t{path}")
    if edl.audio_track is not None:
        track = edl.audio_track
        lines.append(
            f"audio\t{track.source_id}\t{track.span.start_ms}\t{track.span.end_ms}"
        )
    for clip in edl.entries:
        lines.append(
            f"entry\t{clip.source_id}\t{clip.span.start_ms}\t{clip.span.end_ms}"
            f"\t{clip.origin_sentence_id}\t{float(clip.rank_score)!r}"
        )
    for warning in edl.warnings:
        lines.append(f"warning\t{warning}")
    return "\n".join(lines) + "\n"


def parse_edl(text: str) -> EditDecisionList:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("edl "):
        raise ValueError("not an EDL document")
    version = lines[0].split(" ", 1)[1]
    if version != str(EDL_FORMAT_VERSION):
        raise ValueError(f"unsupported EDL version {version!r}")

    duration = None
    sources: list[tuple[str, str]] = []
    audio_track = None
    entries: list[Clip] = []
    warnings: list[str] = []
    for line in lines[1:]:
        if not line.strip():
            continue
        kind, _, rest = line.partition("\t")
        fields = rest.split("\t")
        if kind == "duration":
            duration = int(fields[0])
        elif kind == "source":
            sources.append((fields[0], fields[1]))
        elif kind == "audio":
            audio_track = AudioTrack(
                fields[0], TimeSpan(int(fields[1]), int(fields[2]))
            )
        elif kind == "entry":
            entries.append(
                Clip(
                    source_id=fields[0],
                    span=TimeSpan(int(fields[1]), int(fields[2])),
                    origin_sentence_id=int(fields[3]),
                    rank_score=float(fields[4]),
                )
            )
        elif kind == "warning":
            warnings.append(rest)
        else:
            raise ValueError(f"unknown EDL line kind {kind!r}")

    edl = EditDecisionList(
        entries=tuple(entries),
        audio_track=audio_track,
        sources=tuple(sources),
        warnings=tuple(warnings),
    )
    if duration is not None and duration != edl.total_duration_ms:
        raise ValueError(
            f"EDL duration line says {duration} ms but entries total "
            f"{edl.total_duration_ms} ms"
        )
    return edl


def emit_render_script(edl: EditDecisionList, output_name: str = "output.mp4") -> str:
    """Shell script that cuts each entry and concatenates them with the audio."""
    paths = dict(edl.sources)
    lines = [
        "#!/bin/sh",
        "# render script: cut each entry, concatenate, then lay the audio track",
        "set -e",
    ]
    part_names = []
    for i, clip in enumerate(edl.entries):
        src = shlex.quote(paths.get(clip.source_id, clip.source_id))
        part = f"part_{i:04d}.mp4"
        part_names.append(part)
        start = clip.span.start_ms / 1000.0
        end = clip.span.end_ms / 1000.0
        lines.append(
            f"ffmpeg -y -ss {start:.3f} -to {end:.3f} -i {src} -an {part}"
        )
    concat_body = "".join(f"file {p}\\n" for p in part_names)
    lines.append(f'printf "{concat_body}" > concat.txt')
    lines.append("ffmpeg -y -f concat -safe 0 -i concat.txt -c copy video_only.mp4")
    if edl.audio_track is not None:
        track = edl.audio_track
        src = shlex.quote(paths.get(track.source_id, track.source_id))
        lines.append(
            f"ffmpeg -y -ss {track.span.start_ms / 1000.0:.3f} "
            f"-to {track.span.end_ms / 1000.0:.3f} -i {src} track_audio.wav"
        )
        lines.append(
            "ffmpeg -y -i video_only.mp4 -i track_audio.wav -map 0:v -map 1:a "
            f"-shortest {shlex.quote(output_name)}"
        )
    else:
        lines.append(f"mv video_only.mp4 {shlex.quote(output_name)}")
    return "\n".join(lines) + "\n"
