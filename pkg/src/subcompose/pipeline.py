"""Pipeline wiring for the two case studies, plus configuration and reporting.

The orchestrator owns everything impure: file IO, the external media
toolchain, the output directory, and the run report. Stage logic stays in the
algorithm modules; each stage here is a thin labeled call, so failures carry
the stage name and timings can be collected without touching the algorithms.

Determinism contract: with the same config, inputs, and seed, the EDL and
report bytes are identical run to run. Wall-clock timings therefore live in a
separate sidecar file (timings.json), never in the report.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import shlex
import subprocess
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import audio, compose, ranking, scenes, subtitles, topics
from .errors import (
    CompositionError,
    PipelineInputError,
    StageFailure,
    ToolchainUnavailable,
    ZeroVector,
)

logger = logging.getLogger(__name__)

MODES = ("tribute", "talk")
STRATEGIES = ("sentence-level", "two-stage")
SUMMARY_SIZE_DEFAULT = 10

EDL_FILENAME = "edl.txt"
REPORT_FILENAME = "report.json"
TIMINGS_FILENAME = "timings.json"
SCENE_VECTORS_FILENAME = "scene_vectors.csv"
RENDER_SCRIPT_FILENAME = "render.sh"


@dataclass
class PipelineConfig:
    mode: str
    output_dir: str
    seed: int = 0
    # tribute inputs
    film_subtitles: str | None = None
    film_audio: str | None = None
    film_media: str | None = None
    song_audio: str | None = None
    frame_stats: str | None = None  # precomputed stats bypass the toolchain
    scene_vectors: str | None = None  # precomputed vectors bypass extraction
    # talk inputs
    lecture_subtitles: str | None = None
    manifest: str | None = None
    strategy: str = "sentence-level"
    # parameters
    emotion_threshold: float = audio.EMOTION_SIMILARITY_THRESHOLD
    scene_threshold: float = scenes.SCENE_THRESHOLD_DEFAULT
    support_threshold: float = ranking.SUPPORT_THRESHOLD_DEFAULT
    grasshopper_lambda: float = ranking.GRASSHOPPER_LAMBDA_DEFAULT
    top_k: int = topics.TOP_K_DEFAULT
    num_topics: int = topics.SENTENCE_LEVEL_TOPICS_DEFAULT
    subset_topics: int = topics.SUBSET_TOPICS_DEFAULT
    subset_size: int = topics.SUBSET_SIZE_DEFAULT
    summary_size: int = SUMMARY_SIZE_DEFAULT
    em_iters: int = 50
    # toolchain
    toolchain_template: str | None = None
    frame_width: int = 64
    frame_height: int = 36
    fps: float = 25.0
    render_script: bool = False


def config_from_sources(
    config_file: str | None = None, overrides: dict | None = None
) -> PipelineConfig:
    """Declarative file plus flag overrides; overrides win."""
    values: dict = {}
    if config_file is not None:
        try:
            with open(config_file, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise PipelineInputError(f"cannot read config file: {exc}") from exc
        if not isinstance(loaded, dict):
            raise PipelineInputError("config file must hold a JSON object")
        values.update(loaded)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise PipelineInputError(f"unknown config keys: {', '.join(unknown)}")
    for name in ("mode", "output_dir"):
        if not values.get(name):
            raise PipelineInputError(f"config requires {name!r}")
    return PipelineConfig(**values)


def validate_config(config: PipelineConfig) -> None:
    problems: list[str] = []

    def need_file(value: str | None, label: str, required: bool = True) -> None:
        if value is None:
            if required:
                problems.append(f"{label} is required")
        elif not os.path.isfile(value):
            problems.append(f"{label} not found: {value}")

    if config.mode not in MODES:
        problems.append(f"mode must be one of {MODES}, got {config.mode!r}")
    if config.strategy not in STRATEGIES:
        problems.append(f"strategy must be one of {STRATEGIES}, got {config.strategy!r}")
    if config.scene_threshold <= 0:
        problems.append("scene_threshold must be positive")
    if config.support_threshold < 0:
        problems.append("support_threshold must be non-negative")
    if not 0.0 <= config.grasshopper_lambda <= 1.0:
        problems.append("grasshopper_lambda must lie in [0, 1]")
    for name in ("top_k", "num_topics", "subset_topics", "subset_size",
                 "summary_size", "frame_width", "frame_height"):
        if getattr(config, name) < 1:
            problems.append(f"{name} must be >= 1")
    if config.em_iters < 0:
        problems.append("em_iters must be >= 0")
    if config.fps <= 0:
        problems.append("fps must be positive")

    if config.mode == "tribute":
        need_file(config.film_subtitles, "film_subtitles")
        need_file(config.song_audio, "song_audio")
        if config.frame_stats is not None:
            need_file(config.frame_stats, "frame_stats")
        elif not (config.film_media and config.toolchain_template):
            problems.append(
                "provide frame_stats, or film_media plus toolchain_template"
            )
        else:
            need_file(config.film_media, "film_media")
        if config.scene_vectors is not None:
            need_file(config.scene_vectors, "scene_vectors")
        elif config.film_audio is None:
            problems.append("provide film_audio or scene_vectors")
        else:
            need_file(config.film_audio, "film_audio")
    elif config.mode == "talk":
        need_file(config.lecture_subtitles, "lecture_subtitles")
        need_file(config.manifest, "manifest")
        if config.manifest and os.path.isfile(config.manifest):
            try:
                for _, srt_path, _ in parse_manifest(config.manifest):
                    need_file(srt_path, "manifest subtitles")
            except PipelineInputError as exc:
                problems.append(str(exc))

    if problems:
        raise PipelineInputError("; ".join(problems))


def parse_manifest(path: str) -> list[tuple[str, str, str]]:
    """'id<TAB>subtitles[<TAB>media]' lines -> (id, subtitles path, media ref).

    Relative subtitle paths resolve against the manifest's directory; the
    media reference is kept verbatim (it only names an EDL source).
    """
    base = os.path.dirname(os.path.abspath(path))
    rows: list[tuple[str, str, str]] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise PipelineInputError(
                    f"manifest line {lineno}: expected 'id<TAB>subtitles[<TAB>media]'"
                )
            doc_id = parts[0].strip()
            if doc_id in seen:
                raise PipelineInputError(
                    f"manifest line {lineno}: duplicate documentary id {doc_id!r}"
                )
            seen.add(doc_id)
            srt_path = parts[1].strip()
            if not os.path.isabs(srt_path):
                srt_path = os.path.join(base, srt_path)
            media = parts[2].strip() if len(parts) > 2 else doc_id
            rows.append((doc_id, srt_path, media))
    if not rows:
        raise PipelineInputError("manifest lists no documentaries")
    return rows


def _run_stage(name: str, timings: list, fn: Callable, *args, **kwargs):
    started = time.perf_counter()
    try:
        result = fn(*args, **kwargs)
    except StageFailure:
        raise
    except (CompositionError, OSError, ValueError, KeyError,
            np.linalg.LinAlgError) as exc:
        raise StageFailure(name, exc) from exc
    timings.append((name, time.perf_counter() - started))
    return result


def _load_sentences(srt_path: str) -> list[subtitles.Sentence]:
    with open(srt_path, "rb") as fh:
        cues = subtitles.parse_srt(fh.read())
    return subtitles.assemble_sentences(cues)


def extract_frame_stats(
    media_path: str,
    toolchain_template: str,
    *,
    frame_width: int,
    frame_height: int,
    fps: float,
    cache_dir: str | None = None,
    notes: list[str] | None = None,
) -> list[scenes.FrameStat]:
    """Decode via the external toolchain and reduce to per-frame luma diffs.

    The template must expand to a command writing raw 8-bit grayscale frames
    of the declared geometry to stdout; {input}, {width}, {height}, and {fps}
    are substituted. Results are cached by content hash so repeated runs skip
    the decode.
    """
    with open(media_path, "rb") as fh:
        content = fh.read()
    digest = hashlib.sha256(content)
    digest.update(
        f"|{toolchain_template}|{frame_width}x{frame_height}@{fps!r}".encode()
    )
    key = digest.hexdigest()

    cache_path = None
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        cache_path = os.path.join(cache_dir, f"framestats-{key}.txt")
        if os.path.isfile(cache_path):
            if notes is not None:
                notes.append(f"frame stats served from cache ({key[:12]})")
            with open(cache_path, "r", encoding="utf-8") as fh:
                return scenes.parse_frame_stats(fh.read())

    command = shlex.split(
        toolchain_template.format(
            input=media_path, width=frame_width, height=frame_height, fps=fps
        )
    )
    try:
        proc = subprocess.run(
            command, stdout=subprocess.PIPE, stderr=subprocess.PIPE, check=True
        )
    except FileNotFoundError as exc:
        raise ToolchainUnavailable(
            f"decoder {command[0]!r} not found; supply a precomputed "
            "frame-stats file to bypass the toolchain"
        ) from exc
    except subprocess.CalledProcessError as exc:
        raise ToolchainUnavailable(
            f"decoder exited with status {exc.returncode}; supply a "
            "precomputed frame-stats file to bypass the toolchain"
        ) from exc

    frame_size = frame_width * frame_height
    n_frames = len(proc.stdout) // frame_size
    if n_frames == 0:
        raise ToolchainUnavailable(
            "decoder produced no complete frame; check the declared geometry"
        )
    frames = (
        np.frombuffer(proc.stdout[: n_frames * frame_size], dtype=np.uint8)
        .reshape(n_frames, frame_size)
        .astype(np.float64)
    )
    diffs = np.zeros(n_frames)
    if n_frames > 1:
        diffs[1:] = np.mean(np.abs(np.diff(frames, axis=0)), axis=1)
    stats = [
        scenes.FrameStat(i, int(round(i * 1000.0 / fps)), float(diffs[i]))
        for i in range(n_frames)
    ]
    if cache_path is not None:
        with open(cache_path, "w", encoding="utf-8") as fh:
            fh.write(scenes.format_frame_stats(stats))
    if notes is not None:
        notes.append("frame stats computed by the toolchain")
    return stats


# tribute pipeline


def _tribute_frame_stats(
    config: PipelineConfig, notes: list[str]
) -> list[scenes.FrameStat]:
    if config.frame_stats is not None:
        with open(config.frame_stats, "r", encoding="utf-8") as fh:
            notes.append("frame stats loaded from precomputed file")
            return scenes.parse_frame_stats(fh.read())
    return extract_frame_stats(
        config.film_media,
        config.toolchain_template,
        frame_width=config.frame_width,
        frame_height=config.frame_height,
        fps=config.fps,
        cache_dir=os.path.join(config.output_dir, "cache"),
        notes=notes,
    )


def _tribute_features(
    config: PipelineConfig,
    scene_list: list[scenes.Scene],
    notes: list[str],
) -> tuple[dict[int, audio.EmotionVector], audio.EmotionVector, int]:
    song_clip = audio.load_audio(config.song_audio)
    song_vector = audio.extract_emotion_vector(song_clip)
    if config.scene_vectors is not None:
        records = audio.read_vector_records(config.scene_vectors)
        scene_vectors = {int(scene_id): vec for scene_id, vec in records}
        notes.append("scene vectors loaded from records file")
    else:
        film_clip = audio.load_audio(config.film_audio)
        scene_vectors = {
            scene.id: audio.extract_emotion_vector(film_clip.segment(scene.span))
            for scene in scene_list
        }
    return scene_vectors, song_vector, song_clip.duration_ms


def run_tribute(config: PipelineConfig) -> tuple[compose.EditDecisionList, dict]:
    """parse -> assemble -> rank -> scenes -> features -> plan; writes outputs."""
    validate_config(config)
    os.makedirs(config.output_dir, exist_ok=True)
    timings: list[tuple[str, float]] = []
    notes: list[str] = []

    sentences = _run_stage(
        "parse-subtitles", timings, _load_sentences, config.film_subtitles
    )
    ranked = _run_stage(
        "rank-sentences",
        timings,
        lambda: ranking.support_set_rank(
            ranking.tfidf_vectors(sentences), threshold=config.support_threshold
        ),
    )
    stats = _run_stage("frame-stats", timings, _tribute_frame_stats, config, notes)
    scene_list = _run_stage(
        "detect-scenes", timings, scenes.detect_scenes, stats, config.scene_threshold
    )
    scene_vectors, song_vector, song_duration_ms = _run_stage(
        "extract-features", timings, _tribute_features, config, scene_list, notes
    )
    reference = audio.ReferenceStats.from_vectors(
        [scene_vectors[sid] for sid in sorted(scene_vectors)]
    )
    edl = _run_stage(
        "plan-edit",
        timings,
        compose.plan_tribute,
        ranked,
        sentences,
        scene_list,
        scene_vectors,
        song_vector,
        song_duration_ms,
        config.emotion_threshold,
        film_source_id="film",
        song_source_id="song",
        reference_stats=reference,
    )
    edl = dataclasses.replace(
        edl,
        sources=(
            ("film", config.film_media or config.film_subtitles),
            ("song", config.song_audio),
        ),
    )

    scene_similarities = {}
    for scene_id in sorted(scene_vectors):
        try:
            scene_similarities[str(scene_id)] = float(
                audio.emotion_similarity(
                    scene_vectors[scene_id], song_vector, reference
                )
            )
        except ZeroVector:
            scene_similarities[str(scene_id)] = None

    report = {
        "mode": "tribute",
        "config": _config_echo(config),
        "stages": [name for name, _ in timings],
        "sentence_count": len(sentences),
        "ranking": [[int(i), float(s)] for i, s in ranked.items],
        "scenes": [
            [int(s.id), int(s.span.start_ms), int(s.span.end_ms)] for s in scene_list
        ],
        "scene_similarities": scene_similarities,
        "song_duration_ms": int(song_duration_ms),
        "selected": _selected_entries(edl),
        "warnings": list(edl.warnings),
        "seed": config.seed,
    }

    extra = {}
    if config.scene_vectors is None:
        extra[SCENE_VECTORS_FILENAME] = lambda path: audio.write_vector_records(
            path, [(sid, scene_vectors[sid]) for sid in sorted(scene_vectors)]
        )
    _write_outputs(config, edl, report, timings, "tribute.mp4", extra, notes)
    return edl, report


# talk pipeline


def _talk_topic_stage(
    config: PipelineConfig,
    summary_ids: list[int],
    lecture_sentences: list[subtitles.Sentence],
    doc_sentence_tokens: dict[tuple[str, int], list[str]],
) -> tuple[list[tuple[int, topics.TopicMixture]], dict, list[str] | None]:
    """Train per strategy; return lecture mixtures, pool mixtures, subset."""
    lecture_tokens = {
        s.id: topics.tokenize_for_topics(s.text) for s in lecture_sentences
    }
    subset: list[str] | None = None
    pool_keys = sorted(doc_sentence_tokens)

    if config.strategy == "two-stage":
        doc_ids = sorted({doc_id for doc_id, _ in pool_keys})
        doc_bags = {
            doc_id: [
                tok
                for key in pool_keys
                if key[0] == doc_id
                for tok in doc_sentence_tokens[key]
            ]
            for doc_id in doc_ids
        }
        doc_model = topics.train_lda(
            [doc_bags[d] for d in doc_ids],
            topics.LdaConfig(
                num_topics=config.num_topics,
                em_iters=config.em_iters,
                seed=config.seed,
            ),
        )
        doc_mixtures = dict(
            zip(doc_ids, topics.infer_mixtures(doc_model, [doc_bags[d] for d in doc_ids]))
        )
        whole_lecture = [
            tok for s in lecture_sentences for tok in lecture_tokens[s.id]
        ]
        subset = topics.two_stage_subset(
            doc_model, whole_lecture, doc_mixtures, m=config.subset_size
        )
        pool_keys = [key for key in pool_keys if key[0] in set(subset)]
        sentence_topics = config.subset_topics
    else:
        sentence_topics = config.num_topics

    sentence_model = topics.train_lda(
        [doc_sentence_tokens[key] for key in pool_keys],
        topics.LdaConfig(
            num_topics=sentence_topics,
            em_iters=config.em_iters,
            seed=config.seed,
        ),
    )
    pool_mixture_list = topics.infer_mixtures(
        sentence_model, [doc_sentence_tokens[key] for key in pool_keys]
    )
    pool_mixtures = dict(zip(pool_keys, pool_mixture_list))
    lecture_mixture_list = topics.infer_mixtures(
        sentence_model, [lecture_tokens[sid] for sid in summary_ids]
    )
    lecture_mixtures = list(zip(summary_ids, lecture_mixture_list))
    return lecture_mixtures, pool_mixtures, subset


def run_talk(config: PipelineConfig) -> tuple[compose.EditDecisionList, dict]:
    """parse -> summarize -> topic model -> match -> rank pool -> plan."""
    validate_config(config)
    os.makedirs(config.output_dir, exist_ok=True)
    timings: list[tuple[str, float]] = []
    notes: list[str] = []

    lecture_sentences = _run_stage(
        "parse-lecture", timings, _load_sentences, config.lecture_subtitles
    )

    def summarize() -> ranking.RankedList:
        graph = ranking.build_similarity_graph(
            ranking.tfidf_vectors(lecture_sentences)
        )
        k = min(config.summary_size, len(lecture_sentences))
        return ranking.grasshopper_rank(
            graph,
            ranking.GrasshopperConfig(k=k, lam=config.grasshopper_lambda),
        )

    summary_ranking = _run_stage("summarize-lecture", timings, summarize)
    summary_ids = sorted(index for index, _ in summary_ranking.items)

    def parse_collection():
        rows = parse_manifest(config.manifest)
        texts: dict[tuple[str, int], str] = {}
        spans: dict[tuple[str, int], subtitles.TimeSpan] = {}
        tokens: dict[tuple[str, int], list[str]] = {}
        media: dict[str, str] = {}
        for doc_id, srt_path, media_ref in rows:
            media[doc_id] = media_ref
            for sentence in _load_sentences(srt_path):
                key = (doc_id, sentence.id)
                texts[key] = sentence.text
                spans[key] = sentence.span
                tokens[key] = topics.tokenize_for_topics(sentence.text)
        return texts, spans, tokens, media

    doc_texts, doc_spans, doc_tokens, doc_media = _run_stage(
        "parse-collection", timings, parse_collection
    )

    lecture_mixtures, pool_mixtures, subset = _run_stage(
        "topic-model",
        timings,
        _talk_topic_stage,
        config,
        summary_ids,
        lecture_sentences,
        doc_tokens,
    )
    candidate_sets = _run_stage(
        "match-topics",
        timings,
        topics.topk_candidates,
        lecture_mixtures,
        pool_mixtures,
        config.top_k,
    )
    pool_ranking = _run_stage(
        "rank-candidates",
        timings,
        compose.rank_candidates,
        candidate_sets,
        doc_texts,
        config.support_threshold,
    )
    edl = _run_stage(
        "plan-edit",
        timings,
        compose.plan_talk,
        summary_ids,
        candidate_sets,
        pool_ranking,
        doc_spans,
    )
    edl = dataclasses.replace(
        edl, sources=tuple(sorted(doc_media.items()))
    )

    report = {
        "mode": "talk",
        "config": _config_echo(config),
        "stages": [name for name, _ in timings],
        "lecture_sentence_count": len(lecture_sentences),
        "summary": {
            "rank_order": [[int(i), float(s)] for i, s in summary_ranking.items],
            "lecture_order": [int(i) for i in summary_ids],
        },
        "subset": subset,
        "candidates": [
            {
                "lecture_sentence": int(cs.lecture_sentence_id),
                "candidates": [
                    [doc_id, int(sent_id), float(score)]
                    for doc_id, sent_id, score in cs.candidates
                ],
            }
            for cs in candidate_sets
        ],
        "pool_ranking": [
            [pool_ranking.keys[i][0], int(pool_ranking.keys[i][1]), float(score)]
            for i, score in pool_ranking.ranking.items
        ],
        "selected": _selected_entries(edl),
        "warnings": list(edl.warnings),
        "seed": config.seed,
    }
    _write_outputs(config, edl, report, timings, "talk.mp4", {}, notes)
    return edl, report


# shared output plumbing


def _selected_entries(edl: compose.EditDecisionList) -> list[dict]:
    return [
        {
            "source": clip.source_id,
            "start_ms": int(clip.span.start_ms),
            "end_ms": int(clip.span.end_ms),
            "origin_sentence": int(clip.origin_sentence_id),
            "rank_score": float(clip.rank_score),
        }
        for clip in edl.entries
    ]


def _config_echo(config: PipelineConfig) -> dict:
    echo = dataclasses.asdict(config)
    del echo["output_dir"]  # reports must not vary with where outputs land
    return echo


def _write_outputs(
    config: PipelineConfig,
    edl: compose.EditDecisionList,
    report: dict,
    timings: list[tuple[str, float]],
    render_name: str,
    extra_writers: dict[str, Callable[[str], None]],
    notes: list[str],
) -> None:
    out = config.output_dir
    with open(os.path.join(out, EDL_FILENAME), "w", encoding="utf-8") as fh:
        fh.write(compose.serialize_edl(edl))
    with open(os.path.join(out, REPORT_FILENAME), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    # provenance notes vary with cache state, so they live beside the timings,
    # never in the report
    sidecar = {
        "stage_seconds": [[name, secs] for name, secs in timings],
        "notes": list(notes),
    }
    with open(os.path.join(out, TIMINGS_FILENAME), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(sidecar, indent=2) + "\n")
    for filename, writer in extra_writers.items():
        writer(os.path.join(out, filename))
    if config.render_script:
        script_path = os.path.join(out, RENDER_SCRIPT_FILENAME)
        with open(script_path, "w", encoding="utf-8") as fh:
            fh.write(compose.emit_render_script(edl, render_name))
        os.chmod(script_path, 0o755)


def run(config: PipelineConfig) -> tuple[compose.EditDecisionList, dict]:
    if config.mode == "tribute":
        return run_tribute(config)
    if config.mode == "talk":
        return run_talk(config)
    raise PipelineInputError(f"unknown mode {config.mode!r}")
