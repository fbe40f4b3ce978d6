"""Command-line entry point.

Two subcommands, one per artifact type. Settings come from an optional JSON
config file plus flags; flags win. Exit status: 0 success, 1 input or
configuration error, 2 stage failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import CompositionError, PipelineInputError
from .pipeline import EDL_FILENAME, config_from_sources, run


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    parser.add_argument("--output-dir", dest="output_dir", metavar="DIR")
    parser.add_argument("--seed", type=int)
    parser.add_argument(
        "--support-threshold",
        dest="support_threshold",
        type=float,
        help="similarity floor for support-set membership (default 0.1)",
    )
    parser.add_argument(
        "--render-script",
        dest="render_script",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="also emit a cut-and-concatenate shell script",
    )
    parser.add_argument("--verbose", action="store_true", help="log stage progress")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subcompose",
        description="Plan subtitle-driven video compositions as edit decision lists.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    tribute = sub.add_parser(
        "tribute", help="fill a song with emotion-matched clips from one film"
    )
    _add_shared_flags(tribute)
    tribute.add_argument("--film-subtitles", dest="film_subtitles", metavar="SRT")
    tribute.add_argument("--film-audio", dest="film_audio", metavar="AUDIO")
    tribute.add_argument("--film-media", dest="film_media", metavar="VIDEO")
    tribute.add_argument("--song-audio", dest="song_audio", metavar="AUDIO")
    tribute.add_argument(
        "--frame-stats",
        dest="frame_stats",
        metavar="FILE",
        help="precomputed frame statistics (bypasses the media toolchain)",
    )
    tribute.add_argument(
        "--scene-vectors",
        dest="scene_vectors",
        metavar="CSV",
        help="precomputed scene emotion vectors (bypasses audio extraction)",
    )
    tribute.add_argument(
        "--emotion-threshold",
        dest="emotion_threshold",
        type=float,
        help="similarity a scene must beat to match the song (default 0.7)",
    )
    tribute.add_argument(
        "--scene-threshold",
        dest="scene_threshold",
        type=float,
        help="luma-difference cut threshold on the 0-255 scale (default 40)",
    )
    tribute.add_argument(
        "--toolchain-template", dest="toolchain_template", metavar="CMD"
    )
    tribute.add_argument("--frame-width", dest="frame_width", type=int)
    tribute.add_argument("--frame-height", dest="frame_height", type=int)
    tribute.add_argument("--fps", type=float)

    talk = sub.add_parser(
        "talk", help="back a lecture summary with matched documentary clips"
    )
    _add_shared_flags(talk)
    talk.add_argument("--lecture-subtitles", dest="lecture_subtitles", metavar="SRT")
    talk.add_argument(
        "--manifest",
        metavar="TSV",
        help="documentary collection: 'id<TAB>subtitles[<TAB>media]' lines",
    )
    talk.add_argument(
        "--strategy", choices=("sentence-level", "two-stage"),
        help="topic-matching strategy (default sentence-level)",
    )
    talk.add_argument(
        "--top-k", dest="top_k", type=int,
        help="candidate sentences kept per lecture sentence (default 10)",
    )
    talk.add_argument(
        "--topics", dest="num_topics", type=int,
        help="topic count for the main model (default 100)",
    )
    talk.add_argument(
        "--subset-topics", dest="subset_topics", type=int,
        help="topic count for the two-stage sentence model (default 10)",
    )
    talk.add_argument(
        "--subset-size", dest="subset_size", type=int,
        help="documentaries kept by the two-stage first pass (default 5)",
    )
    talk.add_argument(
        "--summary-size", dest="summary_size", type=int,
        help="lecture sentences kept by the summarizer (default 10)",
    )
    talk.add_argument(
        "--lambda", dest="grasshopper_lambda", type=float,
        help="walk-vs-prior interpolation for the summarizer (default 0.95)",
    )
    talk.add_argument("--em-iters", dest="em_iters", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    options = vars(args)
    config_file = options.pop("config")
    verbose = options.pop("verbose")
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        config = config_from_sources(config_file, options)
        edl, report = run(config)
    except PipelineInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CompositionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print(
        f"wrote {os.path.join(config.output_dir, EDL_FILENAME)} "
        f"({len(edl.entries)} entries, {edl.total_duration_ms} ms)"
    )
    for warning in report["warnings"]:
        print(f"warning: {warning}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
