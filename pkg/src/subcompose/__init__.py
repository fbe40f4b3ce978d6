"""Subtitle-driven multimedia composition toolkit.

Plans two kinds of derived videos as edit decision lists: film tributes,
where a song is filled with the film's most central, emotion-matched clips,
and lecture-driven science talks, where summarized lecture sentences are
backed by topically matching documentary footage. The subtitle text stream
drives everything; media decoding stays behind an external-toolchain
boundary.
"""

from . import audio, compose, pipeline, ranking, scenes, subtitles, topics
from ._kernels import BACKEND
from .errors import CompositionError

__version__ = "1.0.0"

__all__ = [
    "audio",
    "compose",
    "pipeline",
    "ranking",
    "scenes",
    "subtitles",
    "topics",
    "BACKEND",
    "CompositionError",
    "__version__",
]
