"""Exception hierarchy shared by all pipeline stages."""


class CompositionError(Exception):
    """Base class for all errors raised by this package."""


class MalformedTimestamp(CompositionError):
    """A subtitle block looked like a cue but its timestamp line is unusable."""


class EmptyFile(CompositionError):
    """A subtitle file contained no cues."""


class EmptyVocabulary(CompositionError):
    """No term survived vocabulary construction; a topic model cannot be trained."""


class InvalidSubsetSize(CompositionError):
    """A documentary subset of size < 1 was requested."""


class ClipTooShort(CompositionError):
    """An audio clip is shorter than one analysis frame."""


class TooFewFrames(CompositionError):
    """A contour has fewer than two frames; regression functionals are undefined."""


class ZeroVector(CompositionError):
    """A feature vector has zero norm; its direction is undefined."""


class ClipOutOfRange(CompositionError):
    """A clip lies outside the timeline covered by the detected scenes."""


class NoQualifyingClips(CompositionError):
    """No clip passed the emotion-similarity threshold."""


class ToolchainUnavailable(CompositionError):
    """The external media toolchain could not be invoked.

    Supply a precomputed frame-stats file to bypass the toolchain entirely.
    """


class ModelCorrupt(CompositionError):
    """A serialized topic model failed its checksum or version check."""


class PipelineInputError(CompositionError):
    """Configuration or input validation failed before any stage ran."""


class StageFailure(CompositionError):
    """A pipeline stage failed; the stage name prefixes the message."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause
