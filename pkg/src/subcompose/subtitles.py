"""SRT parsing and sentence assembly.

Cues are the raw timed blocks of an SRT file; sentences are the working unit
of the rest of the pipeline. Assembly concatenates cue text, splits it on
terminal punctuation, strips hearing-impaired sound tags and intra-sentence
punctuation, and derives each sentence's time span from the cues that fed it.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .errors import EmptyFile, MalformedTimestamp

logger = logging.getLogger(__name__)

MAX_TIMESTAMP_MS = 100 * 3600 * 1000  # "99:59:59,999" and a hair beyond

# Gap between consecutive cues that forces a sentence boundary even without
# terminal punctuation (limits timestamp-mismatch artifacts).
SENTENCE_GAP_MS = 10_000

_TIMESTAMP_RE = re.compile(
    r"^\s*(\d{1,3}):(\d{1,2}):(\d{1,2})[,.](\d{1,3})"
    r"\s*-->\s*"
    r"(\d{1,3}):(\d{1,2}):(\d{1,2})[,.](\d{1,3})"
)
_INDEX_RE = re.compile(r"^\s*\d+\s*$")

# Sound descriptions in subtitles for the hearing-impaired: [DOOR SLAMS],
# (COUGHING). Parenthesized spans are only stripped when fully uppercase,
# so parenthetical dialog asides survive.
_BRACKET_TAG_RE = re.compile(r"\[[^\]]*\]")
_PAREN_SPAN_RE = re.compile(r"\(([^)]*)\)")

# Terminal punctuation run at the end of a word: ".", "!", "?", "...", "…",
# optionally followed by closing quotes/brackets.
_TERMINAL_RE = re.compile(r"[.!?…]+[\"'”’)\]]*$")

# Words whose trailing period does not end a sentence.
ABBREVIATIONS = frozenset(
    {
        "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.",
        "lt.", "sgt.", "capt.", "col.", "gen.", "mt.", "vs.", "etc.",
        "e.g.", "i.e.", "approx.", "no.",
    }
)

# Kept inside words: apostrophes (contractions stay intact).
_STRIP_CHARS_RE = re.compile(r"[^\w'’\s]+", re.UNICODE)


@dataclass(frozen=True)
class TimeSpan:
    """Half-open-ish media interval in milliseconds; end is exclusive for tiling."""

    start_ms: int
    end_ms: int

    def __post_init__(self) -> None:
        if not (0 <= self.start_ms < self.end_ms):
            raise ValueError(f"invalid span [{self.start_ms}, {self.end_ms}]")

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms

    def overlap_ms(self, other: "TimeSpan") -> int:
        return max(0, min(self.end_ms, other.end_ms) - max(self.start_ms, other.start_ms))


@dataclass(frozen=True)
class SubtitleCue:
    index: int  # 1-based, renumbered in time order at parse
    span: TimeSpan
    lines: tuple[str, ...]

    @property
    def text(self) -> str:
        return " ".join(self.lines)


@dataclass(frozen=True)
class Sentence:
    id: int  # 0-based ordinal within the document
    text: str
    span: TimeSpan
    source_cues: tuple[int, ...]


def _decode(data: bytes, encoding_hint: str | None) -> str:
    encodings = []
    if encoding_hint:
        encodings.append(encoding_hint)
    encodings += ["utf-8-sig", "latin-1"]
    last_error: Exception | None = None
    for enc in encodings:
        try:
            return data.decode(enc)
        except (UnicodeDecodeError, LookupError) as exc:
            last_error = exc
    raise EmptyFile(f"could not decode subtitle data: {last_error}")


def _parse_timestamp_line(line: str) -> TimeSpan:
    m = _TIMESTAMP_RE.match(line)
    if m is None:
        raise MalformedTimestamp(f"unparseable timestamp line: {line!r}")
    h1, m1, s1, ms1, h2, m2, s2, ms2 = (int(g) for g in m.groups())
    start = ((h1 * 60 + m1) * 60 + s1) * 1000 + ms1
    end = ((h2 * 60 + m2) * 60 + s2) * 1000 + ms2
    if end <= start:
        raise MalformedTimestamp(f"cue ends at or before its start: {line!r}")
    if end > MAX_TIMESTAMP_MS:
        raise MalformedTimestamp(f"timestamp beyond representable range: {line!r}")
    return TimeSpan(start, end)


def parse_srt(data: bytes, encoding_hint: str | None = None) -> list[SubtitleCue]:
    """Parse raw SRT bytes into time-ordered cues renumbered 1..n.

    File numbering is ignored (real files skip and shuffle indices); cues are
    sorted by start time. Overlapping cues are allowed here. Blocks that look
    like cues but carry a broken timestamp line raise MalformedTimestamp;
    blocks that do not look like cues at all are skipped with a warning.
    """
    text = _decode(data, encoding_hint)
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")

    parsed: list[tuple[TimeSpan, tuple[str, ...]]] = []
    block: list[str] = []

    def flush(block_lines: list[str]) -> None:
        while block_lines and not block_lines[0].strip():
            block_lines.pop(0)
        if not block_lines:
            return
        first = block_lines[0]
        rest = block_lines[1:]
        if _INDEX_RE.match(first):
            if not rest:
                logger.warning("skipping index-only block %r", first.strip())
                return
            span = _parse_timestamp_line(rest[0])  # may raise MalformedTimestamp
            text_lines = rest[1:]
        elif _TIMESTAMP_RE.match(first):
            span = _parse_timestamp_line(first)
            text_lines = rest
        else:
            logger.warning("skipping non-cue block starting %r", first.strip()[:40])
            return
        # A missing blank separator runs two cues together: split at the next
        # timestamp line so no timestamp token ends up inside cue text.
        for pos, line in enumerate(text_lines):
            if _TIMESTAMP_RE.match(line):
                cut = pos
                if pos > 0 and _INDEX_RE.match(text_lines[pos - 1]):
                    cut = pos - 1
                tail = list(text_lines[cut:])
                text_lines = text_lines[:cut]
                flush(tail)
                break
        kept = tuple(l.strip() for l in text_lines if l.strip())
        if kept:
            parsed.append((span, kept))

    for line in lines:
        if line.strip():
            block.append(line)
        else:
            flush(block)
            block = []
    flush(block)

    if not parsed:
        raise EmptyFile("no subtitle cues found")

    parsed.sort(key=lambda item: (item[0].start_ms, item[0].end_ms))
    return [
        SubtitleCue(index=i + 1, span=span, lines=lines_)
        for i, (span, lines_) in enumerate(parsed)
    ]


def load_srt(path: str, encoding_hint: str | None = None) -> list[SubtitleCue]:
    with open(path, "rb") as fh:
        return parse_srt(fh.read(), encoding_hint)


def _format_timestamp(ms: int) -> str:
    h, rem = divmod(ms, 3600_000)
    m, rem = divmod(rem, 60_000)
    s, milli = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d},{milli:03d}"


def serialize_srt(cues: list[SubtitleCue]) -> str:
    """Canonical SRT text; parse(serialize(parse(x))) == parse(x)."""
    blocks = []
    for cue in cues:
        header = f"{cue.index}\n{_format_timestamp(cue.span.start_ms)} --> {_format_timestamp(cue.span.end_ms)}"
        blocks.append(header + "\n" + "\n".join(cue.lines))
    return "\n\n".join(blocks) + "\n"


def strip_sound_tags(text: str) -> str:
    """Remove hearing-impaired sound descriptions, keep dialog."""
    text = _BRACKET_TAG_RE.sub(" ", text)

    def _paren(m: re.Match) -> str:
        inner = m.group(1)
        letters = [c for c in inner if c.isalpha()]
        if letters and all(c.isupper() for c in letters):
            return " "
        return m.group(0)

    text = _PAREN_SPAN_RE.sub(_paren, text)
    return " ".join(text.split())


def _is_sentence_end(word: str) -> bool:
    if not _TERMINAL_RE.search(word):
        return False
    if word.lower() in ABBREVIATIONS:
        return False
    return True


def _normalize_sentence(words: list[str]) -> str:
    raw = " ".join(words)
    # Punctuation becomes whitespace so alphanumeric runs never merge;
    # apostrophes stay so contractions survive.
    cleaned = _STRIP_CHARS_RE.sub(" ", raw)
    cleaned = re.sub(r"(?<!\w)['’]+|['’]+(?!\w)", " ", cleaned)
    return " ".join(cleaned.split())


def assemble_sentences(cues: list[SubtitleCue]) -> list[Sentence]:
    """Assemble time-ordered cues into normalized sentence units.

    Boundaries: terminal punctuation (with an abbreviation guard), or a
    silence gap longer than SENTENCE_GAP_MS between cues. Sound tags and
    punctuation are stripped from the stored text; sentences that normalize
    to nothing are dropped.
    """
    pending: list[tuple[str, int]] = []  # (word, cue index)
    sentences: list[Sentence] = []

    def flush() -> None:
        nonlocal pending
        if not pending:
            return
        text = _normalize_sentence([w for w, _ in pending])
        cue_ids = tuple(dict.fromkeys(idx for _, idx in pending))
        pending = []
        if not text:
            return
        spans = [cue_by_index[i].span for i in cue_ids]
        span = TimeSpan(min(s.start_ms for s in spans), max(s.end_ms for s in spans))
        sentences.append(
            Sentence(id=len(sentences), text=text, span=span, source_cues=cue_ids)
        )

    cue_by_index = {c.index: c for c in cues}
    prev_end: int | None = None
    for cue in cues:
        if (
            prev_end is not None
            and cue.span.start_ms - prev_end > SENTENCE_GAP_MS
        ):
            flush()
        prev_end = cue.span.end_ms
        for word in strip_sound_tags(cue.text).split():
            pending.append((word, cue.index))
            if _is_sentence_end(word):
                flush()
    flush()
    return sentences


def format_sentence_records(sentences: list[Sentence]) -> str:
    """Line-delimited export: id, start_ms, end_ms, text (tab-separated)."""
    lines = [f"{s.id}\t{s.span.start_ms}\t{s.span.end_ms}\t{s.text}" for s in sentences]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_sentence_records(text: str) -> list[Sentence]:
    sentences = []
    for line in text.splitlines():
        if not line.strip():
            continue
        sid, start, end, stext = line.split("\t", 3)
        sentences.append(
            Sentence(
                id=int(sid),
                text=stext,
                span=TimeSpan(int(start), int(end)),
                source_cues=(),
            )
        )
    return sentences
