"""Emotion-oriented audio features for matching footage to music.

Per-frame low-level descriptors (energy, MFCC 1-12, zero-crossing rate,
ACF voicing probability, cepstral F0) are summarized, together with their
first-order deltas, by twelve statistical functionals into a fixed
384-dimensional vector. Two vectors are compared by cosine similarity after
per-dimension z-normalization against reference statistics, normally computed
from the film's own scene vectors.

Feature layout (stable across versions): index = series * 12 + functional,
series 0..15 the descriptors in LLD_NAMES order, series 16..31 their deltas
("de_" prefix), functionals in FUNCTIONAL_NAMES order. Names from
feature_names() are the authoritative column order for vector records.

Analysis conventions: 25 ms frames with a 10 ms hop; Hamming window for the
spectral descriptors (MFCC, cepstrum); RMS, ZCR, and the autocorrelation run
on the raw frame. Deltas are two-point symmetric differences with edge
replication. Zero-variance skewness and kurtosis are defined as 0.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.fft
from scipy.io import wavfile

from .errors import ClipTooShort, TooFewFrames, ZeroVector
from .subtitles import TimeSpan

logger = logging.getLogger(__name__)

FRAME_MS_DEFAULT = 25
HOP_MS_DEFAULT = 10
MEL_FILTERS = 26
NUM_MFCC = 12
PITCH_MIN_HZ = 50.0
PITCH_MAX_HZ = 500.0
VOICING_THRESHOLD = 0.4
EMOTION_SIMILARITY_THRESHOLD = 0.7
NUM_FEATURES = 384

_MEL_LOG_FLOOR = 1e-30
_SPECTRUM_FLOOR = 1e-10
_STD_FLOOR = 1e-12

LLD_NAMES: tuple[str, ...] = (
    "rms_energy",
    *(f"mfcc_{i}" for i in range(1, NUM_MFCC + 1)),
    "zcr",
    "voicing_prob",
    "f0",
)

FUNCTIONAL_NAMES: tuple[str, ...] = (
    "mean",
    "stddev",
    "kurtosis",
    "skewness",
    "min",
    "max",
    "range",
    "relminpos",
    "relmaxpos",
    "offset",
    "slope",
    "mse",
)

SERIES_NAMES: tuple[str, ...] = LLD_NAMES + tuple(f"de_{n}" for n in LLD_NAMES)


def feature_names() -> tuple[str, ...]:
    """The 384 feature names in vector order."""
    return tuple(f"{s}_{f}" for s in SERIES_NAMES for f in FUNCTIONAL_NAMES)


@dataclass(frozen=True)
class PcmClip:
    """Mono PCM audio, samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or len(samples) == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_ms(self) -> int:
        return int(round(len(self.samples) * 1000.0 / self.sample_rate))

    def segment(self, span: TimeSpan) -> "PcmClip":
        """The samples overlapping span; clamped to the clip's extent."""
        lo = max(0, int(span.start_ms * self.sample_rate / 1000))
        hi = min(len(self.samples), int(span.end_ms * self.sample_rate / 1000))
        if hi <= lo:
            raise ClipTooShort(
                f"span {span.start_ms}..{span.end_ms} ms has no audio samples"
            )
        return PcmClip(self.samples[lo:hi], self.sample_rate)


@dataclass(frozen=True)
class LldContours:
    """16 frame-indexed descriptor series as rows of one matrix."""

    values: np.ndarray  # (16, n_frames)

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[0] != len(LLD_NAMES):
            raise ValueError(f"expected ({len(LLD_NAMES)}, n_frames) matrix")

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]

    def contour(self, name: str) -> np.ndarray:
        return self.values[LLD_NAMES.index(name)]


@dataclass(frozen=True)
class EmotionVector:
    values: np.ndarray  # (384,)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (NUM_FEATURES,):
            raise ValueError(f"expected exactly {NUM_FEATURES} values")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ReferenceStats:
    """Per-dimension normalization table; near-zero spreads are floored to 1."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_vectors(cls, vectors: Sequence[EmotionVector]) -> "ReferenceStats":
        if not vectors:
            raise ValueError("need at least one reference vector")
        stacked = np.stack([v.values for v in vectors])
        mean = stacked.mean(axis=0)
        std = stacked.std(axis=0)
        std = np.where(std < _STD_FLOOR, 1.0, std)
        return cls(mean=mean, std=std)


# audio IO


def load_wav(path: str) -> PcmClip:
    """Mono or down-mixed WAV; integer formats scaled to [-1, 1]."""
    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    else:
        samples = data.astype(np.float64)
    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    return PcmClip(samples, int(rate))


def save_wav(path: str, clip: PcmClip) -> None:
    scaled = np.clip(clip.samples, -1.0, 1.0) * 32767.0
    wavfile.write(path, clip.sample_rate, np.round(scaled).astype(np.int16))


def save_raw_samples(path: str, clip: PcmClip) -> None:
    """Plain-text sample record: 'rate <hz>' line, then one sample per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"rate {clip.sample_rate}\n")
        for value in clip.samples:
            fh.write(f"{float(value)!r}\n")


def load_raw_samples(path: str) -> PcmClip:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "rate":
            raise ValueError("raw sample record must start with 'rate <hz>'")
        rate = int(header[1])
        samples = [float(line) for line in fh if line.strip()]
    return PcmClip(np.asarray(samples), rate)


def load_audio(path: str) -> PcmClip:
    if path.endswith(".wav"):
        return load_wav(path)
    return load_raw_samples(path)


# low-level descriptors


def _next_pow2(n: int) -> int:
    size = 1
    while size < n:
        size *= 2
    return size


def _mel(freq_hz: np.ndarray | float) -> np.ndarray | float:
    return 2595.0 * np.log10(1.0 + np.asarray(freq_hz) / 700.0)


def _mel_inv(mels: np.ndarray) -> np.ndarray:
    return 700.0 * (10.0 ** (mels / 2595.0) - 1.0)


def _mel_filterbank(sample_rate: int, n_fft: int) -> np.ndarray:
    """Triangular filters, (MEL_FILTERS, n_fft // 2 + 1)."""
    edges = _mel_inv(np.linspace(0.0, _mel(sample_rate / 2.0), MEL_FILTERS + 2))
    bins = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    bank = np.zeros((MEL_FILTERS, len(bins)))
    for m in range(MEL_FILTERS):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (bins - lo) / (mid - lo) if mid > lo else np.zeros_like(bins)
        falling = (hi - bins) / (hi - mid) if hi > mid else np.zeros_like(bins)
        bank[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def _dct_ortho(log_energies: np.ndarray) -> np.ndarray:
    return scipy.fft.dct(log_energies, type=2, norm="ortho", axis=1)


def extract_llds(
    clip: PcmClip, frame_ms: int = FRAME_MS_DEFAULT, hop_ms: int = HOP_MS_DEFAULT
) -> LldContours:
    """Frame the clip and compute the 16 descriptor contours."""
    rate = clip.sample_rate
    frame_len = max(1, int(round(rate * frame_ms / 1000.0)))
    hop = max(1, int(round(rate * hop_ms / 1000.0)))
    samples = clip.samples
    if len(samples) < frame_len:
        raise ClipTooShort(
            f"{len(samples)} samples, need at least {frame_len} for one frame"
        )
    frames = np.lib.stride_tricks.sliding_window_view(samples, frame_len)[::hop]
    n_frames = frames.shape[0]

    rms = np.sqrt(np.mean(frames * frames, axis=1))

    zcr = np.count_nonzero(frames[:, :-1] * frames[:, 1:] < 0.0, axis=1) / frame_len

    window = np.hamming(frame_len)
    windowed = frames * window

    n_fft = _next_pow2(frame_len)
    power = np.abs(np.fft.rfft(windowed, n_fft, axis=1)) ** 2
    bank = _mel_filterbank(rate, n_fft)
    log_mel = np.log(np.maximum(power @ bank.T, _MEL_LOG_FLOOR))
    mfcc = _dct_ortho(log_mel)[:, 1 : NUM_MFCC + 1]

    lag_min = int(np.ceil(rate / PITCH_MAX_HZ))
    lag_max = min(int(np.floor(rate / PITCH_MIN_HZ)), frame_len - 1)

    voicing = np.zeros(n_frames)
    f0 = np.zeros(n_frames)
    if lag_min <= lag_max:
        # linear (zero-padded) autocorrelation of the raw frame via FFT
        acf_fft = _next_pow2(2 * frame_len)
        spectra = np.fft.rfft(frames, acf_fft, axis=1)
        acf = np.fft.irfft(np.abs(spectra) ** 2, acf_fft, axis=1)[:, :frame_len]
        r0 = acf[:, 0]
        nonzero = r0 > 0.0
        band = acf[:, lag_min : lag_max + 1]
        peak = band.max(axis=1, initial=0.0)
        voicing[nonzero] = np.clip(peak[nonzero] / r0[nonzero], 0.0, 1.0)

        cep_fft = _next_pow2(max(frame_len, 2 * lag_max + 4))
        magnitude = np.abs(np.fft.rfft(windowed, cep_fft, axis=1))
        # floor 40 dB under each frame's spectral max: the log would otherwise
        # amplify window sidelobes into cepstral noise that masks the pitch peak
        floors = np.maximum(
            magnitude.max(axis=1, keepdims=True) * 1e-2, _SPECTRUM_FLOOR
        )
        cepstrum = np.fft.irfft(
            np.log(np.maximum(magnitude, floors)), cep_fft, axis=1
        )
        voiced = voicing >= VOICING_THRESHOLD
        for i in np.flatnonzero(voiced):
            row = cepstrum[i]
            p = lag_min + int(np.argmax(row[lag_min : lag_max + 1]))
            left, center, right = row[p - 1], row[p], row[p + 1]
            denom = left - 2.0 * center + right
            delta = 0.5 * (left - right) / denom if denom != 0.0 else 0.0
            delta = float(np.clip(delta, -0.5, 0.5))
            f0[i] = rate / (p + delta)

    values = np.empty((len(LLD_NAMES), n_frames))
    values[0] = rms
    values[1 : 1 + NUM_MFCC] = mfcc.T
    values[13] = zcr
    values[14] = voicing
    values[15] = f0
    return LldContours(values=values)


# functionals


def _delta(contour: np.ndarray) -> np.ndarray:
    """Two-point symmetric difference, edges replicated."""
    out = np.empty_like(contour)
    out[1:-1] = (contour[2:] - contour[:-2]) / 2.0
    out[0] = (contour[1] - contour[0]) / 2.0
    out[-1] = (contour[-1] - contour[-2]) / 2.0
    return out


def _functionals_for(series: np.ndarray) -> list[float]:
    n = len(series)
    mean = float(np.mean(series))
    lo = float(np.min(series))
    hi = float(np.max(series))
    value_range = hi - lo
    constant = value_range == 0.0

    if constant:
        std = kurt = skew = 0.0
        offset, slope, mse = mean, 0.0, 0.0
    else:
        std = float(np.std(series))
        centered = series - mean
        m2 = std * std
        # numerically constant data (variance below cancellation noise) takes
        # the same convention as exactly constant data
        if m2 <= (np.finfo(np.float64).eps * abs(mean)) ** 2:
            kurt = skew = 0.0
        else:
            kurt = float(np.mean(centered**4)) / (m2 * m2) - 3.0
            skew = float(np.mean(centered**3)) / m2**1.5
        centered_x = np.arange(n, dtype=np.float64) - (n - 1) / 2.0
        slope = float(centered_x @ series) / float(centered_x @ centered_x)
        offset = mean - slope * (n - 1) / 2.0
        residual = series - (offset + slope * np.arange(n))
        mse = float(np.mean(residual * residual))

    relmin = float(np.argmin(series)) / (n - 1)
    relmax = float(np.argmax(series)) / (n - 1)
    return [mean, std, kurt, skew, lo, hi, value_range, relmin, relmax, offset, slope, mse]


def functionals(contours: LldContours) -> EmotionVector:
    """Summarize the 16 contours and their deltas into the 384-vector."""
    if contours.n_frames < 2:
        raise TooFewFrames("need at least 2 frames for the regression functionals")
    out: list[float] = []
    for row in contours.values:
        out.extend(_functionals_for(row))
    for row in contours.values:
        out.extend(_functionals_for(_delta(row)))
    return EmotionVector(np.asarray(out))


def extract_emotion_vector(
    clip: PcmClip, frame_ms: int = FRAME_MS_DEFAULT, hop_ms: int = HOP_MS_DEFAULT
) -> EmotionVector:
    return functionals(extract_llds(clip, frame_ms, hop_ms))


# comparison


def emotion_similarity(
    a: EmotionVector, b: EmotionVector, stats: ReferenceStats
) -> float:
    """Cosine of the z-normalized vectors, in [-1, 1]."""
    if not (np.all(np.isfinite(a.values)) and np.all(np.isfinite(b.values))):
        raise ValueError("emotion vectors must be finite")
    za = (a.values - stats.mean) / stats.std
    zb = (b.values - stats.mean) / stats.std
    na = float(np.linalg.norm(za))
    nb = float(np.linalg.norm(zb))
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("z-normalized vector has zero magnitude")
    if np.array_equal(za, zb):
        return 1.0
    return float(np.clip(za @ zb / (na * nb), -1.0, 1.0))


# vector records


def write_vector_records(
    path: str, records: Sequence[tuple[object, EmotionVector]]
) -> None:
    """CSV cross-check surface: scene_id column then the 384 named columns."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("scene_id",) + feature_names())
        for scene_id, vector in records:
            writer.writerow([scene_id] + [repr(float(v)) for v in vector.values])


def read_vector_records(path: str) -> list[tuple[str, EmotionVector]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != ("scene_id",) + feature_names():
            raise ValueError("vector record header does not match feature layout")
        return [
            (row[0], EmotionVector(np.asarray([float(v) for v in row[1:]])))
            for row in reader
            if row
        ]
