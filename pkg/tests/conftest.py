"""Shared end-to-end fixtures: a six-scene tribute set and a talk set."""

import numpy as np
import pytest

from subcompose.audio import PcmClip, save_wav
from subcompose.pipeline import PipelineConfig

RATE = 16_000


def tone_samples(freq_hz, seconds, amplitude=0.8):
    t = np.arange(int(RATE * seconds)) / RATE
    return amplitude * np.sin(2 * np.pi * freq_hz * t)


FILM_SRT = """\
1
00:00:00,500 --> 00:00:01,500
[Wind howls] The river runs cold tonight.

2
00:00:02,000 --> 00:00:03,500
Stone endures.

3
00:00:04,200 --> 00:00:05,800
Machines hum beneath the city.

4
00:00:08,900 --> 00:00:09,700
The river carries us home.
"""

LECTURE_SRT = """\
1
00:00:00,000 --> 00:00:02,000
The reef shelters coral and fish.

2
00:00:02,500 --> 00:00:04,500
A tide pulls the kelp across the current.

3
00:00:05,000 --> 00:00:07,000
Waves carry shells over the reef.

4
00:00:07,500 --> 00:00:09,500
Coral feeds the reef fish.

5
00:00:10,000 --> 00:00:12,000
The current bends the kelp.

6
00:00:12,500 --> 00:00:14,500
Shells gather where the tide turns.
"""

DOC_THEMES = {
    "oceans": [
        "The reef holds coral in the current.",
        "Fish dart between kelp and shells.",
        "A tide lifts the wave over the reef.",
        "Coral feeds fish along the current.",
        "Kelp sways while shells drift.",
        "The wave folds into the tide.",
        "Reef fish guard the coral.",
        "Shells settle where kelp grows.",
    ],
    "space": [
        "The rocket climbs past the star.",
        "A comet streaks across the nebula.",
        "Gravity bends the orbit of the comet.",
        "Lunar dust rings the solar rim.",
        "The star feeds the nebula glow.",
        "An orbit carries the rocket outward.",
        "Solar wind pushes the comet tail.",
        "The lunar plain reflects the star.",
    ],
    "forest": [
        "Pine shadows the moss and fern.",
        "An owl waits in the timber grove.",
        "Roots knit beneath the canopy.",
        "Moss climbs the pine root.",
        "The grove hides the owl nest.",
        "Timber creaks under the canopy.",
        "Fern unrolls beside the root.",
        "The canopy filters light onto moss.",
    ],
}


def srt_for(sentences):
    blocks = []
    for i, text in enumerate(sentences):
        start = i * 3
        end = start + 2
        blocks.append(
            f"{i + 1}\n"
            f"00:00:{start:02d},200 --> 00:00:{end:02d},800\n"
            f"{text}\n"
        )
    return "\n".join(blocks)


@pytest.fixture(scope="session")
def tribute_inputs(tmp_path_factory):
    """Six scenes of distinct tones; the song duplicates scene 2's audio.

    Scene spans (25 fps stats, cuts at frames 40/100/150/190/220):
    [0,1600) 440 Hz, [1600,4000) 110 Hz, [4000,6000) 440 Hz,
    [6000,7600) 220 Hz, [7600,8800) 330 Hz, [8800,9960) 550 Hz.
    """
    root = tmp_path_factory.mktemp("tribute_inputs")
    (root / "film.srt").write_text(FILM_SRT, encoding="utf-8")

    film = np.concatenate(
        [
            tone_samples(440, 1.6),
            tone_samples(110, 2.4),
            tone_samples(440, 2.0),
            tone_samples(220, 1.6),
            tone_samples(330, 1.2),
            tone_samples(550, 1.16),
        ]
    )
    save_wav(str(root / "film.wav"), PcmClip(film, RATE))
    save_wav(str(root / "song.wav"), PcmClip(tone_samples(440, 2.0), RATE))

    lines = []
    for i in range(250):
        diff = 0.0 if i == 0 else 2.0
        if i in (40, 100, 150, 190, 220):
            diff = 90.0
        lines.append(f"{i},{i * 40},{diff}")
    (root / "frame_stats.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return root


def tribute_config(inputs, out_dir, **overrides):
    values = dict(
        mode="tribute",
        output_dir=str(out_dir),
        film_subtitles=str(inputs / "film.srt"),
        film_audio=str(inputs / "film.wav"),
        song_audio=str(inputs / "song.wav"),
        frame_stats=str(inputs / "frame_stats.txt"),
    )
    values.update(overrides)
    return PipelineConfig(**values)


@pytest.fixture(scope="session")
def talk_inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("talk_inputs")
    (root / "lecture.srt").write_text(LECTURE_SRT, encoding="utf-8")
    manifest_lines = []
    for doc_id, sentences in sorted(DOC_THEMES.items()):
        (root / f"{doc_id}.srt").write_text(srt_for(sentences), encoding="utf-8")
        manifest_lines.append(f"{doc_id}\t{doc_id}.srt\tvideos/{doc_id}.mp4")
    (root / "manifest.tsv").write_text(
        "# documentary collection\n" + "\n".join(manifest_lines) + "\n",
        encoding="utf-8",
    )
    return root


def talk_config(inputs, out_dir, **overrides):
    values = dict(
        mode="talk",
        output_dir=str(out_dir),
        lecture_subtitles=str(inputs / "lecture.srt"),
        manifest=str(inputs / "manifest.tsv"),
        num_topics=4,
        subset_topics=3,
        subset_size=2,
        top_k=5,
        summary_size=4,
        em_iters=15,
    )
    values.update(overrides)
    return PipelineConfig(**values)
