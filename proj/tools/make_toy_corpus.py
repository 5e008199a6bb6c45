#!/usr/bin/env python3
"""Regenerates the bundled toy corpus under data/toy/.

Writes manifest.jsonl, mos.csv, mock/truth.json and one synthetic WAV per
sample (harmonic tone at a gender-typical pitch with a syllable-rate
amplitude envelope). Output is deterministic.
"""

import json
import math
import struct
import wave
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "data" / "toy"
RATE = 8000

SAMPLES = [
    {
        "id": "s01", "f0": 105.0, "syll": 3.0, "amp": 0.12, "dur": 3.5,
        "valence": (4.2, 0.8), "arousal": (2.4, 0.6), "dominance": 3.9,
        "truth": {"gender": "male", "pitch": "low", "rate": "slow", "volume": "quiet",
                  "emotion": ["calm", "relaxed"]},
        "reference": "A male speaker talks slowly in a deep voice, speaking softly and sounding calm and "
                     "relaxed throughout the sentence, with long pauses between phrases.",
        "systems": {
            "sys_concise": "A man speaks slowly in a deep voice and sounds calm.",
            "sys_verbose": "A male speaker talks in a deep, resonant voice at a rapid clip, projecting loudly "
                           "and sounding calm yet somewhat tense, as if addressing a large room.",
        },
        "mos": {"sys_concise": [4, 4, 5], "sys_verbose": [2, 3, 2]},
    },
    {
        "id": "s02", "f0": 220.0, "syll": 6.0, "amp": 0.5, "dur": 4.0,
        "valence": (6.1, 0.9), "arousal": (6.0, 1.1), "dominance": 5.2,
        "truth": {"gender": "female", "pitch": "high", "rate": "fast", "volume": "loud",
                  "emotion": ["happy", "energetic"]},
        "reference": "A female speaker speaks rapidly in a high-pitched voice, talking loudly and sounding "
                     "happy and energetic as she shares good news with a friend.",
        "systems": {
            "sys_concise": "A woman speaks quickly and loudly, sounding happy.",
            "sys_verbose": "A female speaker with a high-pitched voice speaks slowly and softly, sounding sad "
                           "and anxious, her words trailing off as though she is reluctant to continue.",
        },
        "mos": {"sys_concise": [5, 4, 4], "sys_verbose": [1, 2, 1]},
    },
    {
        "id": "s03", "f0": 120.0, "syll": 5.5, "amp": 0.45, "dur": 5.0,
        "valence": (2.0, 1.0), "arousal": (6.3, 0.7), "dominance": 6.0,
        "truth": {"gender": "male", "pitch": "low", "rate": "fast", "volume": "loud",
                  "emotion": ["angry", "tense"]},
        "reference": "A male speaker delivers the line quickly with a low pitch, projecting loudly and "
                     "sounding angry and tense, clipping the ends of his words.",
        "systems": {
            "sys_concise": "A man speaks quickly and loudly with a low pitch, sounding angry.",
            "sys_verbose": "A male speaker delivers the line at a moderate pace with a low pitch and an even "
                           "volume, sounding calm and relaxed while choosing each word with care.",
        },
        "mos": {"sys_concise": [5, 5, 4], "sys_verbose": [2, 2, 3]},
    },
    {
        "id": "s04", "f0": 180.0, "syll": 2.5, "amp": 0.1, "dur": 6.0,
        "valence": (2.5, 1.2), "arousal": (3.0, 0.9), "dominance": 2.4,
        "truth": {"gender": "female", "pitch": "low", "rate": "slow", "volume": "quiet",
                  "emotion": ["sad", "anxious"]},
        "reference": "A female speaker speaks slowly in a low-pitched voice, talking quietly and sounding "
                     "sad and anxious, with a slight tremble on the final word.",
        "systems": {
            "sys_concise": "A woman speaks slowly and quietly, sounding sad.",
            "sys_verbose": "A female speaker speaks slowly in a low-pitched voice, sounding sad and anxious "
                           "and somewhat hesitant, as if worried about how her words will be received.",
        },
        "mos": {"sys_concise": [4, 3, 4], "sys_verbose": [4, 5, 4]},
    },
    {
        "id": "s05", "f0": 160.0, "syll": 4.0, "amp": 0.25, "dur": 4.5,
        "valence": (5.8, 0.5), "arousal": (4.4, 0.8), "dominance": 5.0,
        "truth": {"gender": "male", "pitch": "high", "rate": "normal", "volume": "normal",
                  "emotion": ["cheerful", "confident"]},
        "reference": "A male speaker speaks at a moderate pace in a high-pitched voice, at a moderate volume, "
                     "sounding cheerful and confident as he introduces himself.",
        "systems": {
            "sys_concise": "A man speaks at a moderate pace, sounding cheerful.",
            "sys_verbose": "A female speaker speaks quickly in a deep voice at a moderate volume, sounding "
                           "gloomy and hesitant, pausing often before continuing with her explanation.",
        },
        "mos": {"sys_concise": [4, 4, 4], "sys_verbose": [1, 1, 2]},
    },
    {
        "id": "s06", "f0": 200.0, "syll": 5.0, "amp": 0.08, "dur": 3.2,
        "valence": (2.2, 1.4), "arousal": (5.1, 1.3), "dominance": 2.9,
        "truth": {"gender": "female", "pitch": "normal", "rate": "fast", "volume": "quiet",
                  "emotion": ["fearful", "tense"]},
        "reference": "A female speaker talks quickly with a medium pitch, speaking quietly and sounding "
                     "fearful and tense, as though she is afraid of being overheard.",
        "systems": {
            "sys_concise": "A woman talks quickly and quietly, sounding fearful.",
            "sys_verbose": "A female speaker talks quickly with a medium pitch, speaking quietly and sounding "
                           "fearful and tense, her breath audible between hurried phrases.",
        },
        "mos": {"sys_concise": [4, 4, 3], "sys_verbose": [5, 4, 5]},
    },
]


def synth(sample):
    n = int(sample["dur"] * RATE)
    frames = bytearray()
    phase = 0.0
    for i in range(n):
        t = i / RATE
        f = sample["f0"] * (1.0 + 0.03 * math.sin(2 * math.pi * 0.7 * t))
        phase += 2 * math.pi * f / RATE
        envelope = 0.55 + 0.45 * math.sin(2 * math.pi * sample["syll"] * t) ** 2
        x = sample["amp"] * envelope * (0.7 * math.sin(phase) + 0.2 * math.sin(2 * phase) + 0.1 * math.sin(3 * phase))
        frames += struct.pack("<h", int(round(max(-1.0, min(1.0, x)) * 32767)))
    return bytes(frames)


def main():
    (ROOT / "audio").mkdir(parents=True, exist_ok=True)
    (ROOT / "mock").mkdir(parents=True, exist_ok=True)
    lines = []
    truth = {}
    mos_rows = ["sample_id,system_id,mos"]
    for s in SAMPLES:
        rel = f"audio/{s['id']}.wav"
        with wave.open(str(ROOT / rel), "wb") as w:
            w.setnchannels(1)
            w.setsampwidth(2)
            w.setframerate(RATE)
            w.writeframes(synth(s))
        record = {
            "sample_id": s["id"],
            "audio": rel,
            "duration_s": s["dur"],
            "valence": {"mean": s["valence"][0], "std": s["valence"][1]},
            "arousal": {"mean": s["arousal"][0], "std": s["arousal"][1]},
            "dominance": s["dominance"],
            "reference_caption": s["reference"],
            "generated_captions": s["systems"],
            "human_mos": s["mos"],
        }
        lines.append(json.dumps(record, sort_keys=True))
        truth[s["id"]] = s["truth"]
        for system, ratings in sorted(s["mos"].items()):
            mos_rows.append(f"{s['id']},{system},{sum(ratings) / len(ratings):.4f}")
    (ROOT / "manifest.jsonl").write_text("\n".join(lines) + "\n")
    (ROOT / "mos.csv").write_text("\n".join(mos_rows) + "\n")
    (ROOT / "mock" / "truth.json").write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
