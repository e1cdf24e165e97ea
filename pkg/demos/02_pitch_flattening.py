"""Pitch flattening walkthrough.

Builds a vibrato signal surrounded by silence, flattens its pitch onto the
speaker mean with PSOLA, and shows that local pitch movement disappears
while duration, energy, and unvoiced samples are preserved.

    python demos/02_pitch_flattening.py
"""
from pathlib import Path

import numpy as np

from voxkit import (
    AudioBuffer,
    FlattenTarget,
    SynthSpec,
    find_pitch_marks,
    flatten_pitch,
    synthesize,
    track_pitch,
)
from voxkit.fileio import write_wav

SR = 16000
OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

# 0.2 s silence | 1 s of 200 +/- 20 Hz vibrato | 0.2 s silence
spec = SynthSpec(kind="vibrato", duration=1.0, base=200.0, depth=20.0, rate=5.0, amplitude=0.5)
vib, _ = synthesize(spec, SR)
pad = np.zeros(int(0.2 * SR))
audio = AudioBuffer(np.concatenate([pad, vib.samples, pad]), SR)

contour = track_pitch(audio)
voiced = contour.voiced_f0()
print(f"input:  {voiced.size} voiced frames, mean {voiced.mean():.2f} Hz, std {voiced.std():.2f} Hz")

# pitch marks ride the waveform peaks, one per local period
marks = find_pitch_marks(audio, contour)
spacing = np.diff(marks.positions[marks.voiced == 1])
print(f"marks:  {len(marks)} total, voiced spacing {spacing.mean():.1f} samples "
      f"(one 200 Hz period = {SR / 200:.0f})")

flat = flatten_pitch(audio, contour)  # default target: speaker mean
out_contour = track_pitch(flat)
flat_voiced = out_contour.voiced_f0()
print(f"output: mean {flat_voiced.mean():.2f} Hz, std {flat_voiced.std():.2f} Hz "
      f"(variance removed, global pitch kept)")
print(f"length preserved: {len(flat) == len(audio)}")

rms_in = np.sqrt(np.mean(audio.samples**2))
rms_out = np.sqrt(np.mean(flat.samples**2))
print(f"rms in/out: {rms_in:.4f} / {rms_out:.4f}")

# a fixed target moves the whole utterance to a chosen frequency instead
low = flatten_pitch(audio, contour, FlattenTarget("fixed_hz", 150.0))
print(f"fixed 150 Hz target -> tracked mean {track_pitch(low).voiced_f0().mean():.2f} Hz")

write_wav(OUT / "vibrato.wav", audio)
write_wav(OUT / "vibrato_flat.wav", flat)
write_wav(OUT / "vibrato_150.wav", low)
print(f"wrote WAVs to {OUT}/")
