"""Evaluation metric walkthrough.

Shows the pitch deviation metrics (local and global), the frame-wise and
global pitch losses, speaker-consistency cosine similarity, and word and
character error rates.

    python demos/04_evaluation_metrics.py
"""
import numpy as np

from voxkit import (
    F0Contour,
    GlobalPitch,
    SpeakerEmbedding,
    error_rate,
    frame_f0_loss,
    global_f0_error,
    global_pitch,
    global_pitch_loss,
    local_f0_deviation,
    perturb_contour,
    speaker_consistency,
)

rng = np.random.default_rng(1)


def make_contour(values):
    values = np.asarray(values, dtype=float)
    return F0Contour(values, (values > 0).astype(np.uint8), hop=0.01)


# --- local f0 deviation -----------------------------------------------------
# each contour is normalized by its own voiced mean, so a constant offset
# (a different global pitch) does not count as error; only the shape does
gt = make_contour(150 + 25 * np.sin(np.linspace(0, 6 * np.pi, 200)))

shifted = perturb_contour(gt, global_shift_hz=40.0)         # same shape, higher voice
noisy = perturb_contour(gt, local_noise_hz=8.0, seed=7)     # same mean, jittered shape
flat = make_contour(np.full(200, 150.0))                    # shape removed entirely

for name, pred in (("global +40 Hz", shifted), ("8 Hz jitter", noisy), ("flat", flat)):
    report = local_f0_deviation(pred, gt)
    print(f"local f0 deviation, {name:>13}: {report.local_dev:6.2f} Hz "
          f"({report.n_eval_frames} frames)")

# --- global pitch -----------------------------------------------------------
speaker = global_pitch([gt, noisy], speaker_id="demo")
print(f"\nglobal pitch of speaker 'demo': {speaker.value:.2f} Hz "
      f"over {speaker.n_voiced_frames} voiced frames")
other = GlobalPitch(value=185.0, n_voiced_frames=100, speaker_id="other")
print(f"global f0 error vs 185 Hz speaker: {global_f0_error(speaker, other):.2f} Hz")
print(f"squared global pitch loss 140 vs 150: {global_pitch_loss(140.0, 150.0):.1f}")

# --- frame-wise f0 loss (training-style MSE over a shared grid) -------------
pred = make_contour([110.0, 190.0])
target = make_contour([100.0, 200.0])
print(f"frame f0 loss: {frame_f0_loss(pred, target):.1f} (hand value 100.0)")

# --- speaker consistency ----------------------------------------------------
a = rng.normal(size=256)
same = SpeakerEmbedding(a + rng.normal(0, 0.2, 256), "spk1")
diff = SpeakerEmbedding(rng.normal(size=256), "spk2")
base = SpeakerEmbedding(a, "spk1")
print(f"\ncosine, same speaker:      {speaker_consistency(base, same):.4f}")
print(f"cosine, different speaker: {speaker_consistency(base, diff):.4f}")

# --- intelligibility --------------------------------------------------------
ref = "the quick brown fox jumps over the lazy dog"
hyp = "the quick brown box jumps over lazy dog again"
wer = error_rate(ref, hyp, unit="word")
cer = error_rate(ref, hyp, unit="char")
print(f"\nWER {wer.rate:.3f} (S={wer.substitutions} I={wer.insertions} D={wer.deletions})")
print(f"CER {cer.rate:.3f} over {cer.ref_len} characters")
