"""Evaluation metrics: pitch deviation, global pitch error, frame-wise f0
loss, speaker-consistency cosine similarity, and word/character error rates.
"""
from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np

from .align import nearest_interpolate
from .errors import DomainError
from .pitch import F0Contour, GlobalPitch


@dataclass(frozen=True, eq=False)
class SpeakerEmbedding:
    """A speaker's embedding vector with its label."""

    vector: np.ndarray
    speaker_id: str = ""

    def __post_init__(self) -> None:
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("embedding must be finite")
        if np.linalg.norm(v) == 0.0:
            raise ValueError("embedding must have non-zero norm")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)


@dataclass(frozen=True)
class F0DeviationReport:
    """Result of the local pitch-deviation metric."""

    local_dev: float
    n_eval_frames: int
    pred_mean: float
    gt_mean: float

    def __post_init__(self) -> None:
        if self.local_dev < 0:
            raise ValueError("local_dev must be >= 0")
        if self.n_eval_frames < 1:
            raise ValueError("n_eval_frames must be >= 1")


@dataclass(frozen=True)
class ErrorRateReport:
    """Edit-distance error rate with its operation counts."""

    rate: float
    substitutions: int
    insertions: int
    deletions: int
    ref_len: int

    def __post_init__(self) -> None:
        if self.ref_len < 1:
            raise ValueError("ref_len must be >= 1")
        expected = (self.substitutions + self.insertions + self.deletions) / self.ref_len
        if abs(self.rate - expected) > 1e-12:
            raise ValueError("rate must equal (S + I + D) / ref_len")


def _deviations(contour: F0Contour) -> tuple[np.ndarray, float]:
    """Per-frame f0 minus the contour's voiced-mean f0."""
    voiced = contour.voiced_f0()
    if voiced.size == 0:
        raise DomainError("contour has no voiced frames")
    mean = float(voiced.mean())
    return contour.f0 - mean, mean


def local_f0_deviation(
    pred: F0Contour, gt: F0Contour, frames: str = "joint"
) -> F0DeviationReport:
    """RMS difference of mean-normalized f0 between two contours.

    Each contour is normalized by subtracting its own mean over voiced
    frames, which removes any global pitch offset; the RMS of the remaining
    difference isolates content-related pitch movement.  When lengths differ
    the prediction is nearest-interpolated to the ground-truth length first.

    ``frames="joint"`` (default) evaluates only frames voiced in both
    contours; ``frames="all"`` applies the formula literally over every
    frame, letting unvoiced frames contribute through their stored 0.0.
    """
    if frames not in ("joint", "all"):
        raise ValueError("frames must be 'joint' or 'all'")
    if len(pred) == 0 or len(gt) == 0:
        raise DomainError("contours must be non-empty")
    if len(pred) != len(gt):
        pred = nearest_interpolate(pred, len(gt))
    dv_pred, pred_mean = _deviations(pred)
    dv_gt, gt_mean = _deviations(gt)
    if frames == "joint":
        mask = (pred.voiced == 1) & (gt.voiced == 1)
        if not mask.any():
            raise DomainError("no jointly-voiced frames to evaluate")
        diff = dv_pred[mask] - dv_gt[mask]
    else:
        diff = dv_pred - dv_gt
    return F0DeviationReport(
        local_dev=float(np.sqrt(np.mean(diff**2))),
        n_eval_frames=int(diff.size),
        pred_mean=pred_mean,
        gt_mean=gt_mean,
    )


def global_f0_error(pred: GlobalPitch, gt: GlobalPitch) -> float:
    """Absolute difference of two global pitch values in Hz."""
    return abs(pred.value - gt.value)


def frame_f0_loss(pred: F0Contour, gt: F0Contour) -> float:
    """Mean squared frame-wise f0 error over all frames.

    Unvoiced frames contribute through their stored 0.0 values.  This is a
    training-style loss over a shared frame grid, so a length mismatch is an
    error rather than triggering implicit interpolation.
    """
    if len(pred) != len(gt):
        raise DomainError(
            f"length mismatch: pred has {len(pred)} frames, gt has {len(gt)}"
        )
    if len(gt) == 0:
        raise DomainError("contours must be non-empty")
    return float(np.mean((gt.f0 - pred.f0) ** 2))


def global_pitch_loss(pred: float, gt: float) -> float:
    """Squared error between predicted and ground-truth global pitch."""
    return (gt - pred) ** 2


def speaker_consistency(a: SpeakerEmbedding, b: SpeakerEmbedding) -> float:
    """Cosine similarity of two speaker embeddings, in [-1, 1]."""
    va, vb = a.vector, b.vector
    if va.size != vb.size:
        raise DomainError(
            f"embedding dimension mismatch: {va.size} vs {vb.size}"
        )
    sim = float(np.dot(va, vb) / (np.linalg.norm(va) * np.linalg.norm(vb)))
    return min(1.0, max(-1.0, sim))


def tokenize(text: str, unit: str = "word") -> list[str]:
    """Normalize text and split into word or character tokens.

    Normalization is fixed: lowercase, strip punctuation, collapse
    whitespace.  Character tokens keep single spaces between words.
    """
    if unit not in ("word", "char"):
        raise ValueError("unit must be 'word' or 'char'")
    text = text.lower().translate(str.maketrans("", "", string.punctuation))
    words = text.split()
    if unit == "word":
        return words
    return list(" ".join(words))


def error_rate(ref, hyp, unit: str = "word") -> ErrorRateReport:
    """Minimal-edit-distance error rate between reference and hypothesis.

    Inputs may be raw strings (tokenized per ``unit``) or pre-tokenized
    sequences.  Substitution, insertion and deletion all cost 1; counts come
    from one optimal alignment, with ties broken by preferring substitution,
    then insertion, then deletion.
    """
    ref_tokens = tokenize(ref, unit) if isinstance(ref, str) else list(ref)
    hyp_tokens = tokenize(hyp, unit) if isinstance(hyp, str) else list(hyp)
    if len(ref_tokens) == 0:
        raise DomainError("reference is empty after tokenization")
    s, i, d = edit_counts(ref_tokens, hyp_tokens)
    return ErrorRateReport(
        rate=(s + i + d) / len(ref_tokens),
        substitutions=s,
        insertions=i,
        deletions=d,
        ref_len=len(ref_tokens),
    )


def edit_counts(ref: list, hyp: list) -> tuple[int, int, int]:
    """(S, I, D) counts of one tie-broken optimal alignment."""
    n, m = len(ref), len(hyp)
    dist = np.zeros((n + 1, m + 1), dtype=np.int64)
    dist[:, 0] = np.arange(n + 1)
    dist[0, :] = np.arange(m + 1)
    for a in range(1, n + 1):
        for b in range(1, m + 1):
            sub = dist[a - 1, b - 1] + (ref[a - 1] != hyp[b - 1])
            ins = dist[a, b - 1] + 1
            dele = dist[a - 1, b] + 1
            dist[a, b] = min(sub, ins, dele)
    s = i = d = 0
    a, b = n, m
    while a > 0 or b > 0:
        cur = dist[a, b]
        if a > 0 and b > 0 and cur == dist[a - 1, b - 1] + (ref[a - 1] != hyp[b - 1]):
            if ref[a - 1] != hyp[b - 1]:
                s += 1
            a, b = a - 1, b - 1
        elif b > 0 and cur == dist[a, b - 1] + 1:
            i += 1
            b -= 1
        else:
            d += 1
            a -= 1
    return s, i, d
