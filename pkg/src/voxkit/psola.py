"""Pitch-mark detection and time-domain pitch-synchronous overlap-add.

``flatten_pitch`` resynthesizes voiced regions onto a constant target
frequency, removing content-related pitch movement while preserving duration
and content.  ``resynthesize`` is the general form with a time-varying
target contour; flattening is the constant-target special case.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import AudioBuffer, clip_samples
from .errors import DomainError
from .pitch import F0Contour

# step between marks in unvoiced stretches (seconds)
UNVOICED_STEP_S = 0.010
# marks snap to a waveform peak within this fraction of the local period
PEAK_SNAP_FRACTION = 0.2
# voiced regions extend past the last voiced frame start by this many hops,
# covering the tail of that frame's analysis window
REGION_TAIL_HOPS = 4

TARGET_F0_MIN_HZ = 40.0
TARGET_F0_MAX_HZ = 1000.0


@dataclass(frozen=True, eq=False)
class PitchMarks:
    """Epoch sample positions with a per-mark voiced flag."""

    positions: np.ndarray
    voiced: np.ndarray
    n_samples: int

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.int64)
        voiced = np.asarray(self.voiced).astype(np.uint8)
        if pos.ndim != 1 or voiced.ndim != 1 or pos.size != voiced.size:
            raise ValueError("positions and voiced must be 1-D arrays of equal length")
        if pos.size:
            if np.any(np.diff(pos) <= 0):
                raise ValueError("mark positions must be strictly increasing")
            if pos[0] < 0 or pos[-1] >= self.n_samples:
                raise ValueError("mark positions must lie within [0, n_samples)")
        pos = pos.copy()
        voiced = voiced.copy()
        pos.setflags(write=False)
        voiced.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "voiced", voiced)

    def __len__(self) -> int:
        return int(self.positions.size)


@dataclass(frozen=True)
class FlattenTarget:
    """Constant-pitch target: the speaker's mean or median voiced f0, or a
    fixed frequency in Hz."""

    mode: str = "speaker_mean"
    value: float | None = None

    MODES = ("speaker_mean", "speaker_median", "fixed_hz")

    def __post_init__(self) -> None:
        if self.mode not in self.MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {self.MODES}")
        if self.mode == "fixed_hz":
            if self.value is None:
                raise ValueError("fixed_hz mode requires a value")
            if not TARGET_F0_MIN_HZ <= self.value <= TARGET_F0_MAX_HZ:
                raise ValueError(
                    f"fixed_hz value must be in [{TARGET_F0_MIN_HZ:g}, {TARGET_F0_MAX_HZ:g}] Hz"
                )

    def resolve(self, contour: F0Contour) -> float:
        if self.mode == "fixed_hz":
            return float(self.value)
        voiced = contour.voiced_f0()
        if voiced.size == 0:
            raise DomainError(
                f"{self.mode} target needs at least one voiced frame"
            )
        if self.mode == "speaker_mean":
            return float(voiced.mean())
        return float(np.median(voiced))


def _voiced_regions(contour: F0Contour, hop: int, n_samples: int) -> list[tuple[int, int, int, int]]:
    """Sample regions (start, end, first_frame, last_frame) of voiced runs.

    Each run of voiced frames [a, b) maps to samples
    [a*hop, min(n, (b - 1 + REGION_TAIL_HOPS + 1)*hop)), clipped so that it
    never reaches into the next voiced run.
    """
    v = contour.voiced
    regions = []
    i = 0
    n_frames = len(contour)
    while i < n_frames:
        if v[i]:
            j = i
            while j < n_frames and v[j]:
                j += 1
            start = i * hop
            end = min(n_samples, (j + REGION_TAIL_HOPS) * hop)
            regions.append((start, end, i, j - 1))
            i = j
        else:
            i += 1
    # clip each region at the next region's start
    for k in range(len(regions) - 1):
        s, e, a, b = regions[k]
        regions[k] = (s, min(e, regions[k + 1][0]), a, b)
    return [r for r in regions if r[1] > r[0]]


def find_pitch_marks(audio: AudioBuffer, contour: F0Contour) -> PitchMarks:
    """Place pitch marks from a contour tracked on this audio.

    In voiced regions marks ride successive waveform peaks spaced by the
    local period, snapped within +-20% of a period; unvoiced stretches get a
    fixed 10 ms step.
    """
    n = len(audio)
    sr = audio.sample_rate
    if len(contour) == 0 or n == 0:
        return PitchMarks(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.uint8), n)
    hop = int(round(contour.hop * sr))
    x = audio.samples

    regions = _voiced_regions(contour, hop, n)
    positions: list[int] = []
    flags: list[int] = []

    def local_period(pos: int, first: int, last: int) -> float:
        idx = min(max(pos // hop, first), last)
        f = contour.f0[idx]
        if f <= 0.0:  # inside the tail extension; reuse the run's last voiced f0
            f = contour.f0[last]
        return sr / f

    # voiced marks
    voiced_bounds = []
    for start, end, first, last in regions:
        period = local_period(start, first, last)
        seed_hi = min(end, start + int(np.ceil(period)) + 1)
        if seed_hi <= start:
            continue
        mark = start + int(np.argmax(np.abs(x[start:seed_hi])))
        region_marks = [mark]
        while True:
            period = local_period(mark, first, last)
            pred = mark + period
            if pred >= end:
                break
            lo = max(mark + 1, int(np.floor(pred - PEAK_SNAP_FRACTION * period)))
            hi = min(end, int(np.ceil(pred + PEAK_SNAP_FRACTION * period)) + 1)
            if lo >= hi:
                break
            mark = lo + int(np.argmax(np.abs(x[lo:hi])))
            region_marks.append(mark)
        voiced_bounds.append((start, end))
        positions.extend(region_marks)
        flags.extend([1] * len(region_marks))

    # unvoiced marks fill the gaps at a fixed step
    step = max(1, int(round(UNVOICED_STEP_S * sr)))
    gaps = []
    prev_end = 0
    for start, end in voiced_bounds:
        if start > prev_end:
            gaps.append((prev_end, start))
        prev_end = max(prev_end, end)
    if prev_end < n:
        gaps.append((prev_end, n))
    for gs, ge in gaps:
        for p in range(gs, ge, step):
            positions.append(p)
            flags.append(0)

    order = np.argsort(positions, kind="stable")
    pos = np.asarray(positions, dtype=np.int64)[order]
    flg = np.asarray(flags, dtype=np.uint8)[order]
    keep = np.ones(pos.size, dtype=bool)
    keep[1:] = np.diff(pos) > 0
    return PitchMarks(pos[keep], flg[keep], n)


def flatten_pitch(
    audio: AudioBuffer,
    contour: F0Contour,
    target: FlattenTarget | None = None,
) -> AudioBuffer:
    """Resynthesize voiced regions onto one constant frequency.

    The target resolves to the speaker's mean voiced f0 by default, so only
    local (content-related) pitch movement is removed.  Unvoiced regions are
    copied verbatim and output length equals input length exactly.
    """
    if target is None:
        target = FlattenTarget()
    target_hz = target.resolve(contour)
    flat = np.where(contour.voiced == 1, target_hz, 0.0)
    flat_contour = F0Contour(flat, contour.voiced, contour.hop, contour.sample_rate)
    marks = find_pitch_marks(audio, contour)
    return _overlap_add(audio, marks, flat_contour)


def resynthesize(
    audio: AudioBuffer, marks: PitchMarks, target_contour: F0Contour
) -> AudioBuffer:
    """Overlap-add resynthesis onto a time-varying target contour.

    Segments of two local periods, Hann-windowed and centered on the nearest
    voiced analysis mark, are placed at synthesis epochs generated from the
    target contour.  Duration is preserved; unvoiced regions pass through.
    """
    voiced_f0 = target_contour.voiced_f0()
    if voiced_f0.size and (
        voiced_f0.min() < TARGET_F0_MIN_HZ or voiced_f0.max() > TARGET_F0_MAX_HZ
    ):
        raise DomainError(
            f"target f0 outside [{TARGET_F0_MIN_HZ:g}, {TARGET_F0_MAX_HZ:g}] Hz "
            "on a voiced frame"
        )
    return _overlap_add(audio, marks, target_contour)


def _analysis_periods(marks: PitchMarks, sr: int) -> np.ndarray:
    """Local period at each voiced mark, from adjacent voiced-mark spacing."""
    vpos = marks.positions[marks.voiced == 1]
    periods = np.zeros(vpos.size)
    max_gap = 1.5 * sr / TARGET_F0_MIN_HZ
    for i in range(vpos.size):
        gaps = []
        if i > 0:
            g = vpos[i] - vpos[i - 1]
            if g <= max_gap:
                gaps.append(g)
        if i + 1 < vpos.size:
            g = vpos[i + 1] - vpos[i]
            if g <= max_gap:
                gaps.append(g)
        periods[i] = min(gaps) if gaps else 0.0
    return periods


def _overlap_add(
    audio: AudioBuffer, marks: PitchMarks, target: F0Contour
) -> AudioBuffer:
    n = len(audio)
    sr = audio.sample_rate
    x = audio.samples
    if len(marks) == 0 or len(target) == 0 or n == 0:
        return AudioBuffer(x, sr)
    hop = int(round(target.hop * sr))
    vpos = marks.positions[marks.voiced == 1]
    if vpos.size == 0:
        return AudioBuffer(x, sr)
    periods = _analysis_periods(marks, sr)

    out = x.copy()
    for start, end, first, last in _voiced_regions(target, hop, n):
        sel = (vpos >= start) & (vpos < end)
        if not sel.any():
            continue  # no analysis material; leave the region untouched
        region_marks = vpos[sel]

        def target_period(pos: int) -> float:
            idx = min(max(pos // hop, first), last)
            f = target.f0[idx]
            if f <= 0.0:
                f = target.f0[last]
            return sr / f

        # epochs anchored at the first analysis mark, extended to both ends
        anchor = float(region_marks[0])
        epochs = [anchor]
        e = anchor
        while True:
            e = e + target_period(int(e))
            if e >= end:
                break
            epochs.append(e)
        e = anchor
        while True:
            e = e - target_period(int(e))
            if e < start:
                break
            epochs.insert(0, e)

        ola = np.zeros(end - start)
        for e in epochs:
            p = int(round(e))
            j = int(np.searchsorted(vpos, p))
            # nearest voiced mark, ties to the earlier mark
            if j >= vpos.size or (j > 0 and p - vpos[j - 1] <= vpos[j] - p):
                j -= 1
            ta = int(round(periods[j]))
            if ta < 2:  # isolated mark: fall back to the target period
                ta = int(round(target_period(p)))
            if ta < 2:
                continue
            m = int(vpos[j])
            window = np.hanning(2 * ta + 1)
            seg_lo, seg_hi = m - ta, m + ta + 1
            src_lo, src_hi = max(0, seg_lo), min(n, seg_hi)
            seg = np.zeros(2 * ta + 1)
            seg[src_lo - seg_lo : src_hi - seg_lo] = x[src_lo:src_hi]
            seg *= window
            dst_lo, dst_hi = p - ta - start, p + ta + 1 - start
            cut_lo, cut_hi = max(0, dst_lo), min(end - start, dst_hi)
            if cut_lo >= cut_hi:
                continue
            ola[cut_lo:cut_hi] += seg[cut_lo - dst_lo : cut_hi - dst_lo]
        out[start:end] = ola

    out, n_clipped = clip_samples(out)
    if n_clipped:
        warnings.warn(f"overlap-add clipped {n_clipped} samples", stacklevel=2)
    return AudioBuffer(out, sr, clipped=n_clipped)
