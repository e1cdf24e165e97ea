"""Autocorrelation pitch tracking with voicing decisions, and global pitch.

The tracker follows the classical short-term autocorrelation method: each
frame's normalized autocorrelation is divided by the window's own
autocorrelation, candidate lags are taken from local maxima refined by
parabolic interpolation, and the final path through the per-frame candidates
(including an "unvoiced" candidate) is chosen by dynamic programming with
octave-jump and voiced/unvoiced transition costs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import AudioBuffer
from .errors import DomainError

# tracked f0 values are quantized to this grid (Hz) so that contours are
# reproducible across amplitude scalings and serialization round-trips
F0_QUANTUM_HZ = 1e-3


@dataclass(frozen=True, eq=False)
class F0Contour:
    """Frame-wise fundamental frequency with a per-frame voicing flag.

    ``f0`` is in Hz with 0.0 stored at unvoiced frames, ``voiced`` is a
    0/1 mask, ``hop`` is the frame step in seconds.  ``sample_rate`` is the
    rate of the analyzed audio when known (CSV files do not carry it).
    """

    f0: np.ndarray
    voiced: np.ndarray
    hop: float
    sample_rate: int | None = None

    def __post_init__(self) -> None:
        f0 = np.asarray(self.f0, dtype=np.float64)
        voiced = np.asarray(self.voiced)
        if f0.ndim != 1 or voiced.ndim != 1 or f0.size != voiced.size:
            raise ValueError("f0 and voiced must be 1-D arrays of equal length")
        if not np.all(np.isin(voiced, (0, 1))):
            raise ValueError("voiced flags must be 0 or 1")
        voiced = voiced.astype(np.uint8)
        if f0.size:
            if not np.all(np.isfinite(f0)):
                raise ValueError("f0 values must be finite")
            if np.any(f0[voiced == 0] != 0.0):
                raise ValueError("unvoiced frames must store f0 = 0.0")
            if np.any(f0[voiced == 1] <= 0.0):
                raise ValueError("voiced frames must store f0 > 0")
        if not self.hop > 0:
            raise ValueError("hop must be > 0 seconds")
        f0 = f0.copy()
        voiced = voiced.copy()
        f0.setflags(write=False)
        voiced.setflags(write=False)
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "voiced", voiced)

    def __len__(self) -> int:
        return int(self.f0.size)

    @property
    def n_frames(self) -> int:
        return len(self)

    @property
    def n_voiced(self) -> int:
        return int(self.voiced.sum())

    def times(self) -> np.ndarray:
        """Frame start times in seconds: i * hop."""
        return np.arange(len(self)) * self.hop

    def voiced_f0(self) -> np.ndarray:
        """f0 values of voiced frames only."""
        return self.f0[self.voiced == 1]


@dataclass(frozen=True)
class PitchConfig:
    """Tracker parameters; defaults follow the standard published
    parameterization of the autocorrelation method."""

    floor: float = 60.0
    ceiling: float = 500.0
    hop_ms: float = 10.0
    silence_threshold: float = 0.03
    voicing_threshold: float = 0.45
    octave_cost: float = 0.01
    octave_jump_cost: float = 0.35
    voiced_unvoiced_cost: float = 0.14
    max_candidates: int = 15

    def __post_init__(self) -> None:
        if not 40.0 <= self.floor < self.ceiling <= 1000.0:
            raise ValueError("need 40 <= floor < ceiling <= 1000 Hz")
        if not 0.0 < self.silence_threshold < 1.0:
            raise ValueError("silence_threshold must be in (0, 1)")
        if not 0.0 < self.voicing_threshold < 1.0:
            raise ValueError("voicing_threshold must be in (0, 1)")
        if self.max_candidates < 2:
            raise ValueError("max_candidates must be >= 2")
        if not self.hop_ms > 0:
            raise ValueError("hop_ms must be > 0")

    def window_s(self) -> float:
        """Analysis window: three periods of the floor frequency."""
        return 3.0 / self.floor


@dataclass(frozen=True)
class GlobalPitch:
    """A speaker's mean f0 over voiced frames; a speaker trait, not content."""

    value: float
    n_voiced_frames: int
    speaker_id: str = ""

    def __post_init__(self) -> None:
        if self.n_voiced_frames > 0 and not self.value > 0:
            raise ValueError("global pitch must be > 0 when voiced frames exist")


@lru_cache(maxsize=8)
def _window_and_acf(window_len: int, nfft: int) -> tuple[np.ndarray, np.ndarray]:
    w = np.hanning(window_len)
    spec = np.fft.rfft(w, nfft)
    acf = np.fft.irfft(spec.real**2 + spec.imag**2)
    rw = acf / acf[0]
    w.setflags(write=False)
    rw.setflags(write=False)
    return w, rw


def _parabolic_peak(y_m1: float, y0: float, y_p1: float) -> tuple[float, float]:
    """Vertex offset in [-0.5, 0.5] and height of the fitted parabola."""
    denom = 2.0 * y0 - y_m1 - y_p1
    if denom <= 0.0:
        return 0.0, y0
    delta = 0.5 * (y_p1 - y_m1) / denom
    height = y0 + 0.25 * (y_p1 - y_m1) * delta
    return delta, height


def track_pitch(audio: AudioBuffer, cfg: PitchConfig | None = None) -> F0Contour:
    """Track the fundamental frequency of mono audio.

    Per frame the signal is mean-subtracted, Hann-windowed, and its FFT
    autocorrelation is normalized by lag 0 and divided by the window
    autocorrelation.  Local maxima within the period range become voiced
    candidates scored ``r - octave_cost * log2(floor * lag_s)``; an unvoiced
    candidate is scored from the voicing threshold and the frame's peak
    amplitude relative to the global peak.  A Viterbi pass over all frames
    picks the path with maximal summed strength minus octave-jump and
    voiced/unvoiced transition costs.

    Audio shorter than one analysis window yields an empty contour.  Output
    f0 values are quantized to 0.001 Hz, which makes the contour invariant
    under positive amplitude scaling of the input.
    """
    if cfg is None:
        cfg = PitchConfig()
    sr = audio.sample_rate
    hop = int(round(cfg.hop_ms * sr / 1000.0))
    window_len = int(round(cfg.window_s() * sr))
    x = audio.samples
    n = x.size
    hop_s = hop / sr
    if n < window_len:
        return F0Contour(np.zeros(0), np.zeros(0, dtype=np.uint8), hop_s, sr)
    n_frames = (n - window_len) // hop + 1

    global_peak = float(np.max(np.abs(x))) if n else 0.0
    if global_peak == 0.0:
        return F0Contour(
            np.zeros(n_frames), np.zeros(n_frames, dtype=np.uint8), hop_s, sr
        )
    # amplitude normalization: all thresholds below are relative quantities
    x = x / global_peak

    lag_min = max(2, int(np.floor(sr / cfg.ceiling)))
    lag_max = min(int(np.ceil(sr / cfg.floor)), window_len - 2)
    nfft = 1 << int(np.ceil(1.5 * window_len) - 1).bit_length()
    window, rw = _window_and_acf(window_len, nfft)

    starts = np.arange(n_frames) * hop
    frames = np.lib.stride_tricks.as_strided(
        x,
        shape=(n_frames, window_len),
        strides=(x.strides[0] * hop, x.strides[0]),
        writeable=False,
    )
    frames = frames - frames.mean(axis=1, keepdims=True)
    local_peaks = np.max(np.abs(frames), axis=1)

    spec = np.fft.rfft(frames * window, nfft, axis=1)
    acf = np.fft.irfft(spec.real**2 + spec.imag**2, axis=1)[:, : lag_max + 2]

    # candidate gathering per frame
    freq_cands: list[np.ndarray] = []
    strength_cands: list[np.ndarray] = []
    sil = cfg.silence_threshold / (1.0 + cfg.voicing_threshold)
    for i in range(n_frames):
        a = acf[i]
        freqs = [0.0]
        strengths = [
            cfg.voicing_threshold + max(0.0, 2.0 - local_peaks[i] / sil)
        ]
        if a[0] > 0.0:
            r = a / a[0]
            r = r[: lag_max + 2] / rw[: lag_max + 2]
            seg = r[lag_min : lag_max + 1]
            is_max = (seg > r[lag_min - 1 : lag_max]) & (seg >= r[lag_min + 1 : lag_max + 2])
            lags = np.flatnonzero(is_max) + lag_min
            if lags.size:
                cand = []
                for lag in lags:
                    delta, height = _parabolic_peak(r[lag - 1], r[lag], r[lag + 1])
                    lag_s = (lag + delta) / sr
                    f = 1.0 / lag_s
                    if cfg.floor <= f <= cfg.ceiling:
                        cand.append((height - cfg.octave_cost * np.log2(cfg.floor * lag_s), f))
                if cand:
                    cand.sort(key=lambda c: -c[0])
                    for s, f in cand[: cfg.max_candidates - 1]:
                        strengths.append(s)
                        freqs.append(f)
        freq_cands.append(np.asarray(freqs))
        strength_cands.append(np.asarray(strengths))

    choice = _viterbi(freq_cands, strength_cands, cfg)

    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=np.uint8)
    for i, c in enumerate(choice):
        f = freq_cands[i][c]
        if f > 0.0:
            f0[i] = np.round(f / F0_QUANTUM_HZ) * F0_QUANTUM_HZ
            voiced[i] = 1
    return F0Contour(f0, voiced, hop_s, sr)


def _viterbi(
    freqs: list[np.ndarray], strengths: list[np.ndarray], cfg: PitchConfig
) -> list[int]:
    """Max-total-score path through the per-frame candidates."""
    n = len(freqs)
    score = strengths[0].copy()
    back: list[np.ndarray] = []
    for i in range(1, n):
        fp, fc = freqs[i - 1], freqs[i]
        trans = np.zeros((fp.size, fc.size))
        pv = fp > 0.0
        cv = fc > 0.0
        # voiced <-> unvoiced switches
        trans[np.ix_(pv, ~cv)] = cfg.voiced_unvoiced_cost
        trans[np.ix_(~pv, cv)] = cfg.voiced_unvoiced_cost
        if pv.any() and cv.any():
            ratio = np.abs(np.log2(fp[pv][:, None] / fc[cv][None, :]))
            trans[np.ix_(pv, cv)] = cfg.octave_jump_cost * ratio
        total = score[:, None] - trans
        best_prev = np.argmax(total, axis=0)
        score = total[best_prev, np.arange(fc.size)] + strengths[i]
        back.append(best_prev)
    choice = [0] * n
    choice[-1] = int(np.argmax(score))
    for i in range(n - 2, -1, -1):
        choice[i] = int(back[i][choice[i + 1]])
    return choice


def global_pitch(contours, speaker_id: str = "") -> GlobalPitch:
    """Mean f0 over all voiced frames pooled across contours.

    Implements sum(f0_i * u_i) / sum(u_i) with u the voicing mask; raises
    DomainError when no voiced frame exists (never NaN).
    """
    contours = list(contours)
    if not contours:
        raise ValueError("at least one contour is required")
    total = 0.0
    count = 0
    for c in contours:
        total += float(c.voiced_f0().sum())
        count += c.n_voiced
    if count == 0:
        raise DomainError("no speech frames: every frame is unvoiced")
    return GlobalPitch(value=total / count, n_voiced_frames=count, speaker_id=speaker_id)
