"""Audio containers, framing primitives, and synthetic test-signal generation.

All sample data is held as normalized float64 in [-1, 1] regardless of the
on-disk encoding, so every downstream operation works in one numeric domain.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

DEFAULT_HOP_MS = 10.0
DEFAULT_WINDOW_MS = 40.0

MIN_SAMPLE_RATE = 8000

F0_FLOOR_HZ = 40.0
F0_CEILING_HZ = 1000.0

# width of the raised-cosine smoothing applied to each pulse-train impulse
PULSE_SMOOTH_S = 0.002


def clip_samples(samples: np.ndarray) -> tuple[np.ndarray, int]:
    """Clip samples into [-1, 1] and return the number of clipped values."""
    over = np.abs(samples) > 1.0
    n = int(np.count_nonzero(over))
    if n:
        samples = np.clip(samples, -1.0, 1.0)
    return samples, n


@dataclass(frozen=True, eq=False)
class AudioBuffer:
    """Mono audio: float64 samples plus a sample rate in Hz.

    Immutable after construction; the sample array is marked read-only so
    buffers can be shared across concurrent workers.  ``clipped`` records how
    many samples a synthesis or resynthesis step had to clip into [-1, 1].
    """

    samples: np.ndarray
    sample_rate: int
    clipped: int = 0

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(
                f"AudioBuffer is mono; got array with shape {samples.shape}"
            )
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("AudioBuffer samples must be finite")
        if int(self.sample_rate) < MIN_SAMPLE_RATE:
            raise ValueError(
                f"sample_rate must be >= {MIN_SAMPLE_RATE} Hz, got {self.sample_rate}"
            )
        samples = samples.copy()
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Length in seconds."""
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class FrameGrid:
    """Uniform analysis grid: hop and window length in samples."""

    hop: int
    window_len: int
    n_frames: int

    def __post_init__(self) -> None:
        if self.hop < 1:
            raise ValueError("hop must be >= 1 sample")
        if self.window_len < self.hop:
            raise ValueError("window_len must be >= hop")
        if self.n_frames < 0:
            raise ValueError("n_frames must be >= 0")

    @staticmethod
    def for_length(n_samples: int, hop: int, window_len: int) -> "FrameGrid":
        if n_samples >= window_len:
            n_frames = (n_samples - window_len) // hop + 1
        else:
            n_frames = 0
        return FrameGrid(hop=hop, window_len=window_len, n_frames=n_frames)

    def frame_start(self, i: int) -> int:
        return i * self.hop

    def frame_center_s(self, i: int, sample_rate: int) -> float:
        return (i * self.hop + self.window_len / 2.0) / sample_rate


def frame(
    audio: AudioBuffer,
    hop_ms: float = DEFAULT_HOP_MS,
    window_ms: float = DEFAULT_WINDOW_MS,
) -> tuple[FrameGrid, np.ndarray]:
    """Slice audio into overlapping frames.

    Frame ``i`` starts at sample ``i * hop``.  Audio shorter than one window
    yields a grid with zero frames and an empty view, not an error.

    Returns the grid and an (n_frames, window_len) read-only view.
    """
    if not hop_ms > 0:
        raise ValueError("hop_ms must be > 0")
    if window_ms < hop_ms:
        raise ValueError("window_ms must be >= hop_ms")
    sr = audio.sample_rate
    hop = int(round(hop_ms * sr / 1000.0))
    window_len = int(round(window_ms * sr / 1000.0))
    grid = FrameGrid.for_length(len(audio), hop, window_len)
    if grid.n_frames == 0:
        return grid, np.empty((0, window_len), dtype=np.float64)
    x = audio.samples
    views = np.lib.stride_tricks.as_strided(
        x,
        shape=(grid.n_frames, window_len),
        strides=(x.strides[0] * hop, x.strides[0]),
        writeable=False,
    )
    return grid, views


@dataclass(frozen=True)
class SynthSpec:
    """Deterministic test-signal description.

    kind:
        ``sine``        constant-frequency sinusoid (uses ``base``)
        ``pulse_train`` one smoothed unit impulse per period (uses ``base``)
        ``vibrato``     sinusoid with sinusoidal frequency modulation
                        (uses ``base``, ``depth``, ``rate``)
        ``glide``       sinusoid with linear frequency ramp
                        (uses ``start``, ``end``)
    """

    kind: str
    duration: float
    amplitude: float = 0.5
    base: float | None = None
    depth: float | None = None
    rate: float | None = None
    start: float | None = None
    end: float | None = None

    KINDS = ("sine", "pulse_train", "vibrato", "glide")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {self.KINDS}")
        if not self.duration > 0:
            raise ValueError("duration must be > 0")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ValueError("amplitude must be in [0, 1]")
        if self.kind in ("sine", "pulse_train"):
            if self.base is None:
                raise ValueError(f"{self.kind} requires base")
        elif self.kind == "vibrato":
            if self.base is None or self.depth is None or self.rate is None:
                raise ValueError("vibrato requires base, depth and rate")
            if self.depth < 0 or self.rate <= 0:
                raise ValueError("vibrato depth must be >= 0 and rate > 0")
        elif self.kind == "glide":
            if self.start is None or self.end is None:
                raise ValueError("glide requires start and end")
        lo, hi = self.f0_range()
        if lo < F0_FLOOR_HZ or hi > F0_CEILING_HZ:
            raise ValueError(
                f"instantaneous f0 range [{lo:g}, {hi:g}] Hz outside "
                f"[{F0_FLOOR_HZ:g}, {F0_CEILING_HZ:g}] Hz"
            )

    def f0_range(self) -> tuple[float, float]:
        """(min, max) of the instantaneous fundamental over the duration."""
        if self.kind in ("sine", "pulse_train"):
            return float(self.base), float(self.base)
        if self.kind == "vibrato":
            return float(self.base - self.depth), float(self.base + self.depth)
        return (min(self.start, self.end), max(self.start, self.end))

    def f0_at(self, t: np.ndarray | float) -> np.ndarray:
        """Instantaneous fundamental frequency at time t (seconds)."""
        t = np.asarray(t, dtype=np.float64)
        if self.kind in ("sine", "pulse_train"):
            return np.full_like(t, float(self.base))
        if self.kind == "vibrato":
            return self.base + self.depth * np.sin(2.0 * np.pi * self.rate * t)
        return self.start + (self.end - self.start) * np.clip(t / self.duration, 0.0, 1.0)


def synthesize(spec: SynthSpec, sample_rate: int = 16000):
    """Generate a test signal with its exact generation contour.

    The returned contour is the instantaneous f0 used for phase accumulation,
    sampled at the centers of the default 10 ms / 40 ms frame grid.  With
    amplitude 0 the buffer is all zeros and every frame is unvoiced.

    Returns (AudioBuffer, F0Contour).
    """
    from .pitch import F0Contour  # local import to avoid a module cycle

    sr = int(sample_rate)
    if sr < MIN_SAMPLE_RATE:
        raise ValueError(f"sample_rate must be >= {MIN_SAMPLE_RATE} Hz")
    lo, hi = spec.f0_range()
    if hi > sr / 8.0:  # a quarter of the Nyquist frequency
        raise DomainError(
            f"max f0 {hi:g} Hz exceeds a quarter of Nyquist ({sr / 8:g} Hz)"
        )

    n = int(round(spec.duration * sr))
    t = np.arange(n) / sr
    f0 = spec.f0_at(t)
    phase = 2.0 * np.pi * np.cumsum(f0) / sr

    if spec.amplitude == 0.0:
        x = np.zeros(n)
    elif spec.kind == "pulse_train":
        x = _pulse_train(phase, sr) * spec.amplitude
    else:
        x = spec.amplitude * np.sin(phase)

    x, n_clipped = clip_samples(x)
    if n_clipped:
        warnings.warn(f"synthesize clipped {n_clipped} samples", stacklevel=2)
    audio = AudioBuffer(x, sr, clipped=n_clipped)

    hop = int(round(DEFAULT_HOP_MS * sr / 1000.0))
    window_len = int(round(DEFAULT_WINDOW_MS * sr / 1000.0))
    grid = FrameGrid.for_length(n, hop, window_len)
    centers = (np.arange(grid.n_frames) * hop + window_len / 2.0) / sr
    if spec.amplitude > 0.0:
        contour_f0 = spec.f0_at(centers)
        voiced = np.ones(grid.n_frames, dtype=np.uint8)
    else:
        contour_f0 = np.zeros(grid.n_frames)
        voiced = np.zeros(grid.n_frames, dtype=np.uint8)
    contour = F0Contour(contour_f0, voiced, hop / sr, sample_rate=sr)
    return audio, contour


def _pulse_train(phase: np.ndarray, sr: int) -> np.ndarray:
    """One unit impulse per 2*pi of phase, smoothed by a raised cosine."""
    x = np.zeros(phase.size)
    if phase.size == 0:
        return x
    cycle = np.floor(phase / (2.0 * np.pi)).astype(np.int64)
    # first sample of each new cycle carries the epoch
    epochs = np.flatnonzero(np.diff(cycle, prepend=cycle[0] - 1) > 0)
    half = max(1, int(round(PULSE_SMOOTH_S * sr / 2)))
    k = np.arange(-half, half + 1)
    lobe = 0.5 * (1.0 + np.cos(np.pi * k / half))
    for e in epochs:
        a = max(0, e - half)
        b = min(x.size, e + half + 1)
        x[a:b] += lobe[a - (e - half) : lobe.size - ((e + half + 1) - b)]
    return x
