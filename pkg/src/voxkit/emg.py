"""EMG session ingestion and preprocessing.

Sessions are stored as a JSON manifest plus a raw little-endian float32
payload, channel-major.  The preprocessing pipeline runs per channel:
zero-phase highpass, mains notch with harmonics, robust despiking,
z-normalization, then framing into classical surface-EMG descriptors
(RMS, mean absolute value, zero crossings, low-band mean).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import butter, filtfilt, iirnotch

from .errors import DomainError, FormatError

MODES = ("voiced", "silent")

FEATURE_NAMES = ("rms", "mav", "zero_crossings", "low_band_mean")
FEATURES_PER_CHANNEL = len(FEATURE_NAMES)

MANIFEST_FIELDS = (
    "session_id",
    "speaker_id",
    "mode",
    "sample_rate_hz",
    "channels",
    "samples",
    "payload",
)

# a channel is dead when its post-filter std collapses relative to its raw peak
DEAD_CHANNEL_REL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class EmgRecording:
    """Multi-channel biosignal with session metadata."""

    channels: np.ndarray
    sample_rate: int
    session_id: str = ""
    speaker_id: str = ""
    mode: str = "voiced"

    def __post_init__(self) -> None:
        data = np.asarray(self.channels, dtype=np.float64)
        if data.ndim != 2 or data.shape[0] < 1:
            raise ValueError(
                f"channels must be a (C, N) matrix with C >= 1, got {data.shape}"
            )
        if data.size and not np.all(np.isfinite(data)):
            raise ValueError("channel samples must be finite")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        data = data.copy()
        data.setflags(write=False)
        object.__setattr__(self, "channels", data)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def n_channels(self) -> int:
        return int(self.channels.shape[0])

    @property
    def n_samples(self) -> int:
        return int(self.channels.shape[1])


@dataclass(frozen=True, eq=False)
class EmgFeatures:
    """Frame-wise feature matrix, (T, C * F), with per-channel norm stats."""

    frames: np.ndarray
    frame_rate: float
    channel_stats: np.ndarray  # (C, 2): post-filter mean and std per channel

    def __post_init__(self) -> None:
        frames = np.asarray(self.frames, dtype=np.float64)
        stats = np.asarray(self.channel_stats, dtype=np.float64)
        if frames.ndim != 2:
            raise ValueError("frames must be 2-D")
        if frames.size and not np.all(np.isfinite(frames)):
            raise ValueError("features must be finite")
        if not self.frame_rate > 0:
            raise ValueError("frame_rate must be > 0")
        if stats.ndim != 2 or stats.shape[1] != 2:
            raise ValueError("channel_stats must have shape (C, 2)")
        if np.any(stats[:, 1] <= 0):
            raise ValueError("channel std entries must be > 0")
        frames = frames.copy()
        stats = stats.copy()
        frames.setflags(write=False)
        stats.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "channel_stats", stats)


@dataclass(frozen=True)
class EmgPreprocessConfig:
    highpass_hz: float = 2.0
    mains_hz: float = 60.0
    notch_harmonics: int = 2
    notch_q: float = 30.0
    target_frame_rate: float = 100.0
    despike_threshold: float = 5.0
    lead_shift_ms: float = 60.0

    def __post_init__(self) -> None:
        if not 0 < self.highpass_hz < self.mains_hz:
            raise ValueError("need 0 < highpass_hz < mains_hz")
        if self.mains_hz not in (50.0, 60.0):
            raise ValueError("mains_hz must be 50 or 60")
        if self.notch_harmonics < 0:
            raise ValueError("notch_harmonics must be >= 0")
        if self.despike_threshold <= 0:
            raise ValueError("despike_threshold must be > 0")
        if self.target_frame_rate <= 0:
            raise ValueError("target_frame_rate must be > 0")


def load_session(manifest_path) -> EmgRecording:
    """Read an EMG session from its JSON manifest and float32 payload."""
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read manifest {manifest_path}: {exc}") from exc
    missing = [k for k in MANIFEST_FIELDS if k not in manifest]
    if missing:
        raise FormatError(
            f"manifest {manifest_path} missing fields: {', '.join(missing)}"
        )
    if manifest["mode"] not in MODES:
        raise FormatError(
            f"manifest mode must be one of {MODES}, got {manifest['mode']!r}"
        )
    c = int(manifest["channels"])
    n = int(manifest["samples"])
    payload_path = manifest_path.parent / manifest["payload"]
    try:
        raw = payload_path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read payload {payload_path}: {exc}") from exc
    expected = c * n * 4
    if len(raw) != expected:
        raise FormatError(
            f"payload {payload_path} has {len(raw)} bytes, expected {expected} "
            f"({c} channels x {n} samples x 4)"
        )
    data = np.frombuffer(raw, dtype="<f4").reshape(c, n).astype(np.float64)
    if data.size and not np.all(np.isfinite(data)):
        raise FormatError(f"payload {payload_path} contains non-finite samples")
    return EmgRecording(
        channels=data,
        sample_rate=int(manifest["sample_rate_hz"]),
        session_id=str(manifest["session_id"]),
        speaker_id=str(manifest["speaker_id"]),
        mode=str(manifest["mode"]),
    )


def save_session(rec: EmgRecording, manifest_path, payload_name: str | None = None) -> None:
    """Write a session as manifest JSON plus float32 payload (bit-exact
    round-trip with load_session for float32-valued data)."""
    manifest_path = Path(manifest_path)
    if payload_name is None:
        payload_name = manifest_path.stem + ".f32"
    payload_path = manifest_path.parent / payload_name
    manifest = {
        "session_id": rec.session_id,
        "speaker_id": rec.speaker_id,
        "mode": rec.mode,
        "sample_rate_hz": rec.sample_rate,
        "channels": rec.n_channels,
        "samples": rec.n_samples,
        "payload": payload_name,
    }
    payload_path.write_bytes(rec.channels.astype("<f4").tobytes())
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")


def filter_channels(rec: EmgRecording, cfg: EmgPreprocessConfig) -> np.ndarray:
    """Pipeline stages 1-3: zero-phase highpass, mains notch, despike."""
    sr = rec.sample_rate
    if cfg.notch_harmonics and sr < 2 * cfg.mains_hz * cfg.notch_harmonics:
        raise DomainError(
            f"sample_rate {sr} too low to notch {cfg.notch_harmonics} "
            f"harmonics of {cfg.mains_hz:g} Hz"
        )
    b_hp, a_hp = butter(2, cfg.highpass_hz, btype="highpass", fs=sr)
    out = filtfilt(b_hp, a_hp, rec.channels, axis=1)
    for h in range(1, cfg.notch_harmonics + 1):
        f0 = cfg.mains_hz * h
        if f0 >= sr / 2:
            break
        b_n, a_n = iirnotch(f0, cfg.notch_q, fs=sr)
        out = filtfilt(b_n, a_n, out, axis=1)
    # robust despiking: clip to despike_threshold scaled MADs around the median
    for ch in range(out.shape[0]):
        x = out[ch]
        med = np.median(x)
        mad = np.median(np.abs(x - med))
        limit = cfg.despike_threshold * 1.4826 * mad
        if limit > 0:
            np.clip(x, med - limit, med + limit, out=x)
    return out


def normalize_channels(
    rec: EmgRecording, cfg: EmgPreprocessConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Stages 1-4: filtering plus per-channel z-normalization.

    Returns the normalized (C, N) signal and the (C, 2) mean/std stats used.
    Raises DomainError naming any dead channel (zero post-filter variance).
    """
    filtered = filter_channels(rec, cfg)
    means = filtered.mean(axis=1)
    stds = filtered.std(axis=1)
    raw_peaks = np.max(np.abs(rec.channels), axis=1)
    dead = np.flatnonzero(stds <= DEAD_CHANNEL_REL_TOL * np.maximum(raw_peaks, 1.0))
    if dead.size:
        raise DomainError(
            "dead channel(s) with zero post-filter variance: "
            + ", ".join(str(int(i)) for i in dead)
        )
    normalized = (filtered - means[:, None]) / stds[:, None]
    return normalized, np.column_stack([means, stds])


def preprocess(rec: EmgRecording, cfg: EmgPreprocessConfig | None = None) -> EmgFeatures:
    """Full preprocessing pipeline: filter, normalize, frame into features.

    Frame count is floor(N / (sample_rate / target_frame_rate)).  Features
    per channel and frame: RMS, mean absolute value, zero-crossing count,
    and the mean of a 5-point moving average (low-band mean); columns are
    grouped channel-major.
    """
    if cfg is None:
        cfg = EmgPreprocessConfig()
    normalized, stats = normalize_channels(rec, cfg)
    sr = rec.sample_rate
    step = sr / cfg.target_frame_rate
    n_frames = int(rec.n_samples // step)
    width = max(1, int(step))
    low_band = _moving_average(normalized, 5)

    feats = np.zeros((n_frames, rec.n_channels * FEATURES_PER_CHANNEL))
    for t in range(n_frames):
        lo = int(t * step)
        hi = lo + width
        seg = normalized[:, lo:hi]
        lb = low_band[:, lo:hi]
        rms = np.sqrt(np.mean(seg**2, axis=1))
        mav = np.mean(np.abs(seg), axis=1)
        zc = np.count_nonzero(seg[:, 1:] * seg[:, :-1] < 0, axis=1)
        lbm = np.mean(lb, axis=1)
        feats[t] = np.column_stack([rms, mav, zc, lbm]).ravel()
    return EmgFeatures(frames=feats, frame_rate=cfg.target_frame_rate, channel_stats=stats)


def _moving_average(data: np.ndarray, width: int) -> np.ndarray:
    kernel = np.ones(width) / width
    out = np.empty_like(data)
    for ch in range(data.shape[0]):
        out[ch] = np.convolve(data[ch], kernel, mode="same")
    return out


def apply_lead_shift(rec: EmgRecording, lead_ms: float) -> EmgRecording:
    """Delay the EMG content so it co-aligns with the acoustic events it
    precedes.

    The signal leads articulation, so content is moved later by
    round(lead_ms * sample_rate / 1000) samples; the head is zero-padded and
    length is unchanged.
    """
    shift = int(round(lead_ms * rec.sample_rate / 1000.0))
    if shift < 0:
        raise ValueError("lead_ms must be >= 0")
    if shift >= rec.n_samples:
        raise DomainError(
            f"shift of {shift} samples is not smaller than the recording "
            f"({rec.n_samples} samples)"
        )
    if shift == 0:
        return rec
    out = np.zeros_like(rec.channels)
    out[:, shift:] = rec.channels[:, : rec.n_samples - shift]
    return EmgRecording(
        channels=out,
        sample_rate=rec.sample_rate,
        session_id=rec.session_id,
        speaker_id=rec.speaker_id,
        mode=rec.mode,
    )
