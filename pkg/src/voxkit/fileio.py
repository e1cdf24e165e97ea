"""File formats: WAV audio, f0-contour files, FTRX feature matrices,
embedding vectors, and key-value configuration.

WAV support covers RIFF/WAVE with PCM-16 or IEEE float-32 samples.  PCM-16
decodes by /32768 scaling; float-32 round-trips bit-exactly.  Contours are
CSV (``time_s,f0_hz,voiced``) or JSON with hop and sample-rate metadata.
FTRX is a little-endian binary matrix: magic ``FTRX``, u32 version, u32
rows, u32 cols, then row-major float32 payload.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .align import FeatureSequence
from .core import AudioBuffer
from .errors import DomainError, FormatError
from .pitch import F0Contour

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003

FTRX_MAGIC = b"FTRX"
FTRX_VERSION = 1


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------

def read_wav(path, channel: int | None = None) -> AudioBuffer:
    """Read a PCM-16 or float-32 WAV file as a mono AudioBuffer.

    Multi-channel files require an explicit ``channel`` index.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise FormatError(f"{path} is not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        chunk_id = raw[pos : pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body = raw[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise FormatError(f"{path}: fmt chunk too short ({size} bytes)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < size:
                raise FormatError(
                    f"{path}: data chunk truncated ({len(body)} of {size} bytes)"
                )
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise FormatError(f"{path}: missing fmt or data chunk")

    audio_format, n_channels, sample_rate, _, block_align, bits = fmt
    if audio_format == WAVE_FORMAT_PCM and bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise FormatError(
            f"{path}: unsupported codec (format tag {audio_format}, {bits} bits); "
            "only PCM-16 and IEEE float-32 are supported"
        )
    if n_channels < 1:
        raise FormatError(f"{path}: invalid channel count {n_channels}")
    if samples.size % n_channels:
        raise FormatError(f"{path}: data size is not a whole number of frames")
    samples = samples.reshape(-1, n_channels)
    if n_channels > 1 and channel is None:
        raise DomainError(
            f"{path} has {n_channels} channels; pass channel=<index> to select one"
        )
    idx = 0 if channel is None else channel
    if not 0 <= idx < n_channels:
        raise DomainError(
            f"channel {idx} out of range for {n_channels}-channel file"
        )
    return AudioBuffer(samples[:, idx], sample_rate)


def write_wav(path, audio: AudioBuffer, encoding: str = "float32") -> None:
    """Write mono audio as PCM-16 or IEEE float-32 WAV."""
    if encoding not in ("pcm16", "float32"):
        raise ValueError("encoding must be 'pcm16' or 'float32'")
    if encoding == "pcm16":
        fmt_tag, bits = WAVE_FORMAT_PCM, 16
        ints = np.clip(np.rint(audio.samples * 32768.0), -32768, 32767)
        payload = ints.astype("<i2").tobytes()
    else:
        fmt_tag, bits = WAVE_FORMAT_IEEE_FLOAT, 32
        payload = audio.samples.astype("<f4").tobytes()
    block_align = bits // 8
    byte_rate = audio.sample_rate * block_align
    chunks = struct.pack(
        "<4sIHHIIHH",
        b"fmt ",
        16,
        fmt_tag,
        1,
        audio.sample_rate,
        byte_rate,
        block_align,
        bits,
    )
    if fmt_tag == WAVE_FORMAT_IEEE_FLOAT:
        chunks += struct.pack("<4sII", b"fact", 4, len(audio))
    chunks += struct.pack("<4sI", b"data", len(payload)) + payload
    if len(payload) & 1:
        chunks += b"\x00"
    header = struct.pack("<4sI4s", b"RIFF", 4 + len(chunks), b"WAVE")
    Path(path).write_bytes(header + chunks)


# ---------------------------------------------------------------------------
# F0 contours
# ---------------------------------------------------------------------------

def write_contour(path, contour: F0Contour) -> None:
    """Write a contour as CSV (default) or JSON (.json extension)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = {
            "hop_s": contour.hop,
            "sample_rate_hz": contour.sample_rate,
            "f0_hz": [float(v) for v in contour.f0],
            "voiced": [int(v) for v in contour.voiced],
        }
        path.write_text(json.dumps(doc) + "\n")
        return
    lines = ["time_s,f0_hz,voiced"]
    for k in range(len(contour)):
        t = k * contour.hop
        lines.append(f"{t!r},{float(contour.f0[k])!r},{int(contour.voiced[k])}")
    path.write_text("\n".join(lines) + "\n")


def read_contour(
    path, hop: float | None = None, sample_rate: int | None = None
) -> F0Contour:
    """Read a contour from CSV or JSON.

    CSV carries no hop metadata, so the hop is inferred from the time
    column, whose deltas must be uniform within 1%; pass ``hop`` explicitly
    for files with fewer than two rows.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
            f0 = np.asarray(doc["f0_hz"], dtype=np.float64)
            voiced = np.asarray(doc["voiced"])
            hop_s = float(doc["hop_s"])
            sr = doc.get("sample_rate_hz")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: malformed contour JSON: {exc}") from exc
        return _build_contour(path, f0, voiced, hop_s, sr)

    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "time_s,f0_hz,voiced":
        raise FormatError(f"{path}: expected header 'time_s,f0_hz,voiced'")
    times, f0, voiced = [], [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 3:
            raise FormatError(f"{path}: malformed row {ln!r}")
        try:
            times.append(float(parts[0]))
            f0.append(float(parts[1]))
            voiced.append(int(parts[2]))
        except ValueError as exc:
            raise FormatError(f"{path}: malformed row {ln!r}: {exc}") from exc
    times = np.asarray(times)
    if times.size >= 2:
        deltas = np.diff(times)
        if np.any(deltas <= 0):
            raise FormatError(f"{path}: time column must be strictly increasing")
        mean_delta = float(deltas.mean())
        if np.any(np.abs(deltas - mean_delta) > 0.01 * mean_delta):
            raise FormatError(
                f"{path}: non-uniform frame times (cannot infer hop)"
            )
        hop_s = mean_delta
    elif hop is not None:
        hop_s = hop
    else:
        raise FormatError(
            f"{path}: fewer than two rows; pass hop= to read this contour"
        )
    return _build_contour(
        path, np.asarray(f0, dtype=np.float64), np.asarray(voiced), hop_s, sample_rate
    )


def _build_contour(path, f0, voiced, hop_s, sample_rate) -> F0Contour:
    try:
        return F0Contour(f0, voiced, hop_s, sample_rate)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid contour data: {exc}") from exc


# ---------------------------------------------------------------------------
# FTRX feature matrices and embeddings
# ---------------------------------------------------------------------------

def write_features(path, features) -> None:
    """Write a feature matrix (FeatureSequence or 2-D array) as FTRX."""
    data = features.data if isinstance(features, FeatureSequence) else np.asarray(features)
    if data.ndim != 2:
        raise ValueError("features must be a 2-D matrix")
    rows, cols = data.shape
    header = FTRX_MAGIC + struct.pack("<III", FTRX_VERSION, rows, cols)
    Path(path).write_bytes(header + data.astype("<f4").tobytes())


def read_features(path) -> FeatureSequence:
    """Read an FTRX feature matrix."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) < 16 or raw[:4] != FTRX_MAGIC:
        raise FormatError(f"{path}: bad magic; not an FTRX file")
    version, rows, cols = struct.unpack_from("<III", raw, 4)
    if version != FTRX_VERSION:
        raise FormatError(f"{path}: unsupported FTRX version {version}")
    expected = rows * cols * 4
    payload = raw[16:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload has {len(payload)} bytes, header declares "
            f"{rows}x{cols} ({expected} bytes)"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).astype(np.float64)
    if data.size and not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: payload contains non-finite values")
    return FeatureSequence(data)


def read_embedding(path) -> np.ndarray:
    """Read an embedding vector from a single-row CSV or a 1xD FTRX file."""
    path = Path(path)
    try:
        head = path.open("rb").read(4)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if head == FTRX_MAGIC:
        seq = read_features(path)
        if len(seq) != 1:
            raise FormatError(
                f"{path}: embedding FTRX must have exactly 1 row, got {len(seq)}"
            )
        return seq.data[0].copy()
    text = path.read_text().strip()
    if not text:
        raise FormatError(f"{path}: empty embedding file")
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise FormatError(f"{path}: malformed embedding CSV: {exc}") from exc
    return np.asarray(values, dtype=np.float64)


# ---------------------------------------------------------------------------
# key-value configuration
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    """Parse a ``key = value`` configuration file.

    Lines starting with ``#`` are comments.  Values parse as int, float, or
    string; keys are namespaced with dots (``pitch.floor``, ``emg.mains_hz``,
    ``flatten.mode``).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    out: dict = {}
    for lineno, ln in enumerate(text.splitlines(), start=1):
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        if "=" not in ln:
            raise FormatError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = ln.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise FormatError(f"{path}:{lineno}: empty key")
        out[key] = _parse_value(value)
    return out


def _parse_value(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value
