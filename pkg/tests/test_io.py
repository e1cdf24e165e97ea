import struct

import numpy as np
import pytest

from voxkit import AudioBuffer, DomainError, FormatError, SynthSpec, synthesize
from voxkit.fileio import (
    load_config,
    read_contour,
    read_embedding,
    read_features,
    read_wav,
    write_contour,
    write_features,
    write_wav,
)
from testutil import contour


@pytest.fixture
def sine():
    audio, _ = synthesize(SynthSpec(kind="sine", duration=0.3, base=200.0, amplitude=0.5), 16000)
    return audio


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------

def test_wav_float32_bit_exact_round_trip(tmp_path, sine):
    f32 = AudioBuffer(sine.samples.astype(np.float32).astype(np.float64), 16000)
    path = tmp_path / "a.wav"
    write_wav(path, f32, encoding="float32")
    back = read_wav(path)
    assert back.sample_rate == 16000
    assert np.array_equal(back.samples, f32.samples)


def test_wav_file_level_round_trip_is_stable(tmp_path, sine):
    p1, p2 = tmp_path / "a.wav", tmp_path / "b.wav"
    write_wav(p1, sine, encoding="float32")
    write_wav(p2, read_wav(p1), encoding="float32")
    assert p1.read_bytes() == p2.read_bytes()


def test_wav_pcm16_within_one_lsb(tmp_path, sine):
    path = tmp_path / "a.wav"
    write_wav(path, sine, encoding="pcm16")
    back = read_wav(path)
    assert np.abs(back.samples - sine.samples).max() <= 1.0 / 32768.0


def test_wav_pcm16_full_scale_negative(tmp_path):
    path = tmp_path / "a.wav"
    payload = struct.pack("<h", -32768) * 4
    chunks = struct.pack("<4sIHHIIHH", b"fmt ", 16, 1, 1, 16000, 32000, 2, 16)
    chunks += struct.pack("<4sI", b"data", len(payload)) + payload
    path.write_bytes(struct.pack("<4sI4s", b"RIFF", 4 + len(chunks), b"WAVE") + chunks)
    back = read_wav(path)
    assert np.all(back.samples == -1.0)


def test_wav_stereo_requires_channel_select(tmp_path):
    path = tmp_path / "st.wav"
    frames = np.zeros((100, 2), dtype="<i2")
    frames[:, 1] = 1000
    payload = frames.tobytes()
    chunks = struct.pack("<4sIHHIIHH", b"fmt ", 16, 1, 2, 16000, 64000, 4, 16)
    chunks += struct.pack("<4sI", b"data", len(payload)) + payload
    path.write_bytes(struct.pack("<4sI4s", b"RIFF", 4 + len(chunks), b"WAVE") + chunks)
    with pytest.raises(DomainError, match="channel"):
        read_wav(path)
    left = read_wav(path, channel=0)
    right = read_wav(path, channel=1)
    assert np.all(left.samples == 0.0)
    assert np.all(right.samples == 1000.0 / 32768.0)
    with pytest.raises(DomainError):
        read_wav(path, channel=2)


def test_wav_unknown_codec_is_format_error(tmp_path):
    path = tmp_path / "bad.wav"
    chunks = struct.pack("<4sIHHIIHH", b"fmt ", 16, 0x55, 1, 16000, 16000, 1, 8)
    chunks += struct.pack("<4sI", b"data", 4) + b"\x00" * 4
    path.write_bytes(struct.pack("<4sI4s", b"RIFF", 4 + len(chunks), b"WAVE") + chunks)
    with pytest.raises(FormatError, match="codec"):
        read_wav(path)


def test_wav_not_riff_is_format_error(tmp_path):
    path = tmp_path / "x.wav"
    path.write_bytes(b"this is not audio")
    with pytest.raises(FormatError):
        read_wav(path)


def test_wav_truncated_data_is_format_error(tmp_path, sine):
    path = tmp_path / "a.wav"
    write_wav(path, sine, encoding="pcm16")
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) - 50])
    with pytest.raises(FormatError):
        read_wav(path)


# ---------------------------------------------------------------------------
# contours
# ---------------------------------------------------------------------------

def test_contour_csv_round_trip(tmp_path):
    c = contour([220.123456, 0.0, 219.876], voiced=[1, 0, 1])
    path = tmp_path / "c.f0.csv"
    write_contour(path, c)
    back = read_contour(path)
    assert np.allclose(back.f0, c.f0, rtol=1e-6, atol=0)
    assert np.array_equal(back.voiced, c.voiced)
    assert back.hop == pytest.approx(c.hop, rel=1e-6)


def test_contour_csv_voiced_zero_with_f0_is_format_error(tmp_path):
    path = tmp_path / "c.f0.csv"
    path.write_text("time_s,f0_hz,voiced\n0.0,120.0,1\n0.01,100.0,0\n")
    with pytest.raises(FormatError):
        read_contour(path)


def test_contour_csv_non_uniform_times_is_format_error(tmp_path):
    path = tmp_path / "c.f0.csv"
    path.write_text("time_s,f0_hz,voiced\n0.0,120.0,1\n0.01,121.0,1\n0.05,122.0,1\n")
    with pytest.raises(FormatError, match="non-uniform"):
        read_contour(path)


def test_contour_json_round_trip_and_grid(tmp_path):
    c = contour([100.0, 110.0, 0.0], voiced=[1, 1, 0], hop=0.010, sample_rate=16000)
    path = tmp_path / "c.json"
    write_contour(path, c)
    back = read_contour(path)
    assert np.array_equal(back.f0, c.f0)
    assert back.sample_rate == 16000
    assert np.allclose(back.times(), [0.000, 0.010, 0.020])


def test_contour_csv_missing_header_is_format_error(tmp_path):
    path = tmp_path / "c.f0.csv"
    path.write_text("0.0,120.0,1\n")
    with pytest.raises(FormatError, match="header"):
        read_contour(path)


# ---------------------------------------------------------------------------
# FTRX and embeddings
# ---------------------------------------------------------------------------

def test_ftrx_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    m = rng.normal(size=(2, 3)).astype(np.float32).astype(np.float64)
    path = tmp_path / "m.ftrx"
    write_features(path, m)
    back = read_features(path)
    assert np.array_equal(back.data, m)
    write_features(tmp_path / "m2.ftrx", back)
    assert (tmp_path / "m2.ftrx").read_bytes() == path.read_bytes()


def test_ftrx_bad_magic(tmp_path):
    path = tmp_path / "m.ftrx"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(FormatError, match="magic"):
        read_features(path)


def test_ftrx_size_mismatch(tmp_path):
    path = tmp_path / "m.ftrx"
    header = b"FTRX" + struct.pack("<III", 1, 4, 4)
    path.write_bytes(header + b"\x00" * 60)
    with pytest.raises(FormatError, match="60 bytes"):
        read_features(path)


def test_embedding_csv(tmp_path):
    path = tmp_path / "e.csv"
    path.write_text("1.0,0.0")
    vec = read_embedding(path)
    assert vec.tolist() == [1.0, 0.0]


def test_embedding_ftrx_single_row(tmp_path):
    path = tmp_path / "e.ftrx"
    write_features(path, np.array([[0.25, 0.5, 0.75]]))
    vec = read_embedding(path)
    assert vec.tolist() == [0.25, 0.5, 0.75]
    write_features(path, np.zeros((2, 3)))
    with pytest.raises(FormatError, match="1 row"):
        read_embedding(path)


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def test_config_parse(tmp_path):
    path = tmp_path / "cfg.conf"
    path.write_text(
        "# comment\n"
        "pitch.floor = 70\n"
        "pitch.voicing_threshold = 0.5\n"
        "flatten.mode = fixed_hz\n"
        "flatten.value_hz = 180.0\n"
    )
    cfg = load_config(path)
    assert cfg["pitch.floor"] == 70
    assert cfg["pitch.voicing_threshold"] == 0.5
    assert cfg["flatten.mode"] == "fixed_hz"
    assert cfg["flatten.value_hz"] == 180.0


def test_config_malformed_line(tmp_path):
    path = tmp_path / "cfg.conf"
    path.write_text("pitch.floor 70\n")
    with pytest.raises(FormatError):
        load_config(path)
