"""Shared fixtures: synthetic signals and a WAV encoder independent of the decoder."""

import struct

import numpy as np
import pytest

SR = 16000


def sine(freq, dur=1.0, amp=1.0, sr=SR):
    t = np.arange(int(dur * sr)) / sr
    return amp * np.sin(2 * np.pi * freq * t)


def white_noise(dur=1.0, amp=0.3, seed=0, sr=SR):
    rng = np.random.default_rng(seed)
    return amp * rng.standard_normal(int(dur * sr))


def click_train(period=8000, dur=4.0, amp=1.0, sr=SR):
    x = np.zeros(int(dur * sr))
    x[::period] = amp
    return x


def silence_then_tone(freq=330.0, dur=1.0, split=0.4, amp=0.6, sr=SR):
    n = int(dur * sr)
    x = np.zeros(n)
    start = int(split * n)
    t = np.arange(n - start) / sr
    x[start:] = amp * np.sin(2 * np.pi * freq * t)
    return x


def make_wav(samples, sr=SR, fmt="pcm16", channels=None):
    """Encode float samples in [-1, 1] (or raw ints for pcm16_raw) as WAV bytes.

    Hand-rolled with struct.pack so decoder tests do not depend on the code
    they are checking.
    """
    x = np.asarray(samples)
    if x.ndim == 1:
        x = x[:, None]
    if channels is None:
        channels = x.shape[1]

    if fmt == "pcm16_raw":
        data = x.astype("<i2").tobytes()
        tag, bits = 1, 16
    elif fmt == "pcm16":
        data = np.clip(np.round(x * 32768.0), -32768, 32767).astype("<i2").tobytes()
        tag, bits = 1, 16
    elif fmt == "pcm24":
        ints = np.clip(np.round(x * (1 << 23)), -(1 << 23), (1 << 23) - 1).astype(np.int64)
        flat = ints.reshape(-1)
        raw = np.empty(3 * len(flat), dtype=np.uint8)
        raw[0::3] = flat & 0xFF
        raw[1::3] = (flat >> 8) & 0xFF
        raw[2::3] = (flat >> 16) & 0xFF
        data = raw.tobytes()
        tag, bits = 1, 24
    elif fmt == "pcm32":
        data = np.clip(np.round(x * (1 << 31)), -(1 << 31), (1 << 31) - 1).astype("<i4").tobytes()
        tag, bits = 1, 32
    elif fmt == "float32":
        data = x.astype("<f4").tobytes()
        tag, bits = 3, 32
    else:
        raise ValueError(fmt)

    bytes_per_frame = (bits // 8) * channels
    body = struct.pack("<HHIIHH", tag, channels, sr, sr * bytes_per_frame, bytes_per_frame, bits)
    blob = b"WAVE"
    blob += b"fmt " + struct.pack("<I", len(body)) + body
    blob += b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", len(blob)) + blob


@pytest.fixture
def wav_dir_factory(tmp_path):
    """Write {stem: samples} dicts into numbered WAV directories."""
    counter = {"n": 0}

    def build(files, sr=SR):
        counter["n"] += 1
        directory = tmp_path / f"wavs{counter['n']}"
        directory.mkdir()
        for stem, samples in files.items():
            (directory / f"{stem}.wav").write_bytes(make_wav(samples, sr=sr))
        return directory

    return build


def mono_buffer(samples, sr=SR):
    from cloneval.audio_io import AudioBuffer

    return AudioBuffer(
        samples=np.asarray(samples, dtype=np.float64), sample_rate=sr, channel_count=1
    )
