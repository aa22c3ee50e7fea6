"""WAV decoding, mono downmix, and band-limited resampling.

The pipeline normalizes every input to mono 16 kHz before feature extraction
and embedding, so the three operations here are the front of every run.
"""

import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import FormatError

PIPELINE_RATE = 16000

_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE

_INT_SCALES = {16: 1 << 15, 24: 1 << 23, 32: 1 << 31}


@dataclass(eq=False)
class AudioBuffer:
    """Decoded waveform: 1-D for mono, (frames, channels) otherwise."""

    samples: np.ndarray
    sample_rate: int
    channel_count: int

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return self.samples.shape[0] / self.sample_rate


def _iter_chunks(data: bytes):
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + size > len(data):
            raise FormatError(f"chunk {chunk_id!r} extends past end of file")
        yield chunk_id, body_start, size
        pos = body_start + size + (size & 1)  # chunks are word-aligned


def _parse_fmt(data: bytes, start: int, size: int):
    if size < 16:
        raise FormatError("fmt chunk too small")
    tag, channels, rate, _byte_rate, _block_align, bits = struct.unpack_from(
        "<HHIIHH", data, start
    )
    if tag == _WAVE_FORMAT_EXTENSIBLE:
        if size < 40:
            raise FormatError("extensible fmt chunk too small")
        # actual codec is the first two bytes of the SubFormat GUID
        (tag,) = struct.unpack_from("<H", data, start + 24)
    return tag, channels, rate, bits


def decode_wav(data: bytes) -> AudioBuffer:
    """Decode a RIFF/WAVE byte string into an AudioBuffer.

    Supports PCM 16/24/32-bit little-endian integers and IEEE float32.
    Integer samples are scaled by 1/2^(bits-1) into [-1, 1]; float samples
    pass through unchanged. Unknown chunks are skipped.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise FormatError("not a RIFF/WAVE file")

    fmt = None
    payload = None
    for chunk_id, start, size in _iter_chunks(data):
        if chunk_id == b"fmt " and fmt is None:
            fmt = _parse_fmt(data, start, size)
        elif chunk_id == b"data" and payload is None:
            payload = data[start : start + size]
    if fmt is None:
        raise FormatError("missing fmt chunk")
    if payload is None:
        raise FormatError("missing data chunk")

    tag, channels, rate, bits = fmt
    if channels < 1 or rate < 1:
        raise FormatError(f"invalid fmt fields: channels={channels}, rate={rate}")
    if tag == _WAVE_FORMAT_PCM:
        if bits not in _INT_SCALES:
            raise FormatError(f"unsupported PCM bit depth: {bits}")
    elif tag == _WAVE_FORMAT_IEEE_FLOAT:
        if bits != 32:
            raise FormatError(f"unsupported float bit depth: {bits}")
    else:
        raise FormatError(f"unsupported codec tag: 0x{tag:04X}")

    bytes_per_sample = bits // 8
    frame_size = bytes_per_sample * channels
    if len(payload) == 0:
        raise FormatError("empty data chunk")
    if len(payload) % frame_size != 0:
        raise FormatError("data chunk does not hold a whole number of frames")

    if tag == _WAVE_FORMAT_IEEE_FLOAT:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    elif bits == 16:
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / _INT_SCALES[16]
    elif bits == 32:
        samples = np.frombuffer(payload, dtype="<i4").astype(np.float64) / _INT_SCALES[32]
    else:  # 24-bit: assemble little-endian triplets and sign-extend
        raw = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        values = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
        values -= (values & 0x800000) << 1
        samples = values.astype(np.float64) / _INT_SCALES[24]

    if channels > 1:
        samples = samples.reshape(-1, channels)
    return AudioBuffer(samples=samples, sample_rate=rate, channel_count=channels)


def downmix_mono(buf: AudioBuffer) -> AudioBuffer:
    """Average channels; a mono buffer is returned unchanged."""
    if buf.channel_count == 1:
        return buf
    mono = buf.samples.mean(axis=1)
    return AudioBuffer(samples=mono, sample_rate=buf.sample_rate, channel_count=1)


_TAPS_PER_PHASE = 64
_KAISER_BETA = 8.6


@lru_cache(maxsize=32)
def _design_lowpass(up: int, down: int) -> np.ndarray:
    """Windowed-sinc anti-alias filter for an up/down polyphase stage.

    Odd length keeps the group delay at an integer number of upsampled
    samples, so outputs stay aligned with inputs.
    """
    n_taps = _TAPS_PER_PHASE * up + 1
    center = (n_taps - 1) // 2
    cutoff = 1.0 / max(up, down)
    m = np.arange(n_taps) - center
    return up * cutoff * np.sinc(cutoff * m) * np.kaiser(n_taps, _KAISER_BETA)


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Polyphase windowed-sinc rate conversion of a mono buffer."""
    if buf.channel_count != 1:
        raise ValueError("resample expects a mono buffer; downmix first")
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == buf.sample_rate:
        return buf

    g = math.gcd(target_rate, buf.sample_rate)
    up = target_rate // g
    down = buf.sample_rate // g
    x = np.ascontiguousarray(buf.samples, dtype=np.float64)
    n_out = -(-len(x) * up) // down

    pad = _TAPS_PER_PHASE + 2
    padded = np.zeros(len(x) + 2 * pad)
    padded[pad : pad + len(x)] = x
    h = _design_lowpass(up, down)
    y = _kernels.polyphase_resample(padded, h, up, down, n_out, _TAPS_PER_PHASE, pad)
    return AudioBuffer(samples=y, sample_rate=target_rate, channel_count=1)
