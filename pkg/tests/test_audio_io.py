"""Decoder, downmix, and resampler tests."""

import struct

import numpy as np
import pytest

import oracles
from conftest import SR, make_wav, mono_buffer, sine
from cloneval.audio_io import decode_wav, downmix_mono, resample
from cloneval.errors import FormatError


class TestDecodeWav:
    def test_pcm16_fixed_point_scaling(self):
        raw = np.array([0, 16384, -16384, -32768], dtype=np.int16)
        buf = decode_wav(make_wav(raw, sr=8000, fmt="pcm16_raw"))
        assert buf.sample_rate == 8000
        assert buf.channel_count == 1
        np.testing.assert_array_equal(buf.samples, [0.0, 0.5, -0.5, -1.0])

    def test_wrong_magic_rejected(self):
        data = bytearray(make_wav(sine(440, 0.01)))
        data[:4] = b"RIFX"
        with pytest.raises(FormatError):
            decode_wav(bytes(data))

    def test_float32_stereo_passthrough(self):
        frames = np.stack([np.linspace(-1, 1, 100), np.linspace(1, -1, 100)], axis=1)
        buf = decode_wav(make_wav(frames, fmt="float32"))
        assert buf.channel_count == 2
        assert buf.samples.shape == (100, 2)
        np.testing.assert_allclose(buf.samples, frames, atol=1e-7)

    def test_pcm24_and_pcm32_roundtrip(self):
        x = sine(200, 0.02, amp=0.8)
        for fmt, tol in (("pcm24", 2e-7), ("pcm32", 1e-9)):
            buf = decode_wav(make_wav(x, fmt=fmt))
            np.testing.assert_allclose(buf.samples, x, atol=tol)

    def test_truncated_data_chunk(self):
        data = make_wav(sine(440, 0.05))
        with pytest.raises(FormatError):
            decode_wav(data[:-100])

    def test_unsupported_codec(self):
        data = bytearray(make_wav(sine(440, 0.01)))
        # format tag lives right after "fmt " + size
        pos = data.index(b"fmt ") + 8
        data[pos:pos + 2] = struct.pack("<H", 0x0055)  # MP3
        with pytest.raises(FormatError):
            decode_wav(bytes(data))

    def test_extra_chunks_skipped(self):
        data = make_wav(sine(440, 0.01))
        junk = b"LIST" + struct.pack("<I", 4) + b"info"
        patched = data[:12] + junk + data[12:]
        patched = patched[:4] + struct.pack("<I", len(patched) - 8) + patched[8:]
        buf = decode_wav(patched)
        assert len(buf.samples) == len(sine(440, 0.01))

    def test_decode_deterministic(self):
        data = make_wav(sine(333, 0.1))
        a = decode_wav(data)
        b = decode_wav(data)
        np.testing.assert_array_equal(a.samples, b.samples)
        assert (a.sample_rate, a.channel_count) == (b.sample_rate, b.channel_count)

    def test_integer_samples_within_unit_range(self):
        buf = decode_wav(make_wav(np.full(64, -32768, dtype=np.int16), fmt="pcm16_raw"))
        assert np.max(np.abs(buf.samples)) <= 1.0 + 1e-6


class TestDownmix:
    def test_stereo_mean(self):
        buf = decode_wav(make_wav(np.array([[1.0, 0.0]]), fmt="float32"))
        mono = downmix_mono(buf)
        assert mono.channel_count == 1
        np.testing.assert_allclose(mono.samples, [0.5])

    def test_mono_identity(self):
        buf = mono_buffer(sine(100, 0.01))
        out = downmix_mono(buf)
        np.testing.assert_array_equal(out.samples, buf.samples)

    def test_cancellation(self):
        buf = decode_wav(make_wav(np.array([[0.8, -0.8]]), fmt="float32"))
        np.testing.assert_allclose(downmix_mono(buf).samples, [0.0], atol=1e-7)


class TestResample:
    def test_same_rate_is_identity(self):
        buf = mono_buffer(sine(440, 0.1))
        out = resample(buf, SR)
        np.testing.assert_array_equal(out.samples, buf.samples)

    def test_tone_peak_preserved_48k_to_16k(self):
        t = np.arange(48000) / 48000.0
        buf = mono_buffer(np.sin(2 * np.pi * 1000.0 * t), sr=48000)
        out = resample(buf, 16000)
        peak = oracles.dft_peak_hz(out.samples[4096:4096 + 2048])
        assert abs(peak - 1000.0) <= 16000 / 2048  # one 2048-point bin

    def test_output_length_ratio(self):
        buf = mono_buffer(np.zeros(48000) + 0.1, sr=48000)
        out = resample(buf, 16000)
        assert abs(len(out.samples) - 16000) <= 1
        assert out.sample_rate == 16000

    @pytest.mark.parametrize("freq", [1000.0, 3500.0])
    def test_round_trip_correlation(self, freq):
        x = sine(freq, 0.5)
        back = resample(resample(mono_buffer(x), 2 * SR), SR)
        n = min(len(x), len(back.samples))
        corr = np.corrcoef(x[:n], back.samples[:n])[0, 1]
        assert corr >= 0.99

    def test_passband_energy_within_half_db(self):
        x = sine(1000.0, 0.5)
        out = resample(mono_buffer(x), 32000)
        db = 10 * np.log10(np.mean(out.samples**2) / np.mean(x**2))
        assert abs(db) < 0.5

    def test_irrational_style_ratio(self):
        t = np.arange(22050) / 22050.0
        out = resample(mono_buffer(np.sin(2 * np.pi * 500.0 * t), sr=22050), 16000)
        assert abs(len(out.samples) - 16000) <= 1
        peak = oracles.dft_peak_hz(out.samples[2048:2048 + 2048])
        assert abs(peak - 500.0) <= 16000 / 2048
