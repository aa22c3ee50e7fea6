"""Hot numeric inner loops, JIT-compiled with numba when possible.

Each kernel has two implementations: a numba ``@njit`` version and a pure
numpy fallback that leans on FFT identities and vectorized gathers. The numba
path is used when numba imports successfully and CLONEVAL_DISABLE_NUMBA is
not set to 1/true/yes; the fallback is selected otherwise. Both paths compute
the same quantities and agree to floating-point round-off, but are not
guaranteed bit-identical to each other.
"""

import os

import numpy as np


def numba_disabled_by_env() -> bool:
    return os.environ.get("CLONEVAL_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}


try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not numba_disabled_by_env()

_RESAMPLE_BLOCK = 1 << 16


def _polyphase_resample_numpy(xp, h, up, down, n_out, taps_per_phase, pad):
    n_h = len(h)
    center = (n_h - 1) // 2
    k = np.arange(taps_per_phase + 1)
    out = np.empty(n_out)
    for start in range(0, n_out, _RESAMPLE_BLOCK):
        idx = np.arange(start, min(start + _RESAMPLE_BLOCK, n_out))
        s = idx * down + center
        phase = s % up
        q0 = s // up
        j = phase[:, None] + k[None, :] * up
        valid = j < n_h
        taps = np.where(valid, h[np.minimum(j, n_h - 1)], 0.0)
        gathered = xp[q0[:, None] - k[None, :] + pad]
        out[idx] = np.einsum("ij,ij->i", taps, gathered)
    return out


def _yin_cmnd_numpy(frames, win, tau_max):
    n_frames, frame_len = frames.shape
    spec = np.fft.rfft(frames, n=frame_len, axis=1)
    head = np.zeros_like(frames)
    head[:, :win] = frames[:, :win]
    head_spec = np.fft.rfft(head, n=frame_len, axis=1)
    corr = np.fft.irfft(np.conj(head_spec) * spec, n=frame_len, axis=1)[:, : tau_max + 1]

    sq = frames * frames
    prefix = np.concatenate([np.zeros((n_frames, 1)), np.cumsum(sq, axis=1)], axis=1)
    taus = np.arange(tau_max + 1)
    tail_energy = prefix[:, taus + win] - prefix[:, taus]
    head_energy = tail_energy[:, :1]

    diff = np.maximum(head_energy + tail_energy - 2.0 * corr, 0.0)
    diff[:, 0] = 0.0

    out = np.ones_like(diff)
    running = np.cumsum(diff[:, 1:], axis=1)
    np.divide(diff[:, 1:] * taus[1:], running, out=out[:, 1:], where=running > 0.0)
    return out


def _local_autocorr_numpy(env, window):
    win_length = len(window)
    half = win_length // 2
    n = len(env)
    padded = np.zeros(n + 2 * half)
    padded[half : half + n] = env
    segments = np.lib.stride_tricks.sliding_window_view(padded, win_length)[:n] * window

    n_fft = 1 << (2 * win_length - 1).bit_length()
    spec = np.fft.rfft(segments, n=n_fft, axis=1)
    corr = np.fft.irfft(spec * np.conj(spec), n=n_fft, axis=1)[:, :win_length]
    lag0 = corr[:, :1]
    out = np.divide(corr, lag0, out=np.zeros_like(corr), where=lag0 > 0.0)
    return np.ascontiguousarray(out.T)


if HAVE_NUMBA:

    @njit(cache=True)
    def _polyphase_resample_numba(xp, h, up, down, n_out, taps_per_phase, pad):
        n_h = h.shape[0]
        center = (n_h - 1) // 2
        out = np.empty(n_out)
        for n in range(n_out):
            s = n * down + center
            phase = s % up
            q0 = s // up
            acc = 0.0
            j = phase
            k = 0
            while j < n_h:
                acc += h[j] * xp[q0 - k + pad]
                j += up
                k += 1
            out[n] = acc
        return out

    # fastmath lets LLVM vectorize the accumulation loops; the reassociated
    # sums differ from the numpy path only at the last few ulps
    @njit(cache=True, fastmath=True)
    def _yin_cmnd_numba(frames, win, tau_max):
        n_frames = frames.shape[0]
        out = np.ones((n_frames, tau_max + 1))
        diff = np.empty(tau_max + 1)
        for t in range(n_frames):
            for tau in range(tau_max + 1):
                acc = 0.0
                for i in range(win):
                    d = frames[t, i] - frames[t, i + tau]
                    acc += d * d
                diff[tau] = acc
            running = 0.0
            for tau in range(1, tau_max + 1):
                running += diff[tau]
                if running > 0.0:
                    out[t, tau] = diff[tau] * tau / running
        return out

    @njit(cache=True, fastmath=True)
    def _local_autocorr_numba(env, window):
        win_length = window.shape[0]
        half = win_length // 2
        n = env.shape[0]
        padded = np.zeros(n + 2 * half)
        padded[half : half + n] = env
        out = np.zeros((win_length, n))
        seg = np.empty(win_length)
        for t in range(n):
            for i in range(win_length):
                seg[i] = padded[t + i] * window[i]
            lag0 = 0.0
            for i in range(win_length):
                lag0 += seg[i] * seg[i]
            if lag0 <= 0.0:
                continue
            out[0, t] = 1.0
            for lag in range(1, win_length):
                acc = 0.0
                for i in range(win_length - lag):
                    acc += seg[i] * seg[i + lag]
                out[lag, t] = acc / lag0
        return out


def polyphase_resample(xp, h, up, down, n_out, taps_per_phase, pad):
    """Apply a polyphase FIR to zero-padded input ``xp``; returns ``n_out`` samples."""
    if USE_NUMBA:
        return _polyphase_resample_numba(xp, h, up, down, n_out, taps_per_phase, pad)
    return _polyphase_resample_numpy(xp, h, up, down, n_out, taps_per_phase, pad)


def yin_cmnd(frames, win, tau_max):
    """Cumulative-mean-normalized difference per frame, lags 0..tau_max."""
    if USE_NUMBA:
        return _yin_cmnd_numba(frames, win, tau_max)
    return _yin_cmnd_numpy(frames, win, tau_max)


def local_autocorr(env, window):
    """Lag-normalized windowed local autocorrelation, shape (win_length, len(env))."""
    if USE_NUMBA:
        return _local_autocorr_numba(env, window)
    return _local_autocorr_numpy(env, window)
