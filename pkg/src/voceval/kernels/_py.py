"""Numpy implementations of the hot kernels.

Reference semantics for the compiled backend: both must produce the same
values (same accumulation order for framing and overlap-add; the resampler
dot products may differ at float rounding level).
"""

import numpy as np


def frame_signal(x: np.ndarray, window: np.ndarray, hop: int, fft_size: int) -> np.ndarray:
    """Slice x into hop-strided frames, window them, zero-pad to fft_size.

    Frame t covers samples [t*hop, t*hop + len(window)); the trailing partial
    frame is dropped.
    """
    win = window.shape[0]
    n_frames = 1 + (x.shape[0] - win) // hop
    views = np.lib.stride_tricks.sliding_window_view(x, win)[::hop][:n_frames]
    out = np.zeros((n_frames, fft_size), dtype=np.float64)
    np.multiply(views, window, out=out[:, :win])
    return out


def overlap_add(frames: np.ndarray, window: np.ndarray, hop: int, length: int):
    """Accumulate synthesis-windowed frames and the window-square sum.

    Returns (numerator, window_sumsquare); the caller divides, guarding
    positions where the window sum-square vanishes.
    """
    n_frames, win = frames.shape
    num = np.zeros(length, dtype=np.float64)
    wss = np.zeros(length, dtype=np.float64)
    w2 = window * window
    for t in range(n_frames):
        start = t * hop
        num[start:start + win] += frames[t] * window
        wss[start:start + win] += w2
    return num, wss


def resample_apply(
    x_padded: np.ndarray,
    hpoly: np.ndarray,
    up: int,
    down: int,
    n_out: int,
    base: int,
    _block: int = 32768,
) -> np.ndarray:
    """Evaluate the polyphase FIR at n_out output positions.

    Output j reads phase (base + j*down) % up of hpoly against x_padded
    ending at index (base + j*down) // up. Processed in blocks to bound the
    gather's memory footprint.
    """
    tpp = hpoly.shape[1]
    out = np.empty(n_out, dtype=np.float64)
    q = np.arange(tpp, dtype=np.int64)
    for lo in range(0, n_out, _block):
        hi = min(lo + _block, n_out)
        t = base + np.arange(lo, hi, dtype=np.int64) * down
        rows = t // up
        phases = t - rows * up
        idx = rows[:, None] - q[None, :]
        out[lo:hi] = np.einsum("ij,ij->i", x_padded[idx], hpoly[phases])
    return out
