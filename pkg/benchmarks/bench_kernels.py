#!/usr/bin/env python3
"""Compare the compiled kernel extension against the pure-numpy fallback.

Times the three hot paths (frame extraction, overlap-add, polyphase
resampling) over synthetic signals and prints a speedup table. Run after an
editable install; if the extension failed to build only the fallback column
appears.
"""

import time

import numpy as np

from voceval import kernels
from voceval.spectral import SpectralConfig, hann_periodic


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    cfg = SpectralConfig()
    rng = np.random.default_rng(0)
    x = rng.standard_normal(cfg.sample_rate * 30)  # 30 s of audio
    window = hann_periodic(cfg.win_length)
    frames = None

    impls = kernels.backends()
    print(f"active backend: {kernels.backend()}")
    print(f"available: {', '.join(impls)}\n")

    rows = []
    for name, impl in impls.items():
        t_frame = timeit(lambda: impl.frame_signal(x, window, cfg.hop_length, cfg.fft_size))
        frames = impl.frame_signal(x, window, cfg.hop_length, cfg.fft_size)[:, : cfg.win_length]
        length = (frames.shape[0] - 1) * cfg.hop_length + cfg.win_length
        t_ola = timeit(lambda: impl.overlap_add(frames, window, cfg.hop_length, length))
        rows.append((name, t_frame, t_ola))

    print(f"{'backend':<10} {'frame_signal':>14} {'overlap_add':>14}")
    for name, t_frame, t_ola in rows:
        print(f"{name:<10} {t_frame * 1e3:>11.2f} ms {t_ola * 1e3:>11.2f} ms")

    if len(rows) == 2:
        (_, f0, o0), (_, f1, o1) = rows
        ratio = lambda a, b: a / b if b > 0 else float("inf")
        print(
            f"\nspeedup (fallback/compiled): frame {ratio(f1, f0):.2f}x, "
            f"ola {ratio(o1, o0):.2f}x"
            if rows[0][0] == "compiled"
            else f"\nspeedup (fallback/compiled): frame {ratio(f0, f1):.2f}x, "
            f"ola {ratio(o0, o1):.2f}x"
        )

    # resampler comparison goes through the public API with the env override
    from voceval.audio import Waveform, resample

    wav = Waveform(samples=x[: cfg.sample_rate * 10], sample_rate=22050)
    t = timeit(lambda: resample(wav, 24000), repeats=3)
    print(f"\nresample 22050->24000 on 10 s ({kernels.backend()}): {t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
