"""Backend parity: compiled and fallback kernels must agree."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voceval import kernels

BACKENDS = kernels.backends()
HAVE_COMPILED = "compiled" in BACKENDS

pytestmark = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled backend not built; parity is vacuous"
)


def _read_only(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _hann(n):
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


class TestFrameSignal:
    def test_bit_identical(self):
        rng = np.random.default_rng(11)
        x = _read_only(rng.standard_normal(9600))
        window = _read_only(_hann(960))
        a = BACKENDS["fallback"].frame_signal(x, window, 300, 1024)
        b = BACKENDS["compiled"].frame_signal(x, window, 300, 1024)
        assert a.shape == b.shape == (29, 1024)
        assert np.array_equal(a, b)

    def test_matches_manual_loop(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal(2000)
        window = _hann(480)
        hop, fft_size = 160, 512
        got = kernels.frame_signal(_read_only(x), _read_only(window), hop, fft_size)
        n_frames = 1 + (len(x) - 480) // hop
        assert got.shape == (n_frames, fft_size)
        for t in range(n_frames):
            seg = x[t * hop : t * hop + 480] * window
            np.testing.assert_array_equal(got[t, :480], seg)
            assert np.all(got[t, 480:] == 0.0)

    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(min_value=64, max_value=4000),
        win=st.sampled_from([32, 64, 128]),
        hop=st.sampled_from([8, 16, 32, 64]),
    )
    def test_frame_count_formula(self, n, win, hop):
        x = _read_only(np.random.default_rng(n).standard_normal(n))
        if n < win:
            return
        window = _read_only(_hann(win))
        out = kernels.frame_signal(x, window, hop, win)
        assert out.shape[0] == 1 + (n - win) // hop


class TestOverlapAdd:
    def test_bit_identical(self):
        rng = np.random.default_rng(13)
        frames = _read_only(rng.standard_normal((29, 960)))
        window = _read_only(_hann(960))
        length = 28 * 300 + 960
        num_a, wss_a = BACKENDS["fallback"].overlap_add(frames, window, 300, length)
        num_b, wss_b = BACKENDS["compiled"].overlap_add(frames, window, 300, length)
        assert np.array_equal(num_a, num_b)
        assert np.array_equal(wss_a, wss_b)

    def test_matches_manual_accumulation(self):
        rng = np.random.default_rng(14)
        frames = rng.standard_normal((5, 64))
        window = _hann(64)
        hop = 16
        length = 4 * hop + 64
        num, wss = kernels.overlap_add(_read_only(frames), _read_only(window), hop, length)
        exp_num = np.zeros(length)
        exp_wss = np.zeros(length)
        for t in range(5):
            exp_num[t * hop : t * hop + 64] += frames[t] * window
            exp_wss[t * hop : t * hop + 64] += window * window
        np.testing.assert_array_equal(num, exp_num)
        np.testing.assert_allclose(wss, exp_wss, rtol=0, atol=0)

    def test_round_trip_with_framing(self):
        # frame then overlap-add with a COLA-satisfying hop reconstructs the
        # interior exactly after wss division
        rng = np.random.default_rng(15)
        x = rng.standard_normal(2240)
        window = _hann(64)
        hop = 16
        frames = kernels.frame_signal(_read_only(x), _read_only(window), hop, 64)
        # undo the analysis window so OLA applies window^2 once
        num, wss = kernels.overlap_add(frames[:, :64], _read_only(window), hop, len(x))
        good = wss > 1e-8
        y = np.where(good, num / np.where(good, wss, 1.0), 0.0)
        interior = slice(64, len(x) - 64)
        np.testing.assert_allclose(y[interior], x[interior], rtol=0, atol=1e-12)


class TestResampleApply:
    def test_backends_agree(self):
        rng = np.random.default_rng(16)
        x_padded = _read_only(rng.standard_normal(5000))
        hpoly = _read_only(rng.standard_normal((160, 40)))
        args = (x_padded, hpoly, 160, 147, 3000, 160 * 40)
        a = BACKENDS["fallback"].resample_apply(*args)
        b = BACKENDS["compiled"].resample_apply(*args)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_matches_direct_convolution(self):
        rng = np.random.default_rng(17)
        x_padded = rng.standard_normal(400)
        hpoly = rng.standard_normal((4, 10))
        up, down, base = 4, 3, 60
        n_out = 50
        got = kernels.resample_apply(_read_only(x_padded), _read_only(hpoly), up, down, n_out, base)
        exp = np.empty(n_out)
        for j in range(n_out):
            t = base + j * down
            row, phase = divmod(t, up)
            acc = 0.0
            for q in range(hpoly.shape[1]):
                acc += x_padded[row - q] * hpoly[phase, q]
            exp[j] = acc
        np.testing.assert_allclose(got, exp, rtol=0, atol=1e-12)


class TestSelection:
    def test_active_backend_reported(self):
        assert kernels.backend() in ("compiled", "fallback")
        assert kernels.backend() == "compiled"  # the build step ran

    def test_forced_fallback(self):
        import os
        import subprocess
        import sys

        out = subprocess.run(
            [sys.executable, "-c", "import voceval.kernels as k; print(k.backend())"],
            env=dict(os.environ, VOCEVAL_FORCE_FALLBACK="1"),
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "fallback"
