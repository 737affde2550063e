"""Log-mel feature pipeline: framing, filterbank, normalization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voceval import spectral
from voceval.audio import Waveform
from voceval.errors import (
    ConfigError,
    DegenerateRangeError,
    RateMismatchError,
    TooShortError,
)


def _tone(freq, seconds=1.0, rate=24000, amp=0.4):
    t = np.arange(int(seconds * rate)) / rate
    return Waveform(amp * np.sin(2 * np.pi * freq * t), rate)


class TestConfig:
    def test_reference_values(self, default_cfg):
        assert default_cfg.win_length == 960
        assert default_cfg.hop_length == 300
        assert default_cfg.n_bins == 513

    def test_frame_count(self, default_cfg):
        assert default_cfg.n_frames(24000) == 1 + (24000 - 960) // 300
        assert default_cfg.n_frames(960) == 1
        assert default_cfg.n_frames(959) == 0
        # one sample short of the next frame boundary
        assert default_cfg.n_frames(960 + 299) == 1
        assert default_cfg.n_frames(960 + 300) == 2

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"win_length_ms": 60.0},  # window exceeds fft_size
            {"n_mels": 0},
            {"fmin": -1.0},
            {"fmin": 500.0, "fmax": 100.0},
            {"fmax": 13000.0},  # above Nyquist
            {"log_floor": 0.0},
            {"griffin_lim_iters": 0},
            {"hop_length_ms": 0.0},
        ],
    )
    def test_invalid_configs(self, kwargs):
        with pytest.raises(ConfigError):
            spectral.SpectralConfig(**kwargs)

    def test_feature_key_ignores_iterations(self):
        a = spectral.SpectralConfig(griffin_lim_iters=10)
        b = spectral.SpectralConfig(griffin_lim_iters=60)
        assert a.feature_key() == b.feature_key()


class TestMelScale:
    def test_htk_reference_point(self):
        # 700 Hz sits exactly one doubling up the HTK formula
        assert spectral.hz_to_mel(700.0) == pytest.approx(2595.0 * np.log10(2.0), abs=1e-9)
        assert spectral.hz_to_mel(0.0) == 0.0

    def test_round_trip(self):
        f = np.array([0.0, 100.0, 700.0, 4000.0, 12000.0])
        np.testing.assert_allclose(spectral.mel_to_hz(spectral.hz_to_mel(f)), f, rtol=1e-12)

    def test_monotone(self):
        f = np.linspace(0, 12000, 500)
        assert np.all(np.diff(spectral.hz_to_mel(f)) > 0)


class TestFilterbank:
    def test_shape_and_peaks(self, default_cfg):
        fb = spectral.mel_filterbank(default_cfg)
        assert fb.shape == (80, 513)
        np.testing.assert_allclose(fb.max(axis=1), 1.0, rtol=0, atol=0)
        assert fb.min() == 0.0

    def test_covers_band(self, default_cfg):
        fb = spectral.mel_filterbank(default_cfg)
        coverage = fb.sum(axis=0)
        bin_freqs = np.arange(513) * 24000 / 1024
        centers = spectral.mel_to_hz(
            np.linspace(spectral.hz_to_mel(0.0), spectral.hz_to_mel(12000.0), 82)
        )
        inner = (bin_freqs > centers[1]) & (bin_freqs < centers[-2])
        assert np.all(coverage[inner] > 0)

    def test_centers_on_mel_grid(self, default_cfg):
        # the filter for band m peaks at the FFT bin nearest its mel center
        fb = spectral.mel_filterbank(default_cfg)
        centers = spectral.mel_to_hz(
            np.linspace(spectral.hz_to_mel(0.0), spectral.hz_to_mel(12000.0), 82)
        )[1:-1]
        bin_freqs = np.arange(513) * 24000 / 1024
        for m in (5, 20, 40, 60, 79):
            peak_bin = int(np.argmax(fb[m]))
            assert abs(bin_freqs[peak_bin] - centers[m]) <= 24000 / 1024

    def test_cached_and_read_only(self, default_cfg):
        fb1 = spectral.mel_filterbank(default_cfg)
        fb2 = spectral.mel_filterbank(spectral.SpectralConfig())
        assert fb1 is fb2
        with pytest.raises(ValueError):
            fb1[0, 0] = 1.0

    def test_too_many_bands_rejected(self):
        with pytest.raises(ConfigError):
            spectral.mel_filterbank(
                spectral.SpectralConfig(fft_size=1024, n_mels=600)
            )


class TestStft:
    def test_frame_values_match_direct_fft(self, default_cfg):
        rng = np.random.default_rng(21)
        x = rng.uniform(-0.5, 0.5, 24000)
        mag = spectral.stft_magnitude(Waveform(x, 24000), default_cfg)
        window = spectral.hann_periodic(960)
        for t in (0, 3, 76):
            seg = x[t * 300 : t * 300 + 960] * window
            expected = np.abs(np.fft.rfft(seg, 1024))
            np.testing.assert_allclose(mag.values[t], expected, rtol=1e-12, atol=1e-12)

    def test_shape(self, default_cfg):
        w = _tone(440, seconds=1.0)
        mag = spectral.stft_magnitude(w, default_cfg)
        assert mag.values.shape == (default_cfg.n_frames(24000), 513)

    def test_tone_lands_in_right_bin(self, default_cfg):
        # bin spacing is 23.4 Hz; a 1500 Hz tone peaks in bin 64
        mag = spectral.stft_magnitude(_tone(1500), default_cfg)
        peak_bins = np.argmax(mag.values, axis=1)
        assert np.all(np.abs(peak_bins - 1500 * 1024 / 24000) <= 1)

    def test_rate_mismatch(self, default_cfg):
        with pytest.raises(RateMismatchError):
            spectral.stft_magnitude(Waveform(np.zeros(24000), 22050), default_cfg)

    def test_too_short(self, default_cfg):
        with pytest.raises(TooShortError):
            spectral.stft_magnitude(Waveform(np.zeros(959), 24000), default_cfg)


class TestMelSpectrogram:
    def test_normalized_range_attained(self, default_cfg, mini_corpus):
        from voceval import audio

        root, manifest = mini_corpus
        w = audio.load_wav(root / manifest.items[0].relative_path)
        m = spectral.mel_spectrogram(w, default_cfg)
        assert m.normalized
        assert m.values.min() == 0.0
        assert m.values.max() == 1.0
        assert m.norm_max > m.norm_min

    def test_denormalization_recovers_raw(self, default_cfg):
        w = _tone(440)
        raw = spectral.mel_spectrogram(w, default_cfg, normalize=False)
        norm = spectral.mel_spectrogram(w, default_cfg)
        recovered = norm.values * (norm.norm_max - norm.norm_min) + norm.norm_min
        np.testing.assert_allclose(recovered, raw.values, rtol=0, atol=1e-12)
        assert raw.norm_min == norm.norm_min
        assert raw.norm_max == norm.norm_max

    def test_log_floor_applies(self, default_cfg):
        # unnormalized values cannot fall below log10(floor)
        w = _tone(440, amp=1e-6)
        raw = spectral.mel_spectrogram(w, default_cfg, normalize=False)
        assert raw.values.min() >= np.log10(default_cfg.log_floor) - 1e-12

    def test_silence_is_degenerate(self, default_cfg):
        with pytest.raises(DegenerateRangeError):
            spectral.mel_spectrogram(Waveform(np.zeros(24000), 24000), default_cfg)

    def test_deterministic(self, default_cfg):
        w = _tone(440)
        a = spectral.mel_spectrogram(w, default_cfg)
        b = spectral.mel_spectrogram(w, default_cfg)
        assert np.array_equal(a.values, b.values)
        assert (a.norm_min, a.norm_max) == (b.norm_min, b.norm_max)

    def test_tone_energy_in_right_band(self, default_cfg):
        # energy of a 1 kHz tone concentrates in the band whose filter peaks
        # nearest 1 kHz
        m = spectral.mel_spectrogram(_tone(1000), default_cfg, normalize=False)
        band_profile = m.values.mean(axis=0)
        fb = spectral.mel_filterbank(default_cfg)
        bin_freqs = np.arange(513) * 24000 / 1024
        peak_freqs = bin_freqs[np.argmax(fb, axis=1)]
        expected_band = int(np.argmin(np.abs(peak_freqs - 1000)))
        assert abs(int(np.argmax(band_profile)) - expected_band) <= 1

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32 - 1))
    def test_normalization_bounds_property(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.uniform(-0.8, 0.8, 4800)
        m = spectral.mel_spectrogram(Waveform(x, 24000), spectral.SpectralConfig())
        assert m.values.min() == 0.0
        assert m.values.max() == 1.0
        assert np.all((m.values >= 0.0) & (m.values <= 1.0))
