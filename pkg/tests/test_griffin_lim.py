"""Griffin-Lim phase reconstruction."""

import numpy as np
import pytest

from voceval import audio, spectral
from voceval.errors import MissingNormStatsError


@pytest.fixture(scope="module")
def clip(mini_corpus):
    root, manifest = mini_corpus
    return audio.load_wav(root / manifest.items[0].relative_path)


class TestPhaseReconstruct:
    def test_zero_magnitude_gives_silence(self, default_cfg):
        mag = np.zeros((20, 513))
        w = spectral.phase_reconstruct(mag, default_cfg)
        assert np.all(w.samples == 0.0)
        assert len(w) == 19 * 300 + 960

    def test_output_length_and_peak(self, clip, default_cfg):
        m = spectral.mel_spectrogram(clip, default_cfg)
        rec = spectral.griffin_lim(m, default_cfg)
        assert len(rec) == (m.n_frames - 1) * 300 + 960
        assert rec.sample_rate == 24000
        assert np.max(np.abs(rec.samples)) == pytest.approx(0.95, abs=1e-9)

    def test_duration_within_one_hop_of_source(self, clip, default_cfg):
        m = spectral.mel_spectrogram(clip, default_cfg)
        rec = spectral.griffin_lim(m, default_cfg)
        assert abs(len(rec) - len(clip)) < 2 * default_cfg.hop_length

    def test_convergence_monotone(self, clip, default_cfg):
        m = spectral.mel_spectrogram(clip, default_cfg)
        errs = []
        spectral.griffin_lim(m, default_cfg, callback=lambda i, e: errs.append(e))
        assert len(errs) == default_cfg.griffin_lim_iters
        diffs = np.diff(errs)
        assert np.all(diffs <= 1e-6), f"max increase {diffs.max():.3e}"
        assert errs[-1] < errs[0]

    def test_deterministic(self, clip, default_cfg):
        m = spectral.mel_spectrogram(clip, default_cfg)
        a = spectral.griffin_lim(m, default_cfg)
        b = spectral.griffin_lim(m, default_cfg)
        assert np.array_equal(a.samples, b.samples)

    def test_tone_frequency_recovered(self, default_cfg):
        t = np.arange(24000) / 24000
        w = audio.Waveform(0.5 * np.sin(2 * np.pi * 880 * t), 24000)
        m = spectral.mel_spectrogram(w, default_cfg)
        rec = spectral.griffin_lim(m, default_cfg)
        spec = np.abs(np.fft.rfft(rec.samples[2400:2400 + 16384]))
        freqs = np.fft.rfftfreq(16384, d=1 / 24000)
        # mel-domain quantization limits precision; dominant component must
        # still land within one band width of the source tone
        assert abs(freqs[int(np.argmax(spec))] - 880) < 100

    def test_normalized_needs_usable_stats(self, default_cfg):
        bad = spectral.MelSpectrogram(
            np.full((20, 80), 0.5), True, 1.0, 1.0, default_cfg
        )
        with pytest.raises(MissingNormStatsError):
            spectral.griffin_lim(bad, default_cfg)

    def test_normalized_and_raw_agree(self, clip, default_cfg):
        norm = spectral.mel_spectrogram(clip, default_cfg)
        raw = spectral.mel_spectrogram(clip, default_cfg, normalize=False)
        a = spectral.griffin_lim(norm, default_cfg)
        b = spectral.griffin_lim(raw, default_cfg)
        # de-normalization rounding perturbs the magnitudes slightly
        np.testing.assert_allclose(a.samples, b.samples, atol=1e-6)

    def test_fewer_iterations_supported(self, clip):
        cfg = spectral.SpectralConfig(griffin_lim_iters=5)
        m = spectral.mel_spectrogram(clip, cfg)
        errs = []
        spectral.griffin_lim(m, cfg, callback=lambda i, e: errs.append(e))
        assert len(errs) == 5
