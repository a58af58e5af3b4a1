import numpy as np
import pytest

from pcgkit import SampledSignal, ScaleGrid, WaveletKind, cwt, dwt_denoise_db4, wes
from pcgkit.errors import DecompositionDepthError, InvalidGridError, InvalidInputError
from pcgkit.wavelets import _DEC_HI, _DEC_LO, _REC_HI, _REC_LO, sample_wavelet

RATE = 2000.0

ALL_KINDS = [WaveletKind.morlet(), WaveletKind.morse(), WaveletKind.bump()]


def burst_frame(centers_s=(1.0, 2.0), freq=60.0, sigma=0.012, duration=3.0,
                rate=RATE):
    t = np.arange(int(duration * rate)) / rate
    x = np.zeros_like(t)
    for c in centers_s:
        x += np.cos(2 * np.pi * freq * (t - c)) * np.exp(-0.5 * ((t - c) / sigma) ** 2)
    return SampledSignal(x, rate)


class TestDb4Filters:
    def test_lowpass_sums_to_sqrt2(self):
        assert abs(sum(_REC_LO) - np.sqrt(2)) < 1e-12

    def test_orthonormal(self):
        assert abs(np.dot(_REC_LO, _REC_LO) - 1.0) < 1e-12
        assert abs(np.dot(_REC_HI, _REC_HI) - 1.0) < 1e-12
        # analysis highpass is orthogonal to the lowpass
        assert abs(np.dot(_DEC_LO, _DEC_HI)) < 1e-12


class TestDenoise:
    def test_perfect_reconstruction_at_zero_threshold(self):
        rng = np.random.default_rng(11)
        s = SampledSignal(rng.normal(size=4096), RATE)
        out = dwt_denoise_db4(s, levels=8, threshold_frac=0.0)
        assert len(out) == len(s)
        assert np.max(np.abs(out.samples - s.samples)) < 1e-8

    def test_improves_snr_on_noisy_bursts(self):
        # one representative seed; the acceptance suite runs the
        # 50-seed median version of this check
        from dataclasses import replace

        from pcgkit.synth import SynthSpec, generate_pcg

        spec = SynthSpec(hr_bpm=60.0, s1_freq_hz=50.0, duration_s=10.0,
                         jitter_ms=0.0, snr_db=None, seed=5)
        clean, _ = generate_pcg(spec)
        noisy, _ = generate_pcg(replace(spec, snr_db=10.0))
        out = dwt_denoise_db4(noisy, levels=8, threshold_frac=0.15)
        c = clean.samples

        def snr_vs_clean(x):
            return 10 * np.log10(np.sum(c**2) / np.sum((x - c) ** 2))

        assert snr_vs_clean(out.samples) - snr_vs_clean(noisy.samples) >= 3.0

    def test_energy_never_grows(self):
        rng = np.random.default_rng(6)
        s = SampledSignal(rng.normal(size=2048), RATE)
        out = dwt_denoise_db4(s, levels=6, threshold_frac=0.3)
        assert np.sum(out.samples**2) <= np.sum(s.samples**2) + 1e-9

    def test_too_short_for_levels(self):
        s = SampledSignal(np.ones(100), RATE)
        with pytest.raises(DecompositionDepthError):
            dwt_denoise_db4(s, levels=8)

    def test_threshold_frac_range(self):
        s = SampledSignal(np.ones(512), RATE)
        with pytest.raises(InvalidInputError):
            dwt_denoise_db4(s, levels=2, threshold_frac=1.0)


class TestWaveletKinds:
    def test_center_frequencies(self):
        # analytic values: omega0/2pi, (beta/gamma)^(1/gamma)/2pi, mu/2pi
        assert abs(WaveletKind.morlet().center_freq_cycles
                   - 0.954929658551372) < 1e-12
        assert abs(WaveletKind.morse().center_freq_cycles
                   - 0.29954107124796653) < 1e-12
        assert abs(WaveletKind.bump().center_freq_cycles
                   - 0.7957747154594768) < 1e-12

    @pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.family)
    def test_kernel_energy_invariant_across_scales(self, kind):
        # the 1/sqrt(scale) convention keeps kernel energy scale-free
        energies = []
        for scale in (4.0, 16.0, 64.0):
            w, half = sample_wavelet(kind, scale)
            assert len(w) == 2 * half + 1
            energies.append(float(np.sum(np.abs(w) ** 2)))
        assert np.allclose(energies, energies[0], rtol=0.01)

    def test_morlet_kernel_is_unit_energy(self):
        # closed-form Morlet is L2-normalized, a known absolute anchor
        w, _ = sample_wavelet(WaveletKind.morlet(), 16.0)
        assert abs(np.sum(np.abs(w) ** 2) - 1.0) < 0.01

    def test_bad_params(self):
        with pytest.raises(InvalidInputError):
            WaveletKind.morlet(-1.0)
        with pytest.raises(InvalidInputError):
            WaveletKind.morse(gamma=0.0)


class TestScaleGrid:
    def test_log_spacing_and_bounds(self):
        grid = ScaleGrid.log_spaced(WaveletKind.morlet(), RATE)
        assert len(grid) == 64
        freqs = np.array(grid.pseudo_freqs_hz)
        assert abs(freqs[0] - 500.0) < 1e-9
        assert abs(freqs[-1] - 10.0) < 1e-9
        assert np.all(np.diff(freqs) < 0)
        ratios = freqs[:-1] / freqs[1:]
        assert np.allclose(ratios, ratios[0], rtol=1e-9)

    def test_invalid_bounds(self):
        with pytest.raises(InvalidGridError):
            ScaleGrid.log_spaced(WaveletKind.morlet(), RATE, 500.0, 10.0)
        with pytest.raises(InvalidGridError):
            ScaleGrid.log_spaced(WaveletKind.morlet(), RATE, 10.0, 500.0, 1)


class TestCwt:
    @pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.family)
    def test_tone_ridge_at_matching_frequency(self, kind, tone):
        grid = ScaleGrid.log_spaced(kind, RATE)
        s = tone(40.0, 2.0, RATE)
        coeffs = cwt(s, kind, grid)
        assert coeffs.shape == (64, len(s))
        interior = np.abs(coeffs[:, 1000:-1000])
        ridge = int(np.argmax(interior.mean(axis=1)))
        freqs = np.array(grid.pseudo_freqs_hz)
        target = int(np.argmin(np.abs(freqs - 40.0)))
        assert abs(ridge - target) <= 1

    def test_zero_signal_zero_matrix(self):
        kind = WaveletKind.morlet()
        grid = ScaleGrid.log_spaced(kind, RATE)
        s = SampledSignal(np.zeros(1000), RATE)
        assert np.all(cwt(s, kind, grid) == 0)

    def test_linearity_in_amplitude(self, tone):
        kind = WaveletKind.morlet()
        grid = ScaleGrid.log_spaced(kind, RATE)
        x = tone(60.0, 1.0, RATE)
        a = cwt(x, kind, grid)
        b = cwt(x.with_samples(3.0 * x.samples), kind, grid)
        assert np.max(np.abs(b - 3.0 * a)) < 1e-12 * np.max(np.abs(a)) * 3 + 1e-12

    def test_additivity(self, tone):
        kind = WaveletKind.morse()
        grid = ScaleGrid.log_spaced(kind, RATE, n_scales=16)
        x = tone(50.0, 0.5, RATE)
        y = tone(120.0, 0.5, RATE)
        both = x.with_samples(x.samples + y.samples)
        lhs = cwt(both, kind, grid)
        rhs = cwt(x, kind, grid) + cwt(y, kind, grid)
        assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidGridError):
            ScaleGrid(scales=(), pseudo_freqs_hz=())


class TestWes:
    def test_zero_signal(self):
        kind = WaveletKind.morlet()
        grid = ScaleGrid.log_spaced(kind, RATE)
        s = SampledSignal(np.zeros(800), RATE)
        out = wes(s, kind, grid)
        assert np.all(out.samples == 0)
        assert out.rate_hz == RATE
        assert len(out) == 800

    def test_quadratic_scaling(self, tone):
        kind = WaveletKind.morlet()
        grid = ScaleGrid.log_spaced(kind, RATE, n_scales=16)
        x = tone(60.0, 0.5, RATE)
        a = wes(x, kind, grid).samples
        b = wes(x.with_samples(2.0 * x.samples), kind, grid).samples
        assert np.allclose(b, 4.0 * a, rtol=1e-9, atol=1e-15)

    def test_two_bursts_two_peaks_at_centers(self):
        kind = WaveletKind.morlet()
        grid = ScaleGrid.log_spaced(kind, RATE)
        s = burst_frame(centers_s=(1.0, 2.0))
        track = wes(s, kind, grid).samples
        floor = 0.15 * track.max()
        above = track >= floor
        # count local maxima above the floor
        peaks = [i for i in range(1, len(track) - 1)
                 if above[i] and track[i] > track[i - 1] and track[i] >= track[i + 1]]
        assert len(peaks) == 2
        times = np.array(peaks) / RATE
        assert abs(times[0] - 1.0) < 0.010
        assert abs(times[1] - 2.0) < 0.010

    def test_silence_region_stays_quiet(self):
        kind = WaveletKind.morlet()
        grid = ScaleGrid.log_spaced(kind, RATE)
        s = burst_frame(centers_s=(2.5,), duration=3.0)
        track = wes(s, kind, grid).samples
        # first second is silence, far outside any wavelet support
        assert track[: int(1.0 * RATE)].max() < 1e-6 * track.max()
