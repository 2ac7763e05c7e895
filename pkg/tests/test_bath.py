"""Unit tests for the bath module."""
import os
import numpy as np
import pytest
import scipy.integrate
from phototherm import bath, dynamics, params
from phototherm.utils import ConfigError, EnvelopeError, LimitError

DATA = os.path.join(os.path.dirname(__file__), 'data')


class TestBathTypes:
    def test_invalid_mode(self):
        with pytest.raises(ValueError):
            bath.BathMode(0.0, 0.0)
        with pytest.raises(ValueError):
            bath.BathMode(1.0, np.inf)
        with pytest.raises(ValueError):
            bath.BathMode(1.0, 0.0, complex(np.nan, 0))

    def test_empty_bath(self):
        with pytest.raises(ValueError):
            bath.BathSpec(())

    def test_log_uniform(self):
        b = bath.log_uniform_bath(32, 0.5, 2.0)
        rates = [m.kappa_mu for m in b.modes]
        assert len(rates) == 32
        assert rates[0] == pytest.approx(0.5)
        assert rates[-1] == pytest.approx(2.0)
        assert np.allclose(np.diff(np.log(rates)), np.log(4) / 31)
        with pytest.raises(ValueError):
            bath.log_uniform_bath(0, 1.0, 2.0)
        with pytest.raises(ValueError):
            bath.log_uniform_bath(3, 2.0, 1.0)


class TestLoadBath:
    def test_single_mode(self):
        b = bath.load_bath(os.path.join(DATA, 'single_mode_bath.csv'))
        assert b.modes == (bath.BathMode(2.0, 0.0, 1.0),)

    def test_two_modes(self):
        b = bath.load_bath(os.path.join(DATA, 'two_mode_bath.csv'))
        assert [m.kappa_mu for m in b.modes] == [1.0, 3.0]

    def test_empty_file(self, tmp_path):
        path = tmp_path / 'empty.csv'
        path.write_text('')
        with pytest.raises(ConfigError, match='empty'):
            bath.load_bath(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / 'header.csv'
        path.write_text(','.join(bath.BATH_COLUMNS) + '\n')
        with pytest.raises(ConfigError, match='no modes'):
            bath.load_bath(path)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / 'wrong.csv'
        path.write_text('kappa,omega,w_re,w_im\n1,0,1,0\n')
        with pytest.raises(ConfigError, match='line 1: expected header'):
            bath.load_bath(path)

    def test_malformed_row(self, tmp_path):
        path = tmp_path / 'bad.csv'
        path.write_text(','.join(bath.BATH_COLUMNS) +
                        '\n1,0,1,0\nfast,0,1,0\n')
        with pytest.raises(ConfigError, match='line 3'):
            bath.load_bath(path)

    def test_invalid_rate(self, tmp_path):
        path = tmp_path / 'negative.csv'
        path.write_text(','.join(bath.BATH_COLUMNS) + '\n-1,0,1,0\n')
        with pytest.raises(ConfigError, match='line 2: kappa_mu'):
            bath.load_bath(path)


class TestSynthesizeKernel:
    def test_normalised(self):
        b = bath.load_bath(os.path.join(DATA, 'two_mode_bath.csv'))
        samples = bath.synthesize_kernel(b, np.linspace(0, 20, 20001))
        integral = scipy.integrate.trapezoid(samples.values, samples.times)
        assert integral == pytest.approx(1.0, abs=1e-9)
        assert not samples.truncated

    def test_single_mode_shape(self):
        b = bath.log_uniform_bath(1, 2.0, 2.0)
        samples = bath.synthesize_kernel(b, np.linspace(0, 5, 501))
        assert np.allclose(samples.values / samples.values[0],
                           np.exp(-2.0 * samples.times), rtol=1e-12)

    def test_two_mode_initial_value(self):
        """M(0) = 2 / (1 + 1/3) for unit weights."""
        b = bath.load_bath(os.path.join(DATA, 'two_mode_bath.csv'))
        samples = bath.synthesize_kernel(b, np.linspace(0, 20, 20001))
        assert samples.values[0].real == pytest.approx(1.5, rel=1e-3)

    def test_truncation(self):
        b = bath.log_uniform_bath(1, 1.0, 1.0)
        with pytest.warns(UserWarning, match='truncated'):
            samples = bath.synthesize_kernel(b, np.linspace(0, 2, 201))
        assert samples.truncated

    @pytest.mark.parametrize('grid', [
        [0.0], [0.5, 1.0, 1.5], [0.0, 1.0, 3.0], [0.0, 2.0, 1.0]])
    def test_invalid_grid(self, grid):
        with pytest.raises(ValueError):
            bath.synthesize_kernel(bath.log_uniform_bath(1, 1.0, 1.0), grid)

    def test_to_frame(self):
        b = bath.log_uniform_bath(1, 1.0, 1.0)
        df = bath.synthesize_kernel(b, np.linspace(0, 5, 11)).to_frame()
        assert list(df.columns) == ['t_s', 're_m', 'im_m', 'abs_m']
        assert len(df) == 11


class TestFitExponential:
    def test_exact(self):
        t = np.linspace(0, 10, 1001)
        samples = bath.KernelSamples(t, 0.5 * np.exp(-t / 2.0))
        fit = bath.fit_exponential(samples)
        assert fit.tau == pytest.approx(2.0, rel=1e-9)
        assert fit.amplitude == pytest.approx(0.5, rel=1e-9)
        assert fit.residual <= 1e-12

    def test_two_exponentials(self):
        t = np.linspace(0, 5, 501)
        samples = bath.KernelSamples(
            t, 0.5 * np.exp(-t) + 0.5 * np.exp(-3 * t))
        fit = bath.fit_exponential(samples)
        assert 1 / 3 < fit.tau < 1
        assert fit.residual > 0

    def test_broad_bath(self):
        """Rates spread over a factor of four around 1/tau0."""
        tau0 = 1e-3
        b = bath.log_uniform_bath(32, 0.5 / tau0, 2.0 / tau0)
        with pytest.warns(UserWarning, match='truncated'):
            samples = bath.synthesize_kernel(
                b, np.linspace(0, 5 * tau0, 2001))
        fit = bath.fit_exponential(samples)
        assert fit.tau == pytest.approx(tau0, rel=0.25)

    def test_constant(self):
        t = np.linspace(0, 1, 100)
        with pytest.raises(EnvelopeError, match='does not decay'):
            bath.fit_exponential(bath.KernelSamples(t, np.ones(100)))

    def test_too_few_samples(self):
        t = np.linspace(0, 1, 5)
        with pytest.raises(EnvelopeError):
            bath.fit_exponential(bath.KernelSamples(t, np.exp(-t)))


class TestKernelToSpec:
    def test_single_mode_matches_exponential(self):
        p = params.desk_family()
        p = p.with_detuning(-p.cavity.kappa_c)
        tau = p.phototherm.tau_th
        spec = bath.kernel_to_spec(bath.log_uniform_bath(1, 1 / tau, 1 / tau))
        assert spec.poles() == dynamics.exponential_kernel(tau).poles()
        a = np.sort_complex(np.linalg.eigvals(
            dynamics.build_drift(p, spec).matrix))
        b = np.sort_complex(np.linalg.eigvals(
            dynamics.build_drift(p).matrix))
        assert np.allclose(a, b, rtol=1e-12, atol=0)

    def test_amplitudes(self):
        b = bath.load_bath(os.path.join(DATA, 'two_mode_bath.csv'))
        spec = bath.kernel_to_spec(b)
        amplitudes = [a for a, _ in spec.poles()]
        assert amplitudes == pytest.approx([0.75, 0.25])

    def test_samples_map_to_exponential(self):
        t = np.linspace(0, 10, 1001)
        spec = bath.kernel_to_spec(
            bath.KernelSamples(t, np.exp(-t / 2.0) / 2.0))
        assert spec.kind == 'exponential'
        assert spec.tau_th == pytest.approx(2.0, rel=1e-9)

    def test_mode_limit(self):
        with pytest.raises(LimitError):
            bath.kernel_to_spec(bath.log_uniform_bath(65, 1.0, 2.0))

    def test_invalid_source(self):
        with pytest.raises(TypeError):
            bath.kernel_to_spec([1.0, 2.0])

    def test_spread_moves_damping_monotonically(self):
        """Wider baths depart further from the single-exponential rate."""
        p = params.desk_family()
        p = p.with_detuning(-p.cavity.kappa_c)
        s0 = 1 / p.phototherm.tau_th
        reference = dynamics.effective_mode(dynamics.build_drift(p), p)
        departures = []
        for spread in [0.1, 0.2, 0.4, 0.8, 1.6]:
            b = bath.log_uniform_bath(8, s0 * np.exp(-spread),
                                      s0 * np.exp(spread))
            mode = dynamics.effective_mode(
                dynamics.build_drift(p, bath.kernel_to_spec(b)), p)
            departures.append(abs(mode.kappa_eff - reference.kappa_eff))
        assert np.all(np.diff(departures) > 0)
