"""Unit tests for the params module."""
import os
import numpy as np
import pytest
from phototherm import params
from phototherm.utils import (C_LIGHT, TWO_PI, ConfigError,
                              OutOfRegimeError)

DATA = os.path.join(os.path.dirname(__file__), 'data')

CONFIG = """\
kappa_c_hz = 258e6
delta_c_hz = 0
length_L_m = 0.029
omega_m_hz = 23.4e3
kappa_m_rad_s = 1.8
g0_hz = -5.1
gamma_hz = 258e9
f_abs = 0.5
eta_th_over_gamma = 0.075
tau_th_s = 6.6e-3
power_in_w = 20e-6
lambda_L_m = 870e-9
thickness_d_m = 160e-9
"""


class TestOmegaRatio:
    def test_gaas_membrane(self):
        """870 nm drive on a 160 nm membrane."""
        r = params.omega_ratio(870e-9, 160e-9, 0.029, 0.0)
        assert abs(r) == pytest.approx(0.38626, rel=1e-4)
        assert np.angle(r) == pytest.approx(-0.99304, rel=1e-4)
        assert np.angle(r) == pytest.approx(
            np.pi * 160e-9 / 870e-9 - np.pi / 2)

    def test_bounded(self):
        rng = np.random.default_rng(1)
        for d in rng.uniform(1e-9, 869e-9, 200):
            r = params.omega_ratio(870e-9, d, 0.029, 0.0)
            assert abs(r) <= 1 / np.sqrt(2) + 1e-15

    def test_free_spectral_range_periodic(self):
        """The propagation phase repeats every pi c / L of detuning."""
        fsr = np.pi * C_LIGHT / 0.029
        r0 = params.omega_ratio(870e-9, 160e-9, 0.029, 1e6)
        r1 = params.omega_ratio(870e-9, 160e-9, 0.029, 1e6 + 5 * fsr)
        assert r1 == pytest.approx(r0, rel=1e-8)

    def test_invalid_geometry(self):
        with pytest.raises(ValueError):
            params.omega_ratio(870e-9, 0.0, 0.029, 0.0)


class TestCouplingFromAbsorption:
    def test_dataset_one(self):
        kappa_c = TWO_PI * 258e6
        ratio = params.coupling_from_absorption(0.5, kappa_c)
        assert ratio == pytest.approx(0.125 * kappa_c)

    def test_zero(self):
        assert params.coupling_from_absorption(0.0, 1.0) == 0.0

    @pytest.mark.parametrize('f_abs', [-0.1, 1.5])
    def test_out_of_range(self, f_abs):
        with pytest.raises(ValueError):
            params.coupling_from_absorption(f_abs, 1.0)


class TestSystemParams:
    def test_hierarchy_enforced(self):
        with pytest.raises(OutOfRegimeError):
            params.desk_family(gamma_over_kappa=5.0).with_changes(
                hierarchy_factor=10.0)

    def test_thickness_below_wavelength(self):
        p = params.desk_family()
        with pytest.raises(ValueError):
            p.with_changes(geometry={'thickness_d': 900e-9})

    def test_invalid_fields(self):
        p = params.desk_family()
        with pytest.raises(ValueError):
            p.with_changes(cavity={'kappa_c': 0.0})
        with pytest.raises(ValueError):
            p.with_changes(mech={'kappa_m': -1.0})
        with pytest.raises(TypeError):
            p.with_changes(mech={'g0': 1j})
        with pytest.raises(ValueError):
            p.with_changes(exciton={'omega_in_mode': 'other'})
        with pytest.raises(ValueError):
            p.with_changes(phototherm={'reverse_feed': 'half'})

    def test_with_detuning(self):
        p = params.desk_family()
        q = p.with_detuning(123.0)
        assert q.cavity.delta_c == 123.0
        assert p.cavity.delta_c == 0.0
        assert q.mech == p.mech

    def test_geometric_omega_in_follows_detuning(self):
        p = params.desk_family()
        ratio = params.ratio_in_to_c(p)
        assert params.omega_in(p) == pytest.approx(
            ratio * p.exciton.omega_c_coupling)
        assert params.omega_in(p.with_changes(
            exciton={'omega_in_mode': 'zero'})) == 0

    def test_explicit_omega_in(self):
        p = params.desk_family().with_changes(
            exciton={'omega_in_mode': 'explicit', 'omega_in_coupling': 2j})
        assert params.omega_in(p) == 2j


class TestHierarchy:
    def test_desk_family_holds(self, recwarn):
        assert params.validate_hierarchy(params.desk_family()) == []
        assert len(recwarn) == 0

    def test_compressed_family_warns(self):
        p = params.desk_family(kappa_over_omega=5.0)
        with pytest.warns(UserWarning, match='kappa_c/omega_m'):
            messages = params.validate_hierarchy(p)
        assert len(messages) == 1


class TestPresets:
    def test_reference_params(self):
        p = params.reference_params(1)
        assert p.drive.power_in == 20e-6
        assert p.mech.kappa_m == 1.8
        assert params.omega_c2_over_gamma(p) == pytest.approx(
            0.125 * p.cavity.kappa_c)
        assert p.phototherm.eta_th_over_gamma == 0.075

    def test_reference_params_invalid(self):
        with pytest.raises(ValueError):
            params.reference_params(5)

    def test_desk_family(self):
        p = params.desk_family()
        assert p.cavity.kappa_c == pytest.approx(100 * TWO_PI * 100)
        assert p.exciton.gamma == pytest.approx(100 * p.cavity.kappa_c)
        assert p.mech.omega_m * p.phototherm.tau_th > 1e3

    def test_photon_flux(self):
        p = params.desk_family(power_in=1e-3)
        expected = 1e-3 * 870e-9 / (6.62607015e-34 * C_LIGHT)
        assert params.photon_flux(p) == pytest.approx(expected, rel=1e-8)


class TestParseConfig:
    def test_parse(self):
        p = params.parse_config(CONFIG)
        assert p.cavity.kappa_c == pytest.approx(TWO_PI * 258e6)
        assert p.mech.g0 == pytest.approx(TWO_PI * -5.1)
        assert p.mech.kappa_m == 1.8
        assert p.exciton.omega_in_mode == 'geometry'
        assert p.phototherm.reverse_feed == 'eta'

    def test_load_file(self):
        p = params.load_config(os.path.join(DATA, 'dataset1.cfg'))
        assert p == params.parse_config(CONFIG)

    def test_units_agree(self):
        text = CONFIG.replace('kappa_c_hz = 258e6',
                              f'kappa_c_rad_s = {TWO_PI * 258e6!r}')
        a = params.parse_config(text)
        b = params.parse_config(CONFIG)
        assert a.cavity.kappa_c == pytest.approx(b.cavity.kappa_c,
                                                 rel=1e-15)

    def test_coupling_forms(self):
        p = params.parse_config(CONFIG)
        ratio = params.omega_c2_over_gamma(p)
        text = CONFIG.replace('f_abs = 0.5',
                              f'omega_c2_over_gamma_rad_s = {ratio!r}')
        q = params.parse_config(text)
        assert q.exciton.omega_c_coupling == pytest.approx(
            p.exciton.omega_c_coupling)

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="line 14: unknown key 'foo'"):
            params.parse_config(CONFIG + 'foo = 1\n')

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="line 14: duplicate key"):
            params.parse_config(CONFIG + 'kappa_m_hz = 1\n')

    @pytest.mark.parametrize('line', ['tau_th_hz = 1', 'f_abs_hz = 0.1',
                                      'length_L_s = 1'])
    def test_unit_suffix_mismatch(self, line):
        text = CONFIG.replace('tau_th_s = 6.6e-3\n', '').replace(
            'f_abs = 0.5\n', '').replace('length_L_m = 0.029\n', '')
        with pytest.raises(ConfigError, match='unit-suffix mismatch'):
            params.parse_config(text + line + '\n')

    def test_missing_key(self):
        text = CONFIG.replace('tau_th_s = 6.6e-3\n', '')
        with pytest.raises(ConfigError, match="tau_th_s"):
            params.parse_config(text)

    def test_missing_rate_key_lists_suffixes(self):
        text = CONFIG.replace('kappa_m_rad_s = 1.8\n', '')
        with pytest.raises(ConfigError) as excinfo:
            params.parse_config(text)
        assert "'kappa_m_hz'" in str(excinfo.value)
        assert "'kappa_m_rad_s'" in str(excinfo.value)

    def test_two_couplings(self):
        with pytest.raises(ConfigError, match='exactly one'):
            params.parse_config(CONFIG + 'omega_c_hz = 1e6\n')

    def test_bad_number(self):
        text = CONFIG.replace('power_in_w = 20e-6', 'power_in_w = lots')
        with pytest.raises(ConfigError, match="line 11: cannot parse"):
            params.parse_config(text)

    def test_bad_choice(self):
        with pytest.raises(ConfigError, match='omega_in_mode'):
            params.parse_config(CONFIG + 'omega_in_mode = sideways\n')

    def test_explicit_needs_components(self):
        with pytest.raises(ConfigError, match='omega_in_re'):
            params.parse_config(CONFIG + 'omega_in_mode = explicit\n')

    def test_invalid_values(self):
        text = CONFIG.replace('gamma_hz = 258e9', 'gamma_hz = 258e6')
        with pytest.raises(ConfigError):
            params.parse_config(text)


class TestSerializeConfig:
    @pytest.mark.parametrize('p', [
        params.desk_family(),
        params.reference_params(3, delta_c=1.234e8),
        params.desk_family(omega_in_mode='zero', g0=0.0),
    ])
    def test_exact(self, p):
        assert params.parse_config(params.serialize_config(p)) == p

    def test_explicit(self):
        p = params.desk_family().with_changes(
            exciton={'omega_in_mode': 'explicit',
                     'omega_in_coupling': complex(0.1, -0.3)},
            phototherm={'reverse_feed': 'zero'})
        assert params.parse_config(params.serialize_config(p)) == p
