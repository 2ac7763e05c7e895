"""Steady-state mean fields and the modified input-output relation."""
from dataclasses import dataclass, replace
import numpy as np
import pandas as pd
from phototherm.params import omega_in, photon_flux
from phototherm.utils import SingularParametersError, parallel_map

#: Relative size below which the mean-field denominator counts as zero.
SINGULAR_THRESHOLD = 1e-30


@dataclass(frozen=True)
class MeanFields:
    """Steady-state complex amplitudes.

    ``a_bar`` and ``c_bar_sum`` are the intracavity field and the summed
    exciton amplitude; ``a_in_bar`` and ``a_out_bar`` are the input and
    output amplitudes in sqrt(photons/s). The input amplitude is real and
    positive, which fixes the phase reference.
    """
    a_bar: complex
    c_bar_sum: complex
    a_in_bar: complex
    a_out_bar: complex


def _denominator(params, w_in):
    """Common denominator of the mean fields and its leading term."""
    kappa = params.cavity.kappa_c
    delta = params.cavity.delta_c
    gamma = params.exciton.gamma
    w_c = params.exciton.omega_c_coupling
    leading = (kappa - 1j * delta) * gamma
    denom = leading + (w_c + w_in) * np.conj(w_c - w_in)
    if abs(denom) < SINGULAR_THRESHOLD * abs(leading):
        raise SingularParametersError(
            f"mean-field denominator {abs(denom):.3e} vanishes relative to "
            f"(kappa_c - i delta_c) gamma = {abs(leading):.3e}")
    return denom


def mean_fields(params):
    """Solve for the steady-state cavity and exciton amplitudes.

    Closed-form solution of the two mean-field equations

    .. math::

        -(\\kappa_c - i\\Delta_c)\\bar a - i(\\Omega_c - \\Omega_{in})^*
        \\bar c - \\sqrt{2\\kappa_c}\\,\\bar a_{in} = 0

        -\\gamma \\bar c - i(\\Omega_c + \\Omega_{in})\\bar a
        - i\\sqrt{2/\\kappa_c}\\,\\Omega_{in}\\bar a_{in} = 0

    with the exciton-mode density absorbed into the couplings.

    Parameters
    ----------
    params : SystemParams
        System parameters; the input amplitude is
        ``sqrt(P_in/(hbar omega_L))``.

    Returns
    -------
    MeanFields
        Mean amplitudes including the output field.

    Raises
    ------
    SingularParametersError
        If the common denominator vanishes.

    Examples
    --------
    Without exciton coupling a resonantly driven cavity holds
    ``a = -sqrt(2/kappa_c) a_in``.

    .. doctest::

        >>> p = params.desk_family(f_abs=0.0, omega_in_mode='zero')
        >>> f = steadystate.mean_fields(p)
        >>> ratio = f.a_bar / f.a_in_bar * np.sqrt(p.cavity.kappa_c / 2)
        >>> round(abs(ratio + 1), 12)
        0.0
    """
    kappa = params.cavity.kappa_c
    delta = params.cavity.delta_c
    gamma = params.exciton.gamma
    w_c = params.exciton.omega_c_coupling
    w_in = omega_in(params)
    a_in = np.sqrt(photon_flux(params))
    denom = _denominator(params, w_in)
    scale = np.sqrt(2.0 / kappa) * a_in
    a_bar = -scale * (kappa * gamma + w_in * np.conj(w_c - w_in)) / denom
    c_bar = scale * (1j * kappa * w_c - delta * w_in) / denom
    fields = MeanFields(complex(a_bar), complex(c_bar), complex(a_in), 0j)
    return replace(fields, a_out_bar=output_field(fields, params))


def output_field(fields, params):
    """Output amplitude from the exciton-modified input-output relation.

    ``a_out = a_in + sqrt(2 kappa_c) a - i sqrt(2/kappa_c) Omega_in^* c``.

    Parameters
    ----------
    fields : MeanFields
        Mean fields computed for the same `params`.
    params : SystemParams
        System parameters.

    Returns
    -------
    complex
        Output amplitude, sqrt(photons/s).
    """
    kappa = params.cavity.kappa_c
    w_in = omega_in(params)
    return complex(fields.a_in_bar + np.sqrt(2.0 * kappa) * fields.a_bar -
                   1j * np.sqrt(2.0 / kappa) * np.conj(w_in) *
                   fields.c_bar_sum)


def absorbed_fraction(params):
    """Fraction of the input power absorbed on cavity resonance.

    Evaluated as ``1 - |a_out/a_in|^2`` from the full steady state at
    zero detuning. For weak coupling it approaches
    ``4 Omega_c^2/(gamma kappa_c)``.

    Parameters
    ----------
    params : SystemParams
        System parameters; the configured detuning is ignored.

    Returns
    -------
    float
        Absorbed fraction.

    Examples
    --------
    .. doctest::

        >>> p = params.desk_family(f_abs=4e-4, omega_in_mode='zero')
        >>> round(steadystate.absorbed_fraction(p), 6)
        0.0004
    """
    resonant = params.with_detuning(0.0)
    fields = mean_fields(resonant)
    if fields.a_in_bar == 0:
        # the ratio is independent of the input amplitude
        resonant = resonant.with_changes(drive={'power_in': 1e-3})
        fields = mean_fields(resonant)
    return float(1.0 - abs(fields.a_out_bar / fields.a_in_bar) ** 2)


def intracavity_photons(params):
    """Mean intracavity photon number |a|^2."""
    return abs(mean_fields(params).a_bar) ** 2


def reflectance_spectrum(params, detuning_grid):
    """Reflected power fraction and photon number versus detuning.

    Parameters
    ----------
    params : SystemParams
        System parameters; the detuning is replaced by each grid value.
    detuning_grid : array-like
        Cavity detunings, rad/s.

    Returns
    -------
    pandas.DataFrame
        Columns ``delta_c``, ``reflectance`` (``|a_out/a_in|^2``),
        ``absorbed`` (``1 - reflectance``) and ``photons`` (``|a|^2``).
    """
    grid = np.asarray(detuning_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("detuning_grid must be a nonempty 1-d sequence.")
    probe = params
    if params.drive.power_in == 0:
        probe = params.with_changes(drive={'power_in': 1e-3})

    def evaluate(delta):
        fields = mean_fields(probe.with_detuning(delta))
        return abs(fields.a_out_bar / fields.a_in_bar) ** 2, \
            abs(fields.a_bar) ** 2

    rows = parallel_map(evaluate, grid)
    refl = np.array([r[0] for r in rows])
    photons = np.array([r[1] for r in rows])
    if params.drive.power_in == 0:
        photons = np.zeros_like(photons)
    return pd.DataFrame({'delta_c': grid, 'reflectance': refl,
                         'absorbed': 1.0 - refl, 'photons': photons})
