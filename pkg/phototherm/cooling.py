"""Analytic photothermal and radiation-pressure damping rates."""
import logging
from dataclasses import dataclass
import numpy as np
import pandas as pd
from phototherm.params import omega_in, photon_flux
from phototherm.steadystate import mean_fields
from phototherm.utils import OutOfRegimeError, parallel_map

_logger = logging.getLogger(__name__)

#: Smallest omega_m tau_th for which the slow-kernel rate is evaluated.
MIN_OMEGA_TAU = 10.0
#: Allowed residue of the real-arithmetic sideband parts, relative to the
#: term magnitudes.
REAL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CoolingResult:
    """Damping rates in rad/s; positive values add damping (cooling)."""
    kappa_th: float
    kappa_rp: float
    kappa_eff: float


def _sidebands(params):
    """Numerator and denominator of each motional sideband term.

    The terms are multiplied by Omega_c^2 and written with Omega_c and
    Omega_in directly so that no division by Omega_c is needed.
    """
    kappa = params.cavity.kappa_c
    delta = params.cavity.delta_c
    omega_m = params.mech.omega_m
    w_c = params.exciton.omega_c_coupling
    w_in = omega_in(params)
    upper = ((w_c + w_in) * (delta * np.conj(w_in) + 1j * kappa * w_c),
             complex(kappa, -(omega_m + delta)))
    lower = ((w_c + np.conj(w_in)) * (delta * w_in - 1j * kappa * w_c),
             complex(kappa, -(omega_m - delta)))
    return upper, lower


def _brace_parts(terms):
    """Real and imaginary parts of the sideband sum in real arithmetic.

    Each quotient ``N/D`` is split as ``N conj(D) / |D|^2``. The parts are
    checked against the complex quotient sum, and a residue above
    ``REAL_TOLERANCE`` of the term magnitudes (or a non-finite value)
    raises.
    """
    real = 0.0
    imag = 0.0
    scale = 0.0
    total = 0j
    for numerator, denominator in terms:
        numerator = complex(numerator)
        denominator = complex(denominator)
        norm = denominator.real ** 2 + denominator.imag ** 2
        real += (numerator.real * denominator.real +
                 numerator.imag * denominator.imag) / norm
        imag += (numerator.imag * denominator.real -
                 numerator.real * denominator.imag) / norm
        scale += abs(numerator) / np.sqrt(norm)
        total += numerator / denominator
    residue = abs(total - complex(real, imag))
    if not residue <= REAL_TOLERANCE * scale:
        raise ArithmeticError(
            f"sideband sum has a residue of {residue!r} against the "
            f"term scale {scale!r}")
    return real, imag


def _prefactor(params):
    """Common prefactor of the adiabatic exciton-mediated rates."""
    kappa = params.cavity.kappa_c
    delta = params.cavity.delta_c
    gamma = params.exciton.gamma
    return photon_flux(params) * 2.0 * params.mech.g0 / \
        (kappa ** 2 + delta ** 2) * \
        params.phototherm.eta_th_over_gamma / gamma


def kappa_th(params, min_omega_tau=MIN_OMEGA_TAU):
    """Photothermal damping rate for an exponential memory kernel.

    Adiabatic rate valid for ``omega_m tau_th >> 1`` and real Omega_c:

    .. math::

        \\kappa_{th} = \\frac{P_{in}}{\\hbar\\omega_L}
        \\frac{2 g_0}{(\\kappa_c^2 + \\Delta_c^2)\\,\\omega_m\\tau_{th}}
        \\frac{\\eta_{th}}{\\gamma}\\frac{\\Omega_c^2}{\\gamma}
        \\,\\mathrm{Re}\\{\\ldots\\}

    where the braces hold the two motional sidebands weighted by
    ``(1 + r)`` and ``(1 + r^*)`` with ``r = Omega_in/Omega_c``.

    Parameters
    ----------
    params : SystemParams
        System parameters.
    min_omega_tau : float, optional
        Smallest accepted ``omega_m tau_th``. Default is 10.

    Returns
    -------
    float
        Added damping in rad/s; positive values cool the membrane.

    Raises
    ------
    OutOfRegimeError
        If ``omega_m tau_th < min_omega_tau``. Use
        :func:`phototherm.dynamics.effective_mode` for such kernels.
    ArithmeticError
        If the sideband sum is not finite.

    Examples
    --------
    The two sidebands cancel on resonance when the membrane does not couple
    to the free field.

    .. doctest::

        >>> p = params.desk_family(omega_in_mode='zero')
        >>> abs(cooling.kappa_th(p))
        0.0
    """
    omega_tau = params.mech.omega_m * params.phototherm.tau_th
    if omega_tau < min_omega_tau:
        raise OutOfRegimeError(
            f"omega_m tau_th = {omega_tau:.3g} is below {min_omega_tau:g}; "
            "the slow-kernel rate does not apply, use "
            "phototherm.dynamics.effective_mode instead")
    real, _ = _brace_parts(_sidebands(params))
    return float(_prefactor(params) / omega_tau * real)


def kappa_th_instantaneous(params):
    """Exciton-mediated damping for an instantaneous (delta) kernel.

    Pure deformation-potential coupling: the exciton response acts on the
    membrane without delay, so the imaginary part of the sideband sum sets
    the rate instead of its real part divided by ``omega_m tau_th``.

    Parameters
    ----------
    params : SystemParams
        System parameters; ``tau_th`` is not used.

    Returns
    -------
    float
        Added damping in rad/s.
    """
    _, imag = _brace_parts(_sidebands(params))
    return float(_prefactor(params) * imag)


def kappa_rp(params):
    """Radiation-pressure damping rate.

    Sideband expression from the adiabatic cavity response,
    ``g0^2 |a|^2 [kappa_c/(kappa_c^2 + (Delta_c + omega_m)^2) -
    kappa_c/(kappa_c^2 + (Delta_c - omega_m)^2)]``, with the intracavity
    amplitude taken from the full steady state. Like ``kappa_m`` it is an
    amplitude decay rate.

    Parameters
    ----------
    params : SystemParams
        System parameters.

    Returns
    -------
    float
        Added damping in rad/s; red detuning (``Delta_c < 0``) cools.
    """
    if params.mech.g0 == 0 or params.drive.power_in == 0:
        return 0.0
    kappa = params.cavity.kappa_c
    delta = params.cavity.delta_c
    omega_m = params.mech.omega_m
    photons = abs(mean_fields(params).a_bar) ** 2
    return float(params.mech.g0 ** 2 * photons * (
        kappa / (kappa ** 2 + (delta + omega_m) ** 2) -
        kappa / (kappa ** 2 + (delta - omega_m) ** 2)))


def cooling_rates(params, min_omega_tau=MIN_OMEGA_TAU):
    """Photothermal, radiation-pressure and total mechanical damping.

    Parameters
    ----------
    params : SystemParams
        System parameters.
    min_omega_tau : float, optional
        Passed to :func:`kappa_th`.

    Returns
    -------
    CoolingResult
        ``kappa_eff = kappa_m + kappa_th + kappa_rp``.
    """
    k_th = kappa_th(params, min_omega_tau=min_omega_tau)
    k_rp = kappa_rp(params)
    return CoolingResult(k_th, k_rp, params.mech.kappa_m + k_th + k_rp)


def sweep(params, detuning_grid, min_omega_tau=MIN_OMEGA_TAU):
    """Evaluate the damping rates over a detuning grid.

    Grid points are evaluated concurrently (see
    :func:`phototherm.utils.parallel_map`); the output keeps grid order.

    Parameters
    ----------
    params : SystemParams
        System parameters; the detuning is replaced by each grid value.
    detuning_grid : array-like
        Cavity detunings in rad/s.
    min_omega_tau : float, optional
        Passed to :func:`kappa_th`.

    Returns
    -------
    pandas.DataFrame
        Columns ``delta_c``, ``kappa_th``, ``kappa_rp`` and ``kappa_eff``,
        one row per grid point.

    Raises
    ------
    ValueError
        For an empty or non-finite grid. Errors at a grid point are
        re-raised with the point index in the message.

    Examples
    --------
    .. doctest::

        >>> p = params.desk_family(omega_in_mode='zero')
        >>> df = cooling.sweep(p, [-1e4, 0.0, 1e4])
        >>> df.shape
        (3, 4)
    """
    grid = np.asarray(detuning_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("detuning_grid must be a nonempty 1-d sequence.")
    if not np.all(np.isfinite(grid)):
        raise ValueError("detuning_grid must contain finite values.")

    def evaluate(item):
        index, delta = item
        try:
            return cooling_rates(params.with_detuning(delta),
                                 min_omega_tau=min_omega_tau)
        except ValueError as exc:
            raise type(exc)(
                f"grid point {index} (delta_c={delta:.6g} rad/s): "
                f"{exc}") from exc

    _logger.debug("evaluating cooling rates on %d detunings", grid.size)
    results = parallel_map(evaluate, list(enumerate(grid)))
    return pd.DataFrame({
        'delta_c': grid,
        'kappa_th': [r.kappa_th for r in results],
        'kappa_rp': [r.kappa_rp for r in results],
        'kappa_eff': [r.kappa_eff for r in results],
    })
