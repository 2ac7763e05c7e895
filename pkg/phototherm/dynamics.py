"""Noise-free linear dynamics of the membrane, cavity and exciton fields.

The fluctuation vector is ordered ``(a, a+, b, b+, c, c+, m1, m1+, ...)``
where ``a`` is the cavity field, ``b`` the membrane mode, ``c`` the summed
exciton field and ``m_k`` the auxiliary variables that realise the memory
kernel as ordinary differential equations. A time dependence
``exp(-i omega t)`` is used throughout, so the mechanical mode evolves as
``exp((-kappa - i omega_m) t)``.
"""
import logging
import warnings
from dataclasses import dataclass, field
import numpy as np
import pandas as pd
import scipy.linalg
import scipy.stats
from phototherm.cooling import kappa_rp, kappa_th
from phototherm.params import omega_in
from phototherm.steadystate import mean_fields
from phototherm.utils import (AmbiguousModeError, InsufficientSpanError,
                              LimitError, SingularParametersError,
                              parallel_map)

_logger = logging.getLogger(__name__)

#: Largest number of exponential terms a kernel may carry.
MAX_KERNEL_TERMS = 64
#: Eigenvector condition number above which propagation falls back to expm.
MAX_EIGVEC_CONDITION = 1e12
#: Condition number above which a susceptibility solve is rejected.
MAX_SOLVE_CONDITION = 1e13
#: Relative window around omega_m searched for the mechanical eigenvalues.
MODE_WINDOW = 0.1
#: RMS of the detrended log-envelope above which beating is reported.
BEATING_RMS = 1e-2

B_INDEX = 2
KERNEL_KINDS = ('exponential', 'instantaneous', 'sum')


@dataclass(frozen=True)
class KernelSpec:
    """Memory kernel of the delayed exciton force.

    ``kind`` is ``'exponential'`` (uses ``tau_th``), ``'instantaneous'``
    (delta kernel) or ``'sum'`` (uses ``terms``, a tuple of
    ``(amplitude, rate, frequency)`` with rates and frequencies in rad/s).
    A sum kernel is ``M(t) = sum_k A_k s_k exp(-s_k t)`` with
    ``s_k = rate_k + i frequency_k``, so it integrates to ``sum_k A_k``,
    which must be one.
    """
    kind: str
    tau_th: float = None
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"kind must be one of {KERNEL_KINDS}.")
        if self.kind == 'exponential':
            if self.tau_th is None or not self.tau_th > 0:
                raise ValueError("tau_th must be positive.")
        if self.kind == 'sum':
            terms = tuple((complex(a), float(r), float(f))
                          for a, r, f in self.terms)
            if len(terms) == 0:
                raise ValueError("a sum kernel needs at least one term.")
            if len(terms) > MAX_KERNEL_TERMS:
                raise LimitError(
                    f"{len(terms)} kernel terms exceed the limit of "
                    f"{MAX_KERNEL_TERMS}.")
            if any(not r > 0 for _, r, _ in terms):
                raise ValueError("kernel rates must be positive.")
            total = sum(a for a, _, _ in terms)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(
                    f"kernel amplitudes sum to {total}, expected 1.")
            object.__setattr__(self, 'terms', terms)

    def poles(self):
        """List of ``(amplitude, s)`` pairs of the auxiliary variables."""
        if self.kind == 'exponential':
            return [(1.0 + 0j, 1.0 / self.tau_th + 0j)]
        if self.kind == 'instantaneous':
            return []
        return [(a, complex(r, f)) for a, r, f in self.terms]


def exponential_kernel(tau_th):
    """Exponential kernel ``exp(-t/tau_th)/tau_th``."""
    return KernelSpec('exponential', tau_th=tau_th)


def instantaneous_kernel():
    """Delta kernel: the exciton force acts without delay."""
    return KernelSpec('instantaneous')


def sum_of_exponentials(terms):
    """Kernel from ``(amplitude, rate, frequency)`` terms, see KernelSpec."""
    return KernelSpec('sum', terms=tuple(terms))


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    """Generator ``G`` of ``dz/dt = G z`` with its variable labels."""
    matrix: np.ndarray
    labels: tuple
    kernel: KernelSpec = field(default=None)

    @property
    def dimension(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class RingdownTrace:
    """Samples of the membrane amplitude ``b(t)``.

    ``fallback`` is True when the trace was propagated with matrix
    exponentials because the eigenvectors were ill conditioned.
    """
    times: np.ndarray
    values: np.ndarray
    fallback: bool = False

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d of equal size.")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("trace contains non-finite samples.")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing.")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'values', values)

    def to_frame(self):
        """Trace as a dataframe with columns t_s, re_b, im_b, abs_b."""
        return pd.DataFrame({'t_s': self.times, 're_b': self.values.real,
                             'im_b': self.values.imag,
                             'abs_b': np.abs(self.values)})


@dataclass(frozen=True)
class EffectiveMode:
    """Damping (``-Re``) and frequency (``|Im|``) of the mechanical pair."""
    kappa_eff: float
    omega_eff: float


@dataclass(frozen=True)
class DampingFit:
    """Decay rate and angular frequency fitted to a ring-down trace.

    ``log_rms`` and ``phase_rms`` are the RMS residuals of the linear fits
    to ``log|b|`` and to the unwrapped phase.
    """
    kappa: float
    omega: float
    log_rms: float
    phase_rms: float


def _labels(n_aux):
    names = ['a', 'a+', 'b', 'b+', 'c', 'c+']
    for k in range(1, n_aux + 1):
        names += [f'm{k}', f'm{k}+']
    return tuple(names)


def build_drift(params, kernel=None):
    """Drift matrix of the linearised mean-value equations.

    The memory kernel enters through auxiliary variables
    ``dm_k/dt = s_k (c - m_k)``; the membrane feels
    ``-i eta (c_bar^* m + c_bar m^+)`` with ``m = sum_k A_k m_k`` and
    ``eta = (eta_th/gamma) gamma``. An instantaneous kernel uses ``c``
    itself and adds no auxiliary rows. The exciton field is driven by the
    membrane through ``-i eta c_bar (b + b^+)`` unless ``reverse_feed`` is
    ``'zero'``. Rows of daggered variables are the complex conjugates of
    their partners.

    Parameters
    ----------
    params : SystemParams
        System parameters; mean fields come from
        :func:`phototherm.steadystate.mean_fields`.
    kernel : KernelSpec, optional
        Memory kernel. Defaults to the exponential kernel with
        ``params.phototherm.tau_th``.

    Returns
    -------
    DriftMatrix
        Complex generator of dimension 6 + 2K for K kernel terms.

    Examples
    --------
    .. doctest::

        >>> p = params.desk_family()
        >>> dynamics.build_drift(p).dimension
        8
        >>> G = dynamics.build_drift(p, dynamics.instantaneous_kernel())
        >>> G.labels
        ('a', 'a+', 'b', 'b+', 'c', 'c+')
    """
    if kernel is None:
        kernel = exponential_kernel(params.phototherm.tau_th)
    poles = kernel.poles()
    if len(poles) > MAX_KERNEL_TERMS:
        raise LimitError(
            f"{len(poles)} kernel terms exceed the limit of "
            f"{MAX_KERNEL_TERMS}.")
    fields = mean_fields(params)
    a_bar, c_bar = fields.a_bar, fields.c_bar_sum
    g0 = params.mech.g0
    eta = params.phototherm.eta_th_over_gamma * params.exciton.gamma
    eta_rev = eta if params.phototherm.reverse_feed == 'eta' else 0.0
    size = 6 + 2 * len(poles)
    G = np.zeros((size, size), dtype=complex)
    # cavity
    G[0, 0] = -(params.cavity.kappa_c - 1j * params.cavity.delta_c)
    G[0, 2] = G[0, 3] = -1j * g0 * a_bar
    # membrane
    G[2, 2] = -(params.mech.kappa_m + 1j * params.mech.omega_m)
    G[2, 0] = -1j * g0 * np.conj(a_bar)
    G[2, 1] = -1j * g0 * a_bar
    if kernel.kind == 'instantaneous':
        G[2, 4] += -1j * eta * np.conj(c_bar)
        G[2, 5] += -1j * eta * c_bar
    for k, (amp, s) in enumerate(poles):
        m = 6 + 2 * k
        G[2, m] += -1j * eta * np.conj(c_bar) * amp
        G[2, m + 1] += -1j * eta * c_bar * np.conj(amp)
        G[m, 4] = s
        G[m, m] = -s
    # excitons
    G[4, 4] = -params.exciton.gamma
    G[4, 0] = -1j * (params.exciton.omega_c_coupling + omega_in(params))
    G[4, 2] = G[4, 3] = -1j * eta_rev * c_bar
    # daggered rows mirror their partners
    perm = np.arange(size) ^ 1
    for row in range(0, size, 2):
        G[row + 1, :] = np.conj(G[row, perm])
    return DriftMatrix(G, _labels(len(poles)), kernel)


def effective_mode(G, params):
    """Effective damping and frequency from the eigenvalues of ``G``.

    The eigenvalue with ``Im`` within 10% of ``omega_m`` and its conjugate
    partner form the mechanical pair; their mean ``-Re`` and ``|Im|`` are
    returned.

    Parameters
    ----------
    G : DriftMatrix
        Drift matrix built from `params`.
    params : SystemParams
        Parameters used to build `G`.

    Returns
    -------
    EffectiveMode
        Effective mechanical damping and frequency, rad/s.

    Raises
    ------
    AmbiguousModeError
        If no eigenvalue pair or more than one lies within 10% of
        ``omega_m``.

    Examples
    --------
    .. doctest::

        >>> p = params.desk_family(g0=0.0, eta_th_over_gamma=0.0)
        >>> mode = dynamics.effective_mode(dynamics.build_drift(p), p)
        >>> round(mode.kappa_eff, 12)
        0.1
    """
    omega_m = params.mech.omega_m
    eigs = np.linalg.eigvals(G.matrix)
    upper = eigs[(eigs.imag > 0) &
                 (np.abs(eigs.imag - omega_m) <= MODE_WINDOW * omega_m)]
    distinct = []
    for value in upper:
        if all(abs(value - d) > 1e-9 * omega_m for d in distinct):
            distinct.append(value)
    if not distinct:
        raise AmbiguousModeError(
            f"no eigenvalue pair lies within {MODE_WINDOW:.0%} of "
            f"omega_m = {omega_m:.6g} rad/s")
    if len(distinct) > 1:
        listed = ', '.join(f"{v:.6g}" for v in distinct)
        raise AmbiguousModeError(
            f"{len(distinct)} eigenvalue pairs lie within "
            f"{MODE_WINDOW:.0%} of omega_m = {omega_m:.6g} rad/s: {listed}")
    first = distinct[0]
    partner = eigs[np.argmin(np.abs(eigs - np.conj(first)))]
    _logger.debug("mechanical eigenvalues %s and %s", first, partner)
    kappa_eff = -(first.real + partner.real) / 2.0
    omega_eff = (abs(first.imag) + abs(partner.imag)) / 2.0
    return EffectiveMode(float(kappa_eff), float(omega_eff))


def _initial_state(size, initial_b):
    z0 = np.zeros(size, dtype=complex)
    z0[B_INDEX] = initial_b
    z0[B_INDEX + 1] = np.conj(initial_b)
    return z0


def simulate_ringdown(G, initial_b, t_final, n_steps):
    """Free decay of the membrane amplitude from an initial excitation.

    Propagates ``z(t) = exp(G t) z(0)`` with only ``b`` (and ``b^+``)
    excited, through the eigendecomposition of ``G``. When the eigenvectors
    are ill conditioned (near-defective ``G``), the propagator
    ``expm(G dt)`` from :func:`scipy.linalg.expm` is applied step by step
    and the trace is flagged.

    Parameters
    ----------
    G : DriftMatrix
        Drift matrix.
    initial_b : complex
        Initial membrane amplitude.
    t_final : float
        Duration, s.
    n_steps : int
        Number of uniformly spaced samples including ``t = 0``.

    Returns
    -------
    RingdownTrace
        Samples of ``b(t)``.

    Examples
    --------
    .. doctest::

        >>> p = params.desk_family(g0=0.0, eta_th_over_gamma=0.0)
        >>> trace = dynamics.simulate_ringdown(
        ...     dynamics.build_drift(p), 1.0, 10.0, 2001)
        >>> round(abs(trace.values[-1]), 6)
        0.367879
    """
    if n_steps < 2:
        raise ValueError("n_steps must be at least 2.")
    if not t_final > 0:
        raise ValueError("t_final must be positive.")
    matrix = G.matrix
    times = np.linspace(0.0, t_final, int(n_steps))
    z0 = _initial_state(matrix.shape[0], initial_b)
    eigs, vecs = np.linalg.eig(matrix)
    condition = np.linalg.cond(vecs)
    if np.isfinite(condition) and condition <= MAX_EIGVEC_CONDITION:
        coeffs = np.linalg.solve(vecs, z0)
        values = (vecs[B_INDEX, :] * coeffs) @ np.exp(np.outer(eigs, times))
        return RingdownTrace(times, values)
    msg = (f"eigenvector condition number {condition:.3g} exceeds "
           f"{MAX_EIGVEC_CONDITION:g}; propagating with matrix exponentials")
    _logger.debug(msg)
    warnings.warn(msg, UserWarning)
    step = scipy.linalg.expm(matrix * (times[1] - times[0]))
    values = np.empty(times.size, dtype=complex)
    z = z0
    for i in range(times.size):
        values[i] = z[B_INDEX]
        z = step @ z
    return RingdownTrace(times, values, fallback=True)


def fit_damping(trace):
    """Fit decay rate and frequency to a ring-down trace.

    ``-kappa`` is the slope of a linear regression of ``log|b(t)|`` and
    ``-omega`` the slope of the unwrapped phase, both with
    :func:`scipy.stats.linregress`. ``omega`` is returned as a magnitude;
    for ``b ~ exp(-i omega t)`` the phase slope is ``-omega``.

    Parameters
    ----------
    trace : RingdownTrace
        Trace covering at least three oscillation periods and one decay
        time ``1/|kappa|``.

    Returns
    -------
    DampingFit
        Fitted rates in rad/s with residual diagnostics.

    Raises
    ------
    InsufficientSpanError
        If the trace is too short, or does not oscillate.

    Warns
    -----
    UserWarning
        If the log-envelope is not a straight line (beating between
        several excited eigenmodes).

    Examples
    --------
    .. doctest::

        >>> t = np.linspace(0, 10, 10001)
        >>> trace = dynamics.RingdownTrace(
        ...     t, np.exp((-0.5 - 2j * np.pi * 10) * t))
        >>> fit = dynamics.fit_damping(trace)
        >>> round(fit.kappa, 9), round(fit.omega / (2 * np.pi), 9)
        (0.5, 10.0)
    """
    times = trace.times
    magnitude = np.abs(trace.values)
    if times.size < 3:
        raise InsufficientSpanError("a damping fit needs at least 3 samples")
    if np.any(magnitude == 0):
        raise InsufficientSpanError("trace contains zero amplitude samples")
    log_mag = np.log(magnitude)
    envelope = scipy.stats.linregress(times, log_mag)
    phase = np.unwrap(np.angle(trace.values))
    rotation = scipy.stats.linregress(times, phase)
    kappa = -envelope.slope
    omega = abs(rotation.slope)
    span = times[-1] - times[0]
    periods = span * abs(omega) / (2.0 * np.pi)
    if periods < 3:
        raise InsufficientSpanError(
            f"trace covers {periods:.3g} oscillation periods, at least 3 "
            "are needed")
    if span * abs(kappa) < 1:
        raise InsufficientSpanError(
            f"trace covers {span * abs(kappa):.3g} decay times, at least 1 "
            "is needed")
    log_rms = float(np.sqrt(np.mean(
        (log_mag - envelope.intercept - envelope.slope * times) ** 2)))
    phase_rms = float(np.sqrt(np.mean(
        (phase - rotation.intercept - rotation.slope * times) ** 2)))
    if log_rms > BEATING_RMS:
        warnings.warn(
            f"nonmonotone envelope (log residual RMS {log_rms:.3g}); "
            "several eigenmodes appear to be excited", UserWarning)
    return DampingFit(float(kappa), float(omega), log_rms, phase_rms)


def susceptibility(G, omega_grid):
    """Mechanical susceptibility ``b``-response to a force on ``b``.

    For each frequency solves ``(-i omega I - G) x = e_b`` and returns the
    ``b`` component, so the resonance sits at ``+omega_eff`` with
    half-width ``kappa_eff``.

    Parameters
    ----------
    G : DriftMatrix
        Drift matrix.
    omega_grid : array-like
        Angular frequencies, rad/s.

    Returns
    -------
    numpy.ndarray
        Complex susceptibility, s.

    Raises
    ------
    SingularParametersError
        If the system is nearly singular at a grid point; the message holds
        the point index and the condition number.
    """
    grid = np.asarray(omega_grid, dtype=float)
    matrix = G.matrix
    eye = np.eye(matrix.shape[0])
    unit = np.zeros(matrix.shape[0], dtype=complex)
    unit[B_INDEX] = 1.0
    chi = np.empty(grid.size, dtype=complex)
    for i, omega in enumerate(grid):
        system = -1j * omega * eye - matrix
        condition = np.linalg.cond(system)
        if not condition < MAX_SOLVE_CONDITION:
            raise SingularParametersError(
                f"grid point {i} (omega={omega:.6g} rad/s): near-singular "
                f"solve, condition number {condition:.3g}")
        chi[i] = np.linalg.solve(system, unit)[B_INDEX]
    return chi


def linewidth_from_susceptibility(omega_grid, chi):
    """Centre and half width at half maximum of ``|chi|^2``.

    Half-maximum crossings are located by linear interpolation on each
    side of the peak.

    Parameters
    ----------
    omega_grid : array-like
        Increasing angular frequencies, rad/s.
    chi : array-like
        Susceptibility on the grid.

    Returns
    -------
    tuple of float
        ``(centre, hwhm)`` in rad/s.
    """
    grid = np.asarray(omega_grid, dtype=float)
    power = np.abs(np.asarray(chi)) ** 2
    peak = int(np.argmax(power))
    half = power[peak] / 2.0
    below_left = np.nonzero(power[:peak] < half)[0]
    below_right = np.nonzero(power[peak:] < half)[0]
    if below_left.size == 0 or below_right.size == 0:
        raise ValueError("omega_grid does not bracket the half maximum.")
    i = below_left[-1]
    left = np.interp(half, [power[i], power[i + 1]], [grid[i], grid[i + 1]])
    j = peak + below_right[0]
    right = np.interp(half, [power[j], power[j - 1]], [grid[j], grid[j - 1]])
    return float((left + right) / 2.0), float((right - left) / 2.0)


def compare_with_analytic(params, detuning_grid, kernel=None):
    """Compare the analytic damping shift with the eigenvalue oracle.

    Parameters
    ----------
    params : SystemParams
        System parameters; the detuning is replaced by each grid value.
    detuning_grid : array-like
        Cavity detunings, rad/s.
    kernel : KernelSpec, optional
        Kernel for the oracle; defaults to the exponential kernel.

    Returns
    -------
    pandas.DataFrame
        Columns ``delta_c``, ``kappa_th``, ``kappa_rp``,
        ``shift_analytic`` (``kappa_th + kappa_rp``), ``shift_oracle``
        (``kappa_eff - kappa_m`` from :func:`effective_mode`),
        ``kappa_eff_analytic``, ``kappa_eff_oracle`` and
        ``omega_eff_oracle``.
    """
    grid = np.asarray(detuning_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("detuning_grid must be a nonempty 1-d sequence.")
    kappa_m = params.mech.kappa_m

    def evaluate(item):
        index, delta = item
        point = params.with_detuning(delta)
        try:
            k_th = kappa_th(point)
            k_rp = kappa_rp(point)
            mode = effective_mode(build_drift(point, kernel), point)
        except ValueError as exc:
            raise type(exc)(
                f"grid point {index} (delta_c={delta:.6g} rad/s): "
                f"{exc}") from exc
        return k_th, k_rp, mode

    rows = parallel_map(evaluate, list(enumerate(grid)))
    k_th = np.array([r[0] for r in rows])
    k_rp = np.array([r[1] for r in rows])
    k_eff = np.array([r[2].kappa_eff for r in rows])
    return pd.DataFrame({
        'delta_c': grid,
        'kappa_th': k_th,
        'kappa_rp': k_rp,
        'shift_analytic': k_th + k_rp,
        'shift_oracle': k_eff - kappa_m,
        'kappa_eff_analytic': kappa_m + k_th + k_rp,
        'kappa_eff_oracle': k_eff,
        'omega_eff_oracle': [r[2].omega_eff for r in rows],
    })


def max_deviation(table, kappa_m):
    """Largest analytic/oracle shift difference relative to the peak shift.

    The shift crosses zero inside typical detuning grids, so differences
    are normalised by the peak analytic shift, floored at
    ``1e-9 kappa_m``.

    Parameters
    ----------
    table : pandas.DataFrame
        Output of :func:`compare_with_analytic`.
    kappa_m : float
        Intrinsic mechanical damping, rad/s.

    Returns
    -------
    float
        Relative deviation.
    """
    diff = np.abs(table['shift_analytic'] - table['shift_oracle'])
    scale = max(float(np.max(np.abs(table['shift_analytic']))),
                1e-9 * kappa_m)
    return float(np.max(diff) / scale)
