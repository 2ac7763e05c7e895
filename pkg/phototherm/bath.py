"""Memory kernels built from a discrete phonon bath."""
import logging
import warnings
from dataclasses import dataclass
import numpy as np
import pandas as pd
import scipy.integrate
import scipy.optimize
from phototherm.dynamics import exponential_kernel, sum_of_exponentials
from phototherm.utils import ConfigError, EnvelopeError

_logger = logging.getLogger(__name__)

BATH_COLUMNS = ['kappa_mu_rad_s', 'omega_mu_rad_s', 'weight_re', 'weight_im']
#: Decay times a kernel grid must cover before it counts as complete.
MIN_DECAY_TIMES = 3.0
MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class BathMode:
    """One bath mode: decay rate and frequency (rad/s) and complex weight."""
    kappa_mu: float
    omega_mu: float
    weight: complex = 1.0 + 0j

    def __post_init__(self):
        if not self.kappa_mu > 0:
            raise ValueError("kappa_mu must be positive.")
        if not np.isfinite(self.omega_mu):
            raise ValueError("omega_mu must be finite.")
        weight = complex(self.weight)
        if not np.isfinite(weight):
            raise ValueError("weight must be finite.")
        object.__setattr__(self, 'weight', weight)


@dataclass(frozen=True)
class BathSpec:
    """Nonempty collection of bath modes."""
    modes: tuple

    def __post_init__(self):
        modes = tuple(self.modes)
        if len(modes) == 0:
            raise ValueError("a bath needs at least one mode.")
        object.__setattr__(self, 'modes', modes)


@dataclass(frozen=True, eq=False)
class KernelSamples:
    """Kernel values on a uniform time grid starting at zero.

    ``truncated`` is True when the grid ends before the slowest bath mode
    has decayed by three time constants.
    """
    times: np.ndarray
    values: np.ndarray
    truncated: bool = False

    def to_frame(self):
        """Samples as a dataframe with columns t_s, re_m, im_m, abs_m."""
        return pd.DataFrame({'t_s': self.times, 're_m': self.values.real,
                             'im_m': self.values.imag,
                             'abs_m': np.abs(self.values)})


@dataclass(frozen=True)
class ExponentialFit:
    """Single-exponential fit ``amplitude exp(-t/tau)`` of a kernel envelope.

    ``residual`` is the RMS misfit relative to the peak magnitude.
    """
    tau: float
    amplitude: float
    residual: float


def log_uniform_bath(n_modes, kappa_min, kappa_max, weight=1.0):
    """Bath of equally weighted, non-oscillating modes.

    Decay rates are spaced uniformly in log between `kappa_min` and
    `kappa_max`.

    Parameters
    ----------
    n_modes : int
        Number of modes.
    kappa_min, kappa_max : float
        Smallest and largest decay rate, rad/s.
    weight : complex, optional
        Weight of every mode. Default is 1.

    Returns
    -------
    BathSpec
        The bath.

    Examples
    --------
    .. doctest::

        >>> b = bath.log_uniform_bath(3, 1.0, 4.0)
        >>> [round(m.kappa_mu, 9) for m in b.modes]
        [1.0, 2.0, 4.0]
    """
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1.")
    if not 0 < kappa_min <= kappa_max:
        raise ValueError("need 0 < kappa_min <= kappa_max.")
    rates = np.geomspace(kappa_min, kappa_max, int(n_modes))
    return BathSpec(tuple(BathMode(float(k), 0.0, weight) for k in rates))


def load_bath(path):
    """Read a bath CSV file.

    The header must be ``kappa_mu_rad_s,omega_mu_rad_s,weight_re,weight_im``.

    Parameters
    ----------
    path : str or pathlib.Path
        CSV file.

    Returns
    -------
    BathSpec
        The bath.

    Raises
    ------
    ConfigError
        For a wrong header, an empty file, or a malformed row; row errors
        name the line number.
    """
    try:
        df = pd.read_csv(path, dtype=str, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise ConfigError(f"{path}: bath file is empty")
    columns = [c.strip() for c in df.columns]
    if columns != BATH_COLUMNS:
        raise ConfigError(
            f"line 1: expected header {','.join(BATH_COLUMNS)}, got "
            f"{','.join(columns)}")
    if df.empty:
        raise ConfigError(f"{path}: bath file has no modes")
    modes = []
    for index, row in enumerate(df.itertuples(index=False)):
        lineno = index + 2
        try:
            kappa, omega, w_re, w_im = (float(v) for v in row)
        except (TypeError, ValueError):
            raise ConfigError(
                f"line {lineno}: cannot parse bath mode {list(row)}")
        try:
            modes.append(BathMode(kappa, omega, complex(w_re, w_im)))
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from exc
    _logger.debug("loaded %d bath modes from %s", len(modes), path)
    return BathSpec(tuple(modes))


def _check_grid(t_grid):
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("t_grid needs at least two samples.")
    if times[0] != 0:
        raise ValueError("t_grid must start at 0.")
    steps = np.diff(times)
    if not np.all(steps > 0) or \
            not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError("t_grid must be uniform and increasing.")
    return times


def synthesize_kernel(bath, t_grid):
    """Sample the normalised memory kernel of a bath.

    ``M(t) = sum_mu w_mu exp(-(kappa_mu + i omega_mu) t)``, scaled so that
    its trapezoidal integral over the grid is one.

    Parameters
    ----------
    bath : BathSpec
        The bath.
    t_grid : array-like
        Uniform time grid starting at 0, s.

    Returns
    -------
    KernelSamples
        Normalised samples.

    Warns
    -----
    UserWarning
        If the grid ends before three decay times of the slowest mode; the
        samples are flagged as truncated.

    Examples
    --------
    .. doctest::

        >>> b = bath.log_uniform_bath(1, 2.0, 2.0)
        >>> s = bath.synthesize_kernel(b, np.linspace(0, 10, 10001))
        >>> round(scipy.integrate.trapezoid(s.values, s.times).real, 12)
        1.0
    """
    times = _check_grid(t_grid)
    values = np.zeros(times.size, dtype=complex)
    for mode in bath.modes:
        values += mode.weight * np.exp(
            -complex(mode.kappa_mu, mode.omega_mu) * times)
    total = scipy.integrate.trapezoid(values, times)
    if total == 0:
        raise ValueError("the bath kernel integrates to zero.")
    slowest = min(mode.kappa_mu for mode in bath.modes)
    truncated = bool(times[-1] < MIN_DECAY_TIMES / slowest)
    if truncated:
        warnings.warn(
            f"kernel grid ends at {times[-1]:.3g} s, before "
            f"{MIN_DECAY_TIMES:g}/min(kappa_mu) = "
            f"{MIN_DECAY_TIMES / slowest:.3g} s; the kernel is truncated",
            UserWarning)
    return KernelSamples(times, values / total, truncated)


def _decay(t, amplitude, tau):
    return amplitude * np.exp(-t / tau)


def fit_exponential(samples):
    """Fit a single decaying exponential to the kernel magnitude.

    An initial guess from a linear fit of ``log|M|`` is refined with
    :func:`scipy.optimize.curve_fit`.

    Parameters
    ----------
    samples : KernelSamples
        At least 10 samples whose magnitude decreases overall.

    Returns
    -------
    ExponentialFit
        Time constant (s), amplitude and relative RMS residual.

    Raises
    ------
    EnvelopeError
        If the magnitude does not decay or the fit does not converge.
    """
    times = np.asarray(samples.times, dtype=float)
    magnitude = np.abs(np.asarray(samples.values))
    if times.size < MIN_FIT_SAMPLES:
        raise EnvelopeError(
            f"need at least {MIN_FIT_SAMPLES} samples, got {times.size}")
    peak = magnitude.max()
    if not (peak > 0 and magnitude[-1] < magnitude[0] * (1 - 1e-9)):
        raise EnvelopeError("kernel magnitude does not decay")
    positive = magnitude > 0
    slope, intercept = np.polyfit(times[positive],
                                  np.log(magnitude[positive]), 1)
    if not slope < 0:
        raise EnvelopeError("kernel magnitude does not decay")
    guess = (np.exp(intercept), -1.0 / slope)
    try:
        (amplitude, tau), _ = scipy.optimize.curve_fit(
            _decay, times, magnitude, p0=guess)
    except RuntimeError as exc:
        raise EnvelopeError(f"exponential fit failed: {exc}") from exc
    if not tau > 0:
        raise EnvelopeError(f"fitted time constant {tau:.3g} is not positive")
    residual = np.sqrt(np.mean((_decay(times, amplitude, tau) -
                                magnitude) ** 2)) / peak
    return ExponentialFit(float(tau), float(amplitude), float(residual))


def kernel_to_spec(source):
    """Kernel specification for :func:`phototherm.dynamics.build_drift`.

    A bath maps onto a sum of exponentials with amplitudes
    ``A_mu = (w_mu/s_mu) / sum_nu (w_nu/s_nu)``, ``s = kappa + i omega``,
    which is the bath kernel normalised to unit integral. Kernel samples
    map onto the exponential kernel of their fitted time constant.

    Parameters
    ----------
    source : BathSpec or KernelSamples
        Bath or sampled kernel.

    Returns
    -------
    KernelSpec
        The kernel.

    Raises
    ------
    LimitError
        For more than 64 bath modes.

    Examples
    --------
    .. doctest::

        >>> k = bath.kernel_to_spec(bath.log_uniform_bath(1, 0.5, 0.5))
        >>> k.poles()
        [((1+0j), (0.5+0j))]
    """
    if isinstance(source, KernelSamples):
        return exponential_kernel(fit_exponential(source).tau)
    if not isinstance(source, BathSpec):
        raise TypeError("source must be a BathSpec or KernelSamples.")
    rates = [complex(m.kappa_mu, m.omega_mu) for m in source.modes]
    areas = [m.weight / s for m, s in zip(source.modes, rates)]
    total = sum(areas)
    if total == 0:
        raise ValueError("the bath kernel integrates to zero.")
    terms = [(area / total, s.real, s.imag) for area, s in zip(areas, rates)]
    return sum_of_exponentials(terms)
