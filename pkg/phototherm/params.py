"""Physical parameter sets, unit handling and configuration files."""
import logging
import warnings
from dataclasses import dataclass, field, replace
import numpy as np
from phototherm.utils import (ConfigError, OutOfRegimeError, HBAR, C_LIGHT,
                              TWO_PI)

_logger = logging.getLogger(__name__)

OMEGA_IN_MODES = ('geometry', 'zero', 'explicit')
REVERSE_FEED_MODES = ('eta', 'zero')


@dataclass(frozen=True)
class CavityParams:
    """Optical cavity: linewidth, detuning (rad/s) and length (m)."""
    kappa_c: float
    delta_c: float
    length_L: float

    def __post_init__(self):
        if not self.kappa_c > 0:
            raise ValueError("kappa_c must be positive.")
        if not self.length_L > 0:
            raise ValueError("length_L must be positive.")
        if not np.isfinite(self.delta_c):
            raise ValueError("delta_c must be finite.")


@dataclass(frozen=True)
class MechParams:
    """Membrane mode frequency, damping and optomechanical coupling.

    All three are angular rates in rad/s. ``g0`` may be negative.
    """
    omega_m: float
    kappa_m: float
    g0: float

    def __post_init__(self):
        if not self.omega_m > 0:
            raise ValueError("omega_m must be positive.")
        if not self.kappa_m > 0:
            raise ValueError("kappa_m must be positive.")
        if isinstance(self.g0, complex) or not np.isfinite(self.g0):
            raise TypeError("g0 must be a finite real number.")


@dataclass(frozen=True)
class ExcitonParams:
    """Exciton decoherence rate and effective optical couplings.

    ``omega_c_coupling`` is the real cavity-exciton rate Omega_c.
    ``omega_in_coupling`` is the free-field rate Omega_in, used only when
    ``omega_in_mode`` is ``'explicit'``; the ``'geometry'`` mode derives it
    from the membrane position in the cavity, see :func:`omega_in`.
    """
    gamma: float
    omega_c_coupling: float
    omega_in_coupling: complex = 0j
    omega_in_mode: str = 'geometry'

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive.")
        if isinstance(self.omega_c_coupling, complex) or \
                not self.omega_c_coupling >= 0:
            raise ValueError("omega_c_coupling must be real and >= 0.")
        if self.omega_in_mode not in OMEGA_IN_MODES:
            raise ValueError(
                f"omega_in_mode must be one of {OMEGA_IN_MODES}.")
        object.__setattr__(self, 'omega_in_coupling',
                           complex(self.omega_in_coupling))


@dataclass(frozen=True)
class PhotothermalParams:
    """Photothermal coupling eta_th/gamma and thermalization time (s)."""
    eta_th_over_gamma: float
    tau_th: float
    reverse_feed: str = 'eta'

    def __post_init__(self):
        if not self.tau_th > 0:
            raise ValueError("tau_th must be positive.")
        if self.reverse_feed not in REVERSE_FEED_MODES:
            raise ValueError(
                f"reverse_feed must be one of {REVERSE_FEED_MODES}.")


@dataclass(frozen=True)
class DriveParams:
    """Input power (W) coupled into the cavity and drive wavelength (m)."""
    power_in: float
    lambda_L: float

    def __post_init__(self):
        if not self.power_in >= 0:
            raise ValueError("power_in must be >= 0.")
        if not self.lambda_L > 0:
            raise ValueError("lambda_L must be positive.")


@dataclass(frozen=True)
class MembraneGeometry:
    """Membrane thickness (m)."""
    thickness_d: float

    def __post_init__(self):
        if not self.thickness_d > 0:
            raise ValueError("thickness_d must be positive.")


@dataclass(frozen=True)
class SystemParams:
    """Complete parameter set of the membrane-cavity system.

    Rates are angular (rad/s). On construction the exciton rate must exceed
    the cavity linewidth by ``hierarchy_factor``; the remaining scale
    separation is checked by :func:`validate_hierarchy`, which only warns.
    """
    cavity: CavityParams
    mech: MechParams
    exciton: ExcitonParams
    phototherm: PhotothermalParams
    drive: DriveParams
    geometry: MembraneGeometry
    hierarchy_factor: float = field(default=10.0)

    def __post_init__(self):
        if not self.geometry.thickness_d < self.drive.lambda_L:
            raise ValueError(
                "thickness_d must be smaller than lambda_L.")
        if self.exciton.gamma < self.hierarchy_factor * self.cavity.kappa_c:
            raise OutOfRegimeError(
                f"gamma={self.exciton.gamma:.6g} rad/s is not "
                f"{self.hierarchy_factor:g} times larger than "
                f"kappa_c={self.cavity.kappa_c:.6g} rad/s.")

    def with_detuning(self, delta_c):
        """Copy of the parameters at another cavity detuning (rad/s)."""
        return replace(self, cavity=replace(self.cavity,
                                            delta_c=float(delta_c)))

    def with_changes(self, **sections):
        """Copy with fields of the named sections replaced.

        Parameters
        ----------
        **sections
            Section name mapped to a dict of field updates, for example
            ``mech={'g0': 0.0}``.

        Returns
        -------
        SystemParams
            Updated copy.
        """
        updates = {}
        for name, changes in sections.items():
            if name == 'hierarchy_factor':
                updates[name] = changes
                continue
            updates[name] = replace(getattr(self, name), **changes)
        return replace(self, **updates)


def omega_ratio(lambda_L, d, L, delta_c):
    """Free-field to cavity coupling ratio Omega_in/Omega_c.

    Good-cavity expression for a membrane of thickness `d` closing a cavity
    of length `L`:
    ``-(i/sqrt(2)) exp(i(k d/2 - 2 L delta_c/c)) sin(k d/2)`` with
    ``k = 2 pi/lambda_L``.

    Parameters
    ----------
    lambda_L : float
        Drive wavelength, m.
    d : float
        Membrane thickness, m.
    L : float
        Cavity length, m.
    delta_c : float
        Cavity detuning, rad/s.

    Returns
    -------
    complex
        The ratio; its magnitude never exceeds ``1/sqrt(2)``.

    Examples
    --------
    .. doctest::

        >>> r = params.omega_ratio(870e-9, 160e-9, 0.029, 0.0)
        >>> round(abs(r), 4)
        0.3863
    """
    if not (lambda_L > 0 and d > 0 and L > 0):
        raise ValueError("lambda_L, d and L must be positive.")
    half_phase = np.pi * d / lambda_L
    # reduce the propagation phase modulo 2 pi before exponentiating
    prop = np.mod(2.0 * L * delta_c / C_LIGHT, TWO_PI)
    return complex(-1j / np.sqrt(2.0) * np.exp(1j * (half_phase - prop)) *
                   np.sin(half_phase))


def coupling_from_absorption(f_abs, kappa_c):
    """Omega_c^2/gamma implied by a measured absorbed power fraction.

    Inverts ``f_abs = 4 Omega_c^2/(gamma kappa_c)``, the weak-coupling
    absorption on cavity resonance.

    Parameters
    ----------
    f_abs : float
        Absorbed fraction, between 0 and 1.
    kappa_c : float
        Cavity linewidth, rad/s.

    Returns
    -------
    float
        Omega_c^2/gamma in rad/s.

    Examples
    --------
    .. doctest::

        >>> x = params.coupling_from_absorption(0.5, 2 * np.pi * 258e6)
        >>> round(x / (2 * np.pi * 1e6), 2)
        32.25
    """
    if not 0.0 <= f_abs <= 1.0:
        raise ValueError(f"f_abs must lie in [0, 1], got {f_abs}.")
    if not kappa_c > 0:
        raise ValueError("kappa_c must be positive.")
    return f_abs * kappa_c / 4.0


def omega_in(params):
    """Effective Omega_in (rad/s) at the configured detuning."""
    mode = params.exciton.omega_in_mode
    if mode == 'zero':
        return 0j
    if mode == 'explicit':
        return params.exciton.omega_in_coupling
    return ratio_in_to_c(params) * params.exciton.omega_c_coupling


def ratio_in_to_c(params):
    """Ratio Omega_in/Omega_c at the configured detuning.

    In ``'geometry'`` mode the ratio comes straight from
    :func:`omega_ratio` and stays defined when Omega_c is zero.
    """
    mode = params.exciton.omega_in_mode
    if mode == 'zero':
        return 0j
    if mode == 'geometry':
        return omega_ratio(params.drive.lambda_L,
                           params.geometry.thickness_d,
                           params.cavity.length_L, params.cavity.delta_c)
    if params.exciton.omega_c_coupling == 0:
        raise ValueError(
            "Omega_in/Omega_c is undefined for omega_c_coupling = 0.")
    return params.exciton.omega_in_coupling / \
        params.exciton.omega_c_coupling


def omega_c2_over_gamma(params):
    """Omega_c^2/gamma in rad/s."""
    return params.exciton.omega_c_coupling ** 2 / params.exciton.gamma


def photon_flux(params):
    """Input photon flux |a_in|^2 = P_in/(hbar omega_L), photons/s."""
    omega_L = TWO_PI * C_LIGHT / params.drive.lambda_L
    return params.drive.power_in / (HBAR * omega_L)


def validate_hierarchy(params, factor=None):
    """Check the scale separation gamma >> kappa_c >> kappa_m, omega_m.

    The check is advisory: a :class:`UserWarning` is issued for every
    violated ratio and the list of messages is returned.

    Parameters
    ----------
    params : SystemParams
        Parameters to check.
    factor : float, optional
        Required ratio between neighbouring rates. Defaults to
        ``params.hierarchy_factor``.

    Returns
    -------
    list of str
        Messages for violated ratios; empty when the hierarchy holds.
    """
    if factor is None:
        factor = params.hierarchy_factor
    rates = {
        'gamma': params.exciton.gamma,
        'kappa_c': params.cavity.kappa_c,
        'kappa_m': params.mech.kappa_m,
        'omega_m': params.mech.omega_m,
    }
    pairs = [('gamma', 'kappa_c'), ('kappa_c', 'kappa_m'),
             ('kappa_c', 'omega_m')]
    messages = []
    for fast, slow in pairs:
        if rates[fast] < factor * rates[slow]:
            messages.append(
                f"{fast}/{slow} = {rates[fast] / rates[slow]:.3g} is "
                f"below the hierarchy factor {factor:g}")
    for message in messages:
        warnings.warn(message, UserWarning)
    return messages


def build_params(*, kappa_c, delta_c, length_L, omega_m, kappa_m, g0,
                 gamma, eta_th_over_gamma, tau_th, power_in, lambda_L,
                 thickness_d, f_abs=None, omega_c2_gamma=None,
                 omega_c=None, omega_in_mode='geometry',
                 omega_in_coupling=0j, reverse_feed='eta',
                 hierarchy_factor=10.0):
    """Assemble a :class:`SystemParams` from flat keyword arguments.

    Exactly one of `f_abs`, `omega_c2_gamma` and `omega_c` fixes Omega_c.
    All rates are angular (rad/s).

    Returns
    -------
    SystemParams
        Validated parameter set.
    """
    given = [v is not None for v in (f_abs, omega_c2_gamma, omega_c)]
    if sum(given) != 1:
        raise ValueError(
            "Exactly one of f_abs, omega_c2_gamma and omega_c is required.")
    if f_abs is not None:
        omega_c2_gamma = coupling_from_absorption(f_abs, kappa_c)
    if omega_c is None:
        if omega_c2_gamma < 0:
            raise ValueError("Omega_c^2/gamma must be >= 0.")
        omega_c = float(np.sqrt(omega_c2_gamma * gamma))
    return SystemParams(
        cavity=CavityParams(kappa_c, delta_c, length_L),
        mech=MechParams(omega_m, kappa_m, g0),
        exciton=ExcitonParams(gamma, omega_c, omega_in_coupling,
                              omega_in_mode),
        phototherm=PhotothermalParams(eta_th_over_gamma, tau_th,
                                      reverse_feed),
        drive=DriveParams(power_in, lambda_L),
        geometry=MembraneGeometry(thickness_d),
        hierarchy_factor=hierarchy_factor)


# rows: wavelength (m), input power (W), kappa_m (rad/s), f_abs,
# eta_th/gamma obtained from the linewidth fits
REFERENCE_DATASETS = {
    1: (870e-9, 20e-6, 1.8, 0.50, 0.075),
    2: (852e-9, 25e-6, 2.2, 0.55, 0.046),
    3: (852e-9, 25e-6, 2.2, 0.55, 0.076),
    4: (852e-9, 25e-6, 2.2, 0.55, 0.062),
}


def reference_params(dataset=1, delta_c=0.0, gamma=None):
    """Parameters of one of the four measured GaAs membrane datasets.

    Common values: L = 2.9 cm, d = 160 nm, g0 = 2 pi x (-5.1) Hz,
    kappa_c = 2 pi x 258 MHz, omega_m = 2 pi x 23.4 kHz, tau_th = 6.6 ms.
    The exciton rate only enters through Omega_c^2/gamma and
    eta_th/gamma; it defaults to ``1e3 kappa_c``.

    Parameters
    ----------
    dataset : int, optional
        Dataset number, 1 to 4.
    delta_c : float, optional
        Cavity detuning, rad/s.
    gamma : float, optional
        Exciton decoherence rate, rad/s.

    Returns
    -------
    SystemParams
        Parameter set with the fitted eta_th/gamma of that dataset.

    Examples
    --------
    .. doctest::

        >>> p = params.reference_params(1)
        >>> p.drive.lambda_L
        8.7e-07
    """
    if dataset not in REFERENCE_DATASETS:
        raise ValueError(f"dataset must be one of 1-4, got {dataset}.")
    lam, power, kappa_m, f_abs, eta = REFERENCE_DATASETS[dataset]
    kappa_c = TWO_PI * 258e6
    if gamma is None:
        gamma = 1e3 * kappa_c
    return build_params(
        kappa_c=kappa_c, delta_c=delta_c, length_L=0.029,
        omega_m=TWO_PI * 23.4e3, kappa_m=kappa_m, g0=TWO_PI * -5.1,
        gamma=gamma, eta_th_over_gamma=eta, tau_th=6.6e-3,
        power_in=power, lambda_L=lam, thickness_d=160e-9, f_abs=f_abs)


def desk_family(gamma_over_kappa=100.0, kappa_over_omega=100.0,
                omega_m=TWO_PI * 100.0, kappa_m=0.1, tau_th=2.0,
                g0=TWO_PI * -0.01, f_abs=0.004, eta_th_over_gamma=0.075,
                power_in=1e-7, lambda_L=870e-9, delta_c=0.0,
                omega_in_mode='geometry'):
    """Desk-scale parameter set with compressed rate hierarchy.

    The cavity linewidth is ``kappa_over_omega * omega_m`` and the exciton
    rate ``gamma_over_kappa * kappa_c``. Such sets keep every ratio the
    adiabatic treatment relies on while remaining cheap for dense
    eigensolves and time-domain propagation.

    Returns
    -------
    SystemParams
        Desk-scale parameter set.

    Examples
    --------
    .. doctest::

        >>> p = params.desk_family()
        >>> round(p.exciton.gamma / p.cavity.kappa_c)
        100
    """
    kappa_c = kappa_over_omega * omega_m
    return build_params(
        kappa_c=kappa_c, delta_c=delta_c, length_L=0.029, omega_m=omega_m,
        kappa_m=kappa_m, g0=g0, gamma=gamma_over_kappa * kappa_c,
        eta_th_over_gamma=eta_th_over_gamma, tau_th=tau_th,
        power_in=power_in, lambda_L=lambda_L, thickness_d=160e-9,
        f_abs=f_abs, omega_in_mode=omega_in_mode,
        hierarchy_factor=min(10.0, gamma_over_kappa))


# configuration keys --------------------------------------------------------

_RATE = ('_hz', '_rad_s')
# base name -> (allowed suffixes, mandatory)
_CONFIG_KEYS = {
    'kappa_c': (_RATE, True),
    'delta_c': (_RATE, True),
    'length_L': (('_m',), True),
    'omega_m': (_RATE, True),
    'kappa_m': (_RATE, True),
    'g0': (_RATE, True),
    'gamma': (_RATE, True),
    'f_abs': (('',), False),
    'omega_c2_over_gamma': (_RATE, False),
    'omega_c': (_RATE, False),
    'eta_th_over_gamma': (('',), True),
    'tau_th': (('_s',), True),
    'power_in': (('_w',), True),
    'lambda_L': (('_m',), True),
    'thickness_d': (('_m',), True),
    'omega_in_mode': (('',), False),
    'omega_in_re': (_RATE, False),
    'omega_in_im': (_RATE, False),
    'reverse_feed': (('',), False),
    'hierarchy_factor': (('',), False),
}
_TEXT_KEYS = ('omega_in_mode', 'reverse_feed')
_SUFFIXES = ('_rad_s', '_hz', '_m', '_s', '_w')


def _split_key(key):
    """Split a config key into (base name, unit suffix)."""
    if key in _CONFIG_KEYS:
        return key, ''
    for suffix in _SUFFIXES:
        if key.endswith(suffix) and len(key) > len(suffix):
            return key[:-len(suffix)], suffix
    return key, ''


def _read_entries(text):
    """Parse ``key = value`` lines into {base: (suffix, value, line)}."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(
                f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split('=', 1))
        base, suffix = _split_key(key)
        if base not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        allowed, _ = _CONFIG_KEYS[base]
        if suffix not in allowed:
            expected = ' or '.join(f"'{base}{s}'" for s in allowed)
            raise ConfigError(
                f"line {lineno}: unit-suffix mismatch for key '{key}', "
                f"expected {expected}")
        if base in entries:
            raise ConfigError(
                f"line {lineno}: duplicate key '{key}' (first given on "
                f"line {entries[base][2]})")
        if base in _TEXT_KEYS:
            choices = OMEGA_IN_MODES if base == 'omega_in_mode' \
                else REVERSE_FEED_MODES
            if value not in choices:
                raise ConfigError(
                    f"line {lineno}: key '{key}' must be one of "
                    f"{', '.join(choices)}, got {value!r}")
        else:
            try:
                number = float(value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: cannot parse number {value!r} for "
                    f"key '{key}'")
            if not np.isfinite(number):
                raise ConfigError(
                    f"line {lineno}: non-finite value for key '{key}'")
            if suffix == '_hz':
                number = number * TWO_PI
            value = number
        entries[base] = (suffix, value, lineno)
    return entries


def parse_config(text):
    """Parse a ``key = value`` configuration document.

    Keys carry their unit: ``_hz`` values are multiplied by 2 pi,
    ``_rad_s`` values are angular rates taken verbatim, and ``_m``, ``_s``
    and ``_w`` are metres, seconds and watts. ``#`` starts a comment.

    Parameters
    ----------
    text : str
        Configuration document.

    Returns
    -------
    SystemParams
        Validated parameter set.

    Raises
    ------
    ConfigError
        For a missing, unknown or duplicate key, an unparsable number or a
        unit-suffix mismatch; the message names the key and the line.

    Examples
    --------
    .. doctest::

        >>> text = '''
        ... kappa_c_hz = 258e6
        ... delta_c_hz = 0
        ... length_L_m = 0.029
        ... omega_m_hz = 23.4e3
        ... kappa_m_rad_s = 1.8
        ... g0_hz = -5.1
        ... gamma_hz = 258e9
        ... f_abs = 0.5
        ... eta_th_over_gamma = 0.075
        ... tau_th_s = 6.6e-3
        ... power_in_w = 20e-6
        ... lambda_L_m = 870e-9
        ... thickness_d_m = 160e-9
        ... '''
        >>> p = params.parse_config(text)
        >>> p.mech.kappa_m
        1.8
    """
    entries = _read_entries(text)
    for base, (allowed, mandatory) in _CONFIG_KEYS.items():
        if mandatory and base not in entries:
            expected = ' or '.join(f"'{base}{s}'" for s in allowed)
            raise ConfigError(f"missing mandatory key {expected}")
    coupling_keys = [k for k in ('f_abs', 'omega_c2_over_gamma', 'omega_c')
                     if k in entries]
    if len(coupling_keys) != 1:
        raise ConfigError(
            "exactly one of 'f_abs', 'omega_c2_over_gamma_hz/_rad_s' and "
            f"'omega_c_hz/_rad_s' is required, got {coupling_keys or 'none'}")

    def get(base, default=None):
        return entries[base][1] if base in entries else default

    mode = get('omega_in_mode', 'geometry')
    omega_in_value = 0j
    if mode == 'explicit':
        for part in ('omega_in_re', 'omega_in_im'):
            if part not in entries:
                raise ConfigError(
                    f"missing key '{part}_hz' or '{part}_rad_s' required by "
                    "omega_in_mode = explicit")
        omega_in_value = complex(get('omega_in_re'), get('omega_in_im'))
    try:
        params = build_params(
            kappa_c=get('kappa_c'), delta_c=get('delta_c'),
            length_L=get('length_L'), omega_m=get('omega_m'),
            kappa_m=get('kappa_m'), g0=get('g0'), gamma=get('gamma'),
            eta_th_over_gamma=get('eta_th_over_gamma'),
            tau_th=get('tau_th'), power_in=get('power_in'),
            lambda_L=get('lambda_L'), thickness_d=get('thickness_d'),
            f_abs=get('f_abs'), omega_c2_gamma=get('omega_c2_over_gamma'),
            omega_c=get('omega_c'), omega_in_mode=mode,
            omega_in_coupling=omega_in_value,
            reverse_feed=get('reverse_feed', 'eta'),
            hierarchy_factor=get('hierarchy_factor', 10.0))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration: {exc}") from exc
    _logger.debug("parsed configuration with %d keys", len(entries))
    return params


def load_config(path):
    """Read and parse a UTF-8 configuration file, see :func:`parse_config`.
    """
    with open(path, encoding='utf-8') as f:
        return parse_config(f.read())


def serialize_config(params):
    """Write a :class:`SystemParams` as a configuration document.

    Rates are written as ``_rad_s`` keys with full ``repr`` precision, so
    ``parse_config(serialize_config(p)) == p``.

    Parameters
    ----------
    params : SystemParams
        Parameters to write.

    Returns
    -------
    str
        Configuration document.
    """
    ex = params.exciton
    lines = [
        f"kappa_c_rad_s = {float(params.cavity.kappa_c)!r}",
        f"delta_c_rad_s = {float(params.cavity.delta_c)!r}",
        f"length_L_m = {float(params.cavity.length_L)!r}",
        f"omega_m_rad_s = {float(params.mech.omega_m)!r}",
        f"kappa_m_rad_s = {float(params.mech.kappa_m)!r}",
        f"g0_rad_s = {float(params.mech.g0)!r}",
        f"gamma_rad_s = {float(ex.gamma)!r}",
        f"omega_c_rad_s = {float(ex.omega_c_coupling)!r}",
        "eta_th_over_gamma = "
        f"{float(params.phototherm.eta_th_over_gamma)!r}",
        f"tau_th_s = {float(params.phototherm.tau_th)!r}",
        f"power_in_w = {float(params.drive.power_in)!r}",
        f"lambda_L_m = {float(params.drive.lambda_L)!r}",
        f"thickness_d_m = {float(params.geometry.thickness_d)!r}",
        f"omega_in_mode = {ex.omega_in_mode}",
        f"reverse_feed = {params.phototherm.reverse_feed}",
        f"hierarchy_factor = {float(params.hierarchy_factor)!r}",
    ]
    if ex.omega_in_mode == 'explicit':
        w_in = ex.omega_in_coupling
        lines.append(f"omega_in_re_rad_s = {float(w_in.real)!r}")
        lines.append(f"omega_in_im_rad_s = {float(w_in.imag)!r}")
    return '\n'.join(lines) + '\n'
