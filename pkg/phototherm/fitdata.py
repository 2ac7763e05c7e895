"""Linewidth datasets, the single-parameter coupling fit and the mode profile.
"""
import io
import logging
from dataclasses import dataclass, field
import numpy as np
import pandas as pd
from phototherm.cooling import sweep
from phototherm.params import coupling_from_absorption
from phototherm.utils import (ConfigError, DomainError,
                              UnidentifiableFitError, TWO_PI, parallel_map,
                              write_csv)

_logger = logging.getLogger(__name__)

DATA_COLUMNS = ['delta_c_hz', 'kappa_eff_rad_s']
SIGMA_COLUMN = 'sigma_rad_s'
META_KEYS = ('label', 'lambda_l_m', 'power_in_w', 'kappa_m_rad_s', 'f_abs',
             'beam_x', 'beam_y')
#: Shapes smaller than this fraction of the data scale are unidentifiable.
MIN_SHAPE_SCALE = 1e-30


@dataclass(frozen=True)
class DatasetMeta:
    """Measurement conditions stored alongside a dataset.

    Fields left as None are taken from the model parameters when fitting.
    ``beam_position`` is an ``(x, y)`` pair on the unit membrane.
    """
    label: str = ''
    lambda_L: float = None
    power_in: float = None
    kappa_m: float = None
    f_abs: float = None
    beam_position: tuple = None


@dataclass(frozen=True, eq=False)
class Dataset:
    """Measured linewidths versus detuning.

    ``points`` has columns ``delta_c`` (rad/s), ``kappa_measured`` (rad/s)
    and ``sigma`` (rad/s, NaN when the file carries no uncertainties).
    """
    points: pd.DataFrame
    meta: DatasetMeta = field(default_factory=DatasetMeta)

    def __post_init__(self):
        sigma = self.points['sigma'].to_numpy(dtype=float)
        given = ~np.isnan(sigma)
        if given.any() and not given.all():
            raise ValueError("sigma must be given for all points or none.")
        if np.any(sigma[given] <= 0):
            raise ValueError("sigma must be positive.")


@dataclass(frozen=True)
class FitResult:
    """Fitted eta_th/gamma with its standard error and fit diagnostics."""
    eta_over_gamma: float
    stderr: float
    residual_rms: float
    n_points: int


@dataclass(frozen=True)
class ModeProfile:
    """Drumhead-mode profile fitted to couplings at several beam positions.

    ``residuals`` are ``|eta_i| - eta_max |phi(x_i, y_i)|``; ``consistent``
    is True when no fitted coupling exceeds ``eta_max`` by more than three
    standard errors.
    """
    eta_max_over_gamma: float
    mode: tuple
    positions: tuple
    residuals: tuple
    consistent: bool


def _as_number(text):
    try:
        return float(text)
    except (TypeError, ValueError):
        return np.nan


def _parse_meta(entries):
    values = {}
    for lineno, text in entries:
        if '=' not in text:
            raise ConfigError(
                f"line {lineno}: expected '#meta key=value', got {text!r}")
        key, value = (part.strip() for part in text.split('=', 1))
        if key not in META_KEYS:
            raise ConfigError(f"line {lineno}: unknown meta key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate meta key '{key}'")
        if key != 'label':
            try:
                value = float(value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: cannot parse number {value!r} for meta "
                    f"key '{key}'")
        values[key] = value
    if ('beam_x' in values) != ('beam_y' in values):
        raise ConfigError("meta keys 'beam_x' and 'beam_y' come together")
    position = None
    if 'beam_x' in values:
        position = (values['beam_x'], values['beam_y'])
    return DatasetMeta(label=values.get('label', ''),
                       lambda_L=values.get('lambda_l_m'),
                       power_in=values.get('power_in_w'),
                       kappa_m=values.get('kappa_m_rad_s'),
                       f_abs=values.get('f_abs'),
                       beam_position=position)


def load_dataset(path):
    """Read a linewidth dataset.

    The CSV header is ``delta_c_hz,kappa_eff_rad_s`` with an optional third
    column ``sigma_rad_s``. Lines starting with ``#meta`` hold
    ``key=value`` metadata (``label``, ``lambda_l_m``, ``power_in_w``,
    ``kappa_m_rad_s``, ``f_abs``, ``beam_x``, ``beam_y``); other lines
    starting with ``#`` are comments. Detunings are converted from Hz to
    rad/s.

    Parameters
    ----------
    path : str or pathlib.Path
        Dataset file.

    Returns
    -------
    Dataset
        The dataset; a file with a header only gives an empty dataset.

    Raises
    ------
    ConfigError
        For a bad header, a malformed row or bad metadata; the message names
        the line number.
    """
    with open(path, encoding='utf-8') as f:
        lines = f.read().splitlines()
    meta_entries, body, line_numbers = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if text.startswith('#meta'):
            meta_entries.append((lineno, text[len('#meta'):].strip()))
        elif text and not text.startswith('#'):
            body.append(text)
            line_numbers.append(lineno)
    if not body:
        raise ConfigError(f"{path}: missing header line")
    header = [c.strip() for c in body[0].split(',')]
    if header not in (DATA_COLUMNS, DATA_COLUMNS + [SIGMA_COLUMN]):
        raise ConfigError(
            f"line {line_numbers[0]}: expected header "
            f"{','.join(DATA_COLUMNS)}[,{SIGMA_COLUMN}], got {body[0]!r}")
    for text, lineno in zip(body[1:], line_numbers[1:]):
        if len(text.split(',')) != len(header):
            raise ConfigError(
                f"line {lineno}: expected {len(header)} fields, got {text!r}")
    df = pd.read_csv(io.StringIO('\n'.join(body)), dtype=str,
                     skipinitialspace=True)
    df.columns = header
    numbers = {}
    for column in header:
        converted = df[column].map(_as_number)
        bad = np.nonzero(converted.isna().to_numpy() |
                         ~np.isfinite(converted.to_numpy(dtype=float)))[0]
        if bad.size:
            lineno = line_numbers[bad[0] + 1]
            raise ConfigError(
                f"line {lineno}: cannot parse {column} value "
                f"{df[column].iloc[bad[0]]!r}")
        numbers[column] = converted.to_numpy(dtype=float)
    sigma = numbers.get(SIGMA_COLUMN, np.full(len(df), np.nan))
    nonpositive = np.nonzero(sigma <= 0)[0]
    if nonpositive.size:
        raise ConfigError(
            f"line {line_numbers[nonpositive[0] + 1]}: sigma must be "
            "positive")
    points = pd.DataFrame({
        'delta_c': numbers['delta_c_hz'] * TWO_PI,
        'kappa_measured': numbers['kappa_eff_rad_s'],
        'sigma': sigma,
    })
    _logger.debug("loaded %d points from %s", len(points), path)
    return Dataset(points, _parse_meta(meta_entries))


def write_dataset(dataset, path_or_buf=None):
    """Write a dataset in the format read by :func:`load_dataset`.

    Parameters
    ----------
    dataset : Dataset
        Dataset to write.
    path_or_buf : str, pathlib.Path or file-like, optional
        Destination. If None, the text is returned.

    Returns
    -------
    str or None
        File text when `path_or_buf` is None.
    """
    meta = dataset.meta
    lines = []
    if meta.label:
        lines.append(f"#meta label={meta.label}")
    for key, value in (('lambda_l_m', meta.lambda_L),
                       ('power_in_w', meta.power_in),
                       ('kappa_m_rad_s', meta.kappa_m),
                       ('f_abs', meta.f_abs)):
        if value is not None:
            lines.append(f"#meta {key}={float(value)!r}")
    if meta.beam_position is not None:
        lines.append(f"#meta beam_x={float(meta.beam_position[0])!r}")
        lines.append(f"#meta beam_y={float(meta.beam_position[1])!r}")
    table = pd.DataFrame({
        'delta_c_hz': dataset.points['delta_c'] / TWO_PI,
        'kappa_eff_rad_s': dataset.points['kappa_measured'],
    })
    if not dataset.points['sigma'].isna().all():
        table[SIGMA_COLUMN] = dataset.points['sigma']
    text = ''.join(line + '\n' for line in lines) + write_csv(table)
    if path_or_buf is None:
        return text
    if hasattr(path_or_buf, 'write'):
        path_or_buf.write(text)
        return None
    with open(path_or_buf, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text)
    return None


def apply_dataset_meta(params, meta):
    """Model parameters updated with a dataset's measurement conditions.

    ``power_in``, ``lambda_L`` and ``kappa_m`` replace the configured
    values; ``f_abs`` sets Omega_c through
    :func:`phototherm.params.coupling_from_absorption`.

    Parameters
    ----------
    params : SystemParams
        Base parameters.
    meta : DatasetMeta
        Dataset metadata; None fields are ignored.

    Returns
    -------
    SystemParams
        Updated parameters.
    """
    drive, mech, exciton = {}, {}, {}
    if meta.power_in is not None:
        drive['power_in'] = meta.power_in
    if meta.lambda_L is not None:
        drive['lambda_L'] = meta.lambda_L
    if meta.kappa_m is not None:
        mech['kappa_m'] = meta.kappa_m
    if meta.f_abs is not None:
        ratio = coupling_from_absorption(meta.f_abs, params.cavity.kappa_c)
        exciton['omega_c_coupling'] = float(
            np.sqrt(ratio * params.exciton.gamma))
    return params.with_changes(drive=drive, mech=mech, exciton=exciton)


def model_curve(params, detuning_grid, eta_over_gamma=None):
    """Model linewidth ``kappa_m + kappa_th + kappa_rp`` over detuning.

    Parameters
    ----------
    params : SystemParams
        Model parameters.
    detuning_grid : array-like
        Cavity detunings, rad/s.
    eta_over_gamma : float, optional
        Coupling to use instead of the configured one.

    Returns
    -------
    numpy.ndarray
        Total mechanical damping, rad/s.
    """
    if eta_over_gamma is not None:
        params = params.with_changes(
            phototherm={'eta_th_over_gamma': eta_over_gamma})
    return sweep(params, detuning_grid)['kappa_eff'].to_numpy()


def synthesize_dataset(params, detuning_grid, eta_over_gamma, noise=0.0,
                       rng=None, label=''):
    """Synthetic linewidth dataset generated from the model.

    Parameters
    ----------
    params : SystemParams
        Model parameters; their measurement conditions are written to the
        metadata.
    detuning_grid : array-like
        Cavity detunings, rad/s.
    eta_over_gamma : float
        Coupling that generates the data.
    noise : float, optional
        Relative standard deviation of multiplicative Gaussian noise. When
        positive, ``sigma = noise |kappa|`` is stored. Default is 0.
    rng : numpy.random.Generator, optional
        Random generator for the noise.
    label : str, optional
        Dataset label.

    Returns
    -------
    Dataset
        Synthetic dataset.

    Examples
    --------
    .. doctest::

        >>> p = params.reference_params(1)
        >>> grid = np.linspace(-2, 2, 5) * p.cavity.kappa_c
        >>> data = fitdata.synthesize_dataset(p, grid, 0.075)
        >>> fit = fitdata.fit_eta(data, p)
        >>> round(fit.eta_over_gamma, 9)
        0.075
    """
    grid = np.asarray(detuning_grid, dtype=float)
    kappa = model_curve(params, grid, eta_over_gamma)
    sigma = np.full(grid.size, np.nan)
    if noise > 0:
        if rng is None:
            rng = np.random.default_rng()
        kappa = kappa * (1.0 + noise * rng.standard_normal(grid.size))
        sigma = noise * np.abs(kappa)
    f_abs = 4.0 * params.exciton.omega_c_coupling ** 2 / \
        (params.exciton.gamma * params.cavity.kappa_c)
    meta = DatasetMeta(label=label, lambda_L=params.drive.lambda_L,
                       power_in=params.drive.power_in,
                       kappa_m=params.mech.kappa_m, f_abs=f_abs)
    points = pd.DataFrame({'delta_c': grid, 'kappa_measured': kappa,
                           'sigma': sigma})
    return Dataset(points, meta)


def fit_eta(data, params, include_rp=True):
    """Fit the photothermal coupling eta_th/gamma to a linewidth dataset.

    The photothermal rate is linear in eta_th/gamma, so with the shape
    ``S_i`` (the rate at eta_th/gamma = 1) and weights ``w_i = 1/sigma_i^2``
    (unit weights without uncertainties) the weighted least-squares
    estimate is closed form,

    .. math::

        \\eta^* = \\frac{\\sum_i w_i S_i (y_i - \\kappa_m -
        \\kappa_{rp,i})}{\\sum_i w_i S_i^2}

    with standard error ``(sum w S^2)^(-1/2)`` scaled by the square root of
    the reduced weighted residual sum of squares.

    Parameters
    ----------
    data : Dataset
        Measured linewidths.
    params : SystemParams
        Model parameters, updated with the dataset metadata through
        :func:`apply_dataset_meta`.
    include_rp : bool, optional
        Subtract the radiation-pressure rate along with ``kappa_m``.
        Default is True.

    Returns
    -------
    FitResult
        Fitted coupling and diagnostics.

    Raises
    ------
    UnidentifiableFitError
        For fewer than two points or when the photothermal shape vanishes at
        every detuning.
    """
    points = data.points
    n = len(points)
    if n < 2:
        raise UnidentifiableFitError(
            f"a fit needs at least 2 points, got {n}")
    model = apply_dataset_meta(params, data.meta)
    unit = model.with_changes(phototherm={'eta_th_over_gamma': 1.0})
    rates = sweep(unit, points['delta_c'].to_numpy())
    shape = rates['kappa_th'].to_numpy()
    y = points['kappa_measured'].to_numpy(dtype=float)
    target = y - model.mech.kappa_m
    if include_rp:
        target = target - rates['kappa_rp'].to_numpy()
    sigma = points['sigma'].to_numpy(dtype=float)
    weights = np.ones(n) if np.isnan(sigma).all() else sigma ** -2.0
    scale = max(np.max(np.abs(y)), model.mech.kappa_m)
    if np.max(np.abs(shape)) <= MIN_SHAPE_SCALE * scale:
        raise UnidentifiableFitError(
            "the photothermal rate vanishes at every detuning; eta_th/gamma "
            "cannot be determined")
    information = np.sum(weights * shape ** 2)
    eta = np.sum(weights * shape * target) / information
    residual = target - eta * shape
    stderr = np.sqrt(np.sum(weights * residual ** 2) / (n - 1) /
                     information)
    _logger.debug("fitted eta_th/gamma=%g from %d points", eta, n)
    return FitResult(float(eta), float(stderr),
                     float(np.sqrt(np.mean(residual ** 2))), n)


def fit_datasets(datasets, params, include_rp=True):
    """Fit several datasets concurrently, see :func:`fit_eta`."""
    return parallel_map(
        lambda data: fit_eta(data, params, include_rp=include_rp),
        datasets)


def mode_shape(x, y, m=2, n=1):
    """Drumhead mode ``sin(m pi x) sin(n pi y)`` on the unit membrane.

    Examples
    --------
    .. doctest::

        >>> round(float(fitdata.mode_shape(0.25, 0.5)), 12)
        1.0
    """
    return np.sin(m * np.pi * np.asarray(x)) * np.sin(n * np.pi *
                                                      np.asarray(y))


def mode_profile_check(fits, mode=(2, 1)):
    """Fit the coupling profile ``|eta| = eta_max |phi(x, y)|``.

    Parameters
    ----------
    fits : list of tuple
        ``((x, y), fit)`` pairs, where `fit` is a :class:`FitResult` or a
        plain coupling value and ``(x, y)`` lies on the unit membrane.
    mode : tuple of int, optional
        Mode indices ``(m, n)``. Default is the (2, 1) mode.

    Returns
    -------
    ModeProfile
        Least-squares ``eta_max`` and per-position residuals.

    Raises
    ------
    DomainError
        If a position lies outside the unit square.
    UnidentifiableFitError
        If no position is given or every position sits on a nodal line.

    Examples
    --------
    .. doctest::

        >>> profile = fitdata.mode_profile_check([((0.25, 0.5), 0.099)])
        >>> round(profile.eta_max_over_gamma, 12)
        0.099
    """
    if len(fits) == 0:
        raise UnidentifiableFitError("need at least one positioned fit")
    positions, etas, errors = [], [], []
    for (x, y), fit in fits:
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise DomainError(
                f"beam position ({x}, {y}) lies outside the unit membrane")
        positions.append((float(x), float(y)))
        if isinstance(fit, FitResult):
            etas.append(abs(fit.eta_over_gamma))
            errors.append(fit.stderr)
        else:
            etas.append(abs(float(fit)))
            errors.append(0.0)
    xy = np.array(positions)
    phi = np.abs(mode_shape(xy[:, 0], xy[:, 1], *mode))
    etas = np.array(etas)
    norm = np.sum(phi ** 2)
    if norm < 1e-24:
        raise UnidentifiableFitError(
            "every beam position lies on a nodal line of the mode")
    eta_max = np.sum(etas * phi) / norm
    residuals = etas - eta_max * phi
    consistent = bool(np.all(
        etas <= eta_max * (1 + 1e-9) + 3.0 * np.array(errors)))
    return ModeProfile(float(eta_max), tuple(mode), tuple(positions),
                       tuple(float(r) for r in residuals), consistent)
