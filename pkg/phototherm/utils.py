"""Utility functions and exceptions for phototherm."""
import os
import logging
from concurrent.futures import ThreadPoolExecutor
import matplotlib
import matplotlib.pyplot as plt
import numpy as np

_logger = logging.getLogger(__name__)

#: Reduced Planck constant, J s.
HBAR = 1.054571817e-34
#: Speed of light in vacuum, m/s.
C_LIGHT = 299792458.0
TWO_PI = 2.0 * np.pi


class ConfigError(ValueError):
    """Raised for a malformed configuration document or dataset file."""


class OutOfRegimeError(ValueError):
    """Raised when parameters leave the validity regime of a formula."""


class SingularParametersError(ValueError):
    """Raised when a linear solve would divide by a vanishing quantity."""


class UnidentifiableFitError(ValueError):
    """Raised when a fit parameter cannot be determined from the data."""


class AmbiguousModeError(ValueError):
    """Raised when the mechanical eigenvalue pair cannot be identified."""


class InsufficientSpanError(ValueError):
    """Raised when a time trace is too short for a damping fit."""


class EnvelopeError(ValueError):
    """Raised when a kernel envelope does not decay."""


class DomainError(ValueError):
    """Raised for coordinates outside the unit membrane."""


class LimitError(ValueError):
    """Raised when a requested model size exceeds the supported limit."""


def hz_to_rad(value):
    """Convert a frequency in Hz to an angular rate in rad/s.

    Parameters
    ----------
    value : float or array-like
        Frequency in Hz.

    Returns
    -------
    float or numpy.ndarray
        Angular rate in rad/s.

    Examples
    --------
    .. doctest::

        >>> round(utils.hz_to_rad(1.0), 6)
        6.283185
    """
    return np.multiply(value, TWO_PI)


def rad_to_hz(value):
    """Convert an angular rate in rad/s to a frequency in Hz."""
    return np.divide(value, TWO_PI)


def thread_count():
    """Number of worker threads allowed by ``PHOTOTHERM_THREADS``.

    An unset variable or ``0`` means automatic sizing, which follows
    :class:`concurrent.futures.ThreadPoolExecutor`.

    Returns
    -------
    int or None
        Maximum number of workers, or None for automatic sizing.
    """
    raw = os.environ.get('PHOTOTHERM_THREADS', '').strip()
    if raw == '':
        return None
    try:
        count = int(raw)
    except ValueError:
        raise ConfigError(
            "PHOTOTHERM_THREADS must be a nonnegative integer, got "
            f"{raw!r}.")
    if count < 0:
        raise ConfigError(
            "PHOTOTHERM_THREADS must be a nonnegative integer, got "
            f"{raw!r}.")
    return None if count == 0 else count


def parallel_map(func, items):
    """Apply a function to every item on a thread pool, preserving order.

    Parameters
    ----------
    func : callable
        Function of one argument.
    items : iterable
        Inputs to map over.

    Returns
    -------
    list
        ``[func(item) for item in items]`` in input order.

    Examples
    --------
    .. doctest::

        >>> utils.parallel_map(lambda x: x * 2, [1, 2, 3])
        [2, 4, 6]
    """
    items = list(items)
    workers = thread_count()
    _logger.debug("mapping %d items with workers=%s", len(items), workers)
    if workers == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def write_csv(df, path_or_buf=None):
    """Write a dataframe as deterministic CSV text.

    Floats use 17 significant digits, ``.`` as decimal separator and
    ``\\n`` line endings, so identical inputs give byte-identical files.

    Parameters
    ----------
    df : pandas.DataFrame
        Table to write; the index is not written.
    path_or_buf : str, pathlib.Path or file-like, optional
        Destination. If None, the CSV text is returned.

    Returns
    -------
    str or None
        CSV text when `path_or_buf` is None.
    """
    return df.to_csv(path_or_buf, index=False, float_format='%.17g',
                     lineterminator='\n')


def save_svg(ax, path):
    """Save the figure holding an axes as a reproducible SVG file.

    Parameters
    ----------
    ax : matplotlib.axes.Axes
        Axes whose figure is written.
    path : str or pathlib.Path
        Output file.
    """
    fig = ax.get_figure()
    with matplotlib.rc_context({'svg.hashsalt': 'phototherm',
                                'svg.fonttype': 'none'}):
        fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
