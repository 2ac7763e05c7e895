"""Functions for plotting."""
import numpy as np
import matplotlib.pyplot as plt
from phototherm.fitdata import mode_shape
from phototherm.utils import rad_to_hz


def _series(artist, name):
    """Tag an artist so it is written as ``id="series-<name>"`` in SVG."""
    artist.set_gid(f'series-{name}')
    return artist


def plot_linewidth_sweep(df, ax=None, title='Mechanical Linewidth',
                         xlab='Cavity detuning, Hz',
                         ylab='Damping rate, rad/s', components=False,
                         grid=True, **kwargs):
    """Plot the mechanical damping against cavity detuning.

    Parameters
    ----------
    df : pandas.DataFrame
        Output of :func:`phototherm.cooling.sweep`.
    ax : matplotlib.axes.Axes, optional
        Axes to plot on. If not provided, a new figure and axes will be
        created.
    title : str, optional
        Title for the plot.
    xlab : str, optional
        Label for the x-axis.
    ylab : str, optional
        Label for the y-axis.
    components : bool, optional
        Also draw ``kappa_th`` and ``kappa_rp``. Default is False.
    grid : bool, optional
        Whether to show grid lines on the plot. Default is True.
    **kwargs
        Keyword arguments passed to :meth:`matplotlib.axes.Axes.plot` for
        the total damping.

    Returns
    -------
    matplotlib.axes.Axes
        Axes object containing the plot.

    Examples
    --------
    .. plot::
        :include-source:

        >>> p = phototherm.params.reference_params(1)
        >>> grid = np.linspace(-5, 5, 401) * p.cavity.kappa_c
        >>> df = phototherm.cooling.sweep(p, grid)
        >>> ax = phototherm.plots.plot_linewidth_sweep(df, components=True)
        >>> plt.show()
    """
    if ax is None:
        _, ax = plt.subplots()
    delta_hz = rad_to_hz(df['delta_c'])
    kwargs.setdefault('label', 'kappa_eff')
    line, = ax.plot(delta_hz, df['kappa_eff'], **kwargs)
    _series(line, 'kappa_eff')
    if components:
        for name in ('kappa_th', 'kappa_rp'):
            line, = ax.plot(delta_hz, df[name], label=name, linestyle='--')
            _series(line, name)
        ax.legend()
    ax.set_xlabel(xlab)
    ax.set_ylabel(ylab)
    ax.set_title(title)
    if grid:
        ax.grid(alpha=0.5)
    return ax


def plot_fit(dataset, detuning_grid, model, ax=None,
             title='Linewidth Fit', xlab='Cavity detuning, Hz',
             ylab='Mechanical linewidth, rad/s', scatter_kwargs=None,
             **kwargs):
    """Plot measured linewidths with the fitted model curve.

    Parameters
    ----------
    dataset : phototherm.fitdata.Dataset
        Measured linewidths; error bars are drawn when uncertainties are
        present.
    detuning_grid : array-like
        Detunings of the model curve, rad/s.
    model : array-like
        Model linewidth on `detuning_grid`, for example from
        :func:`phototherm.fitdata.model_curve`.
    ax : matplotlib.axes.Axes, optional
        Axes to plot on.
    title, xlab, ylab : str, optional
        Title and axis labels.
    scatter_kwargs : dict, optional
        Keyword arguments for :meth:`matplotlib.axes.Axes.errorbar`.
    **kwargs
        Keyword arguments passed to :meth:`matplotlib.axes.Axes.plot`.

    Returns
    -------
    matplotlib.axes.Axes
        Axes object containing the plot.
    """
    if ax is None:
        _, ax = plt.subplots()
    points = dataset.points
    sigma = points['sigma'].to_numpy(dtype=float)
    yerr = None if np.isnan(sigma).all() else sigma
    options = {'fmt': 'o', 'color': 'k', 'markersize': 4}
    options.update(scatter_kwargs or {})
    container = ax.errorbar(rad_to_hz(points['delta_c']),
                            points['kappa_measured'], yerr=yerr, **options)
    _series(container[0], 'data')
    line, = ax.plot(rad_to_hz(np.asarray(detuning_grid)), model, **kwargs)
    _series(line, 'model')
    ax.set_xlabel(xlab)
    ax.set_ylabel(ylab)
    ax.set_title(title if not dataset.meta.label
                 else f'{title}: {dataset.meta.label}')
    return ax


def plot_ringdown(trace, ax=None, title='Ring-down', xlab='Time, s',
                  ylab='Membrane amplitude', envelope_only=False, **kwargs):
    """Plot a simulated ring-down.

    Parameters
    ----------
    trace : phototherm.dynamics.RingdownTrace
        Simulated trace.
    ax : matplotlib.axes.Axes, optional
        Axes to plot on.
    title, xlab, ylab : str, optional
        Title and axis labels.
    envelope_only : bool, optional
        Draw only ``|b|``. Default is False, which adds ``Re b``.
    **kwargs
        Keyword arguments passed to :meth:`matplotlib.axes.Axes.plot`.

    Returns
    -------
    matplotlib.axes.Axes
        Axes object containing the plot.
    """
    if ax is None:
        _, ax = plt.subplots()
    if not envelope_only:
        line, = ax.plot(trace.times, trace.values.real, linewidth=0.5,
                        color='0.6', label='Re b')
        _series(line, 're_b')
    line, = ax.plot(trace.times, np.abs(trace.values), label='|b|',
                    **kwargs)
    _series(line, 'abs_b')
    ax.set_xlabel(xlab)
    ax.set_ylabel(ylab)
    ax.set_title(title if not trace.fallback
                 else f'{title} (expm propagation)')
    return ax


def plot_kernel(samples, fit=None, ax=None, title='Memory Kernel',
                xlab='Time, s', ylab='|M(t)|, 1/s', **kwargs):
    """Plot the magnitude of a sampled kernel and its exponential fit.

    Parameters
    ----------
    samples : phototherm.bath.KernelSamples
        Kernel samples.
    fit : phototherm.bath.ExponentialFit, optional
        Fit to overlay.
    ax : matplotlib.axes.Axes, optional
        Axes to plot on.
    title, xlab, ylab : str, optional
        Title and axis labels.
    **kwargs
        Keyword arguments passed to :meth:`matplotlib.axes.Axes.plot`.

    Returns
    -------
    matplotlib.axes.Axes
        Axes object containing the plot.
    """
    if ax is None:
        _, ax = plt.subplots()
    line, = ax.plot(samples.times, np.abs(samples.values), **kwargs)
    _series(line, 'kernel')
    if fit is not None:
        line, = ax.plot(samples.times,
                        fit.amplitude * np.exp(-samples.times / fit.tau),
                        linestyle='--', color='k')
        _series(line, 'fit')
    ax.set_yscale('log')
    ax.set_xlabel(xlab)
    ax.set_ylabel(ylab)
    ax.set_title(title)
    return ax


def plot_mode_profile(profile, ax=None, title='Mode Profile', xlab='x',
                      ylab='y', cmap='viridis', resolution=101):
    """Plot ``eta_max |phi(x, y)|`` with the fitted beam positions.

    Parameters
    ----------
    profile : phototherm.fitdata.ModeProfile
        Fitted profile.
    ax : matplotlib.axes.Axes, optional
        Axes to plot on.
    title, xlab, ylab : str, optional
        Title and axis labels.
    cmap : str, optional
        Colormap of the profile image.
    resolution : int, optional
        Number of grid points per side.

    Returns
    -------
    matplotlib.axes.Axes
        Axes object containing the plot.
    """
    if ax is None:
        _, ax = plt.subplots()
    axis = np.linspace(0, 1, resolution)
    xx, yy = np.meshgrid(axis, axis)
    coupling = profile.eta_max_over_gamma * \
        np.abs(mode_shape(xx, yy, *profile.mode))
    image = ax.imshow(coupling, origin='lower', extent=(0, 1, 0, 1),
                      cmap=cmap)
    plt.colorbar(image, ax=ax, label='eta_th/gamma')
    xy = np.array(profile.positions)
    _series(ax.scatter(xy[:, 0], xy[:, 1], c='w', edgecolors='k'),
            'positions')
    ax.set_xlabel(xlab)
    ax.set_ylabel(ylab)
    ax.set_title(title)
    return ax


def plot_susceptibility(omega_grid, chi, ax=None,
                        title='Mechanical Susceptibility',
                        xlab='Frequency, Hz', ylab='|chi|^2, s^2', **kwargs):
    """Plot ``|chi|^2`` against frequency.

    Parameters
    ----------
    omega_grid : array-like
        Angular frequencies, rad/s.
    chi : array-like
        Susceptibility from :func:`phototherm.dynamics.susceptibility`.
    ax : matplotlib.axes.Axes, optional
        Axes to plot on.
    title, xlab, ylab : str, optional
        Title and axis labels.
    **kwargs
        Keyword arguments passed to :meth:`matplotlib.axes.Axes.plot`.

    Returns
    -------
    matplotlib.axes.Axes
        Axes object containing the plot.
    """
    if ax is None:
        _, ax = plt.subplots()
    line, = ax.plot(rad_to_hz(np.asarray(omega_grid)),
                    np.abs(np.asarray(chi)) ** 2, **kwargs)
    _series(line, 'chi')
    ax.set_xlabel(xlab)
    ax.set_ylabel(ylab)
    ax.set_title(title)
    return ax
