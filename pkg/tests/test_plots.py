"""Tests for the plotting functions."""

import numpy as np
import matplotlib.pyplot as plt
from phototherm import bath
from phototherm import cooling
from phototherm import dynamics
from phototherm import fitdata
from phototherm import params
from phototherm import plots
from phototherm import utils


def test_plot_linewidth_sweep():
    """Test the plot_linewidth_sweep function."""
    p = params.reference_params(1)
    df = cooling.sweep(p, np.linspace(-3, 3, 31) * p.cavity.kappa_c)
    ax = plots.plot_linewidth_sweep(df)
    assert isinstance(ax, plt.Axes)
    assert ax.get_xlabel() == 'Cavity detuning, Hz'
    assert ax.get_ylabel() == 'Damping rate, rad/s'
    assert ax.get_title() == 'Mechanical Linewidth'
    assert len(ax.lines) == 1
    assert ax.get_legend() is None
    assert ax.lines[0].get_gid() == 'series-kappa_eff'
    # x data is in Hz
    assert np.asarray(ax.lines[0].get_xdata())[-1] == \
        utils.rad_to_hz(df['delta_c'].iloc[-1])
    # make another plot with the components
    ax = plots.plot_linewidth_sweep(df, components=True,
                                    title='Test Title',
                                    xlab='Test X Label',
                                    ylab='Test Y Label')
    assert ax.get_xlabel() == 'Test X Label'
    assert ax.get_ylabel() == 'Test Y Label'
    assert ax.get_title() == 'Test Title'
    assert len(ax.lines) == 3
    assert ax.get_legend() is not None
    # close plot
    plt.close()


def test_plot_fit():
    """Test the plot_fit function."""
    p = params.reference_params(1)
    grid = np.linspace(-2, 2, 9) * p.cavity.kappa_c
    data = fitdata.synthesize_dataset(p, grid, 0.075, label='dataset-1')
    model_grid = np.linspace(-2, 2, 101) * p.cavity.kappa_c
    ax = plots.plot_fit(data, model_grid, fitdata.model_curve(p, model_grid))
    assert isinstance(ax, plt.Axes)
    assert ax.get_title() == 'Linewidth Fit: dataset-1'
    assert ax.get_ylabel() == 'Mechanical linewidth, rad/s'
    assert len(ax.containers) == 1
    assert [line.get_gid() for line in ax.lines] == ['series-data',
                                                     'series-model']
    # error bars when uncertainties are given
    noisy = fitdata.synthesize_dataset(p, grid, 0.075, noise=0.05,
                                       rng=np.random.default_rng(0))
    ax = plots.plot_fit(noisy, model_grid, fitdata.model_curve(p, model_grid),
                        title='Test Title', scatter_kwargs={'color': 'r'})
    assert ax.get_title() == 'Test Title'
    assert len(ax.collections) == 1
    # close plot
    plt.close()


def test_plot_fit_scatter_options():
    """Scatter options apply per call and are left unchanged."""
    p = params.reference_params(1)
    grid = np.linspace(-2, 2, 9) * p.cavity.kappa_c
    data = fitdata.synthesize_dataset(p, grid, 0.075)
    model = fitdata.model_curve(p, grid)
    options = {'color': 'r'}
    ax = plots.plot_fit(data, grid, model, scatter_kwargs=options)
    assert options == {'color': 'r'}
    assert ax.lines[0].get_color() == 'r'
    plt.close()
    ax = plots.plot_fit(data, grid, model, scatter_kwargs=None)
    assert ax.lines[0].get_color() == 'k'
    plt.close()


def test_plot_ringdown():
    """Test the plot_ringdown function."""
    p = params.desk_family(g0=0.0, eta_th_over_gamma=0.0)
    trace = dynamics.simulate_ringdown(dynamics.build_drift(p), 1.0, 1.0,
                                       201)
    ax = plots.plot_ringdown(trace)
    assert ax.get_title() == 'Ring-down'
    assert ax.get_xlabel() == 'Time, s'
    assert len(ax.lines) == 2
    ax = plots.plot_ringdown(trace, envelope_only=True)
    assert len(ax.lines) == 1
    assert ax.lines[0].get_gid() == 'series-abs_b'
    fallback = dynamics.RingdownTrace(trace.times, trace.values,
                                      fallback=True)
    ax = plots.plot_ringdown(fallback)
    assert ax.get_title() == 'Ring-down (expm propagation)'
    # close plot
    plt.close()


def test_plot_kernel():
    """Test the plot_kernel function."""
    samples = bath.synthesize_kernel(bath.log_uniform_bath(4, 1.0, 3.0),
                                     np.linspace(0, 5, 501))
    ax = plots.plot_kernel(samples)
    assert ax.get_yscale() == 'log'
    assert ax.get_title() == 'Memory Kernel'
    assert len(ax.lines) == 1
    ax = plots.plot_kernel(samples, fit=bath.fit_exponential(samples))
    assert len(ax.lines) == 2
    assert ax.lines[1].get_gid() == 'series-fit'
    # close plot
    plt.close()


def test_plot_mode_profile():
    """Test the plot_mode_profile function."""
    profile = fitdata.mode_profile_check(
        [((0.25, 0.5), 0.099), ((0.1, 0.4), 0.05)])
    ax = plots.plot_mode_profile(profile, resolution=21)
    assert ax.get_title() == 'Mode Profile'
    assert len(ax.images) == 1
    assert ax.images[0].get_array().shape == (21, 21)
    assert len(ax.collections) == 1
    # close plot
    plt.close()


def test_plot_susceptibility():
    """Test the plot_susceptibility function."""
    p = params.desk_family(g0=0.0, eta_th_over_gamma=0.0)
    grid = p.mech.omega_m + np.linspace(-1, 1, 51)
    chi = dynamics.susceptibility(dynamics.build_drift(p), grid)
    ax = plots.plot_susceptibility(grid, chi)
    assert ax.get_title() == 'Mechanical Susceptibility'
    assert len(ax.lines) == 1
    assert np.max(ax.lines[0].get_ydata()) == np.max(np.abs(chi) ** 2)
    # close plot
    plt.close()


def test_save_svg(tmp_path):
    """Series are tagged in the written SVG and output is repeatable."""
    p = params.reference_params(1)
    df = cooling.sweep(p, np.linspace(-3, 3, 31) * p.cavity.kappa_c)
    first = tmp_path / 'first.svg'
    second = tmp_path / 'second.svg'
    utils.save_svg(plots.plot_linewidth_sweep(df, components=True), first)
    utils.save_svg(plots.plot_linewidth_sweep(df, components=True), second)
    text = first.read_text()
    for name in ('kappa_eff', 'kappa_th', 'kappa_rp'):
        assert text.count(f'id="series-{name}"') == 1
    assert first.read_bytes() == second.read_bytes()
