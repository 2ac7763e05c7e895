"""Command-line interface.

Results are printed as ``key=value`` lines; tables are written as CSV and
figures as SVG. Exit status is 0 on success, 1 when ``validate`` exceeds its
threshold, 2 for usage, input and model errors, 3 when a fit parameter is
unidentifiable and 4 when the mechanical mode is ambiguous.
"""
import argparse
import logging
import math
import sys
from pathlib import Path
import numpy as np
import pandas as pd
from phototherm import bath, cooling, dynamics, fitdata, params, plots
from phototherm.utils import (AmbiguousModeError, UnidentifiableFitError,
                              hz_to_rad, rad_to_hz, save_svg, thread_count,
                              write_csv)

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_USAGE = 2
EXIT_UNIDENTIFIABLE = 3
EXIT_AMBIGUOUS = 4


class UsageError(ValueError):
    """Raised for inconsistent command-line options."""


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(
            f"must be a positive integer: {text}")
    return value


def _positive_float(text):
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _add_output(parser):
    parser.add_argument('--output', '-o', type=Path,
                        help='output path; CSV and SVG share its stem')
    parser.add_argument('--format', choices=('csv', 'svg', 'both'),
                        default='csv', help='output format (default: csv)')


def build_parser():
    """Argument parser for the ``phototherm`` command."""
    parser = argparse.ArgumentParser(
        prog='phototherm',
        description='Exciton-mediated photothermal damping of a membrane in '
                    'an optical cavity.')
    parser.add_argument('--verbose', '-v', action='store_true',
                        help='log numerical decisions to stderr')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('sweep', help='damping rates versus detuning')
    p.add_argument('--config', type=Path, required=True)
    p.add_argument('--detuning-from', type=float, required=True,
                   help='first detuning, Hz')
    p.add_argument('--detuning-to', type=float, required=True,
                   help='last detuning, Hz')
    p.add_argument('--points', type=_positive_int, default=101)
    p.add_argument('--components', action='store_true',
                   help='plot kappa_th and kappa_rp as well')
    _add_output(p)
    p.set_defaults(handler=run_sweep)

    p = sub.add_parser('fit', help='fit eta_th/gamma to linewidth datasets')
    p.add_argument('--config', type=Path, required=True)
    p.add_argument('datasets', type=Path, nargs='+')
    p.add_argument('--no-rp', dest='include_rp', action='store_false',
                   help='do not subtract the radiation-pressure rate')
    p.add_argument('--mode', type=_positive_int, nargs=2, default=(2, 1),
                   metavar=('M', 'N'), help='drumhead mode indices')
    _add_output(p)
    p.set_defaults(handler=run_fit)

    p = sub.add_parser('validate',
                       help='compare analytic rates with the eigenvalues')
    p.add_argument('--config', type=Path,
                   help='parameters; defaults to the desk-scale family')
    p.add_argument('--gamma-ratio', type=_positive_float,
                   help='gamma/kappa_c of the desk-scale family')
    p.add_argument('--kappa-ratio', type=_positive_float,
                   help='kappa_c/omega_m of the desk-scale family')
    p.add_argument('--points', type=_positive_int, default=21)
    p.add_argument('--span', type=_positive_float, default=3.0,
                   help='half width of the detuning grid in kappa_c')
    p.add_argument('--threshold', type=_positive_float, default=0.02)
    _add_output(p)
    p.set_defaults(handler=run_validate)

    p = sub.add_parser('simulate', help='ring-down of the membrane')
    p.add_argument('--config', type=Path, required=True)
    p.add_argument('--kernel', choices=('exponential', 'instantaneous'),
                   default='exponential')
    p.add_argument('--tau', type=_positive_float,
                   help='kernel time constant, s (default: tau_th)')
    p.add_argument('--bath', type=Path,
                   help='bath CSV defining a sum-of-exponentials kernel')
    p.add_argument('--t-final', type=_positive_float,
                   help='duration, s (default: 3/kappa_m)')
    p.add_argument('--steps', type=_positive_int,
                   help='number of samples (default: 20 per period)')
    p.add_argument('--b0', type=float, default=1.0,
                   help='initial membrane amplitude')
    _add_output(p)
    p.set_defaults(handler=run_simulate)

    p = sub.add_parser('bath-kernel', help='memory kernel of a phonon bath')
    p.add_argument('bath', type=Path)
    p.add_argument('--t-final', type=_positive_float,
                   help='duration, s (default: 10/min kappa_mu)')
    p.add_argument('--points', type=_positive_int, default=2001)
    _add_output(p)
    p.set_defaults(handler=run_bath_kernel)
    return parser


def _print(**values):
    """Print ``key=value`` pairs on one line."""
    parts = []
    for key, value in values.items():
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, (float, np.floating)):
            value = repr(float(value))
        parts.append(f"{key}={value}")
    print(' '.join(parts))


def _write_outputs(args, table, draw, csv_to_stdout=False):
    """Write the CSV table and the SVG figure requested by the options."""
    wants_csv = args.format in ('csv', 'both')
    wants_svg = args.format in ('svg', 'both')
    if wants_svg and args.output is None:
        raise UsageError("--format svg needs --output")
    if wants_csv:
        if args.output is not None:
            write_csv(table, args.output)
            _print(csv=str(args.output))
        elif csv_to_stdout:
            sys.stdout.write(write_csv(table))
    if wants_svg:
        svg_path = args.output.with_suffix('.svg')
        save_svg(draw(), svg_path)
        _print(svg=str(svg_path))


def run_sweep(args):
    """Damping rates over a detuning grid given in Hz."""
    system = params.load_config(args.config)
    grid = hz_to_rad(np.linspace(args.detuning_from, args.detuning_to,
                                 args.points))
    df = cooling.sweep(system, grid)
    table = pd.DataFrame({
        'delta_c_hz': rad_to_hz(df['delta_c']),
        'kappa_th_rad_s': df['kappa_th'],
        'kappa_rp_rad_s': df['kappa_rp'],
        'kappa_eff_rad_s': df['kappa_eff'],
    })
    _write_outputs(
        args, table,
        lambda: plots.plot_linewidth_sweep(df, components=args.components),
        csv_to_stdout=True)
    return EXIT_OK


def run_fit(args):
    """Fit eta_th/gamma to each dataset and the mode profile if positioned.
    """
    system = params.load_config(args.config)
    datasets = [fitdata.load_dataset(path) for path in args.datasets]
    results = fitdata.fit_datasets(datasets, system,
                                   include_rp=args.include_rp)
    labels = []
    for path, data, result in zip(args.datasets, datasets, results):
        labels.append(data.meta.label or path.stem)
        _print(dataset=labels[-1])
        _print(eta_over_gamma=result.eta_over_gamma)
        _print(stderr=result.stderr)
        _print(residual_rms=result.residual_rms)
        _print(n_points=result.n_points)
    positioned = [(d.meta.beam_position, r)
                  for d, r in zip(datasets, results)
                  if d.meta.beam_position is not None]
    if positioned:
        profile = fitdata.mode_profile_check(positioned,
                                             mode=tuple(args.mode))
        _print(eta_max_over_gamma=profile.eta_max_over_gamma)
        _print(profile_consistent=profile.consistent)
    table = pd.DataFrame({
        'dataset': labels,
        'eta_over_gamma': [r.eta_over_gamma for r in results],
        'stderr': [r.stderr for r in results],
        'residual_rms': [r.residual_rms for r in results],
        'n_points': [r.n_points for r in results],
    })

    def draw():
        ax = None
        for data, result in zip(datasets, results):
            delta = data.points['delta_c'].to_numpy()
            grid = np.linspace(delta.min(), delta.max(), 401)
            model_params = fitdata.apply_dataset_meta(system, data.meta)
            model = fitdata.model_curve(model_params, grid,
                                        result.eta_over_gamma)
            ax = plots.plot_fit(data, grid, model, ax=ax)
        return ax

    _write_outputs(args, table, draw)
    return EXIT_OK


def _validation_params(args):
    ratios = {}
    if args.gamma_ratio is not None:
        ratios['gamma_over_kappa'] = args.gamma_ratio
    if args.kappa_ratio is not None:
        ratios['kappa_over_omega'] = args.kappa_ratio
    if args.config is not None:
        if ratios:
            raise UsageError(
                "--gamma-ratio and --kappa-ratio apply to the desk-scale "
                "family and cannot be combined with --config")
        return params.load_config(args.config)
    return params.desk_family(**ratios)


def run_validate(args):
    """Analytic damping against the eigenvalue oracle on a detuning grid."""
    system = _validation_params(args)
    params.validate_hierarchy(system)
    kappa_c = system.cavity.kappa_c
    grid = np.linspace(-args.span, args.span, args.points) * kappa_c
    table = dynamics.compare_with_analytic(system, grid)
    for row in table.itertuples(index=False):
        _print(delta_c_hz=float(rad_to_hz(row.delta_c)),
               kappa_eff_analytic=row.kappa_eff_analytic,
               kappa_eff_oracle=row.kappa_eff_oracle)
    deviation = dynamics.max_deviation(table, system.mech.kappa_m)
    passed = deviation <= args.threshold
    _print(max_deviation=deviation)
    _print(threshold=args.threshold)
    _print(passed=passed)
    out = table.assign(delta_c_hz=rad_to_hz(table['delta_c']))

    def draw():
        ax = plots.plot_linewidth_sweep(
            table.assign(kappa_eff=table['kappa_eff_analytic']),
            title='Analytic and Eigenvalue Damping')
        line, = ax.plot(rad_to_hz(table['delta_c']),
                        table['kappa_eff_oracle'], 'o', label='eigenvalues')
        line.set_gid('series-kappa_eff_oracle')
        ax.legend()
        return ax

    _write_outputs(args, out, draw)
    return EXIT_OK if passed else EXIT_THRESHOLD


def _kernel(args, system):
    if args.bath is not None:
        if args.kernel != 'exponential' or args.tau is not None:
            raise UsageError("--bath cannot be combined with --kernel or "
                             "--tau")
        return bath.kernel_to_spec(bath.load_bath(args.bath))
    if args.kernel == 'instantaneous':
        if args.tau is not None:
            raise UsageError("--tau needs --kernel exponential")
        return dynamics.instantaneous_kernel()
    tau = args.tau if args.tau is not None else system.phototherm.tau_th
    return dynamics.exponential_kernel(tau)


def run_simulate(args):
    """Ring-down of the membrane and the damping fitted to it."""
    system = params.load_config(args.config)
    kernel = _kernel(args, system)
    t_final = args.t_final
    if t_final is None:
        t_final = 3.0 / system.mech.kappa_m
    steps = args.steps
    if steps is None:
        periods = t_final * system.mech.omega_m / (2 * np.pi)
        steps = max(1000, int(math.ceil(20 * periods)) + 1)
    G = dynamics.build_drift(system, kernel)
    mode = dynamics.effective_mode(G, system)
    trace = dynamics.simulate_ringdown(G, args.b0, t_final, steps)
    fit = dynamics.fit_damping(trace)
    _print(kernel=kernel.kind)
    _print(kappa_rad_s=fit.kappa)
    _print(omega_rad_s=fit.omega)
    _print(kappa_eff_rad_s=mode.kappa_eff)
    _print(omega_eff_rad_s=mode.omega_eff)
    _print(fallback=trace.fallback)
    _write_outputs(args, trace.to_frame(), lambda: plots.plot_ringdown(trace))
    return EXIT_OK


def run_bath_kernel(args):
    """Kernel of a phonon bath and its single-exponential fit."""
    spec = bath.load_bath(args.bath)
    t_final = args.t_final
    if t_final is None:
        t_final = 10.0 / min(mode.kappa_mu for mode in spec.modes)
    samples = bath.synthesize_kernel(spec, np.linspace(0.0, t_final,
                                                       args.points))
    fit = bath.fit_exponential(samples)
    _print(modes=len(spec.modes))
    _print(tau_fit_s=fit.tau)
    _print(amplitude=fit.amplitude)
    _print(residual=fit.residual)
    _print(truncated=samples.truncated)
    _write_outputs(args, samples.to_frame(),
                   lambda: plots.plot_kernel(samples, fit))
    return EXIT_OK


def main(argv=None):
    """Run the command line and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s', force=True)
    _logger.debug("running %s", args.command)
    try:
        thread_count()
        return args.handler(args)
    except UnidentifiableFitError as exc:
        print(f"phototherm: unidentifiable fit: {exc}", file=sys.stderr)
        return EXIT_UNIDENTIFIABLE
    except AmbiguousModeError as exc:
        print(f"phototherm: ambiguous mode: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"phototherm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run():
    """Console-script entry point."""
    sys.exit(main())
