"""Command line interface of hypoprop.

Tables go to standard output (or to ``--out``) and messages to standard
error, so redirected CSV files stay reproducible. Exit codes are 0 on
success, 1 on any error and 2 when a check runs but fails.

Usage::

    hypoprop check --system kolmogorov
    hypoprop covariance --system ou --t-range 0.1:10:50
    hypoprop propagate --system free --packet packet.json --t 0.5 \\
        --backend grid --L 12 --n 1024
    hypoprop verify --system kolmogorov --suite all
    hypoprop dispersion --system kolmogorov --p 1 --t-range 10:1000:25
    hypoprop hardy --system free --a 1 --s-range 0.1:2:20
"""

import functools
import json
import logging
import sys

import click
import numpy as np

from . import __version__
from .analysis import LpExponent, decay_exponent_fit, dispersion_sweep, \
    hardy_sweep
from .api import BACKENDS, get_system, propagate, verify
from .errors import HypopropError, InvalidInputError
from .gridprop import PropagationSettings
from .matcore import covariance, hypoelliptic
from .packets import GaussianPacket
from .tables import dump_checks, dump_covariance, dump_dispersion, \
    dump_field, dump_hardy, load_field, load_packet

__all__ = [
    "main",
    "parse_range",
]

logger = logging.getLogger(__name__)


def parse_range(spec: str, geometric: bool = False) -> np.ndarray:
    """Parse a range given as start:stop:count.

    Parameters
    ----------
    spec :
        The range, e.g. ``0.1:10:50``. A single number is a range of length
        one.
    geometric :
        If True the values are geometrically spaced.
    """
    parts = spec.split(':')
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise InvalidInputError('Range %s is not of the form start:stop:count'
                                % spec)
    if len(parts) != 3 or count < 1:
        raise InvalidInputError('Range %s is not of the form start:stop:count'
                                % spec)
    if count == 1:
        return np.array([start])
    if geometric:
        if not (start > 0 and stop > 0):
            raise InvalidInputError('Geometric ranges need positive bounds')
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (HypopropError, OSError, json.JSONDecodeError) as e:
            click.secho('Error: %s' % e, err=True, fg='red')
            sys.exit(1)
    return wrapper


system_option = click.option('--system', 'system', required=True,
                             help='A system JSON file or the name of a '
                                  'bundled example, e.g. kolmogorov.')
out_option = click.option('--out', default='-', show_default=True,
                          help='Output file, - for standard output.')


@click.group()
@click.version_option(__version__)
@click.option('--log-level', default='WARNING', show_default=True,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                                case_sensitive=False))
def main(log_level):
    """Propagators and verification of degenerate Schrödinger equations
    with drift."""
    logging.getLogger('hypoprop').setLevel(log_level.upper())


@main.command()
@system_option
@click.option('--t-probe', default=1.0, show_default=True, type=float)
@click.option('--tol', default=1e-10, show_default=True, type=float)
@_handle_errors
def check(system, t_probe, tol):
    """Decide whether a system satisfies the Hörmander condition."""
    report = hypoelliptic(get_system(system), t_probe=t_probe, tol=tol)
    click.echo(json.dumps(report.to_json(), indent=1))
    if not report.hypoelliptic:
        sys.exit(2)


@main.command(name='covariance')
@system_option
@click.option('--t-range', default='1', show_default=True,
              help='Times as start:stop:count, linearly spaced.')
@out_option
@_handle_errors
def covariance_command(system, t_range, out):
    """Tabulate the covariance matrix Q(t)."""
    pair = get_system(system)
    covariances = [covariance(pair, t) for t in parse_range(t_range)]
    with click.open_file(out, 'w') as fh:
        dump_covariance(covariances, fh)


@main.command(name='propagate')
@system_option
@click.option('--packet', 'packet_path',
              help='Initial datum as packet JSON. Default: exp(-|x|^2).')
@click.option('--field', 'field_path',
              help='Initial datum as field CSV (grid and kernel backends).')
@click.option('--t', 't', required=True, type=float)
@click.option('--backend', default='exact', show_default=True,
              type=click.Choice(BACKENDS))
@click.option('--L', 'half_width', default=12.0, show_default=True,
              type=float)
@click.option('--n', default=256, show_default=True, type=int)
@click.option('--interpolation', default='fourier_zeropad',
              show_default=True, type=click.Choice(['fourier_zeropad',
                                                    'cubic']))
@click.option('--no-guard', is_flag=True,
              help='Log under-resolved chirps instead of failing.')
@out_option
@_handle_errors
def propagate_command(system, packet_path, field_path, t, backend,
                      half_width, n, interpolation, no_guard, out):
    """Propagate an initial datum to time t and write the field."""
    pair = get_system(system)
    if packet_path and field_path:
        raise InvalidInputError('Give either --packet or --field')
    if field_path:
        with open(field_path, 'r') as fh:
            source = load_field(fh)
    elif packet_path:
        with open(packet_path, 'r') as fh:
            source = load_packet(fh)
    else:
        source = GaussianPacket(np.eye(pair.m))
    settings = PropagationSettings(interpolation=interpolation,
                                   chirp_resolution_guard=not no_guard)
    field = propagate(source, pair, t, backend=backend, L=half_width, n=n,
                      settings=settings)
    with click.open_file(out, 'w') as fh:
        dump_field(field, fh)
    click.secho('Propagated to t=%g with the %s backend' % (t, backend),
                err=True)


@main.command(name='verify')
@system_option
@click.option('--suite', default='all', show_default=True,
              help='covariance, packets, dispersion, hardy, grid, fresnel '
                   'or all.')
@click.option('--seed', default=42, show_default=True, type=int)
@out_option
@_handle_errors
def verify_command(system, suite, seed, out):
    """Run verification suites and write a pass/fail table."""
    checks = verify(get_system(system), suite=suite, seed=seed)
    with click.open_file(out, 'w') as fh:
        dump_checks(checks, fh)
    failed = [c for c in checks if not c['passed']]
    if failed:
        click.secho('%d of %d checks failed' % (len(failed), len(checks)),
                    err=True, fg='red')
        sys.exit(2)
    click.secho('All %d checks passed' % len(checks), err=True, fg='green')


@main.command(name='dispersion')
@system_option
@click.option('--p', 'p', default=1.0, show_default=True, type=float)
@click.option('--t-range', default='10:1000:25', show_default=True,
              help='Times as start:stop:count, geometrically spaced.')
@click.option('--packet', 'packet_path',
              help='Datum as packet JSON. Default: exp(-|x|^2).')
@out_option
@_handle_errors
def dispersion_command(system, p, t_range, packet_path, out):
    """Tabulate the dispersive estimate and fit its decay exponent."""
    pair = get_system(system)
    exponent = LpExponent(p)
    times = parse_range(t_range, geometric=True)
    if packet_path:
        with open(packet_path, 'r') as fh:
            packet = load_packet(fh)
    else:
        packet = GaussianPacket(np.eye(pair.m))
    reports = dispersion_sweep(packet, pair, times, exponent)
    with click.open_file(out, 'w') as fh:
        dump_dispersion(reports, fh)
    if len(times) > 1:
        slope = decay_exponent_fit(pair, exponent, times)
        click.echo('slope: %.6f' % slope, err=True)


@main.command(name='hardy')
@system_option
@click.option('--a', 'a', default=1.0, show_default=True, type=float)
@click.option('--s-range', default='1', show_default=True,
              help='Times as start:stop:count, linearly spaced.')
@out_option
@_handle_errors
def hardy_command(system, a, s_range, out):
    """Tabulate the Hardy uncertainty product of exp(-a|x|^2)."""
    pair = get_system(system)
    reports = [hardy_sweep(pair, [a], s)[0] for s in parse_range(s_range)]
    with click.open_file(out, 'w') as fh:
        dump_hardy(reports, fh)
