__all__ = [
    'get_system',
    'propagate',
    'verify',
    'SUITES',
    'BACKENDS',
]

import logging
import math
import os
from typing import Callable, Dict, List, Optional, Union

import numpy as np

from .analysis import dispersive_ratio, hardy_sweep, sharpness_witness
from .errors import DomainError, HypopropError, InvalidInputError
from .gridprop import GridField, PropagationSettings, fresnel_mass, \
    fresnel_mass_exact, grid_evolve_drift_free, grid_norm, grid_propagate, \
    grid_sample, kernel_propagate, commutation_residual, relative_l2
from .matcore import SystemPair, covariance, covariance_quad, \
    covariance_additivity_residual, covariance_monotonicity_gap, flow, \
    flow_group_residual, hypoelliptic, id_residual, kalman_rank, \
    random_system
from .packets import GaussianPacket, commutation_symbol_residual, \
    packet_fourier, packet_lp_norm, packet_parameter_distance, \
    packet_propagate, random_packet
from .resources import get_example_path, load_system

logger = logging.getLogger(__name__)

BACKENDS = ['exact', 'grid', 'kernel']
SUITES = ['covariance', 'packets', 'dispersion', 'hardy', 'grid', 'fresnel']

#: Number of random systems or packets per randomized check
BATTERY_SIZE = 20


def get_system(name_or_path: str) -> SystemPair:
    """Return the system stored in a JSON file or, if no such file exists,
    the bundled example system of that name."""
    if os.path.exists(name_or_path):
        return load_system(name_or_path)
    path = get_example_path(name_or_path)
    if path is None:
        raise InvalidInputError('No system file or example named %s'
                                % name_or_path)
    return load_system(path)


def propagate(source: Union[GaussianPacket, GridField], sys: SystemPair,
              t: float, backend: str = 'exact', L: float = 12.0,
              n: int = 256,
              settings: Optional[PropagationSettings] = None) -> GridField:
    """Return the solution at time t sampled on a grid.

    Parameters
    ----------
    source :
        The initial datum, a packet or a position field. The ``exact``
        backend needs a packet.
    sys :
        The system (Q, B).
    t :
        A non-negative time.
    backend :
        ``exact`` samples the propagated packet, ``grid`` uses the FFT
        propagator and ``kernel`` the oscillatory kernel quadrature.
    L, n :
        The grid, ignored when the source is a field.
    settings :
        Settings of the grid backend.

    Returns
    -------
    :
        A position-space field.
    """
    if backend not in BACKENDS:
        raise InvalidInputError('Unknown backend %s, expected one of %s'
                                % (backend, ', '.join(BACKENDS)))
    if isinstance(source, GridField):
        L, n = source.L, source.n
    field = grid_sample(source, L, n, sys.m)
    if t < 0:
        raise DomainError('t must be non-negative, got %r' % t)
    if t == 0:
        return field
    if backend == 'exact':
        if not isinstance(source, GaussianPacket):
            raise InvalidInputError('The exact backend needs a packet')
        return grid_sample(packet_propagate(source, sys, t), L, n, sys.m)
    if backend == 'grid':
        return grid_propagate(field, sys, t, settings)
    points = field.coordinates().reshape(-1, sys.m)
    guard = (settings or PropagationSettings()).chirp_resolution_guard
    values = kernel_propagate(field, sys, t, points, L, n, guard=guard)
    return GridField(values.reshape((n,) * sys.m), L, n, sys.m)


def _check(suite: str, check: str, value: float, tolerance: float,
           passed: Optional[bool] = None) -> Dict:
    if passed is None:
        passed = bool(value <= tolerance)
    return {'suite': suite, 'check': check, 'value': float(value),
            'tolerance': tolerance, 'passed': passed}


def _covariance_checks(sys: SystemPair, rng) -> List[Dict]:
    systems = [sys] + [random_system(sys.m, rng)
                       for _ in range(BATTERY_SIZE)]
    additivity, ident, group, gap = 0.0, 0.0, 0.0, math.inf
    quadrature = 0.0
    for system in systems:
        s, t = rng.uniform(0.05, 2, size=2)
        exact = covariance(system, t).value
        quadrature = max(quadrature, np.linalg.norm(
            exact - covariance_quad(system, t, 32), 2) /
            (1 + np.linalg.norm(exact, 2)))
        additivity = max(additivity,
                         covariance_additivity_residual(system, s, t))
        ident = max(ident, id_residual(system, t))
        group = max(group, flow_group_residual(system, s, t))
        gap = min(gap, covariance_monotonicity_gap(system, s, t))
    disagreements = 0
    rank = kalman_rank(sys)
    for t_probe in (0.1, 1.0, 10.0):
        positive = covariance(sys, t_probe).is_positive()
        disagreements += int(positive != (rank == sys.m))
    return [
        _check('covariance', 'quadrature', quadrature, 1e-9),
        _check('covariance', 'additivity', additivity, 1e-9),
        _check('covariance', 'id', ident, 1e-9),
        _check('covariance', 'flow_group', group, 1e-11),
        _check('covariance', 'monotonicity', gap, -1e-10,
               passed=bool(gap >= -1e-10)),
        _check('covariance', 'kalman_agreement', disagreements, 0),
    ]


def _packet_checks(sys: SystemPair, rng) -> List[Dict]:
    plancherel, double, norm, semigroup, symbol = 0.0, 0.0, 0.0, 0.0, 0.0
    for _ in range(BATTERY_SIZE):
        P = random_packet(sys.m, rng)
        s, t = rng.uniform(0.05, 1, size=2)
        norm2 = packet_lp_norm(P, 2)
        plancherel = max(plancherel, abs(
            packet_lp_norm(packet_fourier(P), 2) / norm2 - 1))
        reflected = GaussianPacket(P.M, -P.w, P.c)
        double = max(double, packet_parameter_distance(
            packet_fourier(packet_fourier(P)), reflected))
        evolved = packet_propagate(P, sys, t)
        norm = max(norm, abs(packet_lp_norm(evolved, 2) / norm2 /
                             math.exp(-t * sys.trace_b / 2) - 1))
        semigroup = max(semigroup, packet_parameter_distance(
            packet_propagate(P, sys, s + t),
            packet_propagate(evolved, sys, s)))
        xis = rng.uniform(-0.5, 0.5, size=(5, sys.m))
        symbol = max(symbol, commutation_symbol_residual(P, sys, t, xis))
    return [
        _check('packets', 'plancherel', plancherel, 1e-10),
        _check('packets', 'double_transform', double, 1e-10),
        _check('packets', 'norm_identity', norm, 1e-10),
        _check('packets', 'semigroup', semigroup, 1e-10),
        _check('packets', 'commutation_symbol', symbol, 1e-9),
    ]


def _dispersion_checks(sys: SystemPair, rng) -> List[Dict]:
    worst = 0.0
    for _ in range(BATTERY_SIZE):
        P = random_packet(sys.m, rng)
        t = rng.uniform(0.1, 4)
        p = rng.uniform(1, 2)
        worst = max(worst, dispersive_ratio(P, sys, t, p).ratio)
    witness = 0.0
    for t in (0.25, 1.0, 4.0):
        P = sharpness_witness(sys, t, 1.0)
        for p in (1, 6 / 5, 4 / 3, 3 / 2, 2):
            witness = max(witness,
                          abs(dispersive_ratio(P, sys, t, p).ratio - 1))
    return [
        _check('dispersion', 'max_ratio', worst, 1 + 1e-6),
        _check('dispersion', 'witness', witness, 1e-6),
    ]


def _hardy_checks(sys: SystemPair, rng) -> List[Dict]:
    a_values = [2.0 ** k for k in range(-3, 11)]
    worst = 0.0
    for s in (0.25, 1.0, 4.0):
        for report in hardy_sweep(sys, a_values, s):
            worst = max(worst, report.pi_sq_ratio)
    return [_check('hardy', 'pi_sq_ratio', worst, 1, passed=worst < 1)]


def _grid_geometry(m: int):
    return (12.0, 1024) if m == 1 else (16.0, 256)


def _grid_checks(sys: SystemPair, rng) -> List[Dict]:
    if sys.m > 2:
        logger.info('Skipping the grid suite for m = %d', sys.m)
        return []
    L, n = _grid_geometry(sys.m)
    P = GaussianPacket(np.eye(sys.m))
    F = grid_sample(P, L, n, sys.m)
    t = 0.5
    v = grid_evolve_drift_free(F, sys, t)
    f = grid_propagate(F, sys, t)
    exact = grid_sample(packet_propagate(P, sys, t), L, n, sys.m)
    expected = grid_norm(F) * math.exp(-t * sys.trace_b / 2)
    return [
        _check('grid', 'norm_v_stage', abs(grid_norm(v) / grid_norm(F) - 1),
               1e-12),
        _check('grid', 'norm_identity', abs(grid_norm(f) / expected - 1),
               1e-4),
        _check('grid', 'packet_agreement', relative_l2(f, exact, f.mask),
               1e-4),
        _check('grid', 'commutation', commutation_residual(F, sys, t), 1e-4),
    ]


def _fresnel_nodes(G: np.ndarray, L: float) -> int:
    # Enough nodes for a phase step of about pi at the box edge
    steepest = np.linalg.norm(G, np.inf) * L / 2
    n = 16
    while steepest * 2 * L / n > math.pi:
        n *= 2
    return n


def _fresnel_checks(sys: SystemPair, rng) -> List[Dict]:
    t, eps = 1.0, 1e-3
    x = np.zeros(sys.m)
    cov = covariance(sys, t)
    cov.require_positive()
    targets = {'y': 1.0, 'x': math.exp(-t * sys.trace_b)}
    checks = []
    for mode, target in targets.items():
        exact = fresnel_mass_exact(sys, t, x, eps, mode)
        checks.append(_check('fresnel', 'limit_%s' % mode,
                             abs(exact / target - 1), 1e-2))
        if sys.m == 1:
            # The quadrature box has to hold exp(-eps |y|^2) down to e^{-40}
            L = math.sqrt(40 / eps)
            E = flow(sys, t)
            G = cov.inv if mode == 'y' else E.T @ cov.inv @ E
            value = fresnel_mass(sys, t, x, eps, L, _fresnel_nodes(G, L),
                                 mode)
            checks.append(_check('fresnel', 'quadrature_%s' % mode,
                                 abs(value / exact - 1), 1e-6))
    return checks


_SUITE_FUNCTIONS: Dict[str, Callable] = {
    'covariance': _covariance_checks,
    'packets': _packet_checks,
    'dispersion': _dispersion_checks,
    'hardy': _hardy_checks,
    'grid': _grid_checks,
    'fresnel': _fresnel_checks,
}

_NEEDS_HYPOELLIPTIC = {'dispersion', 'hardy', 'fresnel'}


def verify(sys: SystemPair, suite: str = 'all',
           seed: int = 42) -> List[Dict]:
    """Run a verification suite on a system.

    Parameters
    ----------
    sys :
        The system (Q, B).
    suite :
        One of :data:`SUITES` or ``all``.
    seed :
        Seed of the random batteries.

    Returns
    -------
    :
        A list of checks, each a dict with the keys suite, check, value,
        tolerance and passed.
    """
    if suite != 'all' and suite not in SUITES:
        raise InvalidInputError('Unknown suite %s, expected one of %s or all'
                                % (suite, ', '.join(SUITES)))
    rng = np.random.default_rng(seed)
    suites = SUITES if suite == 'all' else [suite]
    report = hypoelliptic(sys)
    checks = []
    for name in suites:
        if name in _NEEDS_HYPOELLIPTIC and not report.hypoelliptic:
            logger.warning('Skipping the %s suite, the system is not '
                           'hypoelliptic', name)
            continue
        try:
            checks += _SUITE_FUNCTIONS[name](sys, rng)
        except HypopropError as e:
            logger.warning('Suite %s failed: %s', name, e)
            checks.append(_check(name, 'error', math.nan, 0, passed=False))
    passed = sum(c['passed'] for c in checks)
    logger.info('%d of %d checks passed', passed, len(checks))
    return checks
