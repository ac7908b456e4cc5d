"""Dispersive estimates with Beckner's constant and the Hardy uncertainty
product.

For 1 <= p <= 2 the propagator satisfies

    ||T(t) phi||_{p'} <= (4 pi)^{-m/2 + m/p'} B_p e^{-t tr B / p'}
                         det Q(t)^{-(1/2 - 1/p')} ||phi||_p

with the Hausdorff-Young constant B_p = (p^{1/p} / p'^{1/p'})^{m/2}. The
left hand sides are computed on exact packets, so equality cases are
limited only by floating point arithmetic.
"""

import logging
import math
from typing import List, Sequence

import numpy as np

from .errors import DomainError, InvalidInputError, \
    SharpnessViolationError, UnsupportedLimitError
from .matcore import SystemPair, covariance, flow
from .packets import GaussianPacket, packet_eval, packet_fourier, \
    packet_generator_eval, packet_lp_norm, packet_multiply_chirp, \
    packet_propagate

__all__ = [
    "LpExponent",
    "DispersionReport",
    "HardyReport",
    "beckner_constant",
    "dispersive_bound",
    "interpolated_bound",
    "dispersive_ratio",
    "dispersion_sweep",
    "sharpness_witness",
    "geometric_grid",
    "decay_exponent_fit",
    "hardy_map",
    "hardy_product",
    "hardy_sweep",
    "disguise_residual",
    "generator_limit_slope",
]

logger = logging.getLogger(__name__)

#: Largest accepted dispersive ratio
SHARPNESS_TOL = 1e-6
#: Relative slack of the Hardy bound pi^2
HARDY_TOL = 1e-9


class LpExponent(object):
    """An exponent p in [1, 2] with its conjugate p' = p/(p - 1).

    Attributes
    ----------
    p : float
        The exponent.
    p_conj : float
        The conjugate exponent, ``math.inf`` when p = 1.
    """

    def __init__(self, p: float):
        if not 1 <= p <= 2:
            raise DomainError('p must be in [1, 2], got %r' % p)
        self.p = float(p)
        self.p_conj = math.inf if p == 1 else p / (p - 1)

    @property
    def inv_conj(self) -> float:
        """1/p', which is 0 when p = 1."""
        return 1 - 1 / self.p

    def __str__(self):
        return 'LpExponent(p=%g,p_conj=%g)' % (self.p, self.p_conj)

    def __repr__(self):
        return str(self)


def _as_exponent(p) -> LpExponent:
    return p if isinstance(p, LpExponent) else LpExponent(p)


class DispersionReport(object):
    """The two sides of the dispersive estimate for one datum.

    Attributes
    ----------
    t : float
        The time.
    p : LpExponent
        The exponent.
    lhs : float
        ||T(t) phi||_{p'} / ||phi||_p.
    bound : float
        The sharp constant of the estimate.
    ratio : float
        lhs / bound.
    """

    def __init__(self, t: float, p: LpExponent, lhs: float, bound: float):
        self.t = t
        self.p = p
        self.lhs = lhs
        self.bound = bound
        self.ratio = lhs / bound

    def __str__(self):
        return 'DispersionReport(t=%g,p=%g,ratio=%.12g)' % (
            self.t, self.p.p, self.ratio)

    def __repr__(self):
        return str(self)

    def to_json(self):
        return {'t': self.t, 'p': self.p.p, 'p_conj': self.p.p_conj,
                'lhs': self.lhs, 'bound': self.bound, 'ratio': self.ratio}


class HardyReport(object):
    """The uncertainty product of a Gaussian datum and its evolution.

    Attributes
    ----------
    a : float
        Decay rate of the datum, |phi(x)| = |c| e^{-a |x|^2}.
    b : float
        Largest b with |f(K y, s)| <= A e^{-b |y|^2}.
    s : float
        The time.
    product : float
        a b s^2, which stays below pi^2.
    """

    def __init__(self, a: float, b: float, s: float):
        self.a = a
        self.b = b
        self.s = s
        self.product = a * b * s ** 2

    @property
    def pi_sq_ratio(self) -> float:
        return self.product / math.pi ** 2

    def __str__(self):
        return 'HardyReport(s=%g,a=%g,b=%g,product=%.12g)' % (
            self.s, self.a, self.b, self.product)

    def __repr__(self):
        return str(self)

    def to_json(self):
        return {'s': self.s, 'a': self.a, 'b': self.b,
                'product': self.product, 'pi_sq_ratio': self.pi_sq_ratio}


def beckner_constant(p, m: int) -> float:
    """Return the sharp Hausdorff-Young constant (p^{1/p}/p'^{1/p'})^{m/2}.

    Examples
    --------
    >>> beckner_constant(2, 3), beckner_constant(1, 3)
    (1.0, 1.0)
    """
    p = _as_exponent(p)
    log_conj = 0.0 if p.p == 1 else \
        p.inv_conj * math.log(p.p_conj)
    return math.exp(m / 2 * (math.log(p.p) / p.p - log_conj))


def _log_interpolated_bound(sys: SystemPair, t: float,
                            p: LpExponent) -> float:
    cov = covariance(sys, t)
    cov.require_positive()
    m = sys.m
    return (-m / 2 + m * p.inv_conj) * math.log(4 * math.pi) \
        - sys.trace_b * t * p.inv_conj \
        - (0.5 - p.inv_conj) * float(np.sum(np.log(cov.eigenvalues)))


def interpolated_bound(sys: SystemPair, t: float, p) -> float:
    """Return the constant obtained by interpolating between the L1 -> L^inf
    and the L2 -> L2 bounds, which lacks the Beckner factor."""
    return math.exp(_log_interpolated_bound(sys, t, _as_exponent(p)))


def dispersive_bound(sys: SystemPair, t: float, p) -> float:
    """Return the sharp constant of the L^p -> L^{p'} estimate at time t.

    Parameters
    ----------
    sys :
        A hypoelliptic system.
    t :
        A positive time.
    p :
        A number in [1, 2] or an :class:`LpExponent`.

    Raises
    ------
    SingularityError
        If the system is not hypoelliptic.
    """
    p = _as_exponent(p)
    return beckner_constant(p, sys.m) * \
        math.exp(_log_interpolated_bound(sys, t, p))


def dispersive_ratio(P: GaussianPacket, sys: SystemPair, t: float,
                     p) -> DispersionReport:
    """Compare ||T(t)P||_{p'} with the sharp bound times ||P||_p.

    Raises
    ------
    SharpnessViolationError
        If the ratio exceeds 1 + 1e-6.
    """
    p = _as_exponent(p)
    lhs = packet_lp_norm(packet_propagate(P, sys, t), p.p_conj) / \
        packet_lp_norm(P, p.p)
    report = DispersionReport(t, p, lhs, dispersive_bound(sys, t, p))
    if report.ratio > 1 + SHARPNESS_TOL:
        raise SharpnessViolationError('Dispersive ratio %.12g exceeds 1 at '
                                      't=%g, p=%g' % (report.ratio, t, p.p))
    return report


def dispersion_sweep(P: GaussianPacket, sys: SystemPair,
                     t_values: Sequence[float], p) -> List[DispersionReport]:
    """Return the dispersion reports of a packet at several times."""
    return [dispersive_ratio(P, sys, t, p) for t in t_values]


def sharpness_witness(sys: SystemPair, t: float,
                      a: float) -> GaussianPacket:
    """Return phi = e^{-a|x|^2} e^{-i<Q(t)^{-1} x, x>/4}, a datum attaining
    the dispersive bound at time t for every p.

    Removing the chirp turns T(t)phi into the transform of a real Gaussian
    up to a linear change of variables, and real Gaussians are extremals of
    the Hausdorff-Young inequality.
    """
    if not a > 0:
        raise DomainError('a must be positive, got %r' % a)
    cov = covariance(sys, t)
    cov.require_positive()
    return GaussianPacket(a * np.eye(sys.m) + 0.25j * cov.inv)


def geometric_grid(start: float, stop: float, count: int) -> np.ndarray:
    """Return count geometrically spaced times from start to stop."""
    if not (start > 0 and stop > 0 and count >= 1):
        raise DomainError('Geometric grids need positive start and count')
    return np.geomspace(start, stop, count)


def decay_exponent_fit(sys: SystemPair, p,
                       t_grid: Sequence[float] = None) -> float:
    """Return the least-squares slope of log dispersive_bound against log t.

    Parameters
    ----------
    sys :
        A hypoelliptic system.
    p :
        The exponent.
    t_grid :
        A geometric sequence of times. Default: 25 points from 10 to 1000.

    Raises
    ------
    InvalidInputError
        If the times do not form a geometric sequence.
    """
    p = _as_exponent(p)
    t_grid = geometric_grid(10, 1000, 25) if t_grid is None else \
        np.asarray(t_grid, dtype=float)
    if len(t_grid) < 2 or np.any(t_grid <= 0):
        raise InvalidInputError('At least two positive times are needed')
    ratios = t_grid[1:] / t_grid[:-1]
    if np.any(ratios <= 1) or np.ptp(ratios) > 1e-9 * ratios[0]:
        raise InvalidInputError('Times must form an increasing geometric '
                                'sequence')
    offset = math.log(beckner_constant(p, sys.m))
    logs = [offset + _log_interpolated_bound(sys, t, p) for t in t_grid]
    slope = np.polyfit(np.log(t_grid), logs, 1)[0]
    logger.debug('Fitted decay exponent %.6g for p=%g', slope, p.p)
    return float(slope)


def hardy_map(sys: SystemPair, s: float) -> np.ndarray:
    """Return 4 pi s^{-1} e^{-sB} Q(s), which maps s times the frequency at
    which T(s) evaluates the transform of the chirped datum back to
    position.

    It has the same determinant as :func:`hypoprop.matcore.k_matrix` and
    coincides with it when B commutes with Q(s).
    """
    cov = covariance(sys, s)
    cov.require_positive()
    return 4 * math.pi / s * flow(sys, -s) @ cov.value


def hardy_product(P: GaussianPacket, sys: SystemPair,
                  s: float) -> HardyReport:
    """Return the Hardy uncertainty product of an isotropic real Gaussian.

    The datum is c e^{-a|x|^2}. Its evolution f(., s) is again a Gaussian
    whose modulus has the decay matrix R = Re M, and
    b = lambda_min(K^T R K) with K = :func:`hardy_map` is the largest b for
    which |f(K y, s)| <= A e^{-b|y|^2}.

    Raises
    ------
    UnsupportedLimitError
        If the datum is not an isotropic real centered Gaussian.
    SharpnessViolationError
        If a b s^2 reaches pi^2.
    """
    a = float(P.M[0, 0].real)
    if np.any(P.M.imag) or np.any(P.w) or \
            np.max(np.abs(P.M - a * np.eye(P.m))) > 1e-12 * a:
        raise UnsupportedLimitError('Hardy products need a datum of the '
                                    'form c exp(-a|x|^2)')
    propagated = packet_propagate(P, sys, s)
    K = hardy_map(sys, s)
    R = propagated.M.real
    G = K.T @ ((R + R.T) / 2) @ K
    b = float(np.linalg.eigvalsh((G + G.T) / 2)[0])
    report = HardyReport(a, b, s)
    if report.product >= math.pi ** 2 * (1 + HARDY_TOL):
        raise SharpnessViolationError('Hardy product %.12g reaches pi^2'
                                      % report.product)
    return report


def hardy_sweep(sys: SystemPair, a_values: Sequence[float],
                s: float) -> List[HardyReport]:
    """Return the Hardy reports of e^{-a|x|^2} for several a."""
    return [hardy_product(GaussianPacket(a * np.eye(sys.m)), sys, s)
            for a in a_values]


def disguise_residual(P: GaussianPacket, sys: SystemPair, t: float,
                      xs) -> float:
    """Return the largest relative difference between

        (4 pi)^{-m/2} det Q(t)^{-1/2} |F phi(x)|  and
        |T(t)(phi e^{-i<Q(t)^{-1} y, y>/4})(4 pi e^{-tB} Q(t) x)|

    over the given points.
    """
    cov = covariance(sys, t)
    cov.require_positive()
    xs = np.asarray(xs, dtype=float).reshape(-1, sys.m)
    hat = packet_fourier(P)
    evolved = packet_propagate(packet_multiply_chirp(P, cov.inv / 4), sys, t)
    lhs = (4 * math.pi) ** (-sys.m / 2) / math.sqrt(cov.det) * \
        np.abs(packet_eval(hat, xs))
    points = xs @ (4 * math.pi * flow(sys, -t) @ cov.value).T
    rhs = np.abs(packet_eval(evolved, points))
    return float(np.max(np.abs(lhs - rhs)) / np.max(lhs))


def generator_limit_slope(P: GaussianPacket, sys: SystemPair,
                          hs: Sequence[float], xs) -> float:
    """Return the log-log slope of ||(T(h)P - P)/h - LP|| against h.

    The norm is the l2 norm over the sample points xs. A slope close to 1
    shows that the difference quotients converge to the generator at the
    first order.
    """
    xs = np.asarray(xs, dtype=float).reshape(-1, sys.m)
    hs = np.asarray(hs, dtype=float)
    values = packet_eval(P, xs)
    generator = np.array([packet_generator_eval(P, sys, x) for x in xs])
    errors = []
    for h in hs:
        quotient = (packet_eval(packet_propagate(P, sys, h), xs) - values) / h
        errors.append(np.linalg.norm(quotient - generator))
    slope = np.polyfit(np.log(hs), np.log(errors), 1)[0]
    logger.debug('Generator limit errors %s, slope %.4g', errors, slope)
    return float(slope)
