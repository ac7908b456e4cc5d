"""Dense real-matrix algebra for the pair (Q, B).

This module computes the matrix exponentials e^{tB}, the covariance matrix

    Q(t) = int_0^t e^{sB} Q e^{sB*} ds,

decides the Hörmander (hypoellipticity) condition Q(t) > 0 both spectrally
and through the Kalman rank condition, and builds the map
K(t) = 4 pi t^{-1} Q(t) e^{-tB} used by the uncertainty principle.

All values are immutable: arrays held by the classes below are flagged
read-only, so instances can be shared between threads freely.
"""

import logging
import math
from typing import Mapping

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import eigh, expm

from .errors import DomainError, InconsistencyError, InvalidInputError, \
    InvariantViolationError, SingularityError

__all__ = [
    "SystemPair",
    "CovarianceMatrix",
    "HypoReport",
    "mat_exp",
    "flow",
    "flow_adjoint",
    "covariance",
    "covariance_quad",
    "covariance_derivative",
    "psd_sqrt",
    "kalman_rank",
    "hypoelliptic",
    "k_matrix",
    "covariance_additivity_residual",
    "covariance_monotonicity_gap",
    "id_residual",
    "flow_group_residual",
    "derivative_residual",
    "random_system",
    "free_system",
    "ornstein_uhlenbeck_system",
    "kolmogorov_system",
    "kramers_system",
]

logger = logging.getLogger(__name__)

#: Relative tolerance for the symmetry of Q in a SystemPair
SYMMETRY_RTOL = 1e-12
#: Absolute asymmetry accepted by the JSON parser before symmetrizing
JSON_SYMMETRY_ATOL = 1e-9
#: Relative negativity of eigenvalues clamped to zero in a PSD input
PSD_RTOL = 1e-12
#: Default relative threshold on lambda_min(Q(t)) for hypoellipticity
HYPO_TOL = 1e-10
#: Gauss-Legendre nodes per panel in covariance_quad
QUAD_ORDER = 5


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _as_square(a, name: str) -> np.ndarray:
    try:
        arr = np.asarray(a, dtype=float)
    except (TypeError, ValueError) as e:
        raise InvalidInputError('%s is not a real matrix: %s' % (name, e))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidInputError('%s must be a non-empty square matrix, '
                                'got shape %s' % (name, arr.shape))
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError('%s has non-finite entries' % name)
    return arr


class SystemPair(object):
    """The pair (Q, B) of real m x m matrices defining the equation

        d_t f - i tr(Q D^2 f) - <Bx, grad f> = 0.

    Parameters
    ----------
    Q : array_like
        Real symmetric positive semi-definite diffusion matrix.
    B : array_like
        Real drift matrix of the same size.

    Raises
    ------
    InvalidInputError
        If the matrices are not square, have different sizes, contain
        non-finite entries, or Q is not symmetric positive semi-definite.
    """

    def __init__(self, Q, B):
        Q = _as_square(Q, 'Q')
        B = _as_square(B, 'B')
        if Q.shape != B.shape:
            raise InvalidInputError('Q and B have different shapes: %s, %s'
                                    % (Q.shape, B.shape))
        scale = max(np.linalg.norm(Q, 2), 1.0)
        if np.max(np.abs(Q - Q.T)) > SYMMETRY_RTOL * scale:
            raise InvalidInputError('Q is not symmetric')
        eigs = np.linalg.eigvalsh(Q)
        if eigs[0] < -PSD_RTOL * scale:
            raise InvalidInputError('Q is not positive semi-definite, '
                                    'smallest eigenvalue %.3e' % eigs[0])
        self.Q = _frozen(Q)
        self.B = _frozen(B)

    @property
    def m(self) -> int:
        return self.Q.shape[0]

    @property
    def trace_b(self) -> float:
        return float(np.trace(self.B))

    def __str__(self):
        return 'SystemPair(m=%d,Q=%s,B=%s)' % (self.m, self.Q.tolist(),
                                               self.B.tolist())

    def __repr__(self):
        return str(self)

    def to_json(self):
        """Return the system serialized into a JSON dict."""
        return {'m': self.m, 'Q': self.Q.tolist(), 'B': self.B.tolist()}

    @classmethod
    def from_json(cls, js: Mapping) -> "SystemPair":
        """Build a system from its JSON dict.

        Q is accepted if it is symmetric up to an absolute error of
        :data:`JSON_SYMMETRY_ATOL`, and is then replaced by (Q + Q^T)/2.
        """
        try:
            m = int(js['m'])
            Q = _as_square(js['Q'], 'Q')
            B = _as_square(js['B'], 'B')
        except (KeyError, TypeError) as e:
            raise InvalidInputError('Malformed system JSON: %s' % e)
        if Q.shape != (m, m) or B.shape != (m, m):
            raise InvalidInputError('System JSON declares m=%d but has '
                                    'Q %s and B %s' % (m, Q.shape, B.shape))
        if np.max(np.abs(Q - Q.T)) > JSON_SYMMETRY_ATOL:
            raise InvalidInputError('Q in system JSON is not symmetric')
        return cls((Q + Q.T) / 2, B)


class CovarianceMatrix(object):
    """The covariance matrix Q(t) of a system at a fixed time.

    Attributes
    ----------
    t : float
        The time at which Q(t) was evaluated.
    value : numpy.ndarray
        The symmetric matrix Q(t).
    eigenvalues, eigenvectors : numpy.ndarray
        The symmetric eigendecomposition of Q(t), ascending.
    det : float
        det Q(t), the product of the eigenvalues.
    inv : Optional[numpy.ndarray]
        Q(t)^{-1}, available when Q(t) is positive definite.
    derivative : numpy.ndarray
        Q'(t) = e^{tB} Q e^{tB*}.
    """

    def __init__(self, t: float, value: np.ndarray,
                 derivative: np.ndarray):
        value = (value + value.T) / 2
        eigenvalues, eigenvectors = eigh(value)
        self.t = float(t)
        self.value = _frozen(value)
        self.eigenvalues = _frozen(eigenvalues)
        self.eigenvectors = _frozen(eigenvectors)
        self.derivative = _frozen(derivative)
        self.det = float(np.prod(eigenvalues))
        if eigenvalues[0] > 0:
            inv = (eigenvectors / eigenvalues) @ eigenvectors.T
            self.inv = _frozen((inv + inv.T) / 2)
        else:
            self.inv = None

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def norm(self) -> float:
        return float(max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1])))

    def is_positive(self, tol: float = HYPO_TOL) -> bool:
        """Return True if lambda_min(Q(t)) > tol * ||Q(t)||."""
        return self.lambda_min > tol * self.norm and self.inv is not None

    def require_positive(self, tol: float = HYPO_TOL) -> None:
        """Raise a SingularityError unless Q(t) is positive definite."""
        if not self.is_positive(tol):
            raise SingularityError(
                'Q(t) is singular at t=%g (lambda_min=%.3e), the system is '
                'not hypoelliptic' % (self.t, self.lambda_min))

    def inv_sqrt(self) -> np.ndarray:
        """Return Q(t)^{-1/2}."""
        self.require_positive()
        return (self.eigenvectors / np.sqrt(self.eigenvalues)) @ \
            self.eigenvectors.T

    def __str__(self):
        return 'CovarianceMatrix(t=%g,value=%s,det=%g)' % (
            self.t, self.value.tolist(), self.det)

    def __repr__(self):
        return str(self)

    def to_json(self):
        """Return the covariance matrix serialized into a JSON dict."""
        js = {
            't': self.t,
            'value': self.value.tolist(),
            'det': self.det,
            'lambda_min': self.lambda_min,
        }
        if self.inv is not None:
            js['inv'] = self.inv.tolist()
        return js


class HypoReport(object):
    """The outcome of the hypoellipticity decision.

    Attributes
    ----------
    kalman_rank : int
        Rank of the Kalman controllability matrix.
    lambda_min_at_t : float
        Smallest eigenvalue of Q(t_probe).
    hypoelliptic : bool
        True if Q(t_probe) is positive definite.
    t_probe : float
        The probe time.
    """

    def __init__(self, kalman_rank: int, lambda_min_at_t: float,
                 hypoelliptic: bool, t_probe: float):
        self.kalman_rank = kalman_rank
        self.lambda_min_at_t = lambda_min_at_t
        self.hypoelliptic = hypoelliptic
        self.t_probe = t_probe

    def __str__(self):
        return 'HypoReport(kalman_rank=%d,lambda_min_at_t=%g,' \
               'hypoelliptic=%s,t_probe=%g)' % (
                   self.kalman_rank, self.lambda_min_at_t,
                   self.hypoelliptic, self.t_probe)

    def __repr__(self):
        return str(self)

    def to_json(self):
        return {
            'kalman_rank': self.kalman_rank,
            'lambda_min_at_t': self.lambda_min_at_t,
            'hypoelliptic': self.hypoelliptic,
            't_probe': self.t_probe,
        }


def mat_exp(M, t: float = 1.0) -> np.ndarray:
    """Return e^{tM}.

    The exponential is computed by scaling and squaring with a Padé
    approximant (:func:`scipy.linalg.expm`).

    Parameters
    ----------
    M : array_like
        A real square matrix with finite entries.
    t : float
        The time by which M is scaled.

    Returns
    -------
    numpy.ndarray
        The matrix exponential e^{tM}.

    Raises
    ------
    InvalidInputError
        If M or t is not finite.

    Examples
    --------
    >>> E = mat_exp([[0., 0.], [1., 0.]], 2.0)
    >>> bool(np.allclose(E, [[1., 0.], [2., 1.]]))
    True
    """
    M = _as_square(M, 'M')
    if not math.isfinite(t):
        raise InvalidInputError('t must be finite, got %r' % t)
    return expm(t * M)


def flow(sys: SystemPair, t: float) -> np.ndarray:
    """Return e^{tB}."""
    return mat_exp(sys.B, t)


def flow_adjoint(sys: SystemPair, t: float) -> np.ndarray:
    """Return e^{tB*}."""
    return mat_exp(sys.B.T, t)


def covariance_derivative(sys: SystemPair, t: float) -> np.ndarray:
    """Return Q'(t) = e^{tB} Q e^{tB*}."""
    E = flow(sys, t)
    D = E @ sys.Q @ E.T
    return (D + D.T) / 2


def _require_positive_time(t):
    if not t > 0:
        raise DomainError('t must be positive, got %r' % t)


def covariance(sys: SystemPair, t: float) -> CovarianceMatrix:
    """Return the covariance matrix Q(t) of a system.

    The integral is read off the exponential of the block matrix
    [[-B, Q], [0, B^T]] (Van Loan's method): if the exponential of t times
    this matrix is [[F11, F12], [0, F22]] then Q(t) = F22^T F12.

    Parameters
    ----------
    sys :
        The system (Q, B).
    t :
        A positive time.

    Returns
    -------
    :
        The covariance matrix with its factorizations.

    Raises
    ------
    DomainError
        If t is not positive.
    """
    _require_positive_time(t)
    m = sys.m
    C = np.zeros((2 * m, 2 * m))
    C[:m, :m] = -sys.B
    C[:m, m:] = sys.Q
    C[m:, m:] = sys.B.T
    F = expm(t * C)
    value = F[m:, m:].T @ F[:m, m:]
    derivative = F[m:, m:].T @ sys.Q @ F[m:, m:]
    logger.debug('Covariance at t=%g computed from %dx%d block exponential',
                 t, 2 * m, 2 * m)
    return CovarianceMatrix(t, value, (derivative + derivative.T) / 2)


def covariance_quad(sys: SystemPair, t: float, n: int = 16) -> np.ndarray:
    """Return Q(t) by composite Gauss-Legendre quadrature.

    This is an independent oracle for :func:`covariance`: the interval
    [0, t] is split into n panels with :data:`QUAD_ORDER` nodes each.

    Raises
    ------
    DomainError
        If t is not positive or n < 4.
    """
    _require_positive_time(t)
    if n < 4:
        raise DomainError('At least 4 subdivisions are needed, got %d' % n)
    nodes, weights = leggauss(QUAD_ORDER)
    edges = np.linspace(0.0, t, n + 1)
    total = np.zeros((sys.m, sys.m))
    for a, b in zip(edges[:-1], edges[1:]):
        half = (b - a) / 2
        for node, weight in zip(nodes, weights):
            E = expm((a + half * (node + 1)) * sys.B)
            total += half * weight * (E @ sys.Q @ E.T)
    return (total + total.T) / 2


def psd_sqrt(Q) -> np.ndarray:
    """Return the symmetric positive semi-definite square root of Q.

    Eigenvalues down to -1e-12 ||Q|| are clamped to zero.

    Raises
    ------
    InvalidInputError
        If Q has an eigenvalue below -1e-12 ||Q||.
    """
    Q = _as_square(Q, 'Q')
    eigenvalues, eigenvectors = eigh((Q + Q.T) / 2)
    scale = max(abs(eigenvalues[0]), abs(eigenvalues[-1]))
    if eigenvalues[0] < -PSD_RTOL * scale:
        raise InvalidInputError('Matrix is not positive semi-definite, '
                                'smallest eigenvalue %.3e' % eigenvalues[0])
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (eigenvectors * roots) @ eigenvectors.T


def kalman_rank(sys: SystemPair) -> int:
    """Return the rank of the Kalman matrix [A, BA, ..., B^{m-1}A].

    Here A = Q^{1/2}. The rank is decided by singular values with the
    threshold m * ||C||_2 * eps * 64.
    """
    A = psd_sqrt(sys.Q)
    blocks = [A]
    for _ in range(sys.m - 1):
        blocks.append(sys.B @ blocks[-1])
    C = np.hstack(blocks)
    singular_values = np.linalg.svd(C, compute_uv=False)
    if singular_values[0] == 0:
        return 0
    threshold = sys.m * singular_values[0] * np.finfo(float).eps * 64
    return int(np.sum(singular_values > threshold))


def hypoelliptic(sys: SystemPair, t_probe: float = 1.0,
                 tol: float = HYPO_TOL) -> HypoReport:
    """Decide whether the system satisfies the Hörmander condition.

    The spectral criterion lambda_min(Q(t_probe)) > tol ||Q(t_probe)|| is
    cross-checked against the Kalman rank condition.

    Parameters
    ----------
    sys :
        The system (Q, B).
    t_probe :
        A positive probe time. If the condition holds for one t it holds
        for all t > 0.
    tol :
        Relative threshold for the smallest eigenvalue.

    Returns
    -------
    :
        A report with the Kalman rank, lambda_min and the decision.

    Raises
    ------
    InconsistencyError
        If the two criteria disagree, which signals a tolerance that is
        not adapted to the system.
    """
    cov = covariance(sys, t_probe)
    spectral = cov.is_positive(tol)
    rank = kalman_rank(sys)
    if spectral != (rank == sys.m):
        raise InconsistencyError(
            'Spectral criterion (lambda_min=%.3e) and Kalman rank (%d of %d)'
            ' disagree at t=%g' % (cov.lambda_min, rank, sys.m, t_probe))
    return HypoReport(kalman_rank=rank, lambda_min_at_t=cov.lambda_min,
                      hypoelliptic=spectral, t_probe=t_probe)


def k_matrix(sys: SystemPair, t: float) -> np.ndarray:
    """Return K(t) = 4 pi t^{-1} Q(t) e^{-tB}.

    Raises
    ------
    SingularityError
        If the system is not hypoelliptic.
    """
    cov = covariance(sys, t)
    cov.require_positive()
    K = 4 * np.pi / t * cov.value @ flow(sys, -t)
    expected = (4 * np.pi / t) ** sys.m * np.exp(-t * sys.trace_b) * cov.det
    det = np.linalg.det(K)
    if not det > 0 or abs(det - expected) > 1e-8 * expected:
        raise InvariantViolationError('det K(t)=%r differs from %r'
                                      % (det, expected))
    return K


def covariance_additivity_residual(sys: SystemPair, s: float,
                                   t: float) -> float:
    """Return ||Q(t+s) - Q(t) - e^{tB} Q(s) e^{tB*}|| / (1 + ||Q(t+s)||)."""
    total = covariance(sys, t + s).value
    E = flow(sys, t)
    diff = total - covariance(sys, t).value - E @ covariance(sys, s).value @ E.T
    return float(np.linalg.norm(diff, 2) / (1 + np.linalg.norm(total, 2)))


def covariance_monotonicity_gap(sys: SystemPair, s: float, t: float) -> float:
    """Return lambda_min(Q(t+s) - Q(t)), which is non-negative."""
    diff = covariance(sys, t + s).value - covariance(sys, t).value
    return float(np.linalg.eigvalsh((diff + diff.T) / 2)[0])


def id_residual(sys: SystemPair, t: float) -> float:
    """Return the norm of

        e^{-tB} Q e^{-tB*} - Q + B G + G B*,  G = e^{-tB} Q(t) e^{-tB*},

    relative to 1 + ||e^{-tB} Q e^{-tB*}|| + ||B G||.
    """
    E = flow(sys, -t)
    G = E @ covariance(sys, t).value @ E.T
    conjugated = E @ sys.Q @ E.T
    diff = conjugated - sys.Q + sys.B @ G + G @ sys.B.T
    scale = 1 + np.linalg.norm(conjugated, 2) + np.linalg.norm(sys.B @ G, 2)
    return float(np.linalg.norm(diff, 2) / scale)


def flow_group_residual(sys: SystemPair, s: float, t: float) -> float:
    """Return ||e^{(s+t)B} - e^{sB} e^{tB}|| / (1 + ||e^{(s+t)B}||)."""
    total = flow(sys, s + t)
    return float(np.linalg.norm(total - flow(sys, s) @ flow(sys, t), 2) /
                 (1 + np.linalg.norm(total, 2)))


def derivative_residual(sys: SystemPair, t: float, h: float) -> float:
    """Return ||(Q(t+h) - Q(t))/h - Q'(t)||, which is O(h)."""
    cov = covariance(sys, t)
    quotient = (covariance(sys, t + h).value - cov.value) / h
    return float(np.linalg.norm(quotient - cov.derivative, 2))


def random_system(m: int, rng: np.random.Generator) -> SystemPair:
    """Return a random system with entries in [-1, 1].

    B has independent uniform entries and Q = G G^T / m for a uniform G, so
    that Q is positive semi-definite with entries in [-1, 1].
    """
    B = rng.uniform(-1, 1, size=(m, m))
    G = rng.uniform(-1, 1, size=(m, m))
    return SystemPair(G @ G.T / m, B)


def free_system(m: int = 1) -> SystemPair:
    """The free Schrödinger equation, Q = I and B = 0."""
    return SystemPair(np.eye(m), np.zeros((m, m)))


def ornstein_uhlenbeck_system(m: int = 1) -> SystemPair:
    """The Schrödinger equation with Ornstein-Uhlenbeck drift, Q = I,
    B = -I."""
    return SystemPair(np.eye(m), -np.eye(m))


def kolmogorov_system(n: int = 1) -> SystemPair:
    """Kolmogorov's degenerate system in (v, x) with m = 2n.

    Q = diag(I_n, 0) and B = [[0, 0], [I_n, 0]].
    """
    Q = np.zeros((2 * n, 2 * n))
    Q[:n, :n] = np.eye(n)
    B = np.zeros((2 * n, 2 * n))
    B[n:, :n] = np.eye(n)
    return SystemPair(Q, B)


def kramers_system() -> SystemPair:
    """The Kramers system, Q = diag(1, 0) and B = [[0, -1], [1, 0]]."""
    return SystemPair([[1.0, 0.0], [0.0, 0.0]], [[0.0, -1.0], [1.0, 0.0]])
