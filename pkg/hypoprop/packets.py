"""Closed-form calculus of complex Gaussian wave packets.

A packet is the function

    P(x) = c exp(-<Mx, x> + <w, x>)

with M complex symmetric and Re M positive definite. Packets are closed
under the Fourier transform

    Ff(xi) = int exp(-2 pi i <xi, x>) f(x) dx,

under linear changes of variables, under multiplication by quadratic
chirps, and hence under the propagator T(t) of the drifted Schrödinger
equation. All operations here act on the parameters (M, w, c) only, which
makes this module the exact oracle for the grid backends.
"""

import logging
import math
from typing import List, Mapping, Union

import numpy as np

from .errors import BranchError, DomainError, InvalidInputError, \
    InvariantViolationError, UnsupportedLimitError
from .matcore import SystemPair, covariance, flow_adjoint

__all__ = [
    "GaussianPacket",
    "BranchedDet",
    "packet_eval",
    "sqrt_det_branched",
    "packet_fourier",
    "packet_inverse_fourier",
    "packet_compose_linear",
    "packet_multiply_chirp",
    "packet_scale",
    "packet_integral",
    "packet_propagate",
    "packet_lp_norm",
    "packet_gradient",
    "packet_hessian",
    "packet_generator_eval",
    "packet_parameter_distance",
    "commutation_symbol_residual",
    "random_packet",
]

logger = logging.getLogger(__name__)

#: Relative tolerance for the complex symmetry of M
SYMMETRY_RTOL = 1e-12
#: Relative tolerance on Re(lambda) below which a branch is rejected
BRANCH_RTOL = 1e-12


def _min_real_eig(M: np.ndarray) -> float:
    R = M.real
    return float(np.linalg.eigvalsh((R + R.T) / 2)[0])


class GaussianPacket(object):
    """A complex Gaussian c exp(-<Mx, x> + <w, x>).

    Parameters
    ----------
    M : array_like
        Complex symmetric m x m exponent matrix with Re M positive definite.
    w : Optional[array_like]
        Complex linear term. Default: zero.
    c : complex
        Amplitude. Default: 1.

    Raises
    ------
    InvalidInputError
        If M is not square and symmetric, or Re M has a negative eigenvalue.
    UnsupportedLimitError
        If Re M is positive semi-definite but singular, i.e. the packet is
        (partly) a pure chirp.
    """

    def __init__(self, M, w=None, c: complex = 1.0):
        M = np.array(M, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
            raise InvalidInputError('M must be a non-empty square matrix, '
                                    'got shape %s' % (M.shape,))
        m = M.shape[0]
        w = np.zeros(m, dtype=complex) if w is None else \
            np.array(w, dtype=complex).reshape(-1)
        if w.shape != (m,):
            raise InvalidInputError('w must have %d entries' % m)
        if not (np.all(np.isfinite(M)) and np.all(np.isfinite(w))
                and np.isfinite(c)):
            raise InvalidInputError('Packet parameters must be finite')
        scale = max(1.0, np.max(np.abs(M)))
        if np.max(np.abs(M - M.T)) > SYMMETRY_RTOL * scale:
            raise InvalidInputError('M is not complex symmetric')
        M = (M + M.T) / 2
        lam = _min_real_eig(M)
        if lam < -SYMMETRY_RTOL * scale:
            raise InvalidInputError('Re M is not positive semi-definite, '
                                    'smallest eigenvalue %.3e' % lam)
        if lam <= 0:
            raise UnsupportedLimitError('Re M is singular, pure chirps are '
                                        'not supported as packets')
        M.setflags(write=False)
        w.setflags(write=False)
        self.M = M
        self.w = w
        self.c = complex(c)

    @property
    def m(self) -> int:
        return self.M.shape[0]

    def __call__(self, x):
        return packet_eval(self, x)

    def __str__(self):
        return 'GaussianPacket(m=%d,M=%s,w=%s,c=%s)' % (
            self.m, self.M.tolist(), self.w.tolist(), self.c)

    def __repr__(self):
        return str(self)

    def to_json(self):
        """Return the packet serialized into a JSON dict."""
        return {
            'm': self.m,
            'M_re': self.M.real.tolist(),
            'M_im': self.M.imag.tolist(),
            'w_re': self.w.real.tolist(),
            'w_im': self.w.imag.tolist(),
            'c_re': self.c.real,
            'c_im': self.c.imag,
        }

    @classmethod
    def from_json(cls, js: Mapping) -> "GaussianPacket":
        """Build a packet from its JSON dict. Omitted imaginary parts and
        linear terms default to zero."""
        try:
            m = int(js['m'])
            M = np.array(js['M_re'], dtype=float) + \
                1j * np.array(js.get('M_im', np.zeros((m, m))), dtype=float)
            w = np.array(js.get('w_re', np.zeros(m)), dtype=float) + \
                1j * np.array(js.get('w_im', np.zeros(m)), dtype=float)
            c = complex(js.get('c_re', 1.0), js.get('c_im', 0.0))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidInputError('Malformed packet JSON: %s' % e)
        if M.shape != (m, m):
            raise InvalidInputError('Packet JSON declares m=%d but M has '
                                    'shape %s' % (m, M.shape))
        return cls(M, w, c)


class BranchedDet(object):
    """The square root of the determinant of a complex symmetric matrix
    with positive semi-definite real part.

    Attributes
    ----------
    value : complex
        The product of the principal square roots of the eigenvalues.
    branch_args : List[float]
        The arguments of the eigenvalues, all in [-pi/2, pi/2].
    """

    def __init__(self, value: complex, branch_args: List[float]):
        self.value = value
        self.branch_args = branch_args

    def __str__(self):
        return 'BranchedDet(value=%s,branch_args=%s)' % (self.value,
                                                         self.branch_args)

    def __repr__(self):
        return str(self)


def packet_eval(P: GaussianPacket, x) -> Union[complex, np.ndarray]:
    """Evaluate a packet at a point or at an array of points.

    Parameters
    ----------
    P :
        The packet.
    x :
        A point with m coordinates, or an array of shape (..., m).

    Returns
    -------
    :
        A complex number for a single point, otherwise a complex array of
        shape x.shape[:-1].
    """
    x = np.asarray(x, dtype=float)
    if P.m == 1 and x.ndim == 0:
        x = x.reshape(1)
    if x.shape[-1] != P.m:
        raise InvalidInputError('Points must have %d coordinates' % P.m)
    exponent = -np.einsum('...i,ij,...j->...', x, P.M, x) + x @ P.w
    values = P.c * np.exp(exponent)
    if values.ndim == 0:
        return complex(values)
    return values


def sqrt_det_branched(A) -> BranchedDet:
    """Return the analytic square root of det A.

    For a complex symmetric A with Re A positive semi-definite every
    eigenvalue has a non-negative real part, so taking the principal
    square root of each eigenvalue selects the branch which is positive
    on real positive definite matrices.

    Raises
    ------
    BranchError
        If an eigenvalue has a real part below -1e-12 ||A||.

    Examples
    --------
    >>> root = sqrt_det_branched(np.diag([1 + 1j, 1 - 1j])).value
    >>> bool(np.isclose(root, np.sqrt(2)))
    True
    """
    A = np.asarray(A, dtype=complex)
    scale = max(1.0, np.max(np.abs(A)))
    if not np.any(A.imag):
        eigenvalues = np.linalg.eigvalsh((A.real + A.real.T) / 2)
        if eigenvalues[0] < -BRANCH_RTOL * scale:
            raise BranchError('Real matrix is not positive semi-definite')
        eigenvalues = np.clip(eigenvalues, 0.0, None)
        return BranchedDet(complex(np.prod(np.sqrt(eigenvalues))),
                           [0.0] * len(eigenvalues))
    eigenvalues = np.linalg.eigvals(A)
    if np.min(eigenvalues.real) < -BRANCH_RTOL * scale:
        raise BranchError('Eigenvalue with negative real part %.3e'
                          % np.min(eigenvalues.real))
    eigenvalues = np.where(eigenvalues.real < 0,
                           1j * eigenvalues.imag, eigenvalues)
    return BranchedDet(complex(np.prod(np.sqrt(eigenvalues))),
                       [float(a) for a in np.angle(eigenvalues)])


def _transform(P: GaussianPacket, sign: int) -> GaussianPacket:
    Minv = np.linalg.inv(P.M)
    Minv = (Minv + Minv.T) / 2
    Mt = np.pi ** 2 * Minv
    wt = sign * np.pi * 1j * (Minv @ P.w)
    root = sqrt_det_branched(P.M).value
    ct = P.c * np.pi ** (P.m / 2) / root * np.exp(P.w @ Minv @ P.w / 4)
    return GaussianPacket(Mt, wt, ct)


def packet_fourier(P: GaussianPacket) -> GaussianPacket:
    """Return the Fourier transform of a packet.

    Completing the square gives the exponent matrix pi^2 M^{-1}, the linear
    term -pi i M^{-1} w and the amplitude

        c pi^{m/2} exp(<M^{-1} w, w>/4) / sqrt(det M).

    Examples
    --------
    The Gaussian exp(-pi |x|^2) is its own transform.

    >>> P = packet_fourier(GaussianPacket(np.pi * np.eye(2)))
    >>> bool(np.allclose(P.M, np.pi * np.eye(2)) and np.isclose(P.c, 1))
    True
    """
    return _transform(P, -1)


def packet_inverse_fourier(P: GaussianPacket) -> GaussianPacket:
    """Return the inverse Fourier transform of a packet (kernel
    exp(+2 pi i <xi, x>))."""
    return _transform(P, 1)


def packet_compose_linear(P: GaussianPacket, A) -> GaussianPacket:
    """Return the packet x -> P(Ax) for a real invertible matrix A."""
    A = np.asarray(A, dtype=float)
    if A.shape != (P.m, P.m):
        raise InvalidInputError('A must be %dx%d' % (P.m, P.m))
    return GaussianPacket(A.T @ P.M @ A, A.T @ P.w, P.c)


def packet_multiply_chirp(P: GaussianPacket, S) -> GaussianPacket:
    """Return P(x) exp(-i <Sx, x>) for a real symmetric S."""
    S = np.asarray(S, dtype=float)
    return GaussianPacket(P.M + 1j * (S + S.T) / 2, P.w, P.c)


def packet_scale(P: GaussianPacket, factor: complex) -> GaussianPacket:
    """Return factor * P."""
    return GaussianPacket(P.M, P.w, P.c * factor)


def packet_integral(P: GaussianPacket) -> complex:
    """Return the integral of a packet over R^m, its transform at 0."""
    return packet_fourier(P).c


def packet_propagate(P: GaussianPacket, sys: SystemPair,
                     t: float) -> GaussianPacket:
    """Return T(t)P, the solution at time t with initial datum P.

    On the Fourier side the solution is

        e^{-t tr B} P^(F xi) exp(-4 pi^2 i <Q(t) F xi, F xi>),  F = e^{-tB*},

    so the transform of P is composed with F, multiplied by the chirp and
    transformed back, all on the parameters.

    Parameters
    ----------
    P :
        The initial datum.
    sys :
        The system (Q, B).
    t :
        A non-negative time.

    Returns
    -------
    :
        The exact solution packet.

    Raises
    ------
    DomainError
        If t is negative.
    InvariantViolationError
        If the real part of the result loses positivity.
    """
    if P.m != sys.m:
        raise InvalidInputError('Packet has dimension %d, system %d'
                                % (P.m, sys.m))
    if t < 0:
        raise DomainError('t must be non-negative, got %r' % t)
    if t == 0:
        return P
    Qt = covariance(sys, t).value
    F = flow_adjoint(sys, -t)
    hat = packet_fourier(P)
    M = F.T @ (hat.M + 4j * np.pi ** 2 * Qt) @ F
    M = (M + M.T) / 2
    w = F.T @ hat.w
    c = hat.c * math.exp(-t * sys.trace_b)
    # The chirp only changes Im M, so positivity survives the composition
    if _min_real_eig(M) <= 0:
        raise InvariantViolationError('Re M lost positivity at t=%g' % t)
    result = packet_inverse_fourier(GaussianPacket(M, w, c))
    if _min_real_eig(result.M) <= 0:
        raise InvariantViolationError('Re M lost positivity at t=%g' % t)
    return result


def packet_lp_norm(P: GaussianPacket, p: float) -> float:
    """Return the L^p norm of a packet for p in [1, inf].

    The modulus |P| = |c| exp(-<Rx, x> + <u, x>) with R = Re M and u = Re w
    is a real Gaussian, so

        ||P||_p = |c| (pi/p)^{m/(2p)} det(R)^{-1/(2p)} exp(<R^{-1} u, u>/4)

    and the supremum is |c| exp(<R^{-1} u, u>/4).
    """
    if not p >= 1:
        raise DomainError('p must be in [1, inf], got %r' % p)
    R = P.M.real
    u = P.w.real
    shift = float(u @ np.linalg.solve(R, u)) / 4
    log_c = math.log(abs(P.c)) if P.c != 0 else -math.inf
    if math.isinf(p):
        return math.exp(log_c + shift)
    _, logdet = np.linalg.slogdet(R)
    log_norm = log_c + (P.m * math.log(math.pi / p) - logdet) / (2 * p) \
        + shift
    return math.exp(log_norm)


def _exponent_gradient(P: GaussianPacket, x: np.ndarray) -> np.ndarray:
    return -2 * x @ P.M + P.w


def packet_gradient(P: GaussianPacket, x) -> np.ndarray:
    """Return the gradient of a packet at a point x, P(x)(-2Mx + w)."""
    x = np.asarray(x, dtype=float).reshape(P.m)
    return packet_eval(P, x) * _exponent_gradient(P, x)


def packet_hessian(P: GaussianPacket, x) -> np.ndarray:
    """Return the Hessian of a packet at a point x,
    P(x)(g g^T - 2M) with g = -2Mx + w."""
    x = np.asarray(x, dtype=float).reshape(P.m)
    g = _exponent_gradient(P, x)
    return packet_eval(P, x) * (np.outer(g, g) - 2 * P.M)


def packet_generator_eval(P: GaussianPacket, sys: SystemPair, x) -> complex:
    """Return (LP)(x) for the generator

        L f = i tr(Q D^2 f) + <Bx, grad f>.

    Examples
    --------
    >>> from hypoprop.matcore import free_system
    >>> value = packet_generator_eval(GaussianPacket(np.eye(1)),
    ...                               free_system(1), [0])
    >>> bool(np.isclose(value, -2j))
    True
    """
    x = np.asarray(x, dtype=float).reshape(sys.m)
    H = packet_hessian(P, x)
    grad = packet_gradient(P, x)
    return complex(1j * np.trace(sys.Q @ H) + (sys.B @ x) @ grad)


def packet_parameter_distance(P1: GaussianPacket,
                              P2: GaussianPacket) -> float:
    """Return the max-norm distance between the parameters of two
    packets."""
    if P1.m != P2.m:
        raise InvalidInputError('Packets have different dimensions')
    return float(max(np.max(np.abs(P1.M - P2.M)),
                     np.max(np.abs(P1.w - P2.w)),
                     abs(P1.c - P2.c)))


def _symbol_apply(hat: GaussianPacket, sys: SystemPair,
                  xi: np.ndarray) -> complex:
    # Fourier side of the generator applied to a transformed packet
    value = packet_eval(hat, xi)
    grad = packet_gradient(hat, xi)
    quad = xi @ sys.Q @ xi
    return -((sys.B.T @ xi) @ grad +
             (4j * np.pi ** 2 * quad + sys.trace_b) * value)


def commutation_symbol_residual(P: GaussianPacket, sys: SystemPair,
                                t: float, xis) -> float:
    """Return the relative max difference between the transforms of
    L T(t) P and T(t) L P at the given frequencies.

    The generator acts on the Fourier side through the symbol

        -(<B* xi, grad> + 4 pi^2 i <Q xi, xi> + tr B).
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    hat_t = packet_fourier(packet_propagate(P, sys, t))
    hat = packet_fourier(P)
    F = flow_adjoint(sys, -t)
    Qt = covariance(sys, t).value
    lhs = []
    rhs = []
    for xi in xis:
        lhs.append(_symbol_apply(hat_t, sys, xi))
        eta = F @ xi
        rhs.append(math.exp(-t * sys.trace_b) * _symbol_apply(hat, sys, eta)
                   * np.exp(-4j * np.pi ** 2 * (eta @ Qt @ eta)))
    lhs = np.array(lhs)
    rhs = np.array(rhs)
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(lhs)), 1e-300))


def random_packet(m: int, rng: np.random.Generator,
                  max_shift: float = 1.0) -> GaussianPacket:
    """Return a random packet with Re M >= I/2 and moderate chirp, linear
    term and amplitude."""
    G = rng.uniform(-1, 1, size=(m, m))
    S = rng.uniform(-1, 1, size=(m, m))
    M = G @ G.T / m + 0.5 * np.eye(m) + 1j * (S + S.T) / 2
    w = max_shift * (rng.uniform(-1, 1, size=m) +
                     1j * rng.uniform(-1, 1, size=m))
    c = rng.uniform(0.5, 2) * np.exp(1j * rng.uniform(-np.pi, np.pi))
    return GaussianPacket(M, w, c)
