"""FFT-grid and kernel-quadrature propagators.

Fields are sampled on the periodic box [-L, L)^m with n points per axis,
x_j = -L + 2L j / n, and transformed to the centered frequencies
xi_k = k / (2L), k in [-n/2, n/2). The discrete transforms are scaled by
the cell volumes so that they approximate the continuous Fourier transform

    Ff(xi) = int exp(-2 pi i <xi, x>) f(x) dx.

The propagator removes the drift with v(x, t) = f(e^{-tB} x, t), solves
for v exactly on the frequency grid with the unimodular multiplier
exp(-4 pi^2 i <Q(t) xi, xi>), and resamples f(x, t) = v(e^{tB} x, t).
"""

import logging
import math
from typing import Callable, Optional, Union

import numpy as np
from scipy import fft
from scipy.ndimage import map_coordinates

from .errors import CoverageError, DomainError, FieldStateError, \
    InvalidInputError, ResolutionError
from .matcore import SystemPair, covariance, flow
from .packets import GaussianPacket, packet_eval, packet_integral
from .resources import get_threads

__all__ = [
    "GridField",
    "PropagationSettings",
    "grid_points",
    "grid_frequencies",
    "grid_sample",
    "grid_dft",
    "grid_idft",
    "grid_norm",
    "grid_generator",
    "grid_evolve_drift_free",
    "grid_propagate",
    "relative_l2",
    "kernel_propagate",
    "fresnel_mass",
    "fresnel_mass_exact",
    "pde_residual",
    "commutation_residual",
]

logger = logging.getLogger(__name__)

POSITION = 'position'
FREQUENCY = 'frequency'

FOURIER_ZEROPAD = 'fourier_zeropad'
CUBIC = 'cubic'

#: Fraction of the spectral energy allowed outside the effective bandwidth
BANDWIDTH_TAIL = 1e-12
#: Modulus, relative to its maximum, defining the support of a sampled datum
SUPPORT_LEVEL = 1e-12
#: Largest phase change per frequency cell accepted by the chirp guard
CHIRP_PHASE_LIMIT = math.pi
#: Largest phase change per cell accepted by the kernel quadrature guard
KERNEL_PHASE_LIMIT = 2 * math.pi
#: Relative mass loss above which a truncation warning is logged
TRUNCATION_WARN_LEVEL = 1e-6


class GridField(object):
    """Complex samples of a function on a uniform periodic box.

    Parameters
    ----------
    values : array_like
        Complex samples with shape (n,) * m.
    L : float
        Half width of the box.
    n : int
        Samples per axis, a power of two of at least 16.
    m : int
        Dimension, 1 or 2.
    space : str
        Either ``position`` or ``frequency``.
    mask : Optional[numpy.ndarray]
        Boolean array marking the samples at which the values are valid,
        set by :func:`grid_propagate`.
    """

    def __init__(self, values, L: float, n: int, m: int,
                 space: str = POSITION, mask: Optional[np.ndarray] = None):
        _check_geometry(L, n, m)
        if space not in (POSITION, FREQUENCY):
            raise InvalidInputError('Unknown space %s' % space)
        values = np.array(values, dtype=complex)
        if values.shape != (n,) * m:
            raise InvalidInputError('Values must have shape %s, got %s'
                                    % ((n,) * m, values.shape))
        values.setflags(write=False)
        if mask is not None:
            mask = np.array(mask, dtype=bool)
            mask.setflags(write=False)
        self.values = values
        self.L = float(L)
        self.n = int(n)
        self.m = int(m)
        self.space = space
        self.mask = mask

    @property
    def h(self) -> float:
        """The position-space cell width 2L/n."""
        return 2 * self.L / self.n

    @property
    def dxi(self) -> float:
        """The frequency-space cell width 1/(2L)."""
        return 1 / (2 * self.L)

    @property
    def cell_volume(self) -> float:
        return (self.h if self.space == POSITION else self.dxi) ** self.m

    def coordinates(self) -> np.ndarray:
        """Return the sample coordinates, shape (n,) * m + (m,)."""
        if self.space == POSITION:
            return grid_points(self.L, self.n, self.m)
        return grid_frequencies(self.L, self.n, self.m)

    def __str__(self):
        return 'GridField(m=%d,L=%g,n=%d,space=%s)' % (self.m, self.L,
                                                       self.n, self.space)

    def __repr__(self):
        return str(self)

    def to_json(self):
        """Return the metadata of the field as a JSON dict."""
        return {'m': self.m, 'L': self.L, 'n': self.n, 'space': self.space}


class PropagationSettings(object):
    """Settings of :func:`grid_propagate`.

    Parameters
    ----------
    interpolation : str
        ``fourier_zeropad`` (trigonometric refinement followed by cubic
        splines) or ``cubic`` (cubic splines on the original samples).
    margin_factor : Optional[float]
        The evaluation box is [-L/margin, L/margin]^m. If not given, it is
        ceil(max(1, ||e^{tB}||_2, ||e^{tB}||_inf)).
    chirp_resolution_guard : bool
        If True, under-resolved chirps raise a ResolutionError, otherwise
        they are logged as warnings. The kernel backend of
        :func:`hypoprop.api.propagate` applies it to its quadrature guard.
    zeropad_factor : int
        Refinement factor of the trigonometric interpolation.
    """

    def __init__(self, interpolation: str = FOURIER_ZEROPAD,
                 margin_factor: Optional[float] = None,
                 chirp_resolution_guard: bool = True,
                 zeropad_factor: int = 4):
        if interpolation not in (FOURIER_ZEROPAD, CUBIC):
            raise InvalidInputError('Unknown interpolation %s'
                                    % interpolation)
        if margin_factor is not None and not margin_factor >= 1:
            raise DomainError('margin_factor must be at least 1')
        if zeropad_factor < 1 or zeropad_factor & (zeropad_factor - 1):
            raise DomainError('zeropad_factor must be a power of two')
        self.interpolation = interpolation
        self.margin_factor = margin_factor
        self.chirp_resolution_guard = chirp_resolution_guard
        self.zeropad_factor = zeropad_factor

    def with_margin(self, margin_factor: float) -> "PropagationSettings":
        return PropagationSettings(self.interpolation, margin_factor,
                                   self.chirp_resolution_guard,
                                   self.zeropad_factor)

    def __str__(self):
        return 'PropagationSettings(%s,%s,%s,%d)' % (
            self.interpolation, self.margin_factor,
            self.chirp_resolution_guard, self.zeropad_factor)

    def __repr__(self):
        return str(self)


def _check_geometry(L, n, m):
    if m not in (1, 2):
        raise DomainError('Grids support m = 1 or 2, got m = %s' % m)
    if not L > 0:
        raise DomainError('L must be positive, got %r' % L)
    if n < 16 or n & (n - 1):
        raise DomainError('n must be a power of two >= 16, got %r' % n)


def _mesh(axis: np.ndarray, m: int) -> np.ndarray:
    return np.stack(np.meshgrid(*([axis] * m), indexing='ij'), axis=-1)


def grid_points(L: float, n: int, m: int) -> np.ndarray:
    """Return the sample points x_j = -L + 2L j/n, shape (n,) * m + (m,)."""
    _check_geometry(L, n, m)
    return _mesh(-L + 2 * L * np.arange(n) / n, m)


def grid_frequencies(L: float, n: int, m: int) -> np.ndarray:
    """Return the frequencies xi_k = k/(2L), k in [-n/2, n/2)."""
    _check_geometry(L, n, m)
    return _mesh(np.arange(-n // 2, n // 2) / (2 * L), m)


def grid_sample(source: Union[GridField, GaussianPacket, Callable], L: float,
                n: int, m: int) -> GridField:
    """Sample a packet or a callback on the grid.

    Parameters
    ----------
    source :
        A packet, or a function taking an array of points of shape
        (..., m) and returning the values (a scalar is broadcast). A
        position field on the same grid is returned as is.
    L :
        Half width of the box.
    n :
        Samples per axis.
    m :
        Dimension.

    Returns
    -------
    :
        A position-space field.
    """
    if isinstance(source, GridField):
        if (source.L, source.n, source.m) != (L, n, m) or \
                source.space != POSITION:
            raise InvalidInputError('Field %s does not match the grid '
                                    '(L=%g, n=%d, m=%d)' % (source, L, n, m))
        return source
    points = grid_points(L, n, m)
    if isinstance(source, GaussianPacket):
        if source.m != m:
            raise InvalidInputError('Packet has dimension %d, grid %d'
                                    % (source.m, m))
        values = packet_eval(source, points)
    else:
        values = np.broadcast_to(np.asarray(source(points), dtype=complex),
                                 (n,) * m)
    return GridField(values, L, n, m, POSITION)


def _signs(n: int, m: int) -> np.ndarray:
    # (-1)^k for the centered index, n/2 being even
    axis = (-1.0) ** np.arange(n)
    signs = axis
    for _ in range(m - 1):
        signs = np.multiply.outer(signs, axis)
    return signs


def grid_dft(F: GridField) -> GridField:
    """Return the frequency-space field approximating the Fourier transform
    at xi_k = k/(2L).

    Raises
    ------
    FieldStateError
        If the field is not in position space.
    """
    if F.space != POSITION:
        raise FieldStateError('grid_dft expects a position-space field')
    shifted = fft.fftshift(fft.fftn(F.values, workers=get_threads()))
    return GridField(F.h ** F.m * _signs(F.n, F.m) * shifted, F.L, F.n, F.m,
                     FREQUENCY)


def grid_idft(F: GridField) -> GridField:
    """Return the position-space field whose transform is F.

    Raises
    ------
    FieldStateError
        If the field is not in frequency space.
    """
    if F.space != FREQUENCY:
        raise FieldStateError('grid_idft expects a frequency-space field')
    values = fft.ifftn(fft.ifftshift(_signs(F.n, F.m) * F.values),
                       workers=get_threads()) / F.h ** F.m
    return GridField(values, F.L, F.n, F.m, POSITION)


def grid_norm(F: GridField) -> float:
    """Return the cell-volume weighted L2 norm of a field."""
    return float(np.sqrt(np.sum(np.abs(F.values) ** 2) * F.cell_volume))


def relative_l2(F1: GridField, F2: GridField,
                mask: Optional[np.ndarray] = None) -> float:
    """Return ||F1 - F2|| / ||F2|| over a mask.

    If no mask is given, the intersection of the masks of the two fields
    is used. If F2 vanishes on the mask the absolute difference is
    returned.
    """
    a = F1.values if isinstance(F1, GridField) else np.asarray(F1)
    b = F2.values if isinstance(F2, GridField) else np.asarray(F2)
    if mask is None:
        mask = np.ones(a.shape, dtype=bool)
        for F in (F1, F2):
            if isinstance(F, GridField) and F.mask is not None:
                mask = mask & F.mask
    diff = np.sqrt(np.sum(np.abs(a - b)[mask] ** 2))
    ref = np.sqrt(np.sum(np.abs(b)[mask] ** 2))
    return float(diff / ref) if ref > 0 else float(diff)


def _effective_bandwidth(hat: GridField) -> float:
    """Return the largest radius |xi| such that the spectral energy at or
    beyond it exceeds BANDWIDTH_TAIL of the total."""
    energy = np.abs(hat.values).ravel() ** 2
    total = energy.sum()
    if total == 0:
        return 0.0
    xi = np.linalg.norm(hat.coordinates(), axis=-1).ravel()
    order = np.argsort(xi, kind='stable')[::-1]
    tail = np.cumsum(energy[order])
    return float(xi[order][np.argmax(tail > BANDWIDTH_TAIL * total)])


def _resolution_problem(message: str, guard: bool):
    if guard:
        raise ResolutionError(message)
    logger.warning(message)


def _chirp_multiplier(hat: GridField, Qt: np.ndarray) -> np.ndarray:
    xi = hat.coordinates()
    return np.exp(-4j * np.pi ** 2 *
                  np.einsum('...i,ij,...j->...', xi, Qt, xi))


def grid_evolve_drift_free(F: GridField, sys: SystemPair, t: float,
                           guard: bool = True) -> GridField:
    """Return v(., t), the solution with the drift removed.

    The transform of the field is multiplied by exp(-4 pi^2 i <Q(t) xi, xi>)
    and transformed back, so the L2 norm is preserved up to rounding.

    Raises
    ------
    ResolutionError
        If guard is on and 8 pi^2 lambda_max(Q(t)) xi_eff dxi > pi, where
        xi_eff is the effective bandwidth of F.
    """
    if F.m != sys.m:
        raise InvalidInputError('Field has dimension %d, system %d'
                                % (F.m, sys.m))
    if not t > 0:
        raise DomainError('t must be positive, got %r' % t)
    cov = covariance(sys, t)
    hat = grid_dft(F)
    xi_eff = _effective_bandwidth(hat)
    phase_step = 8 * np.pi ** 2 * max(cov.lambda_max, 0.0) * xi_eff * F.dxi
    logger.debug('Chirp phase step %.3g at t=%g (bandwidth %.3g)',
                 phase_step, t, xi_eff)
    if phase_step > CHIRP_PHASE_LIMIT:
        _resolution_problem('Chirp under-resolved at t=%g: phase step %.3g '
                            '> pi, increase L' % (t, phase_step), guard)
    multiplied = GridField(hat.values * _chirp_multiplier(hat, cov.value),
                           F.L, F.n, F.m, FREQUENCY)
    return grid_idft(multiplied)


def _refine(v: GridField, factor: int) -> GridField:
    hat = grid_dft(v)
    nf = v.n * factor
    offset = (nf - v.n) // 2
    padded = np.zeros((nf,) * v.m, dtype=complex)
    padded[(slice(offset, offset + v.n),) * v.m] = hat.values
    return grid_idft(GridField(padded, v.L, nf, v.m, FREQUENCY))


def _interpolate(v: GridField, points: np.ndarray,
                 settings: PropagationSettings) -> np.ndarray:
    if settings.interpolation == FOURIER_ZEROPAD:
        v = _refine(v, settings.zeropad_factor)
    coords = ((points + v.L) / v.h).T
    kwargs = dict(order=3, mode='grid-wrap')
    return map_coordinates(v.values.real, coords, **kwargs) + \
        1j * map_coordinates(v.values.imag, coords, **kwargs)


def _default_margin(E: np.ndarray) -> float:
    return float(math.ceil(max(1.0, np.linalg.norm(E, 2),
                               np.linalg.norm(E, np.inf)) - 1e-12))


def grid_propagate(F: GridField, sys: SystemPair, t: float,
                   settings: Optional[PropagationSettings] = None) \
        -> GridField:
    """Return f(., t) = T(t)F on the grid of F.

    Parameters
    ----------
    F :
        A position-space field sampling a function whose mass outside the
        box is negligible.
    sys :
        The system (Q, B).
    t :
        A positive time.
    settings :
        Interpolation, margin and guard settings.

    Returns
    -------
    :
        A position-space field on the same grid, with values on the
        evaluation box [-L/margin, L/margin]^m and zero elsewhere; its mask
        marks the evaluation box.

    Raises
    ------
    CoverageError
        If e^{tB} maps an evaluation point outside the sample box.
    ResolutionError
        If the chirp is under-resolved and the guard is on.
    """
    settings = settings or PropagationSettings()
    v = grid_evolve_drift_free(F, sys, t,
                               guard=settings.chirp_resolution_guard)
    E = flow(sys, t)
    margin = settings.margin_factor or _default_margin(E)
    points = grid_points(F.L, F.n, F.m)
    mask = np.all(np.abs(points) <= F.L / margin, axis=-1)
    flowed = points[mask] @ E.T
    reach = np.max(np.abs(flowed)) if flowed.size else 0.0
    if reach > F.L * (1 + 1e-12):
        raise CoverageError('e^{tB} maps the evaluation box outside the '
                            'sample box (reach %.4g > L=%g), increase '
                            'margin_factor' % (reach, F.L))
    values = np.zeros(F.values.shape, dtype=complex)
    if np.array_equal(E, np.eye(F.m)):
        values[mask] = v.values[mask]
    else:
        values[mask] = _interpolate(v, flowed, settings)
    result = GridField(values, F.L, F.n, F.m, POSITION, mask=mask)
    expected = grid_norm(F) ** 2 * math.exp(-t * sys.trace_b)
    if expected > 0:
        lost = 1 - grid_norm(result) ** 2 / expected
        if lost > TRUNCATION_WARN_LEVEL:
            logger.warning('A fraction %.3g of the mass lies outside the '
                           'evaluation box at t=%g', lost, t)
    logger.debug('Propagated %s to t=%g with margin %g', F, t, margin)
    return result


def grid_generator(F: GridField, sys: SystemPair) -> GridField:
    """Return L F = i tr(Q D^2 F) + <Bx, grad F> by spectral
    differentiation."""
    if F.space != POSITION:
        raise FieldStateError('grid_generator expects a position field')
    hat = grid_dft(F)
    xi = hat.coordinates()
    x = grid_points(F.L, F.n, F.m)
    # i tr(Q D^2) has the symbol -4 pi^2 i <Q xi, xi>
    diffusion = -4j * np.pi ** 2 * np.einsum('...i,ij,...j->...',
                                            xi, sys.Q, xi)
    values = grid_idft(GridField(hat.values * diffusion, F.L, F.n, F.m,
                                 FREQUENCY)).values
    bx = x @ sys.B.T
    for j in range(F.m):
        if not np.any(bx[..., j]):
            continue
        derivative = grid_idft(GridField(2j * np.pi * xi[..., j] *
                                         hat.values, F.L, F.n, F.m,
                                         FREQUENCY)).values
        values = values + bx[..., j] * derivative
    return GridField(values, F.L, F.n, F.m, POSITION, mask=F.mask)


def _kernel_prefactor(det: float, m: int) -> complex:
    return (4 * np.pi) ** (-m / 2) * np.exp(-1j * m * np.pi / 4) / \
        math.sqrt(det)


def kernel_propagate(source: Union[GaussianPacket, Callable],
                     sys: SystemPair, t: float, x, L: float, n: int,
                     guard: bool = True) -> Union[complex, np.ndarray]:
    """Return f(x, t) by trapezoidal quadrature of the kernel
    representation

        f(x, t) = int S(e^{tB} x, y, t) phi(y) dy,
        S(z, y, t) = (4 pi)^{-m/2} e^{-i m pi/4} det Q(t)^{-1/2}
                     exp(i <Q(t)^{-1}(y - z), y - z>/4).

    Parameters
    ----------
    source :
        The initial datum phi, a packet or a callback on points.
    sys :
        A hypoelliptic system.
    t :
        A positive time.
    x :
        A point, or an array of points of shape (N, m).
    L, n :
        The quadrature box [-L, L)^m and the number of nodes per axis.
    guard :
        If True, raise a ResolutionError when the kernel phase changes by
        more than 2 pi per cell on the support of phi.
    """
    if not t > 0:
        raise DomainError('t must be positive, got %r' % t)
    cov = covariance(sys, t)
    cov.require_positive()
    phi = grid_sample(source, L, n, sys.m)
    y = grid_points(L, n, sys.m)
    xs = np.asarray(x, dtype=float)
    single = xs.ndim <= 1
    xs = xs.reshape(-1, sys.m)
    E = flow(sys, t)
    modulus = np.abs(phi.values)
    support = y[modulus > SUPPORT_LEVEL * modulus.max()] \
        if modulus.max() > 0 else y.reshape(-1, sys.m)[:0]
    prefactor = _kernel_prefactor(cov.det, sys.m)
    results = []
    for xt in xs @ E.T:
        if len(support):
            gradient = np.abs((support - xt) @ cov.inv) / 2
            step = float(gradient.max()) * phi.h
            if step > KERNEL_PHASE_LIMIT:
                _resolution_problem('Kernel under-resolved at x=%s: phase '
                                    'step %.3g > 2 pi' % (xt, step), guard)
        d = y - xt
        phase = np.einsum('...i,ij,...j->...', d, cov.inv, d) / 4
        results.append(prefactor * phi.h ** sys.m *
                       np.sum(np.exp(1j * phase) * phi.values))
    return complex(results[0]) if single else np.array(results)


def _fresnel_packet(sys: SystemPair, t: float, x, eps: float,
                    mode: str) -> GaussianPacket:
    cov = covariance(sys, t)
    cov.require_positive()
    x = np.asarray(x, dtype=float).reshape(sys.m)
    if mode == 'y':
        A = np.eye(sys.m)
        z = flow(sys, t) @ x
    elif mode == 'x':
        A = flow(sys, t)
        z = x
    else:
        raise InvalidInputError('mode must be x or y, got %s' % mode)
    G = A.T @ cov.inv @ A
    M = eps * np.eye(sys.m) - 0.25j * G
    w = -0.5j * (A.T @ cov.inv @ z)
    c = _kernel_prefactor(cov.det, sys.m) * np.exp(0.25j * z @ cov.inv @ z)
    return GaussianPacket(M, w, c)


def fresnel_mass(sys: SystemPair, t: float, x, eps: float, L: float,
                 n: int, mode: str = 'y', guard: bool = True) -> complex:
    """Return the damped kernel mass by trapezoidal quadrature.

    In mode ``y`` this is the integral of S(e^{tB} x, y, t) exp(-eps |y|^2)
    over y, which tends to 1 as eps decreases. In mode ``x`` the given
    point is held fixed as y and the integral of
    S(e^{tB} x', y, t) exp(-eps |x'|^2) over x' tends to e^{-t tr B}.
    """
    if not eps > 0:
        raise DomainError('eps must be positive, got %r' % eps)
    integrand = _fresnel_packet(sys, t, x, eps, mode)
    field = grid_sample(integrand, L, n, sys.m)
    modulus = np.abs(field.values)
    support = field.coordinates()[modulus > SUPPORT_LEVEL * modulus.max()]
    # Phase gradient of the chirp Im(-<Mx, x> + <w, x>)
    gradient = np.abs(support @ (-2 * integrand.M.imag) +
                      integrand.w.imag)
    step = float(gradient.max()) * field.h if len(support) else 0.0
    logger.debug('Fresnel quadrature phase step %.3g', step)
    if step > KERNEL_PHASE_LIMIT:
        _resolution_problem('Fresnel quadrature under-resolved: phase step '
                            '%.3g > 2 pi' % step, guard)
    return complex(np.sum(field.values) * field.cell_volume)


def fresnel_mass_exact(sys: SystemPair, t: float, x, eps: float,
                       mode: str = 'y') -> complex:
    """Return the closed form of :func:`fresnel_mass`, a complex Gaussian
    integral."""
    if not eps > 0:
        raise DomainError('eps must be positive, got %r' % eps)
    return packet_integral(_fresnel_packet(sys, t, x, eps, mode))


def pde_residual(F0: GridField, sys: SystemPair, t: float, dt: float,
                 settings: Optional[PropagationSettings] = None) -> float:
    """Return the relative L2 residual of the equation

        d_t f - i tr(Q D^2 f) - <Bx, grad f> = 0

    at time t, with the time derivative by central differences of step dt
    and the space derivatives spectral.
    """
    if not 0 < dt < t:
        raise DomainError('dt must be in (0, t), got %r' % dt)
    settings = settings or PropagationSettings()
    if settings.margin_factor is None:
        settings = settings.with_margin(_default_margin(flow(sys, t + dt)))
    f_plus = grid_propagate(F0, sys, t + dt, settings)
    f_minus = grid_propagate(F0, sys, t - dt, settings)
    f = grid_propagate(F0, sys, t, settings)
    derivative = (f_plus.values - f_minus.values) / (2 * dt)
    generator = grid_generator(f, sys)
    mask = f.mask & f_plus.mask & f_minus.mask
    return relative_l2(derivative, generator.values, mask)


def commutation_residual(F0: GridField, sys: SystemPair, t: float,
                         settings: Optional[PropagationSettings] = None) \
        -> float:
    """Return the relative L2 difference between L T(t) F0 and
    T(t) L F0."""
    settings = settings or PropagationSettings()
    after = grid_generator(grid_propagate(F0, sys, t, settings), sys)
    before = grid_propagate(grid_generator(F0, sys), sys, t, settings)
    return relative_l2(after, before)
