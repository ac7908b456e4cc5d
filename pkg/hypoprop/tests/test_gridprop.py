import cmath
import math

import numpy as np
import pytest

from hypoprop.errors import CoverageError, DomainError, FieldStateError, \
    InvalidInputError, ResolutionError, SingularityError
from hypoprop.gridprop import FREQUENCY, GridField, PropagationSettings, \
    commutation_residual, fresnel_mass, fresnel_mass_exact, grid_dft, \
    grid_evolve_drift_free, grid_frequencies, grid_generator, grid_idft, \
    grid_norm, grid_points, grid_propagate, grid_sample, kernel_propagate, \
    pde_residual, relative_l2
from hypoprop.matcore import SystemPair, free_system, kolmogorov_system, \
    kramers_system, ornstein_uhlenbeck_system
from hypoprop.packets import GaussianPacket, packet_eval, packet_propagate


def gaussian(m):
    return GaussianPacket(np.eye(m))


def exact_field(sys, t, L, n):
    return grid_sample(packet_propagate(gaussian(sys.m), sys, t), L, n, sys.m)


def test_geometry():
    x = grid_points(4.0, 16, 1)
    assert x.shape == (16, 1)
    assert x[0, 0] == -4.0 and x[8, 0] == 0.0
    xi = grid_frequencies(4.0, 16, 2)
    assert xi.shape == (16, 16, 2)
    assert xi[0, 0, 0] == -1.0
    with pytest.raises(DomainError):
        grid_points(4.0, 100, 1)
    with pytest.raises(DomainError):
        grid_points(4.0, 8, 1)
    with pytest.raises(DomainError):
        grid_points(4.0, 16, 3)
    with pytest.raises(DomainError):
        grid_points(-1.0, 16, 1)
    with pytest.raises(InvalidInputError):
        GridField(np.zeros(32), 4.0, 16, 1)


def test_sample():
    F = grid_sample(lambda x: np.exp(-np.sum(x ** 2, axis=-1)), 8.0, 64, 2)
    G = grid_sample(gaussian(2), 8.0, 64, 2)
    assert relative_l2(F, G) < 1e-14
    assert grid_sample(G, 8.0, 64, 2) is G
    with pytest.raises(InvalidInputError):
        grid_sample(G, 4.0, 64, 2)
    with pytest.raises(InvalidInputError):
        grid_sample(gaussian(1), 8.0, 64, 2)
    constant = grid_sample(lambda x: 1.0, 8.0, 16, 1)
    assert np.all(constant.values == 1)


def test_dft_self_dual():
    # exp(-pi |x|^2) is its own transform
    for m, n in [(1, 128), (2, 128)]:
        F = grid_sample(GaussianPacket(math.pi * np.eye(m)), 8.0, n, m)
        hat = grid_dft(F)
        assert hat.space == FREQUENCY
        xi = hat.coordinates()
        expected = np.exp(-math.pi * np.sum(xi ** 2, axis=-1))
        assert np.max(np.abs(hat.values - expected)) < 1e-10
        back = grid_idft(hat)
        assert np.max(np.abs(back.values - F.values)) < 1e-12
        assert abs(grid_norm(hat) / grid_norm(F) - 1) < 1e-12


def test_dft_space_errors():
    F = grid_sample(gaussian(1), 8.0, 64, 1)
    with pytest.raises(FieldStateError):
        grid_idft(F)
    with pytest.raises(FieldStateError):
        grid_dft(grid_dft(F))
    with pytest.raises(FieldStateError):
        grid_generator(grid_dft(F), free_system(1))


def test_drift_free_stage_unitary():
    F = grid_sample(gaussian(1), 12.0, 1024, 1)
    v = grid_evolve_drift_free(F, ornstein_uhlenbeck_system(1), 0.5)
    assert abs(grid_norm(v) / grid_norm(F) - 1) < 1e-12
    with pytest.raises(DomainError):
        grid_evolve_drift_free(F, free_system(1), 0.0)
    with pytest.raises(InvalidInputError):
        grid_evolve_drift_free(F, free_system(2), 1.0)


@pytest.mark.parametrize('sys,L,n', [
    (free_system(1), 12.0, 1024),
    (ornstein_uhlenbeck_system(1), 12.0, 1024),
    (ornstein_uhlenbeck_system(2), 10.0, 256),
])
def test_propagate_against_packets(sys, L, n):
    t = 0.5
    F = grid_sample(gaussian(sys.m), L, n, sys.m)
    f = grid_propagate(F, sys, t)
    exact = exact_field(sys, t, L, n)
    assert f.mask is not None and f.mask.all()
    assert relative_l2(f, exact) < 1e-6
    expected = grid_norm(F) * math.exp(-t * sys.trace_b / 2)
    assert abs(grid_norm(f) / expected - 1) < 1e-6


def test_propagate_kolmogorov():
    sys = kolmogorov_system()
    t, L, n = 0.5, 16.0, 256
    F = grid_sample(gaussian(2), L, n, 2)
    f = grid_propagate(F, sys, t)
    # e^{tB} stretches by less than 2, so the evaluation box is half the box
    assert not f.mask.all()
    assert np.all(f.values[~f.mask] == 0)
    assert relative_l2(f, exact_field(sys, t, L, n), f.mask) < 1e-4


def test_propagate_cubic_converges():
    sys = ornstein_uhlenbeck_system(1)
    settings = PropagationSettings(interpolation='cubic')
    errors = []
    for n in [128, 256, 512]:
        F = grid_sample(gaussian(1), 12.0, n, 1)
        f = grid_propagate(F, sys, 0.5, settings)
        errors.append(relative_l2(f, exact_field(sys, 0.5, 12.0, n)))
    assert errors[2] < errors[1] < errors[0]
    zeropad = grid_propagate(grid_sample(gaussian(1), 12.0, 128, 1), sys,
                             0.5)
    assert relative_l2(zeropad, exact_field(sys, 0.5, 12.0, 128)) < \
        errors[0]


@pytest.mark.parametrize('sys', [
    free_system(2), kolmogorov_system(), kramers_system(),
])
def test_propagate_against_packets_2d(sys):
    t, L, n = 0.5, 10.0, 256
    F = grid_sample(gaussian(2), L, n, 2)
    f = grid_propagate(F, sys, t)
    assert relative_l2(f, exact_field(sys, t, L, n), f.mask) < 1e-4


@pytest.mark.parametrize('sys,L,n', [
    (ornstein_uhlenbeck_system(1), 12.0, 512),
    (free_system(1), 12.0, 512),
    (kolmogorov_system(), 16.0, 256),
    (kramers_system(), 16.0, 256),
])
def test_grid_semigroup(sys, L, n):
    s, t = 0.25, 0.25
    F = grid_sample(gaussian(sys.m), L, n, sys.m)
    once = grid_propagate(F, sys, s + t)
    twice = grid_propagate(grid_propagate(F, sys, t), sys, s)
    assert relative_l2(twice, once) < 1e-3


@pytest.mark.parametrize('sys,width,L,n', [
    (free_system(1), 1.0, 100.0, 2048),
    (ornstein_uhlenbeck_system(1), 1.0, 300.0, 4096),
    (kolmogorov_system(), 3.5, 220.0, 512),
    (kramers_system(), 3.5, 220.0, 512),
])
def test_norm_identity_battery(sys, width, L, n):
    # exp(-|x|^2 / width^2), wide enough that f(., 4) fits the evaluation box
    F = grid_sample(GaussianPacket(np.eye(sys.m) / width ** 2), L, n, sys.m)
    for t in [0.25, 1.0, 4.0]:
        f = grid_propagate(F, sys, t)
        expected = grid_norm(F) * math.exp(-t * sys.trace_b / 2)
        assert abs(grid_norm(f) / expected - 1) < 1e-4, t


def test_backend_triangle():
    sys = ornstein_uhlenbeck_system(1)
    t, L, n = 0.5, 12.0, 1024
    F = grid_sample(gaussian(1), L, n, 1)
    exact = exact_field(sys, t, L, n)
    grid = grid_propagate(F, sys, t)
    kernel = kernel_propagate(gaussian(1), sys, t, F.coordinates(), L, n)
    assert relative_l2(grid, exact) < 1e-5
    assert relative_l2(kernel, exact.values) < 1e-5
    assert relative_l2(kernel, grid.values) < 1e-5
    evolved = packet_propagate(gaussian(1), sys, t)
    value = kernel_propagate(gaussian(1), sys, t, [0.3], L, n)
    assert abs(value - packet_eval(evolved, [0.3])) < 1e-8
    j = int(np.argmin(np.abs(F.coordinates()[:, 0] - 0.3)))
    node = F.coordinates()[j]
    assert abs(grid.values[j] - packet_eval(evolved, node)) < 1e-7
    assert abs(kernel[j] - grid.values[j]) < 1e-7


@pytest.mark.parametrize('sys', [free_system(2),
                                 ornstein_uhlenbeck_system(2)])
def test_backend_triangle_2d(sys):
    t, L, n = 0.5, 10.0, 256
    F = grid_sample(gaussian(2), L, n, 2)
    grid = grid_propagate(F, sys, t).values[::16, ::16].ravel()
    points = F.coordinates()[::16, ::16].reshape(-1, 2)
    exact = packet_eval(packet_propagate(gaussian(2), sys, t), points)
    kernel = kernel_propagate(gaussian(2), sys, t, points, L, n)
    assert relative_l2(grid, exact) < 1e-4
    assert relative_l2(kernel, exact) < 1e-4
    assert relative_l2(kernel, grid) < 1e-4


def test_coverage_error():
    sys = kolmogorov_system()
    F = grid_sample(gaussian(2), 32.0, 256, 2)
    settings = PropagationSettings(margin_factor=1.0)
    with pytest.raises(CoverageError):
        grid_propagate(F, sys, 1.0, settings)


def test_resolution_guard():
    F = grid_sample(gaussian(1), 12.0, 1024, 1)
    with pytest.raises(ResolutionError):
        grid_propagate(F, free_system(1), 4.0)
    settings = PropagationSettings(chirp_resolution_guard=False)
    f = grid_propagate(F, free_system(1), 4.0, settings)
    assert f.values.shape == (1024,)


def test_long_time_free():
    t, L, n = 4.0, 100.0, 2048
    F = grid_sample(gaussian(1), L, n, 1)
    f = grid_propagate(F, free_system(1), t)
    assert relative_l2(f, exact_field(free_system(1), t, L, n)) < 1e-6


def test_settings_validation():
    with pytest.raises(InvalidInputError):
        PropagationSettings(interpolation='linear')
    with pytest.raises(DomainError):
        PropagationSettings(margin_factor=0.5)
    with pytest.raises(DomainError):
        PropagationSettings(zeropad_factor=3)
    settings = PropagationSettings().with_margin(2.0)
    assert settings.margin_factor == 2.0


def test_generator():
    F = grid_sample(gaussian(1), 12.0, 1024, 1)
    LF = grid_generator(F, free_system(1))
    x = F.coordinates()[..., 0]
    expected = 1j * (4 * x ** 2 - 2) * np.exp(-x ** 2)
    assert relative_l2(LF.values, expected) < 1e-10
    sys = kolmogorov_system()
    F = grid_sample(gaussian(2), 8.0, 64, 2)
    LF = grid_generator(F, sys)
    v, y = F.coordinates()[..., 0], F.coordinates()[..., 1]
    expected = (1j * (4 * v ** 2 - 2) - 2 * v * y) * \
        np.exp(-v ** 2 - y ** 2)
    assert relative_l2(LF.values, expected) < 1e-8


def test_pde_residual_second_order():
    F = grid_sample(gaussian(1), 12.0, 1024, 1)
    coarse = pde_residual(F, free_system(1), 0.3, 1e-2)
    fine = pde_residual(F, free_system(1), 0.3, 5e-3)
    assert coarse < 5e-3
    assert 3 < coarse / fine < 5
    with pytest.raises(DomainError):
        pde_residual(F, free_system(1), 0.3, 0.5)


def test_commutation():
    F = grid_sample(gaussian(1), 12.0, 1024, 1)
    assert commutation_residual(F, free_system(1), 0.5) < 1e-6
    assert commutation_residual(F, ornstein_uhlenbeck_system(1), 0.5) < 1e-5


def test_kernel_against_packets():
    sys = free_system(1)
    t = 0.5
    xs = np.array([[0.0], [0.5], [1.0]])
    values = kernel_propagate(gaussian(1), sys, t, xs, 12.0, 1024)
    exact = packet_eval(packet_propagate(gaussian(1), sys, t), xs)
    assert np.max(np.abs(values - exact)) < 1e-8
    value = kernel_propagate(gaussian(1), sys, t, [0.0], 12.0, 1024)
    assert isinstance(value, complex)
    assert abs(value - 1 / cmath.sqrt(1 + 4j * t)) < 1e-8


def test_kernel_kolmogorov():
    sys = kolmogorov_system()
    t = 1.0
    xs = np.array([[0.0, 0.0], [0.5, -0.5]])
    values = kernel_propagate(gaussian(2), sys, t, xs, 8.0, 128)
    exact = packet_eval(packet_propagate(gaussian(2), sys, t), xs)
    assert np.max(np.abs(values - exact)) < 1e-6


def test_kernel_errors():
    degenerate = SystemPair([[1.0, 0.0], [0.0, 0.0]], np.zeros((2, 2)))
    with pytest.raises(SingularityError):
        kernel_propagate(gaussian(2), degenerate, 1.0, [0.0, 0.0], 8.0, 64)
    with pytest.raises(DomainError):
        kernel_propagate(gaussian(1), free_system(1), 0.0, [0.0], 8.0, 64)
    with pytest.raises(ResolutionError):
        kernel_propagate(gaussian(1), free_system(1), 0.01, [0.0], 12.0, 64)


def test_fresnel_exact_limits():
    eps = 1e-3
    sys = free_system(1)
    value = fresnel_mass_exact(sys, 1.0, [0.0], eps, 'y')
    assert abs(value - 1 / cmath.sqrt(1 + 4j * eps)) < 1e-12
    assert abs(value - 1) < 2.01 * eps
    value = fresnel_mass_exact(sys, 1.0, [0.0], 5e-4, 'y')
    assert abs(value - 1) < 5e-3
    sys = ornstein_uhlenbeck_system(1)
    target = math.exp(-sys.trace_b)
    deviations = [abs(fresnel_mass_exact(sys, 1.0, [0.0], e, 'x') / target
                      - 1) for e in (1e-3, 5e-4)]
    assert deviations[0] < 1e-2
    assert deviations[1] < 5e-3
    assert 1.8 < deviations[0] / deviations[1] < 2.2
    with pytest.raises(InvalidInputError):
        fresnel_mass_exact(sys, 1.0, [0.0], eps, 'z')
    with pytest.raises(DomainError):
        fresnel_mass_exact(sys, 1.0, [0.0], 0.0)


def test_fresnel_quadrature():
    eps = 1e-3
    L = math.sqrt(40 / eps)
    sys = free_system(1)
    value = fresnel_mass(sys, 1.0, [0.0], eps, L, 16384, 'y')
    exact = fresnel_mass_exact(sys, 1.0, [0.0], eps, 'y')
    assert abs(value / exact - 1) < 1e-6
    with pytest.raises(ResolutionError):
        fresnel_mass(sys, 1.0, [0.0], eps, L, 1024, 'y')
