import math

import numpy as np
import pytest

from hypoprop.analysis import LpExponent, beckner_constant, \
    decay_exponent_fit, disguise_residual, dispersion_sweep, \
    dispersive_bound, dispersive_ratio, generator_limit_slope, \
    geometric_grid, hardy_map, hardy_product, hardy_sweep, \
    interpolated_bound, sharpness_witness
from hypoprop.errors import DomainError, InvalidInputError, \
    SingularityError, UnsupportedLimitError
from hypoprop.matcore import SystemPair, free_system, k_matrix, \
    kolmogorov_system, kramers_system, ornstein_uhlenbeck_system
from hypoprop.packets import GaussianPacket, random_packet
from . import appreq


def test_exponent():
    p = LpExponent(1)
    assert p.p_conj == math.inf and p.inv_conj == 0
    p = LpExponent(4 / 3)
    assert appreq(p.p_conj, 4.0)
    with pytest.raises(DomainError):
        LpExponent(0.5)
    with pytest.raises(DomainError):
        LpExponent(3)


def test_beckner_constant():
    assert beckner_constant(1, 2) == 1.0
    assert beckner_constant(2, 2) == 1.0
    p, q = 4 / 3, 4.0
    expected = (p ** (1 / p) / q ** (1 / q)) ** 0.5
    assert abs(beckner_constant(p, 1) - expected) < 1e-14
    assert abs(beckner_constant(LpExponent(p), 3) - expected ** 3) < 1e-14
    assert beckner_constant(p, 1) < 1


def test_bounds_closed_form():
    t = 2.0
    # L1 -> L^inf for the free equation
    bound = dispersive_bound(free_system(1), t, 1)
    assert abs(bound - (4 * math.pi * t) ** -0.5) < 1e-14
    # L2 -> L2 is the norm identity
    for sys in [free_system(2), ornstein_uhlenbeck_system(1),
                kolmogorov_system()]:
        bound = dispersive_bound(sys, t, 2)
        assert abs(bound / math.exp(-t * sys.trace_b / 2) - 1) < 1e-12
    sys = kolmogorov_system()
    bound = dispersive_bound(sys, t, 1)
    assert abs(bound / ((4 * math.pi) ** -1 * (t ** 4 / 12) ** -0.5) - 1) \
        < 1e-9
    for p in [1, 1.2, 1.5, 2]:
        assert dispersive_bound(sys, t, p) <= \
            interpolated_bound(sys, t, p) * (1 + 1e-14)


def test_bound_degenerate():
    degenerate = SystemPair([[1.0, 0.0], [0.0, 0.0]], np.zeros((2, 2)))
    with pytest.raises(SingularityError):
        dispersive_bound(degenerate, 1.0, 1)


def test_random_packets_below_bound():
    rng = np.random.default_rng(2)
    for sys in [free_system(1), ornstein_uhlenbeck_system(2),
                kolmogorov_system(), kramers_system()]:
        for _ in range(50):
            P = random_packet(sys.m, rng)
            t = rng.uniform(0.1, 4)
            p = rng.uniform(1, 2)
            assert dispersive_ratio(P, sys, t, p).ratio <= 1 + 1e-6


def test_witness_attains_bound():
    for sys in [free_system(1), kolmogorov_system(), kramers_system()]:
        for t in [0.25, 1.0, 4.0]:
            P = sharpness_witness(sys, t, 1.0)
            for p in [1, 6 / 5, 4 / 3, 3 / 2, 2]:
                report = dispersive_ratio(P, sys, t, p)
                assert abs(report.ratio - 1) < 1e-8, report
    with pytest.raises(DomainError):
        sharpness_witness(free_system(1), 1.0, 0.0)


def test_dispersion_sweep():
    sys = kolmogorov_system()
    reports = dispersion_sweep(GaussianPacket(np.eye(2)), sys,
                               [1.0, 2.0, 4.0], 1)
    assert [r.t for r in reports] == [1.0, 2.0, 4.0]
    assert all(r.ratio <= 1 for r in reports)
    bounds = [r.bound for r in reports]
    assert bounds[0] > bounds[1] > bounds[2]
    js = reports[0].to_json()
    assert js['p_conj'] == math.inf


def test_geometric_grid():
    grid = geometric_grid(10, 1000, 3)
    assert np.allclose(grid, [10, 100, 1000])
    with pytest.raises(DomainError):
        geometric_grid(0, 10, 3)


@pytest.mark.parametrize('sys,p,slope,tol', [
    (free_system(1), 1, -0.5, 1e-9),
    (free_system(2), 1, -1.0, 1e-9),
    (free_system(3), 1, -1.5, 1e-9),
    (free_system(1), 2, 0.0, 1e-9),
    (kolmogorov_system(), 1, -2.0, 1e-3),
    (kolmogorov_system(), 4 / 3, -1.0, 1e-3),
    (kolmogorov_system(2), 1, -4.0, 1e-3),
    (kramers_system(), 1, -1.0, 5e-2),
])
def test_decay_exponent(sys, p, slope, tol):
    assert abs(decay_exponent_fit(sys, p) - slope) < tol


def test_decay_exponent_grid_check():
    with pytest.raises(InvalidInputError):
        decay_exponent_fit(free_system(1), 1, [1.0, 2.0, 5.0])
    with pytest.raises(InvalidInputError):
        decay_exponent_fit(free_system(1), 1, [1.0])


def test_hardy_free():
    # 16 pi^2 a^2 s^2 / (1 + 16 a^2 s^2) in one dimension
    for a, s in [(1.0, 1.0), (0.25, 2.0), (8.0, 0.5)]:
        report = hardy_product(GaussianPacket([[a]]), free_system(1), s)
        x = 16 * a ** 2 * s ** 2
        assert abs(report.product - math.pi ** 2 * x / (1 + x)) < 1e-9
        assert report.pi_sq_ratio < 1


def test_hardy_sweep_below_pi_sq():
    a_values = [2.0 ** k for k in range(-3, 11)]
    for sys in [free_system(2), ornstein_uhlenbeck_system(1),
                kolmogorov_system(), kramers_system()]:
        for s in [0.25, 1.0, 4.0]:
            reports = hardy_sweep(sys, a_values, s)
            assert len(reports) == len(a_values)
            assert all(r.product < math.pi ** 2 for r in reports)
    reports = hardy_sweep(free_system(1), a_values, 1.0)
    assert reports[-1].pi_sq_ratio > 0.999
    for sys in [free_system(1), free_system(2)]:
        products = [r.product for r in hardy_sweep(sys, a_values, 1.0)]
        assert all(a < b for a, b in zip(products, products[1:]))


def test_hardy_unsupported():
    with pytest.raises(UnsupportedLimitError):
        hardy_product(GaussianPacket([[1 + 1j]]), free_system(1), 1.0)
    with pytest.raises(UnsupportedLimitError):
        hardy_product(GaussianPacket([[1.0]], w=[1.0]), free_system(1), 1.0)
    with pytest.raises(UnsupportedLimitError):
        hardy_product(GaussianPacket(np.diag([1.0, 2.0])),
                      kolmogorov_system(), 1.0)


def test_hardy_map_det():
    sys = kolmogorov_system()
    s = 1.5
    assert abs(np.linalg.det(hardy_map(sys, s)) /
               np.linalg.det(k_matrix(sys, s)) - 1) < 1e-9


def test_disguise():
    rng = np.random.default_rng(4)
    xs = rng.uniform(-1, 1, size=(6, 2))
    for sys in [kolmogorov_system(), kramers_system()]:
        P = random_packet(2, rng)
        assert disguise_residual(P, sys, 1.0, xs) < 1e-9


def test_generator_limit():
    xs = np.linspace(-2, 2, 9)
    hs = np.geomspace(1e-4, 1e-2, 5)
    slope = generator_limit_slope(GaussianPacket(np.eye(1)), free_system(1),
                                  hs, xs)
    assert abs(slope - 1) < 0.1
    xs = np.random.default_rng(0).uniform(-1, 1, size=(8, 2))
    slope = generator_limit_slope(GaussianPacket(np.eye(2)),
                                  kolmogorov_system(), hs, xs)
    assert abs(slope - 1) < 0.1


def test_generator_limit_small_steps():
    hs = np.geomspace(1e-5, 1e-2, 7)
    xs = np.linspace(-2, 2, 9)
    assert generator_limit_slope(GaussianPacket(np.eye(1)), free_system(1),
                                 hs, xs) >= 0.9
    xs = np.random.default_rng(5).uniform(-1, 1, size=(8, 2))
    assert generator_limit_slope(GaussianPacket(np.eye(2)),
                                 kolmogorov_system(), hs, xs) >= 0.9
