import cmath
import math

import numpy as np
import pytest

from hypoprop.errors import BranchError, DomainError, InvalidInputError, \
    UnsupportedLimitError
from hypoprop.matcore import free_system, kolmogorov_system, \
    ornstein_uhlenbeck_system, random_system
from hypoprop.packets import GaussianPacket, commutation_symbol_residual, \
    packet_compose_linear, packet_eval, packet_fourier, \
    packet_generator_eval, packet_integral, packet_inverse_fourier, \
    packet_lp_norm, packet_multiply_chirp, packet_parameter_distance, \
    packet_propagate, packet_scale, random_packet, sqrt_det_branched
from . import appreq


gaussian = GaussianPacket(np.eye(1))


def test_packet_validation():
    with pytest.raises(InvalidInputError):
        GaussianPacket([[-1.0]])
    with pytest.raises(InvalidInputError):
        GaussianPacket([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        GaussianPacket(np.eye(2), w=[1.0])
    with pytest.raises(UnsupportedLimitError):
        GaussianPacket([[1j]])
    with pytest.raises(UnsupportedLimitError):
        GaussianPacket([[1.0, 0.0], [0.0, 0.0]])


def test_packet_eval():
    P = GaussianPacket([[1.0]], w=[1.0], c=2.0)
    assert appreq(P(0.0).real, 2.0)
    assert abs(P([1.0]) - 2.0) < 1e-14
    values = packet_eval(P, np.array([[0.0], [1.0], [2.0]]))
    assert values.shape == (3,)
    assert abs(values[2] - 2 * math.exp(-2)) < 1e-14
    with pytest.raises(InvalidInputError):
        packet_eval(GaussianPacket(np.eye(2)), [1.0, 2.0, 3.0])


def test_sqrt_det_branched():
    assert appreq(sqrt_det_branched(np.diag([4.0, 9.0])).value.real, 6.0)
    root = sqrt_det_branched([[1 + 1j]])
    assert abs(root.value - cmath.sqrt(1 + 1j)) < 1e-14
    assert appreq(root.branch_args[0], math.pi / 4)
    with pytest.raises(BranchError):
        sqrt_det_branched(np.diag([-1 + 1j, 1.0]))


def test_fourier_gaussian():
    hat = packet_fourier(gaussian)
    assert abs(hat.M[0, 0] - math.pi ** 2) < 1e-12
    assert abs(hat.c - math.sqrt(math.pi)) < 1e-14
    assert abs(packet_integral(gaussian) - math.sqrt(math.pi)) < 1e-14
    P = packet_fourier(GaussianPacket(math.pi * np.eye(2)))
    assert np.allclose(P.M, math.pi * np.eye(2))
    assert abs(P.c - 1) < 1e-14


def test_fourier_random():
    rng = np.random.default_rng(3)
    for m in [1, 2, 3]:
        for _ in range(10):
            P = random_packet(m, rng)
            hat = packet_fourier(P)
            norm = packet_lp_norm(P, 2)
            assert abs(packet_lp_norm(hat, 2) / norm - 1) < 1e-10
            assert packet_parameter_distance(packet_inverse_fourier(hat),
                                             P) < 1e-10
            reflected = GaussianPacket(P.M, -P.w, P.c)
            assert packet_parameter_distance(packet_fourier(hat),
                                             reflected) < 1e-10


def test_linear_operations():
    P = packet_compose_linear(gaussian, [[2.0]])
    assert appreq(P.M[0, 0].real, 4.0)
    P = packet_multiply_chirp(gaussian, [[3.0]])
    assert abs(P.M[0, 0] - (1 + 3j)) < 1e-14
    P = packet_scale(gaussian, 2j)
    assert P.c == 2j
    with pytest.raises(InvalidInputError):
        packet_compose_linear(gaussian, np.eye(2))


def test_propagate_free():
    # exp(-x^2) evolves into (1 + 4it)^{-1/2} exp(-x^2 / (1 + 4it))
    t = 0.5
    P = packet_propagate(gaussian, free_system(1), t)
    assert abs(P.M[0, 0] - 1 / (1 + 4j * t)) < 1e-12
    assert abs(P.c - 1 / cmath.sqrt(1 + 4j * t)) < 1e-12
    assert np.allclose(P.w, 0)


def test_propagate_trivial():
    assert packet_propagate(gaussian, free_system(1), 0.0) is gaussian
    with pytest.raises(DomainError):
        packet_propagate(gaussian, free_system(1), -1.0)
    with pytest.raises(InvalidInputError):
        packet_propagate(gaussian, free_system(2), 1.0)


def test_propagate_norm_and_semigroup():
    rng = np.random.default_rng(5)
    systems = [ornstein_uhlenbeck_system(2), kolmogorov_system()] + \
        [random_system(2, rng) for _ in range(5)]
    for sys in systems:
        P = random_packet(2, rng)
        s, t = rng.uniform(0.05, 1, size=2)
        evolved = packet_propagate(P, sys, t)
        ratio = packet_lp_norm(evolved, 2) / packet_lp_norm(P, 2)
        assert abs(ratio / math.exp(-t * sys.trace_b / 2) - 1) < 1e-10
        composed = packet_propagate(evolved, sys, s)
        assert packet_parameter_distance(
            composed, packet_propagate(P, sys, s + t)) < 1e-10


def test_lp_norm():
    assert abs(packet_lp_norm(gaussian, 1) - math.sqrt(math.pi)) < 1e-14
    assert abs(packet_lp_norm(gaussian, 2) - (math.pi / 2) ** 0.25) < 1e-14
    assert packet_lp_norm(gaussian, math.inf) == 1.0
    shifted = GaussianPacket([[1.0]], w=[2.0])
    assert abs(packet_lp_norm(shifted, math.inf) - math.e) < 1e-13
    with pytest.raises(DomainError):
        packet_lp_norm(gaussian, 0.5)


def test_generator_eval():
    value = packet_generator_eval(gaussian, free_system(1), [1.0])
    # i (4x^2 - 2) exp(-x^2) at x = 1
    assert abs(value - 2j * math.exp(-1)) < 1e-14
    sys = kolmogorov_system()
    value = packet_generator_eval(GaussianPacket(np.eye(2)), sys, [1.0, 0.0])
    # i d_v^2 + v d_x at (v, x) = (1, 0)
    assert abs(value - 2j * math.exp(-1)) < 1e-14


def test_commutation_symbol():
    rng = np.random.default_rng(11)
    for sys in [kolmogorov_system(), random_system(2, rng)]:
        P = random_packet(2, rng)
        xis = rng.uniform(-0.5, 0.5, size=(5, 2))
        assert commutation_symbol_residual(P, sys, 0.7, xis) < 1e-9


def test_json():
    P = random_packet(2, np.random.default_rng(0))
    Q = GaussianPacket.from_json(P.to_json())
    assert packet_parameter_distance(P, Q) == 0
    Q = GaussianPacket.from_json({'m': 1, 'M_re': [[2.0]]})
    assert Q.c == 1 and Q.M[0, 0] == 2
    with pytest.raises(InvalidInputError):
        GaussianPacket.from_json({'m': 2, 'M_re': [[2.0]], 'M_im': [[0.0]]})
    with pytest.raises(InvalidInputError):
        GaussianPacket.from_json({'M_re': [[2.0]]})
