import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from rarefaction_lab.thermo import (
    GasConstants,
    PrimState,
    ThermoDomainError,
    entropy,
    lambda3,
    pressure,
    riemann_invariant_1,
    riemann_invariant_2,
    sound_speed,
    theta_from_entropy,
)

positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)
gammas = st.floats(min_value=1.05, max_value=3.0)


def gas_with(gamma=1.4, R=1.0, A=1.0):
    return GasConstants(R=R, A=A, gamma=gamma)


@pytest.mark.parametrize(
    "R, rho, theta, expected",
    [(1.0, 1.0, 1.0, 1.0), (1.0, 2.0, 3.0, 6.0), (0.4, 1.2, 2.5, 1.2)],
)
def test_pressure_examples(R, rho, theta, expected):
    assert pressure(gas_with(R=R), rho, theta) == pytest.approx(expected, rel=1e-15)


def test_entropy_examples():
    assert entropy(gas_with(gamma=2.0), 1.0, 1.0) == 0.0
    assert entropy(gas_with(gamma=1.4), 2.0, 1.0) == pytest.approx(-math.log(2.0), rel=1e-15)


def test_sound_speed_examples():
    assert sound_speed(gas_with(gamma=2.0), 1.0, 0.5) == pytest.approx(1.0, rel=1e-15)
    assert sound_speed(gas_with(gamma=1.4), 1.0, 1.0) == pytest.approx(1.183216, abs=1e-6)


def test_lambda3_and_first_invariant_examples():
    assert lambda3(gas_with(gamma=2.0), PrimState(1.0, 0.0, theta=0.5)) == pytest.approx(1.0)
    assert lambda3(gas_with(), PrimState(1.0, -1.0, theta=1.0)) == pytest.approx(0.183216, abs=1e-6)
    # gamma = 3, c = 1 -> 2/(gamma-1) = 1
    g3 = gas_with(gamma=3.0)
    state = PrimState(1.0, 0.0, theta=1.0 / 3.0)
    assert riemann_invariant_1(g3, state) == pytest.approx(-1.0, rel=1e-14)
    assert riemann_invariant_1(gas_with(), PrimState(1.0, 1.0, theta=1.0)) == pytest.approx(-4.916080, abs=1e-6)


def test_second_invariant_is_entropy():
    g = gas_with(gamma=2.0)
    assert riemann_invariant_2(g, PrimState(1.0, 0.3, theta=1.0)) == 0.0
    s = PrimState(0.7, 0.1, theta=2.3)
    assert riemann_invariant_2(gas_with(), s) == entropy(gas_with(), 0.7, 2.3)


@pytest.mark.parametrize("rho, theta", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, -2.0)])
def test_domain_errors(rho, theta):
    g = gas_with()
    for fn in (pressure, entropy, sound_speed):
        with pytest.raises(ThermoDomainError):
            fn(g, rho, theta)


def test_domain_error_on_array_with_one_bad_node():
    with pytest.raises(ThermoDomainError):
        pressure(gas_with(), np.array([1.0, 0.5, -1e-9]), 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(mu=0.0), dict(mu=0.01, lam=-0.01), dict(kappa=0.0), dict(gamma=1.0), dict(R=-1.0), dict(A=0.0)],
)
def test_gas_constants_invariants(kwargs):
    with pytest.raises(ValueError):
        GasConstants(**kwargs)


def test_gas_constants_boundary_bulk_viscosity_allowed():
    GasConstants(mu=0.03, lam=-0.02)  # 2 mu + 3 lam = 0


@settings(max_examples=200, deadline=None)
@given(rho=positive, theta=positive, gamma=gammas)
def test_entropy_round_trip(rho, theta, gamma):
    g = gas_with(gamma=gamma, R=0.7, A=1.9)
    back = theta_from_entropy(g, rho, entropy(g, rho, theta))
    assert back == pytest.approx(theta, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(rho=positive, theta=positive, u1=st.floats(-10, 10), gamma=gammas)
def test_pointwise_invariants(rho, theta, u1, gamma):
    g = gas_with(gamma=gamma)
    c = sound_speed(g, rho, theta)
    assert pressure(g, rho, theta) > 0 and c > 0
    assert lambda3(g, PrimState(rho, u1, theta=theta)) - u1 == pytest.approx(c, rel=1e-12, abs=1e-12)
    assert c * c * rho == pytest.approx(gamma * pressure(g, rho, theta), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(rho=positive, theta=positive, gamma=gammas)
def test_sound_speed_matches_isentropic_derivative(rho, theta, gamma):
    g = gas_with(gamma=gamma, R=1.3, A=0.8)
    S = entropy(g, rho, theta)
    # d/drho of A rho^gamma exp((gamma-1) S / R) at fixed S
    dp = g.A * gamma * rho ** (gamma - 1.0) * math.exp((gamma - 1.0) * S / g.R)
    assert sound_speed(g, rho, theta) == pytest.approx(math.sqrt(dp), rel=1e-10)


@pytest.mark.parametrize("gamma", [1.2, 1.4, 5.0 / 3.0, 2.5])
@pytest.mark.parametrize("rho, theta, u1", [(1.0, 1.0, 0.0), (0.3, 2.0, -0.7), (4.0, 0.2, 1.5)])
def test_first_invariant_against_quadrature(gamma, rho, theta, u1):
    """u1 - int^rho sqrt(p_z)/z dz, antiderivative fixed by the z -> 0 limit."""
    g = gas_with(gamma=gamma)
    S = entropy(g, rho, theta)

    def integrand(z):
        return math.sqrt(g.A * gamma * z ** (gamma - 1.0) * math.exp((gamma - 1.0) * S / g.R)) / z

    integral, _ = quad(integrand, 0.0, rho, epsabs=0.0, epsrel=1e-13, limit=200)
    expected = u1 - integral
    got = riemann_invariant_1(g, PrimState(rho, u1, theta=theta))
    assert got == pytest.approx(expected, rel=1e-8)
