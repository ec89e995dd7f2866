"""Ideal polytropic gas thermodynamics and 3-characteristic quantities.

All functions accept scalars or numpy arrays and broadcast.  Density and
temperature must be strictly positive; anything else raises
:class:`ThermoDomainError` instead of being clamped.
"""

from dataclasses import dataclass, fields

import numpy as np

__all__ = [
    "ThermoDomainError",
    "GasConstants",
    "PrimState",
    "pressure",
    "entropy",
    "theta_from_entropy",
    "rho_from_entropy",
    "sound_speed",
    "lambda3",
    "riemann_invariant_1",
    "riemann_invariant_2",
]


class ThermoDomainError(ValueError):
    """Raised when a thermodynamic function is called outside rho, theta > 0."""


@dataclass(frozen=True)
class GasConstants:
    """Fluid parameters of the ideal polytropic gas.

    ``lam`` is the bulk viscosity (``lambda`` is a Python keyword).
    """

    R: float = 1.0
    A: float = 1.0
    gamma: float = 1.4
    mu: float = 0.01
    lam: float = 0.0
    kappa: float = 0.01

    def __post_init__(self):
        problems = []
        if not self.R > 0:
            problems.append(f"R must be > 0 (got {self.R})")
        if not self.A > 0:
            problems.append(f"A must be > 0 (got {self.A})")
        if not self.gamma > 1:
            problems.append(f"gamma must be > 1 (got {self.gamma})")
        if not self.mu > 0:
            problems.append(f"mu must be > 0 (got {self.mu})")
        if not 2 * self.mu + 3 * self.lam >= 0:
            problems.append(f"2*mu + 3*lam must be >= 0 (got {2 * self.mu + 3 * self.lam})")
        if not self.kappa > 0:
            problems.append(f"kappa must be > 0 (got {self.kappa})")
        if problems:
            raise ValueError("invalid gas constants: " + "; ".join(problems))

    @classmethod
    def unchecked(cls, **kwargs):
        """Build constants without the admissibility checks.

        Only meant for test builds that switch dissipation off
        (``mu = lam = kappa = 0``).
        """
        obj = object.__new__(cls)
        defaults = {f.name: f.default for f in fields(cls)}
        defaults.update(kwargs)
        for name, value in defaults.items():
            object.__setattr__(obj, name, float(value))
        return obj


@dataclass(frozen=True)
class PrimState:
    """Pointwise primitive state.  Components may also be arrays."""

    rho: float
    u1: float
    u2: float = 0.0
    u3: float = 0.0
    theta: float = 1.0

    def __post_init__(self):
        _check_positive(self.rho, self.theta)

    def as_tuple(self):
        return (self.rho, self.u1, self.u2, self.u3, self.theta)


def _check_positive(rho, theta):
    rho = np.asarray(rho)
    theta = np.asarray(theta)
    if not (np.all(rho > 0) and np.all(theta > 0)):
        raise ThermoDomainError(
            f"density and temperature must be positive "
            f"(min rho={np.min(rho)!r}, min theta={np.min(theta)!r})"
        )


def pressure(g, rho, theta):
    _check_positive(rho, theta)
    return g.R * rho * theta


def entropy(g, rho, theta):
    """S = -R ln(rho) + R/(gamma-1) ln(theta) + R/(gamma-1) ln(R/A)."""
    _check_positive(rho, theta)
    c = g.R / (g.gamma - 1.0)
    return -g.R * np.log(rho) + c * np.log(theta) + c * np.log(g.R / g.A)


def theta_from_entropy(g, rho, S):
    """Inverse of :func:`entropy` in theta at fixed density."""
    if not np.all(np.asarray(rho) > 0):
        raise ThermoDomainError("density must be positive")
    gm1 = g.gamma - 1.0
    return (g.A / g.R) * np.exp(gm1 * np.log(rho) + gm1 * S / g.R)


def rho_from_entropy(g, theta, S):
    """Inverse of :func:`entropy` in rho at fixed temperature."""
    if not np.all(np.asarray(theta) > 0):
        raise ThermoDomainError("temperature must be positive")
    gm1 = g.gamma - 1.0
    return np.exp((np.log(theta) + np.log(g.R / g.A)) / gm1 - S / g.R)


def sound_speed(g, rho, theta):
    """Isentropic sound speed sqrt(gamma R theta)."""
    _check_positive(rho, theta)
    return np.sqrt(g.gamma * g.R * theta)


def lambda3(g, state):
    return state.u1 + sound_speed(g, state.rho, state.theta)


def riemann_invariant_1(g, state):
    """First 3-Riemann invariant u1 - 2c/(gamma-1)."""
    c = sound_speed(g, state.rho, state.theta)
    return state.u1 - 2.0 * c / (g.gamma - 1.0)


def riemann_invariant_2(g, state):
    """Second 3-Riemann invariant, the specific entropy."""
    return entropy(g, state.rho, state.theta)
