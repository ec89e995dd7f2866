"""Exact 3-rarefaction fan and its smooth Burgers-based approximation.

The smooth profile is built in two layers.  First the Burgers equation
``w_t + w w_x = 0`` is solved along characteristics for the mollified
monotone datum

    w0(x) = (w_- + w_+)/2 + (w_+ - w_-)/2 * k_q * int_0^{eps x} (1 + y^2)^{-q} dy,

then each value of ``w`` is lifted to a fluid state lying on the 3-rarefaction
curve through the right state, so that ``lambda3(state) = w(x, 1 + t)``.
Every profile variable is a function of ``w`` alone, which is what makes
all derivatives available in closed form.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy import special

from .thermo import (
    PrimState,
    lambda3,
    rho_from_entropy,
    riemann_invariant_1,
    riemann_invariant_2,
)

__all__ = [
    "NotARarefactionError",
    "InversionDomainError",
    "RootFindError",
    "WaveSpec",
    "WaveSample",
    "build_wave_spec",
    "left_state_from_right",
    "inverse_lambda3",
    "exact_fan",
    "kernel_mass",
    "kq",
    "kernel_integral",
    "smooth_w0",
    "smooth_w0_derivatives",
    "characteristic_bracket",
    "smooth_w",
    "smooth_profile",
    "lift_profile",
    "sample_line",
]

#: Minimal admissible gap ``w - sigma1`` for the inversion (temperature ~ gap^2).
INVERSION_GUARD = 1e-12


class NotARarefactionError(ValueError):
    pass


class InversionDomainError(ValueError):
    pass


class RootFindError(RuntimeError):
    """Characteristic root-find failed; carries the offending points."""

    def __init__(self, message, x1=None, t=None, residual=None):
        super().__init__(message)
        self.x1 = x1
        self.t = t
        self.residual = residual


@dataclass(frozen=True)
class WaveSpec:
    right_state: PrimState
    left_state: PrimState
    eps: float
    q: float
    w_minus: float
    w_plus: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be > 0 (got {self.eps})")
        if not self.q >= 2:
            raise ValueError(f"q must be >= 2 (got {self.q})")
        if not self.w_minus < self.w_plus:
            raise NotARarefactionError(
                f"need w_minus < w_plus (got {self.w_minus} >= {self.w_plus})"
            )
        for name, s in (("right", self.right_state), ("left", self.left_state)):
            if s.u2 != 0 or s.u3 != 0:
                raise ValueError(f"{name} state must have u2 = u3 = 0")

    @property
    def strength(self):
        """Burgers wave strength ``w_+ - w_-``."""
        return self.w_plus - self.w_minus


@dataclass(frozen=True)
class WaveSample:
    """Smooth profile values and x1-derivatives at a set of points.

    ``w`` and ``w_x1`` are the underlying Burgers values at the shifted time.
    """

    state: PrimState
    d_rho_dx1: np.ndarray
    d_u1_dx1: np.ndarray
    d_theta_dx1: np.ndarray
    d2_u1_dx1: np.ndarray
    d2_rho_dx1: np.ndarray
    d2_theta_dx1: np.ndarray
    w: np.ndarray
    w_x1: np.ndarray

    # Each profile variable F is a function of w, so F_t = -w F_x.
    @property
    def d_rho_dt(self):
        return -self.w * self.d_rho_dx1

    @property
    def d_u1_dt(self):
        return -self.w * self.d_u1_dx1

    @property
    def d_theta_dt(self):
        return -self.w * self.d_theta_dx1


def build_wave_spec(g, right, *, left=None, strength=None, eps=0.1, q=2.0, rtol=1e-10):
    """Assemble and validate a :class:`WaveSpec`.

    Exactly one of ``left`` or ``strength`` (``w_+ - w_-``) must be given.
    A supplied left state must lie on the 3-rarefaction curve of ``right``.
    """
    if (left is None) == (strength is None):
        raise ValueError("give exactly one of left= or strength=")
    w_plus = float(lambda3(g, right))
    if left is None:
        if not strength > 0:
            raise NotARarefactionError(f"wave strength must be > 0 (got {strength})")
        left = left_state_from_right(g, right, w_plus - strength)
    else:
        _check_same_curve(g, left, right, rtol)
    return WaveSpec(
        right_state=right,
        left_state=left,
        eps=float(eps),
        q=float(q),
        w_minus=float(lambda3(g, left)),
        w_plus=w_plus,
    )


def _check_same_curve(g, left, right, rtol):
    pairs = (
        ("first Riemann invariant", riemann_invariant_1(g, left), riemann_invariant_1(g, right)),
        ("entropy", riemann_invariant_2(g, left), riemann_invariant_2(g, right)),
    )
    for name, a, b in pairs:
        if abs(a - b) > rtol * max(abs(a), abs(b), 1.0):
            raise ValueError(
                f"left state is not on the 3-rarefaction curve: {name} {a!r} != {b!r}"
            )


def inverse_lambda3(g, w, sigma1, S):
    """State on the 3-curve with ``lambda3 = w``, invariants ``(sigma1, S)``.

    From ``u1 + c = w`` and ``u1 - 2c/(gamma-1) = sigma1`` the sound speed is
    ``c = (gamma-1)(w - sigma1)/(gamma+1)``.
    """
    w = np.asarray(w, dtype=float)
    gap = w - sigma1
    if not np.all(gap >= INVERSION_GUARD):
        raise InversionDomainError(
            f"need w - sigma1 >= {INVERSION_GUARD} (min gap {np.min(gap)!r})"
        )
    gm = g.gamma
    c = (gm - 1.0) * gap / (gm + 1.0)
    theta = c * c / (gm * g.R)
    u1 = w - c
    rho = rho_from_entropy(g, theta, S)
    zero = np.zeros_like(w)
    if w.ndim == 0:
        return PrimState(float(rho), float(u1), 0.0, 0.0, float(theta))
    return PrimState(rho, u1, zero, zero.copy(), theta)


def left_state_from_right(g, right, w_minus_target):
    """Left end state of a 3-rarefaction with prescribed ``lambda3 = w_minus_target``."""
    w_plus = lambda3(g, right)
    if w_minus_target > w_plus:
        raise NotARarefactionError(
            f"w_minus_target={w_minus_target!r} exceeds lambda3(right)={w_plus!r}"
        )
    if w_minus_target == w_plus:
        return right
    return inverse_lambda3(
        g,
        float(w_minus_target),
        riemann_invariant_1(g, right),
        riemann_invariant_2(g, right),
    )


def exact_fan(g, spec, xi):
    """Self-similar 3-rarefaction fan evaluated at ``xi = x1 / t``."""
    xi = np.asarray(xi, dtype=float)
    w = np.clip(xi, spec.w_minus, spec.w_plus)
    sigma1 = riemann_invariant_1(g, spec.right_state)
    S = riemann_invariant_2(g, spec.right_state)
    inside = inverse_lambda3(g, w, sigma1, S)
    left, right = spec.left_state, spec.right_state
    out = []
    # End branches return the end states verbatim.
    for name in ("rho", "u1", "u2", "u3", "theta"):
        v = np.where(
            xi <= spec.w_minus,
            getattr(left, name),
            np.where(xi >= spec.w_plus, getattr(right, name), getattr(inside, name)),
        )
        out.append(float(v) if v.ndim == 0 else v)
    return PrimState(*out)


@lru_cache(maxsize=None)
def kernel_mass(q):
    """``int_0^inf (1 + y^2)^{-q} dy = B(1/2, q - 1/2) / 2``."""
    if q == 2:
        return math.pi / 4.0
    return 0.5 * float(special.beta(0.5, q - 0.5))


@lru_cache(maxsize=None)
def kq(q):
    """Normalisation making ``kq * int_0^inf (1+y^2)^{-q} dy`` equal one."""
    if not q >= 2:
        raise ValueError(f"kq needs q >= 2 (got {q})")
    if q == 2:
        return 4.0 / math.pi
    return 1.0 / kernel_mass(q)


def kernel_integral(q, y):
    """``int_0^y (1 + s^2)^{-q} ds`` (odd in y)."""
    y = np.asarray(y, dtype=float)
    if q == 2:
        return y / (2.0 * (1.0 + y * y)) + 0.5 * np.arctan(y)
    if q == 3:
        s = 1.0 + y * y
        return y / (4.0 * s * s) + 3.0 * y / (8.0 * s) + 0.375 * np.arctan(y)
    # Substituting s = y^2/(1+y^2) turns the integral into an incomplete beta.
    z = y * y / (1.0 + y * y)
    return np.sign(y) * kernel_mass(q) * special.betainc(0.5, q - 0.5, z)


def smooth_w0(spec, x1):
    mid = 0.5 * (spec.w_plus + spec.w_minus)
    half = 0.5 * spec.strength
    return mid + half * kq(spec.q) * kernel_integral(spec.q, spec.eps * np.asarray(x1, dtype=float))


def smooth_w0_derivatives(spec, x1):
    """Analytic first and second derivatives of the initial datum."""
    x1 = np.asarray(x1, dtype=float)
    eps, q = spec.eps, spec.q
    amp = 0.5 * spec.strength * kq(q) * eps
    s = 1.0 + (eps * x1) ** 2
    d1 = amp * s ** (-q)
    d2 = -2.0 * q * eps * eps * x1 * amp * s ** (-q - 1.0)
    return d1, d2


def characteristic_bracket(spec, x1, t):
    """Interval guaranteed to contain the foot ``x0`` of the characteristic through (x1, t).

    Since ``w_- < w0 < w_+``, the root of ``x0 + t w0(x0) = x1`` lies in
    ``(x1 - w_+ t, x1 - w_- t)``; a unit margin is added on both sides.
    """
    x1 = np.asarray(x1, dtype=float)
    t = np.asarray(t, dtype=float)
    return x1 - spec.w_plus * t - 1.0, x1 - spec.w_minus * t + 1.0


def _characteristic_foot(spec, x1, t, max_iter=200):
    x1, t = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("smooth_w needs t >= 0")
    lo, hi = characteristic_bracket(spec, x1, t)
    lo, hi = lo.copy(), hi.copy()

    def resid(x0):
        return x0 + t * smooth_w0(spec, x0) - x1

    # Bisection down to width 1e-3; the bracket width is uniform in x1.
    width = float(np.max(hi - lo)) if hi.size else 0.0
    n_bisect = max(0, math.ceil(math.log2(width / 1e-3))) if width > 1e-3 else 0
    if n_bisect > max_iter:
        raise RootFindError("bracket too wide for the iteration budget", x1, t)
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        pos = resid(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)

    # Safeguarded Newton; the map x0 -> x0 + t w0(x0) has slope >= 1.
    x0 = 0.5 * (lo + hi)
    for _ in range(max_iter - n_bisect):
        f = resid(x0)
        d1, _ = smooth_w0_derivatives(spec, x0)
        step = f / (1.0 + t * d1)
        pos = f > 0
        hi = np.where(pos, x0, hi)
        lo = np.where(pos, lo, x0)
        trial = x0 - step
        outside = (trial <= lo) | (trial >= hi)
        new = np.where(outside & (f != 0), 0.5 * (lo + hi), trial)
        tol = 1e-13 + 4.0 * np.finfo(float).eps * np.abs(new)
        done = np.abs(new - x0) <= tol
        x0 = new
        if np.all(done):
            return x0
    res = resid(x0)
    raise RootFindError(
        f"characteristic root-find did not converge in {max_iter} iterations "
        f"(max residual {np.max(np.abs(res)):.3e})",
        x1,
        t,
        res,
    )


def smooth_w(spec, x1, t):
    """Burgers solution and its first two x1-derivatives at (x1, t).

    Returns ``(w, w_x1, w_x1x1)``.
    """
    x0 = _characteristic_foot(spec, x1, t)
    t = np.asarray(t, dtype=float)
    d1, d2 = smooth_w0_derivatives(spec, x0)
    jac = 1.0 + t * d1
    return smooth_w0(spec, x0), d1 / jac, d2 / jac**3


def smooth_profile(g, spec, x1, t):
    """Smooth 3-rarefaction profile at (x1, t), using the Burgers time 1 + t."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("smooth_profile needs t >= 0")
    return lift_profile(g, spec, *smooth_w(spec, x1, 1.0 + t))


def lift_profile(g, spec, w, w_x, w_xx):
    """Fluid state and x1-derivatives on the 3-curve for given Burgers data."""
    sigma1 = riemann_invariant_1(g, spec.right_state)
    S = riemann_invariant_2(g, spec.right_state)
    state = inverse_lambda3(g, w, sigma1, S)

    gm, R = g.gamma, g.R
    rho, theta = np.asarray(state.rho), np.asarray(state.theta)
    u_x = 2.0 / (gm + 1.0) * w_x
    u_xx = 2.0 / (gm + 1.0) * w_xx
    k_rho = math.sqrt(g.A * gm * math.exp((gm - 1.0) * S / R))
    rho_x = rho ** ((3.0 - gm) / 2.0) * u_x / k_rho
    rho_xx = (
        0.5 * (3.0 - gm) * rho ** ((1.0 - gm) / 2.0) * rho_x * u_x
        + rho ** ((3.0 - gm) / 2.0) * u_xx
    ) / k_rho
    k_theta = (gm - 1.0) / math.sqrt(R * gm)
    sq = np.sqrt(theta)
    theta_x = k_theta * sq * u_x
    theta_xx = k_theta * (0.5 * theta_x * u_x / sq + sq * u_xx)
    return WaveSample(
        state=state,
        d_rho_dx1=rho_x,
        d_u1_dx1=u_x,
        d_theta_dx1=theta_x,
        d2_u1_dx1=u_xx,
        d2_rho_dx1=rho_xx,
        d2_theta_dx1=theta_xx,
        w=np.asarray(w),
        w_x1=np.asarray(w_x),
    )


def sample_line(spec, t, n=4001, reach=100.0):
    """Graded x1 sample grid for line norms of the Burgers solution at time t.

    Nodes are images ``x1 = x0 + t w0(x0)`` of a grid in the characteristic
    foot that is uniform in ``arcsinh(eps x0)`` over ``|eps x0| <= reach``;
    this covers ``|x1| <= (|w_-| + |w_+|) t + reach/eps`` and clusters points
    where the profile varies.  Returns ``(x1, w, w_x1, w_x1x1)`` so callers
    avoid a root-find.
    """
    if n % 2 == 0:
        n += 1
    s = np.linspace(-np.arcsinh(reach), np.arcsinh(reach), n)
    x0 = np.sinh(s) / spec.eps
    d1, d2 = smooth_w0_derivatives(spec, x0)
    jac = 1.0 + t * d1
    w = smooth_w0(spec, x0)
    return x0 + t * w, w, d1 / jac, d2 / jac**3
