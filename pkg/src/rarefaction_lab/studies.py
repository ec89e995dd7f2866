"""Quantitative checks on the smooth rarefaction wave.

These back the ``wave-check`` and ``decay-study`` commands and the
acceptance tests: decay series and slope fits of the Burgers derivatives,
the second-derivative domination ratio, convergence of the smooth wave to
the fan, Riemann-invariant constancy, the derivative identities of the
lifted profile, and the finite-difference Euler residual of the profile.
"""

from dataclasses import dataclass
import math

import numpy as np

from .thermo import entropy, pressure, riemann_invariant_1, riemann_invariant_2
from .wave import (
    exact_fan,
    kq,
    lift_profile,
    sample_line,
    smooth_profile,
    smooth_w,
)

__all__ = [
    "CheckResult",
    "log_times",
    "burgers_derivative_norms",
    "profile_derivative_norms",
    "decay_series",
    "predicted_exponent",
    "second_derivative_ratio",
    "fan_gap",
    "invariant_spread",
    "derivative_identity_error",
    "euler_residual",
    "euler_residual_ratio",
    "fan_endpoint_error",
    "kq_normalisation_error",
]

DEFAULT_WINDOW = (50.0, 5000.0)
DEFAULT_SAMPLES = 40


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def log_times(window=DEFAULT_WINDOW, n=DEFAULT_SAMPLES):
    return np.geomspace(window[0], window[1], n)


def _line_norms(x, f):
    a = np.abs(f)
    return {
        1: float(np.trapezoid(a, x)),
        2: float(np.sqrt(np.trapezoid(a * a, x))),
        math.inf: float(np.max(a)),
    }


def burgers_derivative_norms(spec, t, n=8001):
    """L1, L2 and Linf norms over the line of w_x1 and w_x1x1 at time t."""
    x, _, wx, wxx = sample_line(spec, t, n)
    return {"w_x1": _line_norms(x, wx), "w_x1x1": _line_norms(x, wxx)}


def profile_derivative_norms(g, spec, t, n=8001):
    """Line norms of the profile's first and second x1-derivatives at time t.

    The derivative vector is measured componentwise in the Euclidean sense,
    ``|(rho, u1, theta)_x1|``.
    """
    x, w, wx, wxx = sample_line(spec, 1.0 + t, n)
    s = lift_profile(g, spec, w, wx, wxx)
    d1 = np.sqrt(s.d_rho_dx1**2 + s.d_u1_dx1**2 + s.d_theta_dx1**2)
    d2 = np.sqrt(s.d2_rho_dx1**2 + s.d2_u1_dx1**2 + s.d2_theta_dx1**2)
    return {"profile_x1": _line_norms(x, d1), "profile_x1x1": _line_norms(x, d2)}


def decay_series(spec, times, g=None):
    """Norm time series keyed by ``(quantity, p)``, each a list of (t, value)."""
    out = {}
    for t in times:
        norms = burgers_derivative_norms(spec, t)
        if g is not None:
            norms.update(profile_derivative_norms(g, spec, t))
        for qty, by_p in norms.items():
            for p, v in by_p.items():
                out.setdefault((qty, p), []).append((float(t), v))
    return out


def predicted_exponent(quantity, p, q):
    """Large-time exponent of the t-branch of the derivative bounds."""
    inv_p = 0.0 if math.isinf(p) else 1.0 / p
    if quantity in ("w_x1", "profile_x1"):
        return -1.0 + inv_p
    if quantity in ("w_x1x1", "profile_x1x1"):
        return -1.0 - (1.0 - inv_p) / (2.0 * q)
    raise KeyError(quantity)


def second_derivative_ratio(spec, x1, t):
    """max over the (x1, t) sweep of |w_x1x1| / (eps w_x1)."""
    X, T = np.meshgrid(np.asarray(x1, float), np.asarray(t, float), indexing="ij")
    _, wx, wxx = smooth_w(spec, X, T)
    ratio = np.abs(wxx) / (spec.eps * wx)
    return float(np.max(ratio))


def fan_gap(spec, t, n=4001):
    """sup over x1 of |w(x1, t) - w_fan(x1/t)| on graded plus uniform nodes."""
    x_graded, w_graded, _, _ = sample_line(spec, t, n)
    lo = spec.w_minus * t - 20.0 / spec.eps
    hi = spec.w_plus * t + 20.0 / spec.eps
    x_uniform = np.linspace(lo, hi, n)
    w_uniform, _, _ = smooth_w(spec, x_uniform, t)
    x = np.concatenate([x_graded, x_uniform])
    w = np.concatenate([w_graded, w_uniform])
    fan = np.clip(x / t, spec.w_minus, spec.w_plus)
    return float(np.max(np.abs(w - fan)))


def invariant_spread(g, spec, x1, t):
    """Largest relative deviation of both 3-Riemann invariants from the right state's.

    The scale of each invariant is ``max(|value|, 1)`` so invariants that
    vanish at the right state are compared absolutely.
    """
    X, T = np.meshgrid(np.asarray(x1, float), np.asarray(t, float), indexing="ij")
    state = smooth_profile(g, spec, X.ravel(), T.ravel()).state
    out = {}
    for name, fn in (("sigma1", riemann_invariant_1), ("entropy", riemann_invariant_2)):
        ref = fn(g, spec.right_state)
        vals = fn(g, state)
        out[name] = float(np.max(np.abs(vals - ref)) / max(abs(ref), 1.0))
    left_ref = {
        "sigma1": riemann_invariant_1(g, spec.left_state),
        "entropy": riemann_invariant_2(g, spec.left_state),
    }
    for name, ref in left_ref.items():
        right = (riemann_invariant_1 if name == "sigma1" else riemann_invariant_2)(g, spec.right_state)
        out[f"{name}_endstates"] = abs(ref - right) / max(abs(right), 1.0)
    return out


def derivative_identity_error(g, spec, x1, t):
    """Relative residuals of the two closed-form derivative identities of the profile."""
    s = smooth_profile(g, spec, x1, t)
    gm, R = g.gamma, g.R
    S_plus = entropy(g, spec.right_state.rho, spec.right_state.theta)
    rho, theta = s.state.rho, s.state.theta
    lhs_r = s.d_rho_dx1 * math.sqrt(g.A * gm * math.exp((gm - 1.0) * S_plus / R))
    rhs_r = rho ** ((3.0 - gm) / 2.0) * s.d_u1_dx1
    lhs_t = s.d_theta_dx1 * math.sqrt(R * gm)
    rhs_t = (gm - 1.0) * np.sqrt(theta) * s.d_u1_dx1
    err_r = np.abs(lhs_r - rhs_r) / np.maximum(np.abs(rhs_r), 1e-300)
    err_t = np.abs(lhs_t - rhs_t) / np.maximum(np.abs(rhs_t), 1e-300)
    return float(np.max(err_r)), float(np.max(err_t))


def euler_residual(g, spec, h, t0=1.0, x1=None):
    """Max-norm of the centred-difference residual of the 1D Euler system on the profile.

    Space and time derivatives both use step ``h``; the profile solves the
    system exactly, so the residual is pure truncation error.
    """
    if x1 is None:
        x1 = np.linspace(-30.0 / spec.eps, 30.0 / spec.eps, 121)
    x1 = np.asarray(x1, float)

    def cons(x, t):
        s = smooth_profile(g, spec, x, t).state
        rho, u, th = s.rho, s.u1, s.theta
        p = pressure(g, rho, th)
        e = g.R / (g.gamma - 1.0)
        return {
            "mass": (rho, rho * u),
            "momentum": (rho * u, rho * u * u + p),
            "energy": (e * rho * th, e * rho * u * th),
        }, u, p

    plus_t, _, _ = cons(x1, t0 + h)
    minus_t, _, _ = cons(x1, t0 - h)
    plus_x, u_p, _ = cons(x1 + h, t0)
    minus_x, u_m, _ = cons(x1 - h, t0)
    _, _, p0 = cons(x1, t0)
    res = {}
    for key in ("mass", "momentum", "energy"):
        r = (plus_t[key][0] - minus_t[key][0]) / (2 * h) + (plus_x[key][1] - minus_x[key][1]) / (2 * h)
        if key == "energy":
            r = r + p0 * (u_p - u_m) / (2 * h)
        res[key] = float(np.max(np.abs(r)))
    return res


def euler_residual_ratio(g, spec, h, t0=1.0):
    """Per-equation ratio residual(h) / residual(h/2)."""
    coarse = euler_residual(g, spec, h, t0)
    fine = euler_residual(g, spec, h / 2.0, t0)
    return {k: coarse[k] / fine[k] for k in coarse}


def fan_endpoint_error(g, spec):
    """Largest deviation of the fan's end branches from the end states."""
    err = 0.0
    for xi, ref in (
        (spec.w_minus - 1.0, spec.left_state),
        (spec.w_minus, spec.left_state),
        (spec.w_plus, spec.right_state),
        (spec.w_plus + 1.0, spec.right_state),
    ):
        s = exact_fan(g, spec, xi)
        err = max(err, max(abs(a - b) for a, b in zip(s.as_tuple(), ref.as_tuple())))
    return err


def kq_normalisation_error(q):
    """|kq(q) * (kernel mass by quadrature) - 1|, quadrature independent of kq."""
    from scipy.integrate import quad

    mass, _ = quad(lambda y: (1.0 + y * y) ** (-q), 0.0, np.inf, epsabs=1e-14, epsrel=1e-13)
    return abs(kq(q) * mass - 1.0)
