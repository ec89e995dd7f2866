"""Explicit finite-difference solver for the primitive-form Navier-Stokes-Fourier system.

    rho_t + u.grad rho + rho div u = 0
    u_t + u.grad u + R theta/rho grad rho + R grad theta = (mu Lap u + (mu+lam) grad div u)/rho
    R/(gamma-1) (theta_t + u.grad theta) + R theta div u = (kappa Lap theta + Phi)/rho

with ``Phi = mu/2 |grad u + grad u^T|^2 + lam (div u)^2``.  Time stepping is
the three-stage SSP Runge-Kutta scheme with centred second-order stencils;
the x1 boundary planes are re-imposed after every stage.
"""

from dataclasses import dataclass, field as dc_field
import logging
import math

import numpy as np

from .diagnostics import profile_field, record
from .grid import Field, VARIABLES, ddx, grad_div, laplacian, read_field, write_field
from .thermo import sound_speed
from .wave import smooth_profile

__all__ = [
    "BlowUpError",
    "StepSizeError",
    "SolverConfig",
    "RhsTerms",
    "PerturbationConfig",
    "RunSummary",
    "viscous_dissipation",
    "rhs",
    "stable_dt",
    "step",
    "ProfileBoundary",
    "FixedBoundary",
    "initial_field",
    "run",
    "save_checkpoint",
    "load_checkpoint",
]

log = logging.getLogger(__name__)

BC_MODES = ("dirichlet-profile", "neumann-zero-perturbation")
DISSIPATION_SLACK = -1e-12


class BlowUpError(RuntimeError):
    """Positivity or finiteness lost; carries the worst node and its values."""

    def __init__(self, message, t=None, index=None, values=None, records=None):
        super().__init__(message)
        self.t = t
        self.index = index
        self.values = values
        self.records = records if records is not None else []


class StepSizeError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    t_final: float = 1.0
    cfl_adv: float = 0.5
    cfl_visc: float = 0.25
    bc_mode: str = "dirichlet-profile"
    diag_every: int = 50

    def __post_init__(self):
        if not 0 < self.cfl_adv <= 1:
            raise ValueError(f"cfl_adv must lie in (0, 1] (got {self.cfl_adv})")
        if not 0 < self.cfl_visc <= 0.5:
            raise ValueError(f"cfl_visc must lie in (0, 0.5] (got {self.cfl_visc})")
        if self.bc_mode not in BC_MODES:
            raise ValueError(f"bc_mode must be one of {BC_MODES} (got {self.bc_mode!r})")
        if not self.t_final >= 0:
            raise ValueError("t_final must be >= 0")
        if self.diag_every < 1:
            raise ValueError("diag_every must be >= 1")


@dataclass
class RhsTerms:
    d_rho: np.ndarray
    d_u1: np.ndarray
    d_u2: np.ndarray
    d_u3: np.ndarray
    d_theta: np.ndarray

    def arrays(self):
        return [self.d_rho, self.d_u1, self.d_u2, self.d_u3, self.d_theta]


@dataclass(frozen=True)
class PerturbationConfig:
    """Gaussian bumps in x1, optionally modulated by cos(2 pi k x2) cos(2 pi m x3)."""

    amp_rho: float = 0.0
    amp_u1: float = 0.0
    amp_u2: float = 0.0
    amp_u3: float = 0.0
    amp_theta: float = 0.0
    width: float = 2.0
    center: float = 0.0
    k: int = 0
    m: int = 0
    random_phase: bool = False
    seed: int = 0

    @classmethod
    def uniform(cls, amplitude, **kwargs):
        return cls(*(amplitude,) * 5, **kwargs)

    @property
    def amplitudes(self):
        return (self.amp_rho, self.amp_u1, self.amp_u2, self.amp_u3, self.amp_theta)


@dataclass
class RunSummary:
    t: float
    steps: int
    min_rho: float
    max_rho: float
    min_theta: float
    max_theta: float
    initial: object = None
    final: object = None
    records: list = dc_field(default_factory=list)
    field: object = None


def _derivs(f, grid):
    """Gradient of f along all axes; collapsed torus directions give exact zeros."""
    zero = None
    out = []
    for axis, n in ((1, grid.n1), (2, grid.n2), (3, grid.n3)):
        if axis > 1 and n == 1:
            if zero is None:
                zero = np.zeros_like(f)
            out.append(zero)
        else:
            out.append(ddx(f, axis, grid))
    return out


def viscous_dissipation(g, grad):
    """``mu/2 |G + G^T|^2 + lam tr(G)^2`` for a 3x3 nested list ``grad[i][j] = d_j u_i``."""
    div = grad[0][0] + grad[1][1] + grad[2][2]
    sym = 0.0
    for i in range(3):
        sym = sym + 4.0 * grad[i][i] ** 2
        for j in range(i + 1, 3):
            sym = sym + 2.0 * (grad[i][j] + grad[j][i]) ** 2
    return 0.5 * g.mu * sym + g.lam * div**2


def _check_state(field, t=None):
    rho, theta = field.rho, field.theta
    bad = ~(np.isfinite(rho) & np.isfinite(theta) & (rho > 0) & (theta > 0))
    for name in ("u1", "u2", "u3"):
        bad |= ~np.isfinite(getattr(field, name))
    if np.any(bad):
        score = np.where(bad, -np.inf, np.minimum(rho, theta))
        idx = np.unravel_index(int(np.argmin(np.nan_to_num(score, nan=-np.inf))), rho.shape)
        values = {n: float(getattr(field, n)[idx]) for n in VARIABLES}
        raise BlowUpError(
            f"non-physical state at node {idx} (t={t}): {values}", t=t, index=idx, values=values
        )


def rhs(g, field, grid, t=None):
    """Instantaneous time derivative of every primitive variable."""
    _check_state(field, t)
    rho, theta = field.rho, field.theta
    u = field.velocity
    grad_rho = _derivs(rho, grid)
    grad_theta = _derivs(theta, grid)
    grad = [_derivs(u[i], grid) for i in range(3)]
    div = grad[0][0] + grad[1][1] + grad[2][2]

    phi = viscous_dissipation(g, grad)
    if np.min(phi) < DISSIPATION_SLACK:
        idx = np.unravel_index(int(np.argmin(phi)), phi.shape)
        raise BlowUpError(f"negative viscous dissipation {phi[idx]!r} at node {idx}", t=t, index=idx)

    inv_rho = 1.0 / rho
    d_rho = -(u[0] * grad_rho[0] + u[1] * grad_rho[1] + u[2] * grad_rho[2]) - rho * div

    gd = grad_div(u, grid)
    rt_rho = g.R * theta * inv_rho
    d_u = []
    for i in range(3):
        adv = u[0] * grad[i][0] + u[1] * grad[i][1] + u[2] * grad[i][2]
        visc = (g.mu * laplacian(u[i], grid) + (g.mu + g.lam) * gd[i]) * inv_rho
        d_u.append(-adv - rt_rho * grad_rho[i] - g.R * grad_theta[i] + visc)

    gm1 = g.gamma - 1.0
    adv_theta = u[0] * grad_theta[0] + u[1] * grad_theta[1] + u[2] * grad_theta[2]
    heat = g.kappa * laplacian(theta, grid) + phi
    d_theta = -adv_theta - gm1 * theta * div + gm1 / g.R * heat * inv_rho
    return RhsTerms(d_rho, d_u[0], d_u[1], d_u[2], d_theta)


def stable_dt(g, field, grid, config=None):
    """Largest admissible step from the advective and the two diffusive limits."""
    config = config or SolverConfig()
    h = grid.dx_min
    c = sound_speed(g, field.rho, field.theta)
    speed = np.sqrt(field.u1**2 + field.u2**2 + field.u3**2) + c
    dt = config.cfl_adv * h / float(np.max(speed))
    visc = 2.0 * g.mu + g.lam
    if visc > 0:
        dt = min(dt, config.cfl_visc * h * h * float(np.min(field.rho)) / visc)
    if g.kappa > 0:
        dt = min(dt, config.cfl_visc * h * h * float(np.min(field.rho)) * g.R / ((g.gamma - 1.0) * g.kappa))
    return dt


class ProfileBoundary:
    """Re-imposes the x1 boundary planes from the smooth profile at the stage time."""

    def __init__(self, g, spec, mode="dirichlet-profile"):
        if mode not in BC_MODES:
            raise ValueError(f"unknown bc mode {mode!r}")
        self.g = g
        self.spec = spec
        self.mode = mode

    def __call__(self, field, t):
        x = field.grid.x1
        if self.mode == "dirichlet-profile":
            s = smooth_profile(self.g, self.spec, np.array([x[0], x[-1]]), t).state
            for k, plane in ((0, 0), (1, -1)):
                field.rho[plane] = s.rho[k]
                field.u1[plane] = s.u1[k]
                field.u2[plane] = 0.0
                field.u3[plane] = 0.0
                field.theta[plane] = s.theta[k]
            return field
        s = smooth_profile(self.g, self.spec, np.array([x[0], x[1], x[-2], x[-1]]), t).state
        prof = {"rho": s.rho, "u1": s.u1, "u2": np.zeros(4), "u3": np.zeros(4), "theta": s.theta}
        for name in VARIABLES:
            a, p = getattr(field, name), prof[name]
            a[0] = p[0] + (a[1] - p[1])
            a[-1] = p[3] + (a[-2] - p[2])
        return field


class FixedBoundary:
    """Holds the x1 boundary planes at their values in a reference field."""

    def __init__(self, reference):
        self._planes = [(a[0].copy(), a[-1].copy()) for a in reference.arrays()]

    def __call__(self, field, t):
        for arr, (left, right) in zip(field.arrays(), self._planes):
            arr[0] = left
            arr[-1] = right
        return field


def _axpy(a, x, b, y, dt, k):
    """``a x + b (y + dt k)`` per variable."""
    arrays = [a * xa + b * (ya + dt * ka) for xa, ya, ka in zip(x.arrays(), y.arrays(), k.arrays())]
    return Field(x.grid, *arrays)


def step(g, field, grid, dt, t=0.0, boundary=None, config=None):
    """One SSP-RK3 step of size ``dt`` from time ``t``.

    When ``config`` is given the step is refused if ``dt`` exceeds
    :func:`stable_dt`.
    """
    if config is not None:
        limit = stable_dt(g, field, grid, config)
        if dt > limit * (1.0 + 1e-12):
            raise StepSizeError(f"dt={dt!r} exceeds the stable limit {limit!r}")
    bc = boundary or (lambda f, _t: f)
    s1 = _axpy(0.0, field, 1.0, field, dt, rhs(g, field, grid, t))
    bc(s1, t + dt)
    s2 = _axpy(0.75, field, 0.25, s1, dt, rhs(g, s1, grid, t + dt))
    bc(s2, t + 0.5 * dt)
    s3 = _axpy(1.0 / 3.0, field, 2.0 / 3.0, s2, dt, rhs(g, s2, grid, t + 0.5 * dt))
    bc(s3, t + dt)
    return s3


def initial_field(g, spec, grid, pert=None, t=0.0):
    """Profile at time ``t`` plus the configured perturbation."""
    field, _ = profile_field(g, spec, grid, t)
    if pert is None:
        return field
    x1, x2, x3 = grid.mesh()
    bump = np.exp(-(((x1 - pert.center) / pert.width) ** 2))
    a2 = a3 = 0.0
    if pert.random_phase:
        a2, a3 = np.random.default_rng(pert.seed).uniform(0.0, 1.0, size=2)
    shape = bump * np.cos(2 * math.pi * pert.k * (x2 - a2)) * np.cos(2 * math.pi * pert.m * (x3 - a3))
    arrays = [a + amp * shape for a, amp in zip(field.arrays(), pert.amplitudes)]
    out = Field(grid, *arrays)
    if not (np.all(out.rho > 0) and np.all(out.theta > 0)):
        raise ValueError("perturbed initial data is not positive")
    return out


def run(g, spec, grid, config, initial, sink, t0=0.0, step0=0, callback=None):
    """March ``initial`` from ``t0`` to ``config.t_final``.

    Emits a diagnostics record at the start, every ``config.diag_every``
    steps and at the end.  ``callback(step, t, field)`` is invoked after every
    accepted step.  On blow-up the sink keeps every record emitted so far and
    the raised :class:`BlowUpError` carries them as well.
    """
    boundary = ProfileBoundary(g, spec, config.bc_mode)
    field = initial.copy()
    _check_state(field, t0)
    t, n = float(t0), int(step0)
    emitted = []

    def emit(rec):
        emitted.append(rec)
        sink.emit(rec)

    first = record(g, spec, field, grid, t)
    emit(first)
    mins = [first.min_rho, first.min_theta]
    maxs = [float(np.max(field.rho)), float(np.max(field.theta))]
    try:
        while t < config.t_final * (1.0 - 1e-14):
            _check_state(field, t)
            dt = stable_dt(g, field, grid, config)
            last = t + dt >= config.t_final
            if last:
                dt = config.t_final - t
            field = step(g, field, grid, dt, t, boundary)
            t = config.t_final if last else t + dt
            n += 1
            _check_state(field, t)
            mins = [min(mins[0], float(np.min(field.rho))), min(mins[1], float(np.min(field.theta)))]
            maxs = [max(maxs[0], float(np.max(field.rho))), max(maxs[1], float(np.max(field.theta)))]
            if callback is not None:
                callback(n, t, field)
            if n % config.diag_every == 0 or last:
                emit(record(g, spec, field, grid, t))
    except BlowUpError as exc:
        exc.records = list(emitted)
        log.error("blow-up at t=%s after %d steps: %s", t, n, exc)
        raise
    return RunSummary(
        t=t,
        steps=n - step0,
        min_rho=mins[0],
        max_rho=maxs[0],
        min_theta=mins[1],
        max_theta=maxs[1],
        initial=first,
        final=emitted[-1],
        records=emitted,
        field=field,
    )


def save_checkpoint(path, field, t, step, extra=None):
    meta = {"step": int(step)}
    meta.update(extra or {})
    write_field(path, field, t, meta)


def load_checkpoint(path):
    """Returns ``(field, t, step, meta)``."""
    field, t, meta = read_field(path)
    return field, t, int(meta.get("step", 0)), meta
