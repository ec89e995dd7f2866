"""Perturbation diagnostics around the smooth rarefaction profile.

Everything here is a pure reduction over a field snapshot: perturbation
norms, the relative entropy, the rarefaction-weighted norm, the dissipation
integral, and log-log decay fits of time series.
"""

import csv
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy import stats

from .grid import Field, ddx, integrate, norm_h1, norm_h2, norm_l2
from .thermo import ThermoDomainError
from .wave import smooth_profile

__all__ = [
    "FitError",
    "DiagnosticsRecord",
    "DecayFit",
    "profile_field",
    "perturbation",
    "psi_convex",
    "relative_entropy_density",
    "relative_entropy",
    "weighted_rarefaction_norm",
    "dissipation_integral",
    "record",
    "fit_decay",
    "ListSink",
    "CsvSink",
]


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    l2: float
    h1: float
    h2: float
    sup_dist: float
    rel_entropy: float
    weighted_rare: float
    grad_diss: float
    min_rho: float
    min_theta: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    prefactor: float
    r_squared: float
    window: tuple


def profile_field(g, spec, grid, t):
    """Smooth profile sampled on the grid nodes, as ``(Field, WaveSample)``.

    The profile depends on x1 only, so it is evaluated once per x1 node.
    """
    sample = smooth_profile(g, spec, grid.x1, t)
    s = sample.state
    col = lambda a: np.asarray(a, dtype=float)[:, None, None]
    f = Field(grid, col(s.rho), col(s.u1), 0.0, 0.0, col(s.theta))
    return f, sample


def perturbation(field, g, spec, grid, t):
    """``(phi, psi, zeta) = field - profile`` as a Field (not sign-constrained)."""
    prof, _ = profile_field(g, spec, grid, t)
    return field - prof


def psi_convex(s):
    """Convex function ``s - ln s - 1``, zero only at s = 1."""
    return s - np.log(s) - 1.0


def relative_entropy_density(g, field, ref):
    """Pointwise relative entropy of ``field`` with respect to ``ref``."""
    if not (np.all(field.rho > 0) and np.all(field.theta > 0)):
        raise ThermoDomainError("relative entropy needs positive density and temperature")
    if not (np.all(ref.rho > 0) and np.all(ref.theta > 0)):
        raise ThermoDomainError("reference state must be positive")
    rho, theta = field.rho, field.theta
    rb, tb = ref.rho, ref.theta
    kinetic = sum((a - b) ** 2 for a, b in zip(field.velocity, ref.velocity))
    return (
        g.R * rho * tb * psi_convex(rb / rho)
        + g.R / (g.gamma - 1.0) * rho * tb * psi_convex(theta / tb)
        + 0.5 * rho * kinetic
    )


def relative_entropy(g, field, profile_field, grid):
    return integrate(relative_entropy_density(g, field, profile_field), grid)


def weighted_rarefaction_norm(g, field, spec, grid, t, _cache=None):
    """``int u1bar_x * (phi^2 + psi1^2 + zeta^2) dx`` (squared weighted norm)."""
    prof, sample = _cache if _cache is not None else profile_field(g, spec, grid, t)
    pert = field - prof
    weight = np.asarray(sample.d_u1_dx1)[:, None, None]
    return integrate(weight * (pert.rho**2 + pert.u1**2 + pert.theta**2), grid)


def dissipation_integral(g, field, prof, grid):
    """``int thetabar/theta * Phi(psi) + kappa thetabar |grad zeta|^2 / theta^2 dx``."""
    pert = field - prof
    psi = pert.velocity
    grad = [[ddx(psi[i], j, grid) for j in (1, 2, 3)] for i in range(3)]
    div = grad[0][0] + grad[1][1] + grad[2][2]
    sym = sum((grad[i][j] + grad[j][i]) ** 2 for i in range(3) for j in range(3))
    phi = 0.5 * g.mu * sym + g.lam * div**2
    gz2 = sum(ddx(pert.theta, a, grid) ** 2 for a in (1, 2, 3))
    dens = prof.theta / field.theta * phi + g.kappa * prof.theta * gz2 / field.theta**2
    return integrate(dens, grid)


def record(g, spec, field, grid, t):
    cache = profile_field(g, spec, grid, t)
    prof = cache[0]
    pert = field - prof
    return DiagnosticsRecord(
        t=float(t),
        l2=float(np.sqrt(sum(norm_l2(a, grid) ** 2 for a in pert.arrays()))),
        h1=norm_h1(pert, grid),
        h2=norm_h2(pert, grid),
        sup_dist=pert.sup_norm(),
        rel_entropy=relative_entropy(g, field, prof, grid),
        weighted_rare=weighted_rarefaction_norm(g, field, spec, grid, t, _cache=cache),
        grad_diss=dissipation_integral(g, field, prof, grid),
        min_rho=float(np.min(field.rho)),
        min_theta=float(np.min(field.theta)),
    )


def fit_decay(series, window=None):
    """Least-squares power law ``value ~ prefactor * t**exponent``.

    ``series`` is an iterable of ``(t, value)`` pairs; only samples with
    ``window[0] <= t <= window[1]`` are used when a window is given.
    """
    data = np.asarray(list(series), dtype=float).reshape(-1, 2)
    t, v = data[:, 0], data[:, 1]
    if window is not None:
        lo, hi = window
        keep = (t >= lo) & (t <= hi)
        t, v = t[keep], v[keep]
    if t.size < 8:
        raise FitError(f"need at least 8 samples in the window (got {t.size})")
    if np.any(t <= 0) or np.any(v <= 0):
        raise FitError("log-log fit needs positive times and values")
    res = stats.linregress(np.log(t), np.log(v))
    r2 = float(res.rvalue**2) if np.isfinite(res.rvalue) else 1.0
    return DecayFit(
        exponent=float(res.slope),
        prefactor=float(np.exp(res.intercept)),
        r_squared=min(max(r2, 0.0), 1.0),
        window=(float(t.min()), float(t.max())),
    )


class ListSink:
    def __init__(self):
        self.records = []

    def emit(self, rec):
        self.records.append(rec)

    def close(self):
        pass


class CsvSink:
    """Writes one CSV row per record with 17 significant digits."""

    def __init__(self, path):
        self.path = path
        self.records = []
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(DiagnosticsRecord.columns())
        self._fh.flush()

    def emit(self, rec):
        self.records.append(rec)
        self._writer.writerow([format(v, ".17g") for v in asdict(rec).values()])
        self._fh.flush()

    def close(self):
        if not self._fh.closed:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
