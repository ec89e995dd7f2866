"""Structured grid on [-L, L] x T^2, finite-difference stencils and discrete norms.

x1 is vertex-centred (nodes at both ends of [-L, L]) with one-sided
second-order stencils at the two boundary planes.  x2 and x3 are
cell-centred on the unit torus and periodic.  Arrays are laid out with
shape ``(n1, n2, n3)``; public axis numbers follow the coordinate index
(1, 2, 3).
"""

from dataclasses import dataclass
import itertools

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "VARIABLES",
    "ddx",
    "d2dx2",
    "d2dxdy",
    "laplacian",
    "grad_div",
    "quadrature_weights",
    "integrate",
    "norm_l2",
    "norm_lp",
    "norm_hs",
    "norm_h1",
    "norm_h2",
    "write_field",
    "read_field",
]

VARIABLES = ("rho", "u1", "u2", "u3", "theta")


@dataclass(frozen=True)
class Grid:
    L: float
    n1: int
    n2: int = 1
    n3: int = 1

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"L must be > 0 (got {self.L})")
        if self.n1 < 16:
            raise ValueError(f"n1 must be >= 16 (got {self.n1})")
        if self.n2 < 1 or self.n3 < 1:
            raise ValueError("n2 and n3 must be >= 1")

    @property
    def shape(self):
        return (self.n1, self.n2, self.n3)

    @property
    def dx1(self):
        return 2.0 * self.L / (self.n1 - 1)

    @property
    def dx2(self):
        return 1.0 / self.n2

    @property
    def dx3(self):
        return 1.0 / self.n3

    def spacing(self, axis):
        return (self.dx1, self.dx2, self.dx3)[axis - 1]

    @property
    def dx_min(self):
        # Collapsed directions (n = 1) carry no stencil.
        active = [self.dx1] + [d for d, n in ((self.dx2, self.n2), (self.dx3, self.n3)) if n > 1]
        return min(active)

    @property
    def x1(self):
        return np.linspace(-self.L, self.L, self.n1)

    @property
    def x2(self):
        return (np.arange(self.n2) + 0.5) / self.n2

    @property
    def x3(self):
        return (np.arange(self.n3) + 0.5) / self.n3

    def mesh(self):
        """Broadcastable coordinate arrays of shapes (n1,1,1), (1,n2,1), (1,1,n3)."""
        return (
            self.x1[:, None, None],
            self.x2[None, :, None],
            self.x3[None, None, :],
        )

    def full(self, value=0.0):
        return np.full(self.shape, value, dtype=float)


@dataclass
class Field:
    """Primitive-variable fields on a grid (the solver's evolving state).

    Positivity of rho and theta is not enforced on construction so the same
    container can hold perturbations; call :meth:`min_positive` or the
    solver's checks where it matters.
    """

    grid: Grid
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        for name in VARIABLES:
            arr = np.asarray(getattr(self, name), dtype=float)
            arr = np.broadcast_to(arr, self.grid.shape).copy()
            setattr(self, name, arr)

    @property
    def velocity(self):
        return (self.u1, self.u2, self.u3)

    def arrays(self):
        return [getattr(self, n) for n in VARIABLES]

    def copy(self):
        return Field(self.grid, *[a.copy() for a in self.arrays()])

    def __add__(self, other):
        return Field(self.grid, *[a + b for a, b in zip(self.arrays(), other.arrays())])

    def __sub__(self, other):
        return Field(self.grid, *[a - b for a, b in zip(self.arrays(), other.arrays())])

    def min_positive(self):
        return float(np.min(self.rho)), float(np.min(self.theta))

    def sup_norm(self):
        return max(float(np.max(np.abs(a))) for a in self.arrays())


def _check_axis(axis):
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3 (got {axis})")


def ddx(f, axis, grid):
    """Second-order first derivative along ``axis``."""
    _check_axis(axis)
    h = grid.spacing(axis)
    if axis == 1:
        out = np.empty_like(f)
        out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
        out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
        out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
        return out
    ax = axis - 1
    return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * h)


def d2dx2(f, axis, grid):
    """Second-order compact second derivative along ``axis``."""
    _check_axis(axis)
    h2 = grid.spacing(axis) ** 2
    if axis == 1:
        out = np.empty_like(f)
        out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h2
        out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2
        out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h2
        return out
    ax = axis - 1
    return (np.roll(f, -1, axis=ax) - 2.0 * f + np.roll(f, 1, axis=ax)) / h2


def d2dxdy(f, a, b, grid):
    """Mixed second derivative; compact stencil on the diagonal."""
    if a == b:
        return d2dx2(f, a, grid)
    return ddx(ddx(f, b, grid), a, grid)


def laplacian(f, grid):
    return d2dx2(f, 1, grid) + d2dx2(f, 2, grid) + d2dx2(f, 3, grid)


def grad_div(u, grid):
    """Components of grad(div u) for a velocity triple ``u``."""
    return tuple(
        sum(d2dxdy(u[j], i, j + 1, grid) for j in range(3)) for i in (1, 2, 3)
    )


def quadrature_weights(grid):
    """Trapezoid in x1 times rectangle rule on the torus, shape (n1, 1, 1)."""
    w = np.full(grid.n1, grid.dx1)
    w[0] = w[-1] = 0.5 * grid.dx1
    return (w * grid.dx2 * grid.dx3)[:, None, None]


def integrate(f, grid):
    return float(np.sum(quadrature_weights(grid) * f))


def norm_l2(f, grid):
    return float(np.sqrt(integrate(np.asarray(f) ** 2, grid)))


def norm_lp(f, p, grid):
    if not 1 <= p <= np.inf:
        raise ValueError(f"p must lie in [1, inf] (got {p})")
    f = np.abs(np.asarray(f))
    if np.isinf(p):
        return float(np.max(f))
    return integrate(f**p, grid) ** (1.0 / p)


def _components(f):
    if isinstance(f, Field):
        return f.arrays()
    if isinstance(f, np.ndarray) and f.ndim == 3:
        return [f]
    return list(f)


def norm_hs(f, s, grid):
    """Sum over orders j <= s of the L2 norm of all order-j difference derivatives.

    ``f`` may be a :class:`Field`, a single array, or a sequence of arrays;
    the order-j term is ``sqrt(sum_components sum_{i1..ij} ||d_i1..d_ij f||^2)``.
    Orders up to two are supported.
    """
    if s not in (0, 1, 2):
        raise ValueError("only s = 0, 1, 2 are supported")
    comps = _components(f)
    total = np.sqrt(sum(norm_l2(c, grid) ** 2 for c in comps))
    if s >= 1:
        total += np.sqrt(sum(norm_l2(ddx(c, a, grid), grid) ** 2 for c in comps for a in (1, 2, 3)))
    if s >= 2:
        total += np.sqrt(
            sum(
                norm_l2(d2dxdy(c, a, b, grid), grid) ** 2
                for c in comps
                for a, b in itertools.product((1, 2, 3), repeat=2)
            )
        )
    return float(total)


def norm_h1(f, grid):
    return norm_hs(f, 1, grid)


def norm_h2(f, grid):
    return norm_hs(f, 2, grid)


# Binary field dump --------------------------------------------------------
#
# ASCII header lines, each terminated by "\n":
#   RAREFIELD 1
#   dims <n1> <n2> <n3>
#   L <repr(L)>
#   time <repr(t)>
#   vars rho u1 u2 u3 theta
#   [meta <key> <value>]*           optional run metadata
#   end
# followed by the five variables in the order listed, each as n1*n2*n3
# little-endian float64 values in C (row-major) order.

_MAGIC = "RAREFIELD 1"


def write_field(path, field, t, meta=None):
    g = field.grid
    lines = [
        _MAGIC,
        f"dims {g.n1} {g.n2} {g.n3}",
        f"L {g.L!r}",
        f"time {float(t)!r}",
        "vars " + " ".join(VARIABLES),
    ]
    for key, value in (meta or {}).items():
        if any(c.isspace() for c in str(key)) or "\n" in str(value):
            raise ValueError(f"metadata key/value not representable: {key!r}")
        lines.append(f"meta {key} {value}")
    lines.append("end")
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("ascii"))
        for arr in field.arrays():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes(order="C"))


def read_field(path):
    """Read a dump written by :func:`write_field`; returns ``(field, t, meta)``."""
    meta = {}
    with open(path, "rb") as fh:
        if fh.readline().decode("ascii").strip() != _MAGIC:
            raise ValueError(f"{path}: not a field dump")
        header = {}
        while True:
            line = fh.readline().decode("ascii").strip()
            if not line:
                raise ValueError(f"{path}: truncated header")
            if line == "end":
                break
            key, _, rest = line.partition(" ")
            if key == "meta":
                mk, _, mv = rest.partition(" ")
                meta[mk] = mv
            else:
                header[key] = rest
        n1, n2, n3 = (int(v) for v in header["dims"].split())
        names = header["vars"].split()
        grid = Grid(float(header["L"]), n1, n2, n3)
        count = n1 * n2 * n3
        arrays = {}
        for name in names:
            data = np.frombuffer(fh.read(8 * count), dtype="<f8")
            if data.size != count:
                raise ValueError(f"{path}: truncated data for {name}")
            arrays[name] = data.reshape(grid.shape).astype(float)
    return Field(grid, *[arrays[n] for n in VARIABLES]), float(header["time"]), meta
