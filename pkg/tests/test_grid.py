import math

import numpy as np
import pytest

from rarefaction_lab.grid import (
    Field,
    Grid,
    d2dx2,
    d2dxdy,
    ddx,
    grad_div,
    integrate,
    laplacian,
    norm_h1,
    norm_h2,
    norm_hs,
    norm_l2,
    norm_lp,
    read_field,
    write_field,
)


def _grid(n1=33, n2=16, n3=16, L=1.0):
    return Grid(L, n1, n2, n3)


def test_grid_validation_and_spacing():
    g = Grid(2.0, 17, 4, 1)
    assert g.dx1 == pytest.approx(0.25)
    assert g.x1[0] == -2.0 and g.x1[-1] == 2.0
    np.testing.assert_allclose(g.x2, [0.125, 0.375, 0.625, 0.875])
    assert g.dx_min == pytest.approx(0.25)  # collapsed x3 is ignored
    with pytest.raises(ValueError):
        Grid(1.0, 8)
    with pytest.raises(ValueError):
        Grid(-1.0, 32)
    with pytest.raises(ValueError):
        Grid(1.0, 32, 0)


def test_ddx_constant_is_zero():
    g = _grid()
    f = g.full(3.7)
    for axis in (1, 2, 3):
        assert np.max(np.abs(ddx(f, axis, g))) < 1e-12
        assert np.max(np.abs(d2dx2(f, axis, g))) < 1e-9


def test_ddx_rejects_bad_axis():
    g = _grid()
    with pytest.raises(ValueError):
        ddx(g.full(), 0, g)


def test_one_sided_stencils_exact_on_quadratics():
    g = _grid()
    x1, _, _ = g.mesh()
    f = np.broadcast_to(2 * x1**2 - x1 + 1, g.shape).copy()
    np.testing.assert_allclose(ddx(f, 1, g), np.broadcast_to(4 * x1 - 1, g.shape), atol=1e-12)
    np.testing.assert_allclose(d2dx2(f, 1, g), 4.0, atol=1e-9)


def test_laplacian_of_quadratic_in_x1():
    g = _grid()
    x1, x2, _ = g.mesh()
    f = np.broadcast_to(x1**2 + 0 * x2, g.shape).copy()
    np.testing.assert_allclose(laplacian(f, g), 2.0, atol=1e-9)


@pytest.mark.parametrize("axis", [2, 3])
def test_periodic_derivative_second_order(axis):
    errs = []
    for n in (16, 32):
        g = Grid(1.0, 17, n, n)
        x = g.mesh()[axis - 1]
        f = np.broadcast_to(np.sin(2 * math.pi * x), g.shape)
        exact = 2 * math.pi * np.cos(2 * math.pi * x)
        errs.append(np.max(np.abs(ddx(f, axis, g) - exact)))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_x1_derivatives_second_order_including_boundaries():
    e1, e2 = [], []
    for n in (257, 513):
        g = Grid(2.0, n, 1, 1)
        x = g.mesh()[0]
        f = np.broadcast_to(np.exp(np.sin(x)), g.shape)
        d1 = np.cos(x) * f
        d2 = (np.cos(x) ** 2 - np.sin(x)) * f
        e1.append(np.max(np.abs(ddx(f, 1, g) - d1)))
        e2.append(np.max(np.abs(d2dx2(f, 1, g) - d2)))
    assert 3.5 <= e1[0] / e1[1] <= 4.5
    assert 3.5 <= e2[0] / e2[1] <= 4.5


def test_periodic_shift_commutes_with_ddx(rng):
    g = _grid(n2=8, n3=8)
    f = rng.standard_normal(g.shape)
    for axis in (2, 3):
        shifted = np.roll(f, 3, axis=axis - 1)
        np.testing.assert_allclose(ddx(shifted, axis, g), np.roll(ddx(f, axis, g), 3, axis=axis - 1), atol=1e-12)


def test_mixed_derivative_symmetric_on_smooth_data():
    g = _grid(n1=33, n2=16, n3=16)
    x1, x2, x3 = g.mesh()
    f = np.sin(x1) * np.cos(2 * math.pi * x2) * np.sin(2 * math.pi * x3)
    np.testing.assert_allclose(d2dxdy(f, 2, 3, g), d2dxdy(f, 3, 2, g), atol=1e-12)


def test_grad_div_equals_laplacian_for_gradient_field():
    """u = grad(phi) gives grad(div u) = Lap u; the discrete operators agree to O(h^2)."""
    errs = []
    for n in (16, 32):
        g = Grid(1.0, 2 * n + 1, n, n)
        x1, x2, x3 = g.mesh()
        a, b = 2 * math.pi * x2, 2 * math.pi * x3
        shape = g.shape
        u = (
            np.broadcast_to(np.cos(x1) * np.sin(a) * np.sin(b), shape),
            np.broadcast_to(2 * math.pi * np.sin(x1) * np.cos(a) * np.sin(b), shape),
            np.broadcast_to(2 * math.pi * np.sin(x1) * np.sin(a) * np.cos(b), shape),
        )
        gd = grad_div(u, g)
        inner = (slice(2, -2), slice(None), slice(None))
        errs.append(max(np.max(np.abs(gd[i] - laplacian(u[i], g))[inner]) for i in range(3)))
    assert errs[1] < errs[0]
    assert 3.0 <= errs[0] / errs[1] <= 5.0


def test_grad_div_of_divergence_free_field_vanishes_at_second_order():
    errs = []
    for n in (16, 32):
        g = Grid(1.0, 17, n, n)
        _, x2, x3 = g.mesh()
        # u2(x3), u3(x2): div u = 0 exactly, also discretely
        u = (g.full(), np.broadcast_to(np.sin(2 * math.pi * x3), g.shape), np.broadcast_to(np.cos(2 * math.pi * x2), g.shape))
        errs.append(max(np.max(np.abs(c)) for c in grad_div(u, g)))
    assert max(errs) < 1e-10


def test_integrate_and_norms_of_constants():
    g = Grid(3.0, 31, 4, 4)
    one = g.full(1.0)
    assert integrate(one, g) == pytest.approx(6.0, rel=1e-14)
    assert norm_l2(one, g) == pytest.approx(math.sqrt(6.0), rel=1e-14)
    assert norm_lp(-2 * one, math.inf, g) == 2.0
    assert norm_lp(one, 1, g) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        norm_lp(one, 0.5, g)


def test_l2_norm_of_transverse_sine():
    g = Grid(1.0, 17, 32, 1)
    x2 = g.mesh()[1]
    f = np.broadcast_to(np.sin(2 * math.pi * x2), g.shape)
    # integral over [-1,1] x T of sin^2 = 2 * 1/2
    assert norm_l2(f, g) == pytest.approx(1.0, rel=1e-12)


def test_trapezoid_in_x1_second_order():
    errs = []
    for n in (33, 65):
        g = Grid(1.0, n)
        x1 = g.mesh()[0]
        errs.append(abs(integrate(np.broadcast_to(np.exp(x1), g.shape), g) - (math.e - 1 / math.e)))
    assert 3.9 <= errs[0] / errs[1] <= 4.1


def test_sobolev_norms_nested(rng):
    g = _grid(n2=8, n3=8)
    f = rng.standard_normal(g.shape)
    l2, h1, h2 = norm_hs(f, 0, g), norm_h1(f, g), norm_h2(f, g)
    assert l2 == pytest.approx(norm_l2(f, g))
    assert l2 < h1 < h2
    with pytest.raises(ValueError):
        norm_hs(f, 3, g)


def test_h1_norm_analytic():
    g = Grid(1.0, 17, 64, 1)
    x2 = g.mesh()[1]
    f = np.broadcast_to(np.sin(2 * math.pi * x2), g.shape)
    # ||f|| = 1, ||f_x2|| = 2 pi, up to O(h^2) from the difference quotient
    assert norm_h1(f, g) == pytest.approx(1.0 + 2 * math.pi, rel=1e-2)


def test_field_broadcast_arithmetic():
    g = _grid(n2=4, n3=4)
    a = Field(g, 1.0, 0.5, 0.0, 0.0, 2.0)
    b = Field(g, 0.5, 0.5, 1.0, 0.0, 1.0)
    assert (a + b).rho.shape == g.shape
    assert float(np.max((a - b).u2)) == -1.0
    assert a.min_positive() == (1.0, 2.0)
    assert (a - b).sup_norm() == 1.0
    c = a.copy()
    c.rho[0, 0, 0] = 9.0
    assert a.rho[0, 0, 0] == 1.0


def test_dump_round_trip(tmp_path, rng):
    g = Grid(5.0, 20, 3, 2)
    f = Field(g, *[rng.standard_normal(g.shape) for _ in range(5)])
    path = tmp_path / "f.bin"
    write_field(path, f, 1.25, {"step": 7})
    back, t, meta = read_field(path)
    assert t == 1.25 and meta == {"step": "7"} and back.grid == g
    for x, y in zip(f.arrays(), back.arrays()):
        assert np.array_equal(x, y)


def test_dump_header_layout(tmp_path):
    g = Grid(1.0, 16)
    path = tmp_path / "f.bin"
    write_field(path, Field(g, 1.0, 0.0, 0.0, 0.0, 1.0), 0.0)
    raw = path.read_bytes()
    head, _, body = raw.partition(b"end\n")
    assert head.startswith(b"RAREFIELD 1\ndims 16 1 1\n")
    assert len(body) == 5 * 16 * 8
    with pytest.raises(ValueError):
        (tmp_path / "bad.bin").write_bytes(b"nope\n")
        read_field(tmp_path / "bad.bin")


def test_collapsed_axes_behave():
    g = Grid(1.0, 17, 1, 1)
    x1 = g.mesh()[0]
    f = np.broadcast_to(x1**2, g.shape).copy()
    assert np.all(ddx(f, 2, g) == 0.0) and np.all(ddx(f, 3, g) == 0.0)
    np.testing.assert_allclose(laplacian(f, g), 2.0, atol=1e-9)
