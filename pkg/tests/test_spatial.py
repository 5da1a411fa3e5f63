import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhatm.errors import DomainError, HaloError, OrderMismatchError, SingularityError
from qhatm.spatial import (
    FieldSeries,
    GridSpec,
    central_stencil,
    fd_derivative,
    sample_field,
    stencil_half_width,
)


def grid_256(halo=6, accuracy=4):
    return GridSpec(0.0, 1.0, 257, halo, accuracy)


class TestStencils:
    @pytest.mark.parametrize("d, hw", [(1, 2), (2, 2), (3, 3)])
    def test_fourth_order_half_widths(self, d, hw):
        assert stencil_half_width(d, 4) == hw
        assert central_stencil(d, 4).half_width == hw

    def test_classic_weights(self):
        s1 = central_stencil(1, 4)
        assert s1.numerators == (1, -8, 0, 8, -1) and s1.denominator == 12
        s2 = central_stencil(2, 4)
        assert s2.numerators == (-1, 16, -30, 16, -1) and s2.denominator == 12
        s3 = central_stencil(3, 4)
        np.testing.assert_allclose(s3.weights, [1 / 8, -1, 13 / 8, 0, -13 / 8, 1, -1 / 8])

    @pytest.mark.parametrize("acc", [2, 4, 6, 8])
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_polynomial_moments(self, d, acc):
        st_ = central_stencil(d, acc)
        offs = np.array(st_.offsets, dtype=float)
        for p in range(acc + d):
            moment = sum(n * o**p for n, o in zip(st_.numerators, st_.offsets)) / st_.denominator
            expected = float(np.prod(range(1, d + 1))) if p == d else 0.0
            assert moment == pytest.approx(expected, abs=1e-12), (p, offs)

    @pytest.mark.parametrize("d, acc", [(0, 4), (4, 4), (1, 3), (1, 0)])
    def test_bad_arguments(self, d, acc):
        with pytest.raises(DomainError):
            stencil_half_width(d, acc)


class TestGridSpec:
    def test_spacing_and_points(self):
        g = GridSpec(0.0, 1.0, 5, halo=2)
        assert g.spacing == 0.25
        assert g.size == 9
        np.testing.assert_allclose(g.points, np.arange(-2, 7) * 0.25)
        np.testing.assert_allclose(g.interior_points, [0, 0.25, 0.5, 0.75, 1.0])

    @pytest.mark.parametrize(
        "args", [(1.0, 0.0, 5), (0.0, 1.0, 4), (0.0, float("inf"), 5), (0.0, 1.0, 5, -1), (0.0, 1.0, 5, 0, 3)]
    )
    def test_invariants(self, args):
        with pytest.raises(DomainError):
            GridSpec(*args)

    def test_nearest_node(self):
        g = grid_256(halo=3)
        k = g.nearest_node(0.1)
        assert k == 3 + 26
        assert abs(g.points[k] - 0.1) <= g.spacing / 2

    @pytest.mark.parametrize("x", [-0.01, 1.01])
    def test_nearest_node_outside(self, x):
        with pytest.raises(DomainError):
            grid_256().nearest_node(x)


class TestFieldSeries:
    def test_shape_checked(self):
        g = GridSpec(0.0, 1.0, 5, 1)
        with pytest.raises(DomainError):
            FieldSeries(g, 1, np.zeros((6, 3)))
        with pytest.raises(DomainError):
            FieldSeries(g, 2, np.zeros((7, 3)))

    def test_immutable(self):
        f = sample_field(GridSpec(0.0, 1.0, 5, 1), np.sin, 2)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0

    def test_order_mismatch(self):
        g = GridSpec(0.0, 1.0, 5, 1)
        with pytest.raises(OrderMismatchError):
            sample_field(g, np.sin, 2) + sample_field(g, np.sin, 3)

    def test_halo_combines_to_minimum(self):
        g = GridSpec(0.0, 1.0, 9, 4)
        f = sample_field(g, np.sin, 1)
        df = fd_derivative(f, 1)
        s = f + df
        assert s.remaining_halo == 2
        assert np.all(np.isnan(s.values[:2])) and np.all(np.isfinite(s.values[2:-2]))

    def test_with_order(self):
        f = sample_field(GridSpec(0.0, 1.0, 5), np.cos, 1)
        assert f.with_order(4).order == 4
        np.testing.assert_array_equal(f.with_order(4).values[:, 0], f.values[:, 0])


class TestSampleField:
    def test_zero(self):
        f = sample_field(grid_256(), lambda x: 0.0 * x, 3)
        assert np.all(f.values == 0.0) and f.remaining_halo == 6

    def test_initial_profiles(self):
        g = GridSpec(0.1, 0.9, 5, 2)
        u = sample_field(g, lambda x: 0.005 - 0.2 / np.tanh(0.1 * (x + 10)), 3)
        v = sample_field(g, lambda x: -0.02 / np.sinh(0.1 * (x + 10)) ** 2, 3)
        k = g.nearest_node(0.1)
        assert u.values[k, 0] == pytest.approx(0.005 - 0.2 * np.cosh(1.01) / np.sinh(1.01), rel=1e-15)
        assert v.values[k, 0] == pytest.approx(-0.02 / np.sinh(1.01) ** 2, rel=1e-15)
        assert np.all(u.values[:, 1:] == 0.0)

    def test_scalar_function(self):
        import math

        f = sample_field(GridSpec(0.0, 1.0, 5), math.sin, 0)
        np.testing.assert_allclose(f.values[:, 0], np.sin(np.linspace(0, 1, 5)))

    def test_guard(self):
        g = GridSpec(-10.5, -9.5, 5, 0)
        with pytest.raises(SingularityError):
            sample_field(g, lambda x: 1 / np.sinh(x + 10), 1, guard=lambda x: np.abs(np.sinh(0.1 * (x + 10))) < 1e-6)

    def test_non_finite(self):
        with pytest.raises(SingularityError):
            sample_field(GridSpec(-1.0, 1.0, 5), lambda x: np.where(x == 0, np.inf, x), 1)


class TestDerivative:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_constant_exact(self, d):
        f = sample_field(grid_256(), lambda x: 3.7 + 0 * x, 2)
        df = fd_derivative(f, d)
        assert np.all(df.interior_coeffs() == 0.0)

    def test_quadratic_exact(self):
        f = sample_field(grid_256(), lambda x: x * x, 1)
        d2 = fd_derivative(f, 2)
        assert np.all(d2.values[d2.valid, 0] == 2.0)

    def test_coth_first_derivative(self):
        f = sample_field(grid_256(), lambda x: 1 / np.tanh(0.1 * (x + 10)), 0)
        df = fd_derivative(f, 1)
        x = f.grid.interior_points
        exact = -0.1 / np.sinh(0.1 * (x + 10)) ** 2
        assert np.max(np.abs(df.interior_coeffs()[:, 0] - exact)) <= 1e-10

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_fourth_order_convergence(self, d):
        exact = {1: np.cosh, 2: np.sinh, 3: np.cosh}[d]
        errs = []
        for n in (11, 21):
            g = GridSpec(0.0, 1.0, n, 3, 4)
            df = fd_derivative(sample_field(g, np.sinh, 0), d)
            errs.append(np.max(np.abs(df.interior_coeffs()[:, 0] - exact(g.interior_points))))
        assert 14.0 <= errs[0] / errs[1] <= 18.0

    def test_halo_bookkeeping(self):
        f = sample_field(grid_256(halo=5), np.sin, 1)
        g = fd_derivative(fd_derivative(f, 3), 1)
        assert g.remaining_halo == 5 - 3 - 2

    def test_halo_error_names_deficit(self):
        f = sample_field(grid_256(halo=4), np.sin, 1)
        with pytest.raises(HaloError, match="deficit 1") as exc:
            fd_derivative(fd_derivative(f, 1), 3)
        assert exc.value.deficit == 1

    def test_invalid_points_are_nan(self):
        f = sample_field(grid_256(halo=4), np.sin, 0)
        df = fd_derivative(f, 1)
        assert np.all(np.isnan(df.values[:2])) and np.all(np.isnan(df.values[-2:]))
        assert np.all(np.isfinite(df.values[df.valid]))

    def test_acts_on_every_coefficient(self):
        g = GridSpec(0.0, 1.0, 9, 2)
        vals = np.stack([np.sin(g.points), 2 * np.sin(g.points), np.zeros(g.size)], axis=1)
        df = fd_derivative(FieldSeries(g, 2, vals), 1)
        np.testing.assert_allclose(df.interior_coeffs()[:, 1], 2 * df.interior_coeffs()[:, 0], rtol=1e-15)

    @given(st.integers(-4, 4), st.sampled_from([1, 2, 3]))
    def test_power_of_two_scaling_exact(self, e, d):
        g = GridSpec(0.0, 1.0, 17, 3, 4)
        f = sample_field(g, np.sin, 1)
        a = 2.0**e
        assert np.array_equal(fd_derivative(f.scale(a), d).interior_coeffs(), fd_derivative(f, d).scale(a).interior_coeffs())

    @given(st.integers(-4, 4), st.integers(-4, 4), st.sampled_from([1, 2, 3]))
    def test_linear_with_power_of_two_weights(self, ea, eb, d):
        g = GridSpec(0.0, 1.0, 17, 3, 4)
        f = sample_field(g, np.sin, 1)
        h = sample_field(g, lambda x: np.exp(-x), 1)
        a, b = 2.0**ea, 2.0**eb
        lhs = fd_derivative(f.scale(a) + h.scale(b), d).interior_coeffs()
        rhs = (fd_derivative(f, d).scale(a) + fd_derivative(h, d).scale(b)).interior_coeffs()
        # forming a*f + b*h rounds once per node; the stencil amplifies that by h**-d
        tol = 8 * np.finfo(float).eps * max(a, b) * g.spacing ** (-d)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=tol)
