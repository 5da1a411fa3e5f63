import numpy as np
import pytest

from conftest import reference_params
from qhatm.engine import (
    QhatmParams,
    assemble,
    default_grid,
    halo_per_step,
    k_factor,
    qhatm_solve,
    qhatm_step,
    required_halo,
    residual,
    sample_initial,
)
from qhatm.errors import DomainError, HaloError
from qhatm.models import get_model, golden_iterates
from qhatm.spatial import GridSpec

TIMES = (0.05, 0.1, 0.3, 0.5)


def _interior_iterate(bundle, m, which, t):
    f = bundle.iterates[m][0 if which == "u" else 1]
    return f.interior_values(t, bundle.params.alpha)


class TestKFactor:
    @pytest.mark.parametrize("m, n, k", [(1, 5, 0), (2, 5, 5), (3, 1, 1), (7, 3, 3)])
    def test_values(self, m, n, k):
        assert k_factor(m, n) == k

    def test_domain(self):
        with pytest.raises(DomainError):
            k_factor(0, 1)


class TestParams:
    def _grid(self):
        return GridSpec(0.0, 1.0, 5, 0)

    @pytest.mark.parametrize("alpha", [0.0, 1.5, -0.2])
    def test_alpha(self, alpha):
        with pytest.raises(DomainError, match="alpha"):
            QhatmParams(alpha, -1.0, 1, 3, self._grid())

    def test_hbar_nonzero(self):
        with pytest.raises(DomainError, match="hbar"):
            QhatmParams(1.0, 0.0, 1, 3, self._grid())

    @pytest.mark.parametrize("n", [0, -1, 1.5])
    def test_n(self, n):
        with pytest.raises(DomainError, match="n ≥ 1"):
            QhatmParams(1.0, -1.0, n, 3, self._grid())

    def test_order(self):
        with pytest.raises(DomainError):
            QhatmParams(1.0, -1.0, 1, -1, self._grid())

    def test_replace(self):
        p = QhatmParams(1.0, -1.0, 1, 3, self._grid())
        q = p.replace(hbar=-2.0, n=2)
        assert (q.hbar, q.n, q.order) == (-2.0, 2, 3)


class TestHalo:
    def test_budget(self, mb, alw):
        assert halo_per_step(mb, 4) == 3
        assert halo_per_step(alw, 4) == 2
        assert required_halo(mb, 3, 4) == 9
        assert required_halo(mb, 3, 8, residual=True) == 4 * 5

    def test_rejected_up_front(self, mb):
        g = default_grid(mb, 2, residual=False)
        params = QhatmParams(1.0, -1.0, 1, 3, g)
        with pytest.raises(HaloError) as exc:
            qhatm_solve(mb, params)
        assert exc.value.deficit == halo_per_step(mb, g.accuracy)

    def test_residual_needs_reserve(self, mb):
        b = qhatm_solve(mb, QhatmParams(1.0, -1.0, 1, 3, default_grid(mb, 3, residual=False)))
        with pytest.raises(HaloError):
            residual(b, 0.1)


class TestBundle:
    def test_order_zero(self, mb):
        p = reference_params(mb, order=0)
        b = qhatm_solve(mb, p)
        assert b.order == 0
        u0, v0 = sample_initial(mb, p)
        assert np.array_equal(b.iterates[0][0].values, u0.values, equal_nan=True)
        u, v = assemble(b)
        assert np.array_equal(u.values, u0.values, equal_nan=True)

    @pytest.mark.parametrize("name", ["mb", "alw"])
    def test_zero_constant_coefficient(self, name):
        m = get_model(name)
        b = qhatm_solve(m, reference_params(m, order=4, alpha=0.7, hbar=-0.8, n=2))
        for u, v in b.iterates[1:]:
            assert np.all(u.interior_coeffs()[:, 0] == 0.0)
            assert np.all(v.interior_coeffs()[:, 0] == 0.0)

    def test_plain_sum_at_n_one(self, alw):
        b = qhatm_solve(alw, reference_params(alw, hbar=-1.3))
        u, _ = assemble(b)
        total = sum(p[0].interior_coeffs() for p in b.iterates)
        np.testing.assert_array_equal(u.interior_coeffs(), total)

    def test_weights(self, mb):
        b = qhatm_solve(mb, reference_params(mb, n=4, hbar=-4.0))
        assert b.weights() == [1.0, 0.25, 0.0625, 0.015625]

    def test_step_matches_solve(self, mb):
        p = reference_params(mb, alpha=0.6)
        b = qhatm_solve(mb, p)
        u1, v1 = qhatm_step(mb, p, b.iterates[:1])
        np.testing.assert_array_equal(u1.interior_coeffs(), b.iterates[1][0].interior_coeffs())

    def test_step_needs_prior(self, mb):
        with pytest.raises(DomainError):
            qhatm_step(mb, reference_params(mb), [])


class TestGoldenIterates:
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.75, 1.0])
    def test_mb_first_iterate_any_alpha(self, mb, alpha):
        p = reference_params(mb, alpha=alpha, hbar=-0.9, n=2)
        b = qhatm_solve(mb, p)
        x = p.grid.interior_points
        gu, gv = golden_iterates(mb, p, 1)
        for t in TIMES:
            assert np.max(np.abs(_interior_iterate(b, 1, "u", t) - gu(x, t))) <= 1e-9
            assert np.max(np.abs(_interior_iterate(b, 1, "v", t) - gv(x, t))) <= 1e-9

    def test_mb_second_iterate_reference_setting(self, mb):
        p = reference_params(mb)
        b = qhatm_solve(mb, p)
        x = p.grid.interior_points
        gu, _ = golden_iterates(mb, p, 2)
        for t in TIMES:
            assert np.max(np.abs(_interior_iterate(b, 2, "u", t) - gu(x, t))) <= 1e-9

    @pytest.mark.parametrize("name", ["mb", "alw"])
    def test_special_case_matches_all_closed_forms(self, name):
        m = get_model(name)
        p = reference_params(m)
        b = qhatm_solve(m, p)
        x = p.grid.interior_points
        for k in (1, 2, 3):
            gu, gv = golden_iterates(m, p, k, corrected=True)
            for t in TIMES:
                assert np.max(np.abs(_interior_iterate(b, k, "u", t) - gu(x, t))) <= 1e-9
                assert np.max(np.abs(_interior_iterate(b, k, "v", t) - gv(x, t))) <= 1e-9


class TestStationaryProfile:
    # With omega = 0 every iterate vanishes analytically; numerically they sit
    # at the finite-difference rounding floor (see the decisions notes).
    @pytest.mark.parametrize("name", ["mb", "alw"])
    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_iterates_vanish(self, name, alpha):
        m = get_model(name, omega=0.0)
        b = qhatm_solve(m, reference_params(m, alpha=alpha))
        for pair in b.iterates[1:]:
            for f in pair:
                for t in (0.1, 0.5):
                    assert np.max(np.abs(f.interior_values(t, alpha))) <= 1e-9

    @pytest.mark.parametrize("name", ["mb", "alw"])
    def test_residual_vanishes(self, name):
        m = get_model(name, omega=0.0)
        b = qhatm_solve(m, reference_params(m))
        for t in (0.0, 0.1, 0.5):
            ru, rv = residual(b, t)
            assert max(np.max(np.abs(ru)), np.max(np.abs(rv))) <= 1e-7


class TestAccuracy:
    def test_classical_limit_point(self, mb):
        p = reference_params(mb)
        u, _ = assemble(qhatm_solve(mb, p))
        k = p.grid.nearest_node(0.5)
        x = p.grid.points[k]
        assert abs(u.evaluate(0.1, 1.0)[k] - mb.exact_u(x, 0.1)) <= 1e-10

    @pytest.mark.parametrize("name", ["mb", "alw"])
    def test_ratio_invariance_scaled(self, name):
        m = get_model(name)
        base = assemble(qhatm_solve(m, reference_params(m, order=4, alpha=0.8, hbar=-0.6, n=1)))
        for c in (2, 5):
            other = assemble(qhatm_solve(m, reference_params(m, order=4, alpha=0.8, hbar=-0.6 * c, n=c)))
            for a, b in zip(base, other):
                for t in (0.1, 0.5):
                    va, vb = a.interior_values(t, 0.8), b.interior_values(t, 0.8)
                    np.testing.assert_allclose(vb, va, rtol=1e-11, atol=0)


class TestResidual:
    def test_reference_mb(self, mb):
        b = qhatm_solve(mb, reference_params(mb))
        r1 = max(np.max(np.abs(r)) for r in residual(b, 0.1))
        r2 = max(np.max(np.abs(r)) for r in residual(b, 0.05))
        assert r1 <= 1e-8
        assert r1 / r2 >= 6.0

    @pytest.mark.parametrize("name", ["mb", "alw"])
    def test_vanishes_at_start(self, name):
        m = get_model(name)
        b = qhatm_solve(m, reference_params(m))
        assert max(np.max(np.abs(r)) for r in residual(b, 0.0)) <= 1e-12
        assert max(np.max(np.abs(r)) for r in residual(b, 1e-6)) <= 1e-6

    def test_negative_time(self, mb):
        b = qhatm_solve(mb, reference_params(mb))
        with pytest.raises(DomainError):
            residual(b, -0.1)

    def test_shape(self, alw):
        p = reference_params(alw)
        ru, rv = residual(qhatm_solve(alw, p), 0.2)
        assert ru.shape == rv.shape == (p.grid.n_interior,)


class TestDeterminism:
    @pytest.mark.parametrize("name", ["mb", "alw"])
    def test_thread_count_independent(self, name, monkeypatch):
        m = get_model(name)
        p = reference_params(m, alpha=0.75, hbar=-0.7, n=2, order=4)
        a = qhatm_solve(m, p, threads=1)
        monkeypatch.setenv("QHATM_NUM_THREADS", "8")
        b = qhatm_solve(m, p)
        for (ua, va), (ub, vb) in zip(a.iterates, b.iterates):
            assert ua.values.tobytes() == ub.values.tobytes()
            assert va.values.tobytes() == vb.values.tobytes()
