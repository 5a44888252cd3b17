import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from widom.arc import (ArcParams, arc_asymptotics, arc_verblunsky_closed, arc_widom_closed,
                       arc_widom_sequence, chebyshev_first_kind, chebyshev_ratio, limit_gap,
                       monotonicity_report, szego_check)
from widom.extremal import verblunsky_from_measure
from widom.measures import CircularArc, build_equilibrium

# high-precision moments + Szego recursion
ALPHA_ORACLE = {
    math.pi / 2: [-0.5, -0.66666666666666667, -0.7, -0.70588235294117647,
                  -0.70689655172413793, -0.70707070707070707],
    1.0: [-0.77015115293406986, -0.87015298287666004, -0.87709623267697716,
          -0.87755084525520753, -0.87758049394678962, -0.87758242706134333],
    2.5: [-0.099428192226533143, -0.18087255344102788, -0.2373674829267332,
          -0.27218726837450652, -0.29210751423087147, -0.30302099643036803],
}

gammas = st.floats(min_value=0.05, max_value=3.1)


class TestChebyshev:
    def test_small_values(self):
        assert chebyshev_first_kind(0, 3.0) == 1.0
        assert chebyshev_first_kind(2, 3.0) == pytest.approx(17.0, rel=1e-15)

    def test_hyperbolic(self):
        assert chebyshev_first_kind(5, math.cosh(1.3)) == pytest.approx(math.cosh(6.5), rel=1e-13)

    @given(gammas)
    def test_ratio_matches_direct(self, g):
        P = ArcParams(g)
        r = chebyshev_ratio(P, 8)
        for k in range(8):
            direct = math.cosh((k + 1) * P.Theta) / math.cosh(k * P.Theta)
            assert r[k] == pytest.approx(direct, rel=1e-12)


class TestParams:
    def test_quarter(self):
        P = ArcParams(math.pi / 2)
        assert P.a == pytest.approx(0.5)
        assert P.s - 1 == pytest.approx(2.0)

    def test_range(self):
        for g in (0.0, math.pi, -1.0):
            with pytest.raises(ValueError):
                ArcParams(g)


class TestVerblunsky:
    @pytest.mark.parametrize("g", sorted(ALPHA_ORACLE))
    def test_oracle(self, g):
        a = arc_verblunsky_closed(g, 6).alphas.real
        np.testing.assert_allclose(a, ALPHA_ORACLE[g], rtol=0, atol=1e-14)

    def test_quarter_exact(self):
        a = arc_verblunsky_closed(math.pi / 2, 3).alphas.real
        assert a[1] == pytest.approx(-2 / 3, abs=1e-15)
        assert a[2] == pytest.approx(-0.7, abs=1e-15)

    @given(gammas)
    def test_alpha0(self, g):
        a0 = arc_verblunsky_closed(g, 1).alphas[0].real
        assert a0 == pytest.approx(-math.cos(g / 2) ** 2, abs=1e-12)

    def test_limit(self):
        a = arc_verblunsky_closed(math.pi / 2, 61).alphas.real
        assert abs(abs(a[60]) - math.sqrt(2) / 2) < 1e-10

    def test_quadrature(self, arc_quarter):
        q = verblunsky_from_measure(arc_quarter, 12).alphas
        np.testing.assert_allclose(q, arc_verblunsky_closed(math.pi / 2, 12).alphas, atol=1e-10)

    def test_near_pi(self):
        g = math.pi - 1e-6
        a = arc_verblunsky_closed(g, 40).alphas.real
        assert np.all(a < 0) and np.all(np.isfinite(a))
        assert np.all(limit_gap(g, 40) > 0)


class TestWidom:
    def test_quarter(self):
        seq = arc_widom_sequence(math.pi / 2, 2)
        np.testing.assert_allclose(seq, [1.5, 5 / 3], rtol=1e-15)

    def test_long_limit(self):
        assert abs(arc_widom_closed(math.pi / 2, 200) - (1 + math.sqrt(2) / 2)) < 1e-6

    def test_closed_equals_sequence(self):
        seq = arc_widom_sequence(1.0, 10)
        assert arc_widom_closed(1.0, 10) == pytest.approx(seq[-1], rel=1e-14)

    def test_n_zero(self):
        with pytest.raises(ValueError):
            arc_widom_closed(1.0, 0)

    def test_direct_quadrature(self, arc_quarter):
        from widom.extremal import orthogonal_monic
        cap = math.sin(math.pi / 4)
        for n in (1, 5, 10):
            direct = (orthogonal_monic(arc_quarter, n)[1] / cap ** n) ** 2
            assert direct == pytest.approx(arc_widom_closed(math.pi / 2, n), abs=1e-10)

    @given(gammas)
    def test_between_inf_and_sup(self, g):
        limit, inf, sup = arc_asymptotics(g)
        seq = arc_widom_sequence(g, 30)
        assert seq[0] == pytest.approx(inf, rel=1e-12)
        assert np.all(seq >= inf * (1 - 1e-14)) and np.all(seq <= sup * (1 + 1e-14))
        assert np.all(limit_gap(g, 30) > 0)
        assert limit == sup

    @given(gammas)
    def test_gap_matches_naive(self, g):
        d = limit_gap(g, 8)
        a = arc_verblunsky_closed(g, 8).alphas.real
        np.testing.assert_allclose(d, math.cos(g / 2) - np.abs(a), atol=1e-14)


class TestSzego:
    @pytest.mark.parametrize("g", [0.5, 1.0, math.pi / 2, 2.5])
    def test_relations(self, g):
        rep = szego_check(g, 6, m=256)
        assert rep.ok, rep.failures

    def test_bad_k(self):
        with pytest.raises(ValueError):
            szego_check(1.0, 0)


class TestMonotonicity:
    def test_grid(self):
        rep = monotonicity_report(np.linspace(0.5, 3.0, 10), 50)
        assert rep.ok, rep.failures
        assert all(v > 0 for v in rep.margins.values())

    def test_single_gamma(self):
        rep = monotonicity_report([1.0], 20)
        assert rep.ok

    @pytest.mark.parametrize("grid", [[], [1.0, 0.5], [0.0, 1.0], [1.0, math.pi]])
    def test_bad_grid(self, grid):
        with pytest.raises(ValueError):
            monotonicity_report(grid, 10)

    def test_arc_measure_is_symmetric(self):
        mu = build_equilibrium(CircularArc(1.0), 64)
        assert abs(np.sum(mu.weights * mu.nodes.imag)) < 1e-15
