import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from widom import (Interval, MonicPoly, PreimageCircle, PreimageReal, PullbackSpec,
                   ReflectionlessSpec, UnitCircle, apply_weight, build_equilibrium, capacity,
                   circle_power_extremal, extremality_residual, lift_extremal, lp_extremal,
                   moment, orthogonal_monic, polynomial_roots, pullback, reflectionless_measure,
                   relative_entropy, saturation_check, validate_spec, widom_record)
from widom.preimage import InvalidPullbackSpec, band_structure, compose


class TestRoots:
    def test_quadratic(self):
        np.testing.assert_allclose(np.sort(polynomial_roots([-1.0, 0.0, 2.0], 1.0).real),
                                   [-1.0, 1.0], atol=1e-12)

    def test_cube_roots_of_i(self):
        r = polynomial_roots([0, 0, 0, 1], 1j)
        np.testing.assert_allclose(r ** 3, 1j, atol=1e-13)
        assert np.prod(r) == pytest.approx(1j, abs=1e-13)
        assert len(np.unique(np.round(r, 8))) == 3

    def test_double_root(self):
        # T = 2x^2 - 1 at its critical value: both roots at 0
        r = polynomial_roots([-1.0, 0.0, 2.0], -1.0)
        np.testing.assert_allclose(r, 0.0, atol=1e-8)

    @given(st.lists(st.floats(-3, 3), min_size=3, max_size=3), st.floats(0.5, 3),
           st.complex_numbers(max_magnitude=3))
    def test_vieta_and_numpy(self, low, lead, target):
        P = np.array(low + [lead])
        r = polynomial_roots(P, target)
        assert np.sum(r) == pytest.approx(-P[2] / lead, abs=1e-9)
        Q = P.astype(complex)
        Q[0] -= target
        ref = np.roots(Q[::-1])
        # match every root to numpy's companion-matrix roots
        for z in ref:
            assert np.min(np.abs(r - z)) < 1e-6 * max(1, abs(z))

    def test_degree_zero(self):
        with pytest.raises(ValueError):
            polynomial_roots([1.0], 0.0)


class TestSpec:
    def test_degree_mismatch(self):
        with pytest.raises(InvalidPullbackSpec):
            PullbackSpec([-1.0, 0.0, 2.0], [1.0, 0.0, 2.0])

    def test_leading_coefficient(self):
        with pytest.raises(InvalidPullbackSpec):
            PullbackSpec([-1.0, 0.0, 2.0], [0.0, 1.0])

    def test_equilibrium_validates(self):
        s = np.cos(np.linspace(0, np.pi, 100))
        rep = validate_spec(PullbackSpec.equilibrium([-1.0, 0.0, 2.0]), s)
        assert rep.spec.validated and rep.max_identity_error < 1e-10 and rep.min_ratio > 0

    def test_sign_change_rejected(self):
        # R/T' = (y - 0.75)/(2y) is negative on the branch y = sqrt(z) < 0.75
        spec = PullbackSpec([0.0, 0.0, 1.0], [-0.75, 1.0])
        with pytest.raises(InvalidPullbackSpec) as info:
            validate_spec(spec, np.linspace(0.05, 0.95, 10))
        assert info.value.point is not None

    def test_common_zero_cancelled(self):
        # x^2 - 2: T' = 2x, R = 2x would be T'/1, ratio 1 on each branch: sums to 2
        spec = PullbackSpec([-2.0, 0.0, 1.0], [0.0, 1.0])
        num, den = spec.branch_ratio()
        assert num.size == 1 and den.size == 1

    def test_compose(self):
        np.testing.assert_allclose(compose([0, 0, 1], [1, 1]), [1, 2, 1])


class TestPullback:
    def test_chebyshev_equilibrium(self):
        mu0 = build_equilibrium(Interval(-1.0, 1.0), 256)
        mu = pullback(PullbackSpec.equilibrium([-1.0, 0.0, 2.0]), mu0)
        assert mu.provenance == "equilibrium"
        assert isinstance(mu.support, PreimageReal)
        for k in range(12):
            assert moment(mu, k) == pytest.approx(moment(mu0, k), abs=1e-10)

    def test_mass(self):
        mu0 = apply_weight(build_equilibrium(Interval(-1.0, 1.0), 128), [2.0, 0.5, 0.3])
        spec = PullbackSpec([0.0, -3.0, 0.0, 1.0], [-1.0, 0.0, 1.0])
        mu = pullback(spec, mu0)
        assert abs(mu.mass - mu0.mass) < 1e-12

    def test_circle_square(self):
        # density w(T(z)) for R = T'/N: trigonometric moments of even order double up
        w = lambda z: 1.0 + np.real(z)
        mu0 = apply_weight(build_equilibrium(UnitCircle(), 64, circle_shift=0.5), w)
        mu = pullback(PullbackSpec.equilibrium([0, 0, 1]), mu0)
        assert isinstance(mu.support, PreimageCircle)
        assert moment(mu, 2) == pytest.approx(moment(mu0, 1), abs=1e-13)
        assert abs(moment(mu, 1)) < 1e-13
        np.testing.assert_allclose(mu.weights, mu.ref_weights * w(mu.nodes ** 2), rtol=1e-12)

    def test_entropy_invariant(self):
        mu0 = apply_weight(build_equilibrium(Interval(-1.0, 1.0), 512), [1.0, 0.3, 0.5])
        mu = pullback(PullbackSpec.equilibrium([0.0, -3.0, 0.0, 1.0]), mu0)
        assert relative_entropy(mu) == pytest.approx(relative_entropy(mu0), rel=1e-8)

    def test_non_real_preimage(self):
        mu0 = build_equilibrium(Interval(-1.0, 1.0), 32)
        with pytest.raises(ValueError):
            pullback(PullbackSpec.equilibrium([1.0, 0.0, 1.0]), mu0)


class TestWidomInvariance:
    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_invariance(self, p):
        m = 2048 if p == 1 else 512
        mu0 = apply_weight(build_equilibrium(Interval(-1.0, 1.0), m), [1.0, 0.3, 0.5])
        spec = PullbackSpec.equilibrium([-1.0, 0.0, 2.0])
        mu = pullback(spec, mu0)
        for n in range(1, 6):
            assert widom_record(mu, p, 2 * n).W == pytest.approx(widom_record(mu0, p, n).W,
                                                               rel=1e-7)


class TestLift:
    def test_chebyshev(self):
        S = lift_extremal(PullbackSpec.equilibrium([-1.0, 0.0, 2.0]), MonicPoly([0.0, 1.0]), 2)
        np.testing.assert_allclose(S.coefficients, [-0.5, 0.0, 1.0])

    def test_identity(self):
        Tn = MonicPoly([0.3, -0.2, 1.0])
        S = lift_extremal(PullbackSpec.equilibrium([0.0, 1.0]), Tn, 2)
        np.testing.assert_allclose(S.coefficients, Tn.coefficients)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_certified(self, p):
        mu0 = apply_weight(build_equilibrium(Interval(-1.0, 1.0), 512), [1.0, 0.3, 0.5])
        spec = PullbackSpec.equilibrium([0.0, -3.0, 0.0, 1.0])
        Tn, _ = lp_extremal(mu0, p, 2)
        S = lift_extremal(spec, Tn, p, mu0=mu0)
        assert extremality_residual(pullback(spec, mu0), p, S) < 1e-7

    def test_postcondition(self):
        # R != T'/N changes the measure but the check still compares norms
        mu0 = build_equilibrium(Interval(-1.0, 1.0), 128)
        spec = PullbackSpec([0.0, -3.0, 0.0, 1.0], [-1.0, 0.0, 1.0])
        Tn, _ = orthogonal_monic(mu0, 2)
        S = lift_extremal(spec, Tn, 2, mu0=mu0)
        assert S.degree == 6


class TestCirclePowers:
    def test_uniform(self):
        mu = build_equilibrium(PreimageCircle([0, 0, 1]), 64)
        S = circle_power_extremal(MonicPoly([0.0, 1.0]), 1, 2, mu, 2)
        np.testing.assert_allclose(S.coefficients, [0, 0, 0, 1], atol=1e-15)

    def test_one_plus_cos(self):
        mu0 = apply_weight(build_equilibrium(UnitCircle(), 256, circle_shift=0.5),
                           lambda z: 1 + z.real)
        mu = pullback(PullbackSpec.equilibrium([0, 0, 1]), mu0)
        T1, _ = orthogonal_monic(mu0, 1)
        np.testing.assert_allclose(T1.coefficients, [-0.5, 1.0], atol=1e-13)
        S = circle_power_extremal(T1, 1, 2, mu, 2, mu0=mu0)
        np.testing.assert_allclose(S.coefficients, [0, -0.5, 0, 1], atol=1e-13)

    def test_ell_range(self):
        mu = build_equilibrium(PreimageCircle([0, 0, 1]), 16)
        with pytest.raises(ValueError):
            circle_power_extremal(MonicPoly([0.0, 1.0]), 2, 2, mu, 2)

    def test_wrong_polynomial_not_extremal(self):
        mu0 = apply_weight(build_equilibrium(UnitCircle(), 64, circle_shift=0.5),
                           lambda z: 1 + z.real)
        mu = pullback(PullbackSpec.equilibrium([0, 0, 1]), mu0)
        S = circle_power_extremal(MonicPoly([0.7, 1.0]), 1, 2, mu, 2, mu0=mu0)
        assert extremality_residual(mu, 2, S) > 0.1


class TestBands:
    def test_x2_minus_2(self):
        bs = band_structure([-2.0, 0.0, 1.0])
        np.testing.assert_allclose(bs.bands, [(-math.sqrt(3), -1.0), (1.0, math.sqrt(3))])
        np.testing.assert_allclose(bs.critical, [0.0], atol=1e-14)

    def test_no_gaps(self):
        bs = band_structure([-1.0, 0.0, 2.0])
        assert len(bs.bands) == 1 and not bs.gaps

    def test_complex_preimage(self):
        with pytest.raises(ValueError):
            band_structure([1.0, 0.0, 1.0])


class TestReflectionless:
    def test_no_gap_is_equilibrium(self):
        mu = reflectionless_measure(ReflectionlessSpec([-1.0, 0.0, 2.0], []), 128)
        ref = build_equilibrium(Interval(-1.0, 1.0), 256)
        for k in range(8):
            assert moment(mu, k) == pytest.approx(moment(ref, k), abs=1e-12)

    def test_d_at_critical_point(self):
        spec = ReflectionlessSpec([-2.0, 0.0, 1.0], [0.0])
        mu = reflectionless_measure(spec, 256)
        cap = capacity(mu.support).cap
        assert (orthogonal_monic(mu, 2)[1] / cap ** 2) ** 2 == pytest.approx(2.0, abs=1e-8)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_off_center(self, n):
        mu = reflectionless_measure(ReflectionlessSpec([-2.0, 0.0, 1.0], [0.5]), 512)
        cap = capacity(mu.support).cap
        assert (orthogonal_monic(mu, 2 * n)[1] / cap ** (2 * n)) ** 2 == pytest.approx(2.0, abs=1e-7)

    def test_edge_reported(self):
        mu = reflectionless_measure(ReflectionlessSpec([-2.0, 0.0, 1.0], [1.0]), 64)
        assert mu.provenance.startswith("reflectionless[d1:1->")

    def test_outside_gap(self):
        with pytest.raises(ValueError):
            ReflectionlessSpec([-2.0, 0.0, 1.0], [1.5])

    def test_gap_count(self):
        with pytest.raises(ValueError):
            ReflectionlessSpec([-2.0, 0.0, 1.0], [])


class TestSaturation:
    def test_chebyshev(self):
        rep = saturation_check([-1.0, 0.0, 2.0], "real-interval")
        assert rep.ok and rep.rows[0]["W"] == pytest.approx(math.sqrt(2), abs=1e-8)

    def test_degree_one(self):
        rep = saturation_check([0.0, 0.5], "real-interval")
        assert rep.ok and rep.degree == 1

    def test_circle(self):
        rep = saturation_check([0, 0, 0, 1], "circle", p=2, k_multiples=(1, 2))
        assert rep.ok and [r["n"] for r in rep.rows] == [3, 6]

    def test_circle_p3(self):
        rep = saturation_check([0, 0, 0, 1], "circle", p=3, k_multiples=(1,), tol=1e-7)
        assert rep.ok

    def test_real_needs_real(self):
        with pytest.raises(ValueError):
            saturation_check([0, 1j, 1], "real-interval")

    def test_variant(self):
        with pytest.raises(ValueError):
            saturation_check([0, 1], "disk")
