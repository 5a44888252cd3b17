import math

import pytest
from hypothesis import given, strategies as st

from widom import (CircularArc, Interval, PreimageCircle, PreimageReal, UnitCircle,
                   add_atoms, apply_weight, build_equilibrium, capacity, relative_entropy)
from widom.potential import UnknownDensityError


class TestCapacity:
    def test_interval(self):
        assert capacity(Interval(-2.0, 2.0)).cap == 1.0

    def test_arc(self):
        assert capacity(CircularArc(math.pi / 2)).cap == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert capacity(CircularArc(1.0)).cap == pytest.approx(0.4794255386, abs=1e-10)

    def test_circle(self):
        assert capacity(UnitCircle()).cap == 1.0

    def test_preimage(self):
        res = capacity(PreimageReal([-1.0, 0.0, 2.0]))
        assert res.method == "preimage-relation"
        # the pre-image of [-1,1] under 2x^2-1 is [-1,1]
        assert res.cap == pytest.approx(capacity(Interval(-1.0, 1.0)).cap, abs=1e-15)

    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=5),
           st.floats(0.2, 5.0), st.booleans())
    def test_preimage_relation(self, lower, lead, neg):
        Q = lower + [(-lead if neg else lead)]
        for K, base in ((PreimageReal(Q), 0.5), (PreimageCircle(Q), 1.0)):
            cap = capacity(K).cap
            assert abs(cap ** K.degree * lead - base) <= 1e-14 * base


class TestEntropy:
    def test_equilibrium(self, interval_m2):
        assert relative_entropy(interval_m2) == 1.0

    def test_x2_plus_1(self, interval_m2):
        # golden ratio squared; mpmath quadrature agrees to 17 digits
        S = relative_entropy(apply_weight(interval_m2, [1.0, 0.0, 1.0]))
        assert S == pytest.approx((1 + math.sqrt(5)) ** 2 / 4, rel=1e-12)

    def test_zero_weight(self, interval_m2):
        x = interval_m2.nodes.real
        assert relative_entropy(interval_m2, weight=lambda z: (z.real - x[3]) ** 2) == 0.0

    def test_explicit_weight(self, interval_m2):
        S = relative_entropy(interval_m2, weight=[1.0, 0.0, 1.0])
        assert S == pytest.approx(2.6180339887498948, rel=1e-12)

    def test_quotient_of_weights(self, interval_m2):
        mu = apply_weight(interval_m2, [2.0, 0.5])
        bare = mu.replace(density=None, ref_weights=None)
        assert relative_entropy(bare, muK=interval_m2) == pytest.approx(relative_entropy(mu), rel=1e-14)

    def test_unknown_density(self, interval_m2):
        bare = interval_m2.replace(density=None, ref_weights=None, provenance="weighted")
        with pytest.raises(UnknownDensityError):
            relative_entropy(bare)

    def test_atoms_ignored(self, interval_m2):
        mu = apply_weight(interval_m2, [3.0, 1.0])
        assert relative_entropy(add_atoms(mu, [0.0], [5.0])) == relative_entropy(mu)

    @given(st.floats(0.1, 2.0), st.floats(0.1, 2.0), st.floats(0.01, 100.0))
    def test_multiplicative_and_scaling(self, a, b, c):
        mu = build_equilibrium(Interval(-2.0, 2.0), 128)
        w1 = lambda z: a + z.real ** 2
        w2 = lambda z: b + (z.real - 1) ** 2
        S1 = relative_entropy(mu, weight=w1)
        S2 = relative_entropy(mu, weight=w2)
        S12 = relative_entropy(mu, weight=lambda z: w1(z) * w2(z))
        assert S12 == pytest.approx(S1 * S2, rel=1e-12)
        assert relative_entropy(mu, weight=lambda z: c * w1(z)) == pytest.approx(c * S1, rel=1e-12)
