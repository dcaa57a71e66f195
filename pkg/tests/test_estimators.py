import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hullvol import estimators as est
from hullvol.geometry import Box, Ellipsoid, Polytope, volume
from hullvol.hull import PointCloud, convex_hull, hull_of
from hullvol.ppp import PppConfig, sample_ppp
from hullvol.streams import RngStream

from conftest import make_summary

EMPTY = make_summary(0.0, 0, 0)


def _mc(body, lam, m, seed, names):
    out = {n: [] for n in names}
    for i in range(m):
        cloud = sample_ppp(PppConfig(body, lam), RngStream(seed, i))
        h = convex_hull(cloud)
        vals = est.estimate_all(h, cloud, lam, names)
        for n in names:
            out[n].append(vals[n].value)
    return {n: np.array(v) for n, v in out.items()}


def _within(x, target, k):
    se = x.std(ddof=1) / math.sqrt(len(x))
    return abs(x.mean() - target) <= k * se


class TestArithmetic:
    def test_naive_hull(self, square_cloud):
        assert est.naive_hull(EMPTY).value == 0.0
        assert est.naive_hull(hull_of(square_cloud)).value == pytest.approx(1.0)

    def test_naive_count(self):
        assert est.naive_count(0, 5.0).value == 0.0
        assert est.naive_count(100, 100.0).value == 1.0
        with pytest.raises(ValueError):
            est.naive_count(3, 0.0)

    def test_oracle(self):
        assert est.oracle(make_summary(0.7, 10, 4), 10.0).value == pytest.approx(1.1)
        assert est.oracle(EMPTY, 10.0).value == 0.0
        with pytest.raises(ValueError):
            est.oracle(EMPTY, -1.0)

    def test_plugin(self):
        assert est.plugin(EMPTY).value == 0.0
        assert est.plugin(make_summary(0.7, 10, 4)).value == pytest.approx(0.98)

    def test_final(self):
        assert est.final(make_summary(0.7, 10, 4)).value == pytest.approx(1.1)
        h = make_summary(0.2, 5, 5)
        assert est.final(h).value == pytest.approx(1.2)
        assert est.final(h).value == pytest.approx(0.2 + 5 * 0.2 / 1)

    def test_pseudo(self):
        assert est.pseudo(make_summary(0.4, 3, 0), 7.0).value == pytest.approx(0.4)
        assert est.pseudo(make_summary(0.0, 2, 2), 10.0).value == pytest.approx(0.2)

    def test_pseudo_matches_ratio_form(self):
        v, n, nb, lam = 0.83, 40, 9, 37.0
        lam_in = lam * v
        ratio_form = v + v * nb * (1 / (n - nb + 1) + math.exp(-lam_in) / lam_in)
        assert est.pseudo(make_summary(v, n, nb), lam).value == pytest.approx(ratio_form,
                                                                              rel=1e-14)

    def test_used_intensity_flags(self, square_cloud):
        h = hull_of(square_cloud)
        cloud = PointCloud.from_points(square_cloud)
        for name, e in est.estimate_all(h, cloud, 3.0).items():
            assert e.used_intensity == (name in {"naive_count", "oracle", "pseudo"})
        assert set(est.estimate_all(h, cloud)) == {"naive_hull", "plugin", "final", "gayraud"}


class TestGayraud:
    def test_worked_example(self):
        pts = [(0, 0), (1, 0), (0, 1),
               (0.9, 0.9), (0.1, 0.1), (0.2, 0.2),
               (0, 0), (0.5, 0), (0, 0.5)]
        e = est.gayraud(PointCloud.from_points(pts))
        assert e.value == pytest.approx(0.5 + 0.125 / 3, abs=1e-12)

    def test_too_few_points(self):
        e = est.gayraud(PointCloud.from_points([(0, 0), (1, 1)]))
        assert e.value == 0.0 and e.note

    def test_split_sizes(self):
        for n in range(3, 40):
            a, b, c = est.gayraud_split(n)
            k = n // 3
            assert (b.stop - b.start, c.stop - c.start) == (k, k)
            assert a.stop - a.start == k + n % 3 and c.stop == n

    def test_correction_nonnegative(self, rng):
        for _ in range(50):
            cloud = PointCloud(rng.random((int(rng.integers(3, 200)), 2)), 2)
            h = convex_hull(cloud[est.gayraud_split(len(cloud))[0]])
            assert est.gayraud(cloud).value >= h.hull_volume


class TestDilatedHull:
    def test_square_plus_centre(self, square_cloud):
        h = hull_of(square_cloud)
        assert est.dilation_factor(h) == pytest.approx(math.sqrt(3))
        assert volume(est.dilated_hull(h)) == pytest.approx(3.0, rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            est.dilated_hull(hull_of([(0, 0), (1, 1), (2, 2)]))

    def test_factor_above_one(self, rng):
        for _ in range(50):
            h = convex_hull(rng.random((30, 2)))
            assert est.dilation_factor(h) > 1

    @pytest.mark.parametrize("centre", ["vertex", "centroid"])
    def test_volume_equals_final(self, rng, centre):
        for i in range(1000):
            d = 2 + i % 3
            h = convex_hull(rng.random((int(rng.integers(d + 2, 60)), d)))
            target = est.final(h).value
            assert volume(est.dilated_hull(h, centre)) == pytest.approx(target, rel=1e-9)


summaries = st.builds(
    lambda v, nb, ni: make_summary(v, nb + ni, nb),
    st.floats(0.0, 1e3, allow_nan=False), st.integers(0, 500), st.integers(0, 5000))


class TestOrderings:
    @settings(max_examples=300)
    @given(h=summaries, lam=st.floats(1e-3, 1e5))
    def test_orderings(self, h, lam):
        fin, plug = est.final(h).value, est.plugin(h).value
        assert fin >= plug
        assert fin >= est.naive_hull(h).value
        assert est.oracle(h, lam).value >= est.naive_hull(h).value
        gap = est.pseudo(h, lam).value - fin
        assert gap == pytest.approx(h.n_boundary * math.exp(-lam * h.hull_volume) / lam,
                                    rel=1e-9, abs=1e-12)
        assert gap >= -1e-12 * max(fin, 1.0)

    @settings(max_examples=300)
    @given(h=summaries)
    def test_form_equivalence(self, h):
        a = (h.n_total + 1) / (h.n_interior + 1) * h.hull_volume
        b = h.hull_volume + h.n_boundary * h.hull_volume / (h.n_interior + 1)
        assert est.final(h).value == pytest.approx(a, rel=1e-15)
        assert a == pytest.approx(b, rel=1e-13)


class TestMonteCarlo:
    def test_naive_count_unbiased(self):
        x = _mc(Box.unit(2), 200.0, 2000, 31, ["naive_count"])["naive_count"]
        assert _within(x, 1.0, 4)

    def test_oracle_and_final_unbiased(self):
        r = _mc(Box.unit(2), 500.0, 2000, 32, ["oracle", "final"])
        assert _within(r["oracle"], 1.0, 4)
        assert _within(r["final"], 1.0, 4)

    def test_pseudo_unbiased(self):
        x = _mc(Box.unit(2), 200.0, 5000, 33, ["pseudo"])["pseudo"]
        assert _within(x, 1.0, 4)

    @pytest.mark.parametrize("body", [
        Box.unit(2), Ellipsoid.ball(2, radius=1 / math.sqrt(math.pi)),
        Polytope([(0, 0), (math.sqrt(2), 0), (0, math.sqrt(2))])])
    @pytest.mark.parametrize("n", [50, 500])
    def test_oracle_unbiased_bodies(self, body, n):
        x = _mc(body, n / volume(body), 1000, 34 + n, ["oracle"])["oracle"]
        assert _within(x, volume(body), 4)
