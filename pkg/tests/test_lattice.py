import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from octantheat import (
    FrequencyField,
    box_project,
    convolve,
    convolve_power,
    load_field,
    make_grid,
    save_field,
    support_stats,
)


def indicator(grid, lo, hi, amp=1.0):
    vals = np.ones(grid.shape, dtype=complex) * amp
    for c in grid.coords():
        vals = vals * ((c >= lo - 1e-12) & (c < hi - 1e-12))
    return FrequencyField(grid, vals)


def rng_field(grid, seed, sparse=False):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if sparse:
        vals = vals * (rng.random(grid.shape) < 0.3)
    return FrequencyField(grid, vals)


grids = st.builds(
    make_grid,
    st.sampled_from([1, 2]),
    st.sampled_from([1, 2, 3]),
    st.sampled_from([1.0, 0.5, 0.25]),
)


class TestMakeGrid:
    def test_point_count_1d(self):
        g = make_grid(1, 4, 0.25)
        assert g.n == 16
        assert np.allclose(g.axis, np.arange(16) * 0.25)
        assert g.axis[-1] == 3.75

    def test_point_count_2d(self):
        g = make_grid(2, 2, 0.5)
        assert g.shape == (4, 4)
        assert np.prod(g.shape) == 16

    def test_rejects_misaligned_spacing(self):
        with pytest.raises(ValueError):
            make_grid(1, 4, 0.3)

    def test_rejects_bad_extent_and_dim(self):
        with pytest.raises(ValueError):
            make_grid(1, 0, 0.5)
        with pytest.raises(ValueError):
            make_grid(4, 2, 0.5)


class TestBoxProject:
    def test_support_inside_cube_unchanged(self):
        g = make_grid(1, 4, 0.25)
        f = indicator(g, 0.0, 1.0)
        p = box_project(f, 0)
        assert np.array_equal(p.values, f.values)

    def test_disjoint_cube_zero(self):
        g = make_grid(1, 8, 0.25)
        f = indicator(g, 0.0, 1.0)
        assert not box_project(f, 5).values.any()

    def test_half_open_cube_convention(self):
        g = make_grid(1, 4, 0.25)
        f = indicator(g, 0.5, 1.5)
        p = box_project(f, 0)
        expect = indicator(g, 0.5, 1.0)
        assert np.array_equal(p.values, expect.values)

    def test_out_of_range_is_zero(self):
        g = make_grid(1, 2, 0.5)
        f = indicator(g, 0.0, 2.0)
        assert not box_project(f, 7).values.any()
        assert not box_project(f, -1).values.any()

    @settings(max_examples=25, deadline=None)
    @given(grids, st.integers(0, 2**31 - 1))
    def test_partition_of_unity_bitwise(self, g, seed):
        f = rng_field(g, seed)
        total = np.zeros(g.shape, dtype=complex)
        for idx in np.ndindex((g.xi_max,) * g.d):
            total = total + box_project(f, idx).values
        assert np.array_equal(total, f.values)


class TestConvolve:
    def test_power_one_is_identity(self):
        g = make_grid(1, 4, 0.125)
        f = rng_field(g, 3)
        out = convolve_power(f, 1)
        assert np.array_equal(out.values, f.values)

    def test_triangle_profile_analytic_overlap(self):
        # (chi_[1,1.5) * chi_[1,1.5))(xi) equals the overlap length:
        # a hat on [2, 3] with peak 0.5 at 2.5.  The left-edge Riemann sum
        # reproduces it to O(h); a refined grid must halve the defect.
        errs = {}
        for h in (1 / 32, 1 / 64):
            g = make_grid(1, 4, h)
            f = indicator(g, 1.0, 1.5)
            c = convolve_power(f, 2, warn_on_truncation=False)
            xi = g.axis
            hat = np.clip(np.minimum(xi - 2.0, 3.0 - xi), 0.0, 0.5)
            errs[h] = np.abs(c.values.real - hat).max()
            peak = c.values[int(round(2.5 / h))].real
            assert peak == pytest.approx(0.5, abs=2.5 * h)
        assert errs[1 / 64] < 0.75 * errs[1 / 32]

    def test_support_arithmetic(self):
        g = make_grid(1, 8, 0.125)
        f = indicator(g, 0.5, 1.0)
        for m in (2, 3, 4):
            c = convolve_power(f, m, warn_on_truncation=False)
            nz = np.nonzero(c.values)[0] * g.h
            assert nz.min() == pytest.approx(m * 0.5, abs=1e-12)
            assert nz.max() == pytest.approx(m * 1.0 - m * g.h, abs=1e-12)

    def test_power_matches_repeated_pairwise(self):
        g = make_grid(1, 6, 0.25)
        f = rng_field(g, 11)
        p3 = convolve_power(f, 3, warn_on_truncation=False)
        two = convolve(f, f, warn_on_truncation=False)
        three = convolve(two, f, warn_on_truncation=False)
        assert np.array_equal(p3.values, three.values)

    def test_truncation_warning(self):
        g = make_grid(1, 2, 0.25)
        f = indicator(g, 1.0, 2.0)
        with pytest.warns(RuntimeWarning, match="xi_max"):
            convolve_power(f, 2)

    @settings(max_examples=20, deadline=None)
    @given(grids, st.integers(0, 2**31 - 1))
    def test_support_containment_exact(self, g, seed):
        f = rng_field(g, seed, sparse=True)
        h = rng_field(g, seed + 1, sparse=True)
        c = convolve(f, h, warn_on_truncation=False)
        # supp(f*g) subset supp f + supp g, no wraparound
        mask = np.zeros(tuple(2 * n - 1 for n in g.shape), dtype=bool)
        fi = np.argwhere(f.values != 0)
        hi = np.argwhere(h.values != 0)
        for a in fi:
            for b in hi:
                mask[tuple(a + b)] = True
        allowed = mask[tuple(slice(0, n) for n in g.shape)]
        assert not np.any((c.values != 0) & ~allowed)

    def test_single_cube_window(self):
        # projecting a convolution of m unit-cube fields onto cube k gives
        # zero whenever |k - sum k_i|_inf > m + 1
        g = make_grid(1, 8, 0.5)
        f1 = indicator(g, 1.0, 2.0)
        f2 = indicator(g, 2.0, 3.0)
        c = convolve(f1, f2, warn_on_truncation=False)
        for k in range(8):
            proj = box_project(c, k)
            if abs(k - 3) > 3:  # m = 2
                assert not proj.values.any()
        assert box_project(c, 3).values.any()

    def test_fft_path_matches_direct(self):
        g = make_grid(2, 2, 0.25)
        f = rng_field(g, 5, sparse=True)
        h = rng_field(g, 6, sparse=True)
        for rule in ("riemann", "trapezoid"):
            a = convolve(f, h, rule=rule, method="direct", warn_on_truncation=False)
            b = convolve(f, h, rule=rule, method="fft", warn_on_truncation=False)
            scale = np.abs(a.values).max() or 1.0
            assert np.abs(a.values - b.values).max() <= 1e-12 * scale
            # the FFT path must keep exact support semantics
            assert np.array_equal(a.values != 0, b.values != 0)

    def test_trapezoid_rule_second_order_on_smooth_support(self):
        # convolving heat-damped half-line data: trapezoid weighting
        # converges at O(h^2) where the plain sum is O(h).  The exact value
        # comes from Gauss-Legendre quadrature of the overlap integral.
        x = 2.5
        nodes, wts = np.polynomial.legendre.leggauss(64)
        eta = 0.25 * nodes + 1.25  # overlap interval [1, x-1]
        exact = 0.25 * np.sum(
            wts * np.exp(-0.3 * (eta**2 + (x - eta) ** 2) + x)
        )

        def defect(h, rule):
            g = make_grid(1, 4, h)
            xi = g.axis
            f = FrequencyField(g, np.exp(-0.3 * xi**2 + xi) * (xi >= 1.0))
            c = convolve(f, f, rule=rule, warn_on_truncation=False)
            return abs(c.values[int(round(x / h))].real - exact)

        d1, d2 = defect(1 / 32, "trapezoid"), defect(1 / 64, "trapezoid")
        assert d2 < d1 / 3.0
        assert defect(1 / 64, "trapezoid") < 0.05 * defect(1 / 64, "riemann")

    @settings(max_examples=20, deadline=None)
    @given(grids, st.integers(0, 2**31 - 1))
    def test_commutative(self, g, seed):
        f = rng_field(g, seed, sparse=True)
        h = rng_field(g, seed + 1, sparse=True)
        a = convolve(f, h, warn_on_truncation=False).values
        b = convolve(h, f, warn_on_truncation=False).values
        scale = np.abs(a).max() or 1.0
        assert np.abs(a - b).max() <= 1e-13 * scale

    @settings(max_examples=20, deadline=None)
    @given(grids, st.integers(0, 2**31 - 1))
    def test_bilinear(self, g, seed):
        f1 = rng_field(g, seed)
        f2 = rng_field(g, seed + 1)
        h = rng_field(g, seed + 2, sparse=True)
        lhs = convolve(
            FrequencyField(g, f1.values + 2j * f2.values), h,
            warn_on_truncation=False,
        ).values
        rhs = convolve(f1, h, warn_on_truncation=False).values + \
            2j * convolve(f2, h, warn_on_truncation=False).values
        scale = np.abs(rhs).max() or 1.0
        assert np.abs(lhs - rhs).max() <= 1e-12 * scale

    def test_rejects_mismatched_grids(self):
        f = rng_field(make_grid(1, 2, 0.5), 0)
        g = rng_field(make_grid(1, 4, 0.5), 0)
        with pytest.raises(ValueError):
            convolve(f, g)


class TestSupportStats:
    def test_interval_indicator(self):
        g = make_grid(1, 4, 0.25)
        st_ = support_stats(indicator(g, 1.0, 1.5))
        assert st_.min_l1 == 1.0
        assert st_.min_linf == 1.0
        assert st_.in_octant

    def test_zero_field_empty(self):
        g = make_grid(1, 4, 0.25)
        st_ = support_stats(FrequencyField(g, np.zeros(g.shape)))
        assert st_.empty
        assert st_.min_l1 == np.inf

    def test_l1_vs_linf_2d(self):
        g = make_grid(2, 4, 0.25)
        vals = np.zeros(g.shape, dtype=complex)
        x, y = g.coords()
        vals[((x >= 1.0) & (x < 1.5)) & ((y >= 2.0) & (y < 2.5))] = 1.0
        st_ = support_stats(FrequencyField(g, vals))
        assert st_.min_l1 == 3.0
        assert st_.min_linf == 2.0

    def test_invariant_l1_dominates_linf(self):
        g = make_grid(2, 3, 0.5)
        f = rng_field(g, 9, sparse=True)
        st_ = support_stats(f)
        if not st_.empty:
            assert st_.min_l1 >= st_.min_linf >= 0

    def test_default_tol_below_quadrature_noise(self):
        g = make_grid(1, 4, 0.25)
        vals = np.zeros(g.shape, dtype=complex)
        vals[8] = 1.0
        vals[2] = 1e-15  # numerical dust must not count as support
        st_ = support_stats(FrequencyField(g, vals))
        assert st_.min_l1 == 2.0


class TestFieldIO:
    def test_roundtrip(self, tmp_path):
        g = make_grid(2, 2, 0.5)
        f = rng_field(g, 21)
        p = tmp_path / "f.field"
        save_field(f, p)
        back = load_field(p)
        assert back.grid == g
        assert np.array_equal(back.values, f.values)

    def test_header_format(self, tmp_path):
        g = make_grid(1, 4, 0.25)
        f = rng_field(g, 2)
        p = tmp_path / "f.field"
        save_field(f, p)
        first = p.read_text().splitlines()[0]
        assert first == "1 0.25 4"

    def test_rejects_nonfinite(self):
        g = make_grid(1, 2, 0.5)
        vals = np.zeros(g.shape, dtype=complex)
        vals[0] = np.nan
        with pytest.raises(ValueError):
            FrequencyField(g, vals)
