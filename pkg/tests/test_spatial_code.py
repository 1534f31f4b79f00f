import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onebit_mimo.baseband import constellation_by_name, draw_channel, lift_channel
from onebit_mimo.spatial_code import (
    EPS_MIN,
    SpatialCode,
    SubcodeSelector,
    build_code,
    compress_messages,
    crossover,
    exact_loglikelihood,
    expand_index,
    set_distance,
    subcode_indices,
    weighted_hamming,
)

from conftest import all_observations, oracle_constrained_indices, oracle_q


def _toy_code(codewords, eps):
    """Assemble a code directly from bit patterns and crossover rows."""
    codewords = np.asarray(codewords, dtype=np.uint8)
    eps = np.asarray(eps, dtype=float)
    size = codewords.shape[0]
    weights = -np.log(eps)
    digits = np.arange(size, dtype=np.uint8)[None, :]
    p = size.bit_length() - 1
    shift = np.arange(p - 1, -1, -1, dtype=np.uint8)
    return SpatialCode(
        m=size,
        num_users=1,
        codewords=codewords,
        eps=eps,
        weights=weights,
        user_digits=digits,
        user_bits=((digits[:, None, :] >> shift[None, :, None]) & 1).astype(bool),
        dist_bias=np.einsum("ln,ln->l", weights, codewords.astype(float)),
        dist_slope=weights * (1.0 - 2.0 * codewords),
    )


class TestIndexExpansion:
    def test_zero(self):
        assert expand_index(0, 4, 3).tolist() == [0, 0, 0]

    def test_little_endian_digits(self):
        assert expand_index(7, 4, 2).tolist() == [3, 1]

    def test_round_trip_exhaustive(self):
        for ell in range(4**3):
            assert compress_messages(expand_index(ell, 4, 3), 4) == ell

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            expand_index(16, 4, 2)
        with pytest.raises(ValueError):
            compress_messages([4, 0], 4)

    @given(st.integers(2, 3).map(lambda p: 2**p), st.integers(1, 4), st.data())
    def test_round_trip_random(self, m, k, data):
        ell = data.draw(st.integers(0, m**k - 1))
        assert compress_messages(expand_index(ell, m, k), m) == ell


class TestCrossover:
    def test_pure_noise(self):
        assert crossover(0.0, 1.0) == 0.5

    def test_q_of_one_vs_quadrature(self):
        got = crossover(np.sqrt(0.5), np.sqrt(0.5))
        assert got == pytest.approx(oracle_q(1.0), abs=1e-9)

    def test_clamped_tail(self):
        assert crossover(1e6, 1.0) == EPS_MIN

    def test_monotone(self):
        values = crossover(np.linspace(0, 40, 300), 1.0)
        assert np.all(np.diff(values) <= 0)

    def test_bad_sigma(self):
        with pytest.raises(ValueError):
            crossover(1.0, 0.0)


class TestBuildCode:
    def test_identity_channel_codewords(self, identity_code):
        assert identity_code.codewords.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]

    def test_identity_channel_eps(self, identity_code):
        np.testing.assert_allclose(identity_code.eps, oracle_q(1.0), atol=1e-9)

    def test_weights_are_log_inverse_eps(self, small_code):
        np.testing.assert_allclose(
            small_code.weights, np.log(1.0 / small_code.eps), rtol=1e-12
        )
        assert np.all(small_code.weights >= np.log(2.0) - 1e-12)
        assert np.isfinite(small_code.weights).all()

    def test_size(self, small_code):
        assert small_code.size == 4**2
        assert small_code.num_dims == 4


class TestWeightedHamming:
    def test_identity(self):
        assert weighted_hamming([0, 1, 1], [0, 1, 1], [1.0, 2.0, 3.0]) == 0.0

    def test_full_mismatch(self):
        assert weighted_hamming([0, 0], [1, 1], [1.5, 2.5]) == 4.0

    def test_partial(self):
        assert weighted_hamming([0, 1, 1], [0, 0, 1], [1.5, 2.5, 4.0]) == 2.5

    def test_shape_error(self):
        with pytest.raises(ValueError):
            weighted_hamming([0, 1], [0, 1, 1], [1.0, 1.0, 1.0])

    @given(
        st.integers(1, 8).flatmap(
            lambda n: st.tuples(
                st.lists(st.integers(0, 1), min_size=n, max_size=n),
                st.lists(st.integers(0, 1), min_size=n, max_size=n),
                st.lists(st.integers(0, 1), min_size=n, max_size=n),
                st.lists(st.floats(0.01, 50), min_size=n, max_size=n),
            )
        )
    )
    def test_metric_axioms(self, xyza):
        x, y, z, alpha = xyza
        dxy = weighted_hamming(x, y, alpha)
        dyx = weighted_hamming(y, x, alpha)
        dxz = weighted_hamming(x, z, alpha)
        dzy = weighted_hamming(z, y, alpha)
        assert dxy >= 0
        assert dxy == dyx
        assert (dxy == 0) == (x == y)
        assert dxy <= dxz + dzy + 1e-12


class TestSubcodes:
    def test_empty_constraints(self, small_code):
        sel = SubcodeSelector()
        assert subcode_indices(sel, small_code).tolist() == list(range(16))

    def test_fix_one_user(self, small_code):
        got = subcode_indices(SubcodeSelector(fixed=((1, 3),)), small_code)
        assert got.tolist() == [3, 7, 11, 15]

    def test_fix_user_and_bit(self, small_code):
        sel = SubcodeSelector(fixed=((1, 3),), bit=(2, 1, 0))
        assert subcode_indices(sel, small_code).tolist() == [3, 7]

    def test_duplicate_user_rejected(self):
        with pytest.raises(ValueError):
            SubcodeSelector(fixed=((1, 3), (1, 2)))
        with pytest.raises(ValueError):
            SubcodeSelector(fixed=((1, 3),), bit=(1, 1, 0))

    def test_matches_enumeration_oracle(self, small_code):
        rng = np.random.default_rng(0)
        for _ in range(25):
            fixed = ((int(rng.integers(1, 3)), int(rng.integers(0, 4))),)
            bit_user = 1 if fixed[0][0] == 2 else 2
            bit = (bit_user, int(rng.integers(1, 3)), int(rng.integers(0, 2)))
            sel = SubcodeSelector(fixed=fixed, bit=bit)
            want = oracle_constrained_indices(4, 2, fixed, bit)
            assert subcode_indices(sel, small_code).tolist() == want

    @given(st.integers(1, 3), st.data())
    def test_each_fixed_user_divides_size_by_m(self, k_fixed, data):
        m, k = 4, 4
        rng = np.random.default_rng(7)
        code = build_code(lift_channel(draw_channel(k, 2, rng)),
                          constellation_by_name("4qam"), 0.0)
        users = data.draw(
            st.lists(st.integers(1, k), min_size=k_fixed, max_size=k_fixed,
                     unique=True)
        )
        fixed = {u: data.draw(st.integers(0, m - 1)) for u in users}
        sel = SubcodeSelector(fixed=tuple(sorted(fixed.items())))
        assert subcode_indices(sel, code).size == m ** (k - k_fixed)


class TestSetDistance:
    def test_identical_sets(self, small_code):
        idx = np.arange(6)
        assert set_distance(idx, idx, small_code) == 0.0

    def test_singletons(self):
        code = _toy_code([[0, 0], [1, 1]], [[0.1, 0.1], [0.2, 0.2]])
        assert set_distance([0], [1], code) == 2.0

    def test_centroids(self):
        code = _toy_code([[0, 0], [1, 1], [1, 0], [0, 1]],
                         np.full((4, 2), 0.25))
        assert set_distance([0, 1], [2], code) == pytest.approx(0.5)

    def test_symmetry(self, small_code):
        rng = np.random.default_rng(3)
        for _ in range(10):
            a = rng.choice(16, size=rng.integers(1, 8), replace=False)
            b = rng.choice(16, size=rng.integers(1, 8), replace=False)
            assert set_distance(a, b, small_code) == set_distance(b, a, small_code)

    def test_empty_rejected(self, small_code):
        with pytest.raises(ValueError):
            set_distance([], [0], small_code)


class TestExactLoglikelihood:
    def test_match(self):
        code = _toy_code([[0, 1]], [[0.1, 0.2]])
        got = exact_loglikelihood([0, 1], 0, code)
        assert got == pytest.approx(np.log(0.9) + np.log(0.8), abs=1e-12)
        assert got == pytest.approx(-0.3285, abs=5e-5)

    def test_complement(self):
        code = _toy_code([[0, 1]], [[0.1, 0.2]])
        got = exact_loglikelihood([1, 0], 0, code)
        assert got == pytest.approx(np.log(0.1) + np.log(0.2), abs=1e-12)
        assert got == pytest.approx(-3.9120, abs=5e-5)

    def test_normalizes(self, small_code):
        obs = all_observations(small_code.num_dims)
        for ell in range(small_code.size):
            total = sum(np.exp(exact_loglikelihood(r, ell, small_code)) for r in obs)
            assert total == pytest.approx(1.0, abs=1e-9)

    def test_bad_index(self, small_code):
        with pytest.raises(ValueError):
            exact_loglikelihood([0, 0, 0, 0], 16, small_code)


class TestSubsetMinimumMonotonicity:
    def test_random_pairs(self, small_code):
        rng = np.random.default_rng(5)
        obs = rng.integers(0, 2, size=(200, small_code.num_dims))
        dist = small_code.distances(obs)
        full_min = dist.min(axis=0)
        for _ in range(50):
            subset = rng.choice(16, size=rng.integers(1, 16), replace=False)
            assert np.all(dist[subset].min(axis=0) >= full_min - 1e-15)

