import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onebit_mimo.fec import (
    PolarCode,
    PolarCodec,
    RepetitionCode,
    bhattacharyya_profile,
    construct_frozen_set,
    polar_encode,
    polar_sc_decode,
    polar_transform,
)


def _kron_transform(u):
    """Oracle: explicit matrix form of the butterfly via nested Kronecker products."""
    n = len(u)
    g = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    full = np.array([[1]], dtype=np.uint8)
    while full.shape[0] < n:
        full = np.kron(full, g) % 2
    return np.asarray(u, dtype=np.uint8) @ full % 2


class TestConstruction:
    def test_n2_freezes_first_position(self):
        # one recursion step: the degraded branch 2Z - Z^2 is always the worse
        assert construct_frozen_set(2, 0.5).tolist() == [0]

    def test_rate_half_128(self):
        frozen = construct_frozen_set(128, 0.5)
        assert frozen.size == 64
        assert PolarCode.construct(128, 0.5).num_info == 64

    def test_deterministic(self):
        a = construct_frozen_set(64, 0.75)
        b = construct_frozen_set(64, 0.75)
        assert np.array_equal(a, b)

    def test_profile_recursion(self):
        z = bhattacharyya_profile(4, 0.0)
        z0 = np.exp(-1.0)
        up = 2 * z0 - z0**2
        lo = z0**2
        expect = [2 * up - up**2, up**2, 2 * lo - lo**2, lo**2]
        np.testing.assert_allclose(z, expect, rtol=1e-15)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            construct_frozen_set(96, 0.5)
        with pytest.raises(ValueError):
            construct_frozen_set(128, 0.0)
        with pytest.raises(ValueError):
            construct_frozen_set(128, 1.3)


class TestEncoder:
    def test_zero_maps_to_zero(self):
        code = PolarCode.construct(16, 0.5)
        assert not polar_encode(np.zeros(8, dtype=np.uint8), code).any()

    def test_n2_hand_example(self):
        code = PolarCode(2, [0])
        assert polar_encode([1], code).tolist() == [1, 1]

    def test_n4_matches_kron_oracle(self):
        for u in range(16):
            bits = [(u >> i) & 1 for i in range(4)]
            assert polar_transform(bits).tolist() == _kron_transform(bits).tolist()

    def test_length_check(self):
        code = PolarCode.construct(8, 0.5)
        with pytest.raises(ValueError):
            polar_encode([1, 0, 1], code)

    @given(st.integers(1, 5), st.data())
    def test_linearity(self, nlev, data):
        n = 2**nlev
        a = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
        b = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
        both = polar_transform(np.bitwise_xor(a, b))
        assert np.array_equal(both, polar_transform(a) ^ polar_transform(b))


class TestScDecoder:
    def test_n2_hand_example(self):
        code = PolarCode(2, [0])
        assert polar_sc_decode([-10.0, -10.0], code).tolist() == [1]

    def test_zero_llrs_decode_to_zero(self):
        code = PolarCode.construct(16, 0.5)
        assert not polar_sc_decode(np.zeros(16), code).any()

    def test_noiseless_round_trip_n128(self):
        code = PolarCode.construct(128, 0.5)
        rng = np.random.default_rng(3)
        for _ in range(200):
            info = rng.integers(0, 2, size=code.num_info, dtype=np.uint8)
            llrs = 1000.0 * (1.0 - 2.0 * polar_encode(info, code))
            assert np.array_equal(polar_sc_decode(llrs, code), info)

    @given(st.integers(1, 8), st.data())
    def test_noiseless_round_trip_any_rate(self, nlev, data):
        n = 2**nlev
        num_frozen = data.draw(st.integers(0, n - 1))
        frozen = data.draw(
            st.lists(st.integers(0, n - 1), min_size=num_frozen,
                     max_size=num_frozen, unique=True)
        )
        code = PolarCode(n, frozen)
        info = data.draw(
            st.lists(st.integers(0, 1), min_size=code.num_info,
                     max_size=code.num_info)
        )
        llrs = 500.0 * (1.0 - 2.0 * polar_encode(info, code))
        assert polar_sc_decode(llrs, code).tolist() == info

    def test_depends_only_on_signs_at_large_magnitude(self):
        code = PolarCode.construct(32, 0.5)
        rng = np.random.default_rng(9)
        info = rng.integers(0, 2, size=code.num_info, dtype=np.uint8)
        signs = 1.0 - 2.0 * polar_encode(info, code)
        scale = rng.uniform(100.0, 10_000.0, size=32)
        assert np.array_equal(polar_sc_decode(signs * scale, code),
                              polar_sc_decode(signs * 1e6, code))

    def test_rejects_non_finite(self):
        code = PolarCode.construct(4, 0.5)
        with pytest.raises(ValueError):
            polar_sc_decode([np.inf, 0.0, 1.0, -1.0], code)

    def test_rejects_wrong_length(self):
        code = PolarCode.construct(4, 0.5)
        with pytest.raises(ValueError):
            polar_sc_decode([1.0, -1.0], code)


class TestCodecInterfaces:
    def test_polar_codec_round_trip(self):
        codec = PolarCodec(PolarCode.construct(64, 0.5))
        rng = np.random.default_rng(1)
        info = rng.integers(0, 2, size=(5, codec.num_info), dtype=np.uint8)
        coded = codec.encode(info)
        assert coded.shape == (5, 64)
        for row_info, row_coded in zip(info, coded):
            llrs = 100.0 * (1.0 - 2.0 * row_coded)
            assert np.array_equal(codec.decode(llrs), row_info)

    def test_repetition_round_trip(self):
        codec = RepetitionCode(8, 2)
        assert codec.encode([1, 0]).tolist() == [1, 1, 1, 1, 0, 0, 0, 0]
        llrs = -1.0 * np.array([1, 1, 1, 1, -1, -1, -1, -1.0])
        assert codec.decode(llrs).tolist() == [1, 0]

    def test_repetition_tie_is_zero(self):
        codec = RepetitionCode(4, 2)
        assert codec.decode([1.0, -1.0, 0.5, -0.5]).tolist() == [0, 0]
