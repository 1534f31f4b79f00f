"""Shared fixtures and independent brute-force oracles.

The oracles re-derive expected values through a different arithmetic route
than the library (explicit loops, probability products instead of log sums,
quadrature instead of erfc) so tests cross-check rather than echo.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.integrate import quad

from onebit_mimo.baseband import constellation_by_name, draw_channel, lift_channel
from onebit_mimo.spatial_code import SpatialCode, build_code, expand_index

settings.register_profile(
    "pkg",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("pkg")


def oracle_q(x: float) -> float:
    """Gaussian tail probability by numerical quadrature."""
    value, _ = quad(lambda u: np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi), x, np.inf)
    return value


def all_observations(num_dims: int) -> np.ndarray:
    """Every binary observation of length num_dims, as a (2**N, N) array."""
    grid = (np.arange(1 << num_dims)[:, None] >> np.arange(num_dims)) & 1
    return grid.astype(np.uint8)


def oracle_constrained_indices(m, num_users, fixed=(), bit=None):
    """Enumerate joint-message indices satisfying constraints, the slow way."""
    p = m.bit_length() - 1
    out = []
    for ell in range(m**num_users):
        digits = expand_index(ell, m, num_users)
        ok = all(digits[user - 1] == msg for user, msg in fixed)
        if ok and bit is not None:
            user, pos, val = bit
            ok = (int(digits[user - 1]) >> (p - pos)) & 1 == val
        if ok:
            out.append(ell)
    return out


def oracle_posterior_argmax(obs, code: SpatialCode) -> int:
    """Most likely joint message by direct probability products."""
    best_ell, best_prob = 0, -1.0
    for ell in range(code.size):
        prob = 1.0
        for i in range(code.num_dims):
            if obs[i] != code.codewords[ell, i]:
                prob *= code.eps[ell, i]
            else:
                prob *= 1.0 - code.eps[ell, i]
        if prob > best_prob:
            best_ell, best_prob = ell, prob
    return best_ell


def oracle_min_distance(obs, code: SpatialCode, indices) -> float:
    """Minimum weighted Hamming distance by explicit looping."""
    best = np.inf
    for ell in indices:
        dist = 0.0
        for i in range(code.num_dims):
            if obs[i] != code.codewords[ell, i]:
                dist += code.weights[ell, i]
        best = min(best, dist)
    return best


def oracle_bit_split(code: SpatialCode, user: int, bit_pos: int, bit_val: int,
                     indices) -> list:
    """Subset of `indices` whose user-message bit (1-based, MSB first) is bit_val."""
    p = code.bits_per_symbol
    return [
        ell for ell in indices
        if (int(code.user_digits[user - 1, ell]) >> (p - bit_pos)) & 1 == bit_val
    ]


def oracle_so_llrs(obs, code: SpatialCode, user: int, indices=None) -> np.ndarray:
    """LLRs straight from the min-distance definition."""
    if indices is None:
        indices = list(range(code.size))
    p = code.bits_per_symbol
    out = np.empty(p)
    for i in range(1, p + 1):
        ones = oracle_bit_split(code, user, i, 1, indices)
        zeros = oracle_bit_split(code, user, i, 0, indices)
        out[i - 1] = (oracle_min_distance(obs, code, ones)
                      - oracle_min_distance(obs, code, zeros))
    return out


def oracle_centroid_split_score(code: SpatialCode, user: int, indices) -> float:
    """Sum over bit positions of squared centroid distances, the slow way."""
    score = 0.0
    for i in range(1, code.bits_per_symbol + 1):
        ones = oracle_bit_split(code, user, i, 1, indices)
        zeros = oracle_bit_split(code, user, i, 0, indices)
        c1 = code.codewords[ones].astype(float).mean(axis=0)
        c0 = code.codewords[zeros].astype(float).mean(axis=0)
        score += float(((c1 - c0) ** 2).sum())
    return score


def single_user_subcode(code: SpatialCode, indices, target_user: int) -> SpatialCode:
    """Repackage a refined subcode as a standalone single-user code.

    Valid when `indices` enumerate the target user's messages 0..m-1 in
    ascending order (true for any fully-fixed refinement of the other users).
    """
    indices = np.asarray(indices)
    digits = code.user_digits[target_user - 1][indices][None, :]
    assert digits.tolist() == [list(range(code.m))]
    return SpatialCode(
        m=code.m,
        num_users=1,
        codewords=code.codewords[indices],
        eps=code.eps[indices],
        weights=code.weights[indices],
        user_digits=digits,
        user_bits=code.user_bits[target_user - 1][:, indices][None, :, :],
        dist_bias=code.dist_bias[indices],
        dist_slope=code.dist_slope[indices],
    )


@pytest.fixture
def qam4():
    return constellation_by_name("4qam")


@pytest.fixture
def small_code(qam4):
    """K=2, N_r=2 spatial code on a fixed random channel at 0 dB."""
    rng = np.random.default_rng(42)
    channel = lift_channel(draw_channel(2, 2, rng))
    return build_code(channel, qam4, 0.0)


@pytest.fixture
def identity_code(qam4):
    """K=1 code on the lifted-identity channel at 0 dB (the hand example)."""
    return build_code(lift_channel([[1.0 + 0.0j]]), qam4, 0.0)
