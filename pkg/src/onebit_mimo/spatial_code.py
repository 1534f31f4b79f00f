"""Spatial-domain code induced by a one-bit front end.

For a lifted channel with N real dimensions and K users sending m-ary
messages, the noiseless quantized outputs form a code of m**K binary words of
length N, one per joint-message index.  Each word comes with per-dimension
sign-flip probabilities (the quantized channel acts as N parallel BSCs) and
log-reliability weights used by the weighted Hamming distance.

Joint-message indices use the little-endian m-ary expansion
``ell = sum_j w_{j+1} * m**j``: digit j is user j+1's message.  Users are
labeled 1..K throughout the package.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import erfc

from .baseband import NOISE_STD, Constellation, LiftedChannel, snr_scale

# Crossover probabilities are clamped to [EPS_MIN, 0.5] so the weights
# log(1/eps) stay finite; Q underflows around |a|/sigma ~ 7.
EPS_MIN = 1e-12

# Noiseless inner products that are mathematically zero (symmetric
# constellation sums) come out of the matmul as +-1e-17 with sign depending
# on accumulation order; quantizing them as nonnegative keeps codewords of
# exactly symmetric channels exactly symmetric.  Relative to the symbol scale.
CODEWORD_ZERO_TOL = 1e-9


def expand_index(ell: int, m: int, num_users: int) -> np.ndarray:
    """m-ary digits of ell, digit j = user j+1's message."""
    if not 0 <= ell < m**num_users:
        raise ValueError(f"index {ell} out of range for m={m}, K={num_users}")
    return (ell // m ** np.arange(num_users)) % m


def compress_messages(messages, m: int) -> int:
    """Inverse of :func:`expand_index`."""
    w = np.asarray(messages)
    if np.any(w < 0) or np.any(w >= m):
        raise ValueError(f"messages {w} out of range for m={m}")
    return int(w @ m ** np.arange(w.size))


def message_digit_table(m: int, num_users: int) -> np.ndarray:
    """All expansions at once: table[j, ell] = digit j of ell."""
    ells = np.arange(m**num_users)
    return ((ells[None, :] // m ** np.arange(num_users)[:, None]) % m).astype(np.uint8)


@lru_cache(maxsize=32)
def _expansion_tables(m: int, num_users: int):
    """Cached digit table and per-user bit table; shared across frames."""
    digits = message_digit_table(m, num_users)
    p = m.bit_length() - 1
    bit_shift = np.arange(p - 1, -1, -1, dtype=np.uint8)
    user_bits = ((digits[:, None, :] >> bit_shift[None, :, None]) & 1).astype(bool)
    digits.setflags(write=False)
    user_bits.setflags(write=False)
    return digits, user_bits


def crossover(a, sigma: float):
    """Sign-flip probability Q(|a|/sigma) of a quantized dimension, clamped.

    Q is the standard Gaussian tail integral; a is the noiseless value of the
    dimension and sigma the per-real-dimension noise std.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    q = 0.5 * erfc(np.abs(a) / (sigma * np.sqrt(2.0)))
    return np.clip(q, EPS_MIN, 0.5)


@dataclass(frozen=True, eq=False)
class SpatialCode:
    """The m**K channel-induced codewords with their reliability weights.

    Indexed multiset: distinct indices may carry identical bit patterns but
    keep their own crossover rows.  ``dist_bias`` and ``dist_slope`` cache the
    affine form of the weighted Hamming distance,
    ``d(r, c_ell) = dist_bias[ell] + dist_slope[ell] @ r``.
    """

    m: int
    num_users: int
    codewords: np.ndarray    # (m**K, N) uint8
    eps: np.ndarray          # (m**K, N) crossover probabilities
    weights: np.ndarray      # (m**K, N) log(1/eps)
    user_digits: np.ndarray  # (K, m**K) message digit of each user
    user_bits: np.ndarray    # (K, p, m**K) bit i (MSB first) of each user's digit
    dist_bias: np.ndarray    # (m**K,)
    dist_slope: np.ndarray   # (m**K, N)

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def num_dims(self) -> int:
        return self.codewords.shape[1]

    @property
    def bits_per_symbol(self) -> int:
        return self.m.bit_length() - 1

    def distances(self, obs, indices=None) -> np.ndarray:
        """Weighted Hamming distances of observations to (a subset of) the code.

        obs may be one observation (N,) or a stack (T, N); returns (S,) or
        (S, T) where S is the subset size.
        """
        obs = np.asarray(obs, dtype=float)
        bias, slope = self.dist_bias, self.dist_slope
        if indices is not None:
            bias, slope = bias[indices], slope[indices]
        if obs.ndim == 1:
            return bias + slope @ obs
        return bias[:, None] + slope @ obs.T


def build_code(channel: LiftedChannel, constellation: Constellation,
               snr_db: float) -> SpatialCode:
    """Construct the spatial code of a channel at a given SNR.

    Codeword ell is the quantized noiseless output for the joint message
    g(ell); the crossover of dimension i is Q(|h_i^T x| / sigma) evaluated at
    the SNR-scaled symbol vector.
    """
    m, k = constellation.m, channel.num_users
    digits, user_bits = _expansion_tables(m, k)
    symbols = constellation.points[digits]                     # (K, m**K)
    lifted = np.vstack([symbols.real, symbols.imag])           # (2K, m**K)
    v = channel.real_h @ (snr_scale(snr_db) * lifted)          # (N, m**K)
    codewords = (v < -CODEWORD_ZERO_TOL * snr_scale(snr_db)).astype(np.uint8).T
    eps = crossover(v.T, NOISE_STD)
    weights = -np.log(eps)
    dist_slope = weights * (1.0 - 2.0 * codewords)
    dist_bias = np.einsum("ln,ln->l", weights, codewords.astype(float))
    return SpatialCode(
        m=m,
        num_users=k,
        codewords=codewords,
        eps=eps,
        weights=weights,
        user_digits=digits,
        user_bits=user_bits,
        dist_bias=dist_bias,
        dist_slope=dist_slope,
    )


def weighted_hamming(x, y, alpha) -> float:
    """Coordinate-weighted mismatch count sum_i alpha_i * 1{x_i != y_i}."""
    x, y, alpha = np.asarray(x), np.asarray(y), np.asarray(alpha, dtype=float)
    if x.shape != y.shape or x.shape != alpha.shape:
        raise ValueError(
            f"shape mismatch: x {x.shape}, y {y.shape}, alpha {alpha.shape}"
        )
    return float(alpha @ (x != y))


@dataclass(frozen=True)
class SubcodeSelector:
    """Constraints carving a subcode out of the full index set.

    ``fixed`` holds (user, message) pairs pinning whole messages; ``bit``
    optionally pins one bit of a further user's message as
    (user, bit_position, bit_value) with the bit position 1-based, MSB first.
    """

    fixed: tuple = ()
    bit: tuple | None = None

    def __post_init__(self):
        users = [u for u, _ in self.fixed]
        if self.bit is not None:
            users.append(self.bit[0])
        if len(set(users)) != len(users):
            raise ValueError(f"duplicate user constraints: {sorted(users)}")


def subcode_indices(selector: SubcodeSelector, code: SpatialCode) -> np.ndarray:
    """Indices of codewords whose joint message satisfies all constraints."""
    mask = np.ones(code.size, dtype=bool)
    for user, msg in selector.fixed:
        _check_user(user, code)
        if not 0 <= msg < code.m:
            raise ValueError(f"message {msg} out of range for m={code.m}")
        mask &= code.user_digits[user - 1] == msg
    if selector.bit is not None:
        user, pos, val = selector.bit
        _check_user(user, code)
        if not 1 <= pos <= code.bits_per_symbol:
            raise ValueError(f"bit position {pos} out of range")
        if val not in (0, 1):
            raise ValueError(f"bit value must be 0 or 1, got {val}")
        mask &= code.user_bits[user - 1, pos - 1] == bool(val)
    return np.flatnonzero(mask)


def indices_for_fixed(code: SpatialCode, fixed: dict) -> np.ndarray:
    """Subcode indices for a {user: message} refinement."""
    return subcode_indices(SubcodeSelector(fixed=tuple(sorted(fixed.items()))), code)


def _check_user(user: int, code: SpatialCode):
    if not 1 <= user <= code.num_users:
        raise ValueError(f"user {user} out of range 1..{code.num_users}")


def set_distance(indices_a, indices_b, code: SpatialCode) -> float:
    """Squared Euclidean distance between the centroids of two index sets."""
    indices_a, indices_b = np.asarray(indices_a), np.asarray(indices_b)
    if indices_a.size == 0 or indices_b.size == 0:
        raise ValueError("set distance needs nonempty index sets")
    diff = (code.codewords[indices_a].mean(axis=0)
            - code.codewords[indices_b].mean(axis=0))
    return float(diff @ diff)


def exact_loglikelihood(obs, ell: int, code: SpatialCode) -> float:
    """log P(r | joint message g(ell)) under the parallel-BSC channel model."""
    if not 0 <= ell < code.size:
        raise ValueError(f"index {ell} out of range")
    obs = np.asarray(obs)
    mismatch = obs != code.codewords[ell]
    eps = code.eps[ell]
    return float(np.sum(np.where(mismatch, np.log(eps), np.log1p(-eps))))
