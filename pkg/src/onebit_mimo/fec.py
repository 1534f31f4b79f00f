"""Polar coding: Bhattacharyya construction, butterfly encoder, min-sum SC decoder.

Channel codes plug into the detectors through a small duck interface:

* ``block_len`` / ``num_info`` attributes,
* ``encode(info_bits) -> (block_len,) uint8`` (vectorizes over leading axes),
* ``decode(llrs) -> (num_info,) uint8`` with positive LLR meaning bit 0.

The re-encode step of the successive detectors relies on ``encode`` being
available on the same object that decoded.
"""

from dataclasses import dataclass

import numba
import numpy as np


def bhattacharyya_profile(block_len: int, design_snr_db: float = 0.0) -> np.ndarray:
    """Per-position Bhattacharyya parameters under the {2Z - Z^2, Z^2} recursion.

    Position index bits are consumed MSB first: bit 0 takes the degraded
    branch 2Z - Z^2, bit 1 the upgraded branch Z^2, starting from
    Z = exp(-10**(design_snr_db/10)).
    """
    _check_block_len(block_len)
    z = np.array([np.exp(-(10.0 ** (design_snr_db / 10.0)))])
    while z.size < block_len:
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def construct_frozen_set(block_len: int, rate: float,
                         design_snr_db: float = 0.0) -> np.ndarray:
    """Sorted frozen positions: the block_len*(1-rate) least reliable channels.

    Deterministic; ties in the Bhattacharyya parameter freeze the lower index.
    """
    _check_block_len(block_len)
    num_info = rate * block_len
    if not 0 < rate < 1 or abs(num_info - round(num_info)) > 1e-9:
        raise ValueError(f"rate {rate} must give an integer number of info bits")
    num_frozen = block_len - round(num_info)
    z = bhattacharyya_profile(block_len, design_snr_db)
    order = np.argsort(-z, kind="stable")
    return np.sort(order[:num_frozen])


def _check_block_len(block_len: int):
    if block_len < 2 or (block_len & (block_len - 1)) != 0:
        raise ValueError(f"block length must be a power of two >= 2, got {block_len}")


@dataclass(frozen=True, eq=False)
class PolarCode:
    """Blocklength, rate, and frozen/info position split."""

    block_len: int
    frozen: np.ndarray

    def __post_init__(self):
        _check_block_len(self.block_len)
        frozen = np.asarray(self.frozen, dtype=np.int64)
        mask = np.zeros(self.block_len, dtype=bool)
        mask[frozen] = True
        if mask.sum() != frozen.size:
            raise ValueError("frozen positions must be distinct")
        object.__setattr__(self, "frozen", np.sort(frozen))
        object.__setattr__(self, "_frozen_mask", mask)
        object.__setattr__(self, "_info_positions", np.flatnonzero(~mask))

    @classmethod
    def construct(cls, block_len: int, rate: float, design_snr_db: float = 0.0):
        return cls(block_len, construct_frozen_set(block_len, rate, design_snr_db))

    @property
    def num_info(self) -> int:
        return self._info_positions.size

    @property
    def rate(self) -> float:
        return self.num_info / self.block_len

    @property
    def frozen_mask(self) -> np.ndarray:
        return self._frozen_mask

    @property
    def info_positions(self) -> np.ndarray:
        return self._info_positions


def polar_transform(u) -> np.ndarray:
    """GF(2) butterfly x = u * F^{(x) log2(n)} along the last axis."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    _check_block_len(n)
    h = 1
    while h < n:
        for start in range(0, n, 2 * h):
            x[..., start:start + h] ^= x[..., start + h:start + 2 * h]
        h *= 2
    return x


def polar_encode(info_bits, code: PolarCode) -> np.ndarray:
    """Encode info bits (info positions carry data, frozen positions are 0)."""
    info_bits = np.asarray(info_bits, dtype=np.uint8)
    if info_bits.shape[-1] != code.num_info:
        raise ValueError(
            f"expected {code.num_info} info bits, got {info_bits.shape[-1]}"
        )
    u = np.zeros(info_bits.shape[:-1] + (code.block_len,), dtype=np.uint8)
    u[..., code.info_positions] = info_bits
    return polar_transform(u)


@numba.njit(cache=True)
def _sc_decode_kernel(llr, frozen_mask):  # pragma: no cover - exercised via wrapper
    n = llr.shape[0]
    nlev = 0
    while (1 << nlev) < n:
        nlev += 1
    lev_llr = np.zeros((nlev + 1, n))
    lev_bit = np.zeros((nlev + 1, n), dtype=np.uint8)
    state = np.zeros(2 * n - 1, dtype=np.uint8)
    lev_llr[0, :] = llr
    depth = 0
    node = 0
    while True:
        if depth == nlev:
            if frozen_mask[node]:
                lev_bit[depth, node] = 0
            else:
                lev_bit[depth, node] = 0 if lev_llr[depth, node] >= 0.0 else 1
            if node == n - 1:
                break
            depth -= 1
            node >>= 1
        else:
            sidx = (1 << depth) - 1 + node
            length = n >> depth
            half = length >> 1
            off = node * length
            st = state[sidx]
            if st == 0:
                # descend left: min-sum check update
                for j in range(half):
                    a = lev_llr[depth, off + j]
                    b = lev_llr[depth, off + half + j]
                    sgn = 1.0
                    if a < 0.0:
                        sgn = -sgn
                        a = -a
                    if b < 0.0:
                        sgn = -sgn
                        b = -b
                    lev_llr[depth + 1, off + j] = sgn * (a if a < b else b)
                state[sidx] = 1
                depth += 1
                node <<= 1
            elif st == 1:
                # descend right: variable update with the left partial sums
                for j in range(half):
                    a = lev_llr[depth, off + j]
                    b = lev_llr[depth, off + half + j]
                    ub = lev_bit[depth + 1, off + j]
                    lev_llr[depth + 1, off + half + j] = b + (1.0 - 2.0 * ub) * a
                state[sidx] = 2
                depth += 1
                node = (node << 1) + 1
            else:
                # combine child partial sums upward
                for j in range(half):
                    lev_bit[depth, off + j] = (
                        lev_bit[depth + 1, off + j] ^ lev_bit[depth + 1, off + half + j]
                    )
                    lev_bit[depth, off + half + j] = lev_bit[depth + 1, off + half + j]
                depth -= 1
                node >>= 1
    return lev_bit[nlev]


def polar_sc_decode(llrs, code: PolarCode) -> np.ndarray:
    """Successive-cancellation decode; returns the info bits.

    Min-sum check updates; positive LLR decodes to bit 0 (ties included);
    frozen positions are forced to 0.
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.shape != (code.block_len,):
        raise ValueError(f"expected {code.block_len} LLRs, got shape {llrs.shape}")
    if not np.isfinite(llrs).all():
        raise ValueError("LLRs must be finite")
    u_hat = _sc_decode_kernel(llrs, code.frozen_mask)
    return u_hat[code.info_positions]


class PolarCodec:
    """Channel-code interface wrapper around a :class:`PolarCode`."""

    def __init__(self, code: PolarCode):
        self.code = code
        self.block_len = code.block_len
        self.num_info = code.num_info

    def encode(self, info_bits):
        return polar_encode(info_bits, self.code)

    def decode(self, llrs):
        return polar_sc_decode(llrs, self.code)


class RepetitionCode:
    """Trivial rate-k/n repetition code, mostly for tests and sanity runs.

    Each info bit is repeated block_len // num_info times; decoding sums the
    group LLRs (sum >= 0 -> bit 0).
    """

    def __init__(self, block_len: int, num_info: int):
        if block_len % num_info != 0:
            raise ValueError(f"{num_info} info bits do not divide block {block_len}")
        self.block_len = block_len
        self.num_info = num_info
        self._rep = block_len // num_info

    def encode(self, info_bits):
        info_bits = np.asarray(info_bits, dtype=np.uint8)
        if info_bits.shape[-1] != self.num_info:
            raise ValueError(f"expected {self.num_info} info bits")
        return np.repeat(info_bits, self._rep, axis=-1)

    def decode(self, llrs):
        llrs = np.asarray(llrs, dtype=float)
        if llrs.shape != (self.block_len,):
            raise ValueError(f"expected {self.block_len} LLRs")
        if not np.isfinite(llrs).all():
            raise ValueError("LLRs must be finite")
        return (llrs.reshape(self.num_info, self._rep).sum(axis=1) < 0).astype(np.uint8)
