"""Modulation, bit packing, complex-to-real lifting, fading, and the one-bit front end.

Conventions used throughout the package:

* messages are integers in ``{0, ..., m-1}`` with ``m = 2**p``;
* the one-bit quantizer maps nonnegative reals to bit 0 and negatives to bit 1;
* complex noise is CN(0, 1), i.e. each real dimension has variance 1/2;
* SNR is the per-user average symbol energy in dB (symbols are scaled by
  ``sqrt(10**(snr_db/10))`` before the channel, noise variance stays fixed).
"""

from dataclasses import dataclass, field

import numpy as np

# Per-real-dimension noise std for CN(0,1) noise split across Re/Im.
NOISE_STD = np.sqrt(0.5)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-average-energy complex constellation indexed by message value."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128)
        object.__setattr__(self, "points", pts)
        m = pts.shape[0]
        if m < 2 or (m & (m - 1)) != 0:
            raise ValueError(f"constellation size must be a power of two, got {m}")
        energy = np.mean(np.abs(pts) ** 2)
        if abs(energy - 1.0) > 1e-12:
            raise ValueError(f"constellation average energy is {energy}, expected 1")
        if len(set(pts.tolist())) != m:
            raise ValueError("constellation points must be distinct")

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def bits_per_symbol(self) -> int:
        return self.m.bit_length() - 1


def bpsk() -> Constellation:
    """BPSK: message 0 -> +1, message 1 -> -1."""
    return Constellation(np.array([1.0 + 0j, -1.0 + 0j]))


def gray_qam(bits_per_symbol: int) -> Constellation:
    """Square Gray-mapped QAM with unit average energy.

    The first half of a message's bits (MSB first) selects the in-phase level,
    the second half the quadrature level; each axis uses a binary-reflected
    Gray PAM with the all-zero label on the most positive level.  For
    ``bits_per_symbol=2`` this is the 4-QAM map
    ``w -> ((1 - 2*b1) + 1j*(1 - 2*b2)) / sqrt(2)``.
    """
    p = bits_per_symbol
    if p < 2 or p % 2 != 0:
        raise ValueError(f"square QAM needs an even number of bits, got {p}")
    half = p // 2
    levels = _gray_pam(1 << half)
    w = np.arange(1 << p)
    i_axis = levels[_gray_rank((w >> half) & ((1 << half) - 1))]
    q_axis = levels[_gray_rank(w & ((1 << half) - 1))]
    pts = i_axis + 1j * q_axis
    return Constellation(pts / np.sqrt(np.mean(np.abs(pts) ** 2)))


def _gray_pam(order):
    # amplitude levels in descending order: order-1, order-3, ..., -(order-1)
    return (order - 1 - 2 * np.arange(order)).astype(float)


def _gray_rank(codes):
    # inverse binary-reflected Gray code, vectorized
    codes = np.asarray(codes).copy()
    rank = codes.copy()
    shift = codes >> 1
    while np.any(shift):
        rank ^= shift
        shift >>= 1
    return rank


_BY_NAME = {
    "bpsk": bpsk,
    "4qam": lambda: gray_qam(2),
    "16qam": lambda: gray_qam(4),
}


def constellation_by_name(name: str) -> Constellation:
    try:
        return _BY_NAME[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown modulation {name!r}, choose from {sorted(_BY_NAME)}")


def pack_bits(bits) -> int:
    """Pack a binary vector (MSB first) into a message: sum_i b_i * 2**(p-i)."""
    bits = np.asarray(bits)
    if bits.ndim != 1 or bits.size == 0:
        raise ValueError("bits must be a nonempty 1-D vector")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    p = bits.size
    return int(bits @ (1 << np.arange(p - 1, -1, -1)))


def unpack_bits(w: int, p: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`; returns p bits, MSB first."""
    if not 0 <= w < (1 << p):
        raise ValueError(f"message {w} out of range for {p} bits")
    return (w >> np.arange(p - 1, -1, -1)) & 1


def messages_from_coded_bits(tau, p: int) -> np.ndarray:
    """Map a coded bit-stream to the per-slot message sequence.

    Slot t (1-based) carries the message packed from
    ``(tau[p*t], tau[p*t-1], ..., tau[p*t-p+1])`` in 1-based indexing, i.e. the
    later coded bit within a slot is the more significant message bit.
    """
    tau = np.asarray(tau)
    if tau.ndim != 1:
        raise ValueError("coded bits must be a 1-D vector")
    if tau.size % p != 0:
        raise ValueError(f"coded length {tau.size} is not a multiple of p={p}")
    if not np.isin(tau, (0, 1)).all():
        raise ValueError("coded bits must be 0 or 1")
    blocks = tau.reshape(-1, p)[:, ::-1]
    return blocks @ (1 << np.arange(p - 1, -1, -1))


def coded_bits_from_messages(msgs, p: int) -> np.ndarray:
    """Inverse of :func:`messages_from_coded_bits`."""
    msgs = np.asarray(msgs)
    if np.any(msgs < 0) or np.any(msgs >= (1 << p)):
        raise ValueError(f"messages out of range for p={p}")
    blocks = (msgs[:, None] >> np.arange(p - 1, -1, -1)) & 1
    return blocks[:, ::-1].reshape(-1)


def modulate(w: int, constellation: Constellation) -> complex:
    """Map a message to its constellation point."""
    if not 0 <= w < constellation.m:
        raise ValueError(f"message {w} out of range for m={constellation.m}")
    return complex(constellation.points[w])


def lift_symbols(x_complex) -> np.ndarray:
    """Stack a complex vector into ``[Re(x); Im(x)]``."""
    x = np.atleast_1d(np.asarray(x_complex, dtype=np.complex128))
    return np.concatenate([x.real, x.imag])


@dataclass(frozen=True, eq=False)
class LiftedChannel:
    """Complex channel matrix with its real-valued block lifting.

    ``real_h`` is ``[[Re(H), -Im(H)], [Im(H), Re(H)]]`` of shape
    ``(2*num_rx, 2*num_users)``; its rows are the real observation dimensions.
    """

    complex_h: np.ndarray
    real_h: np.ndarray = field(init=False)

    def __post_init__(self):
        h = np.asarray(self.complex_h, dtype=np.complex128)
        if h.ndim != 2:
            raise ValueError("channel matrix must be 2-D")
        object.__setattr__(self, "complex_h", h)
        re, im = h.real, h.imag
        real_h = np.block([[re, -im], [im, re]])
        object.__setattr__(self, "real_h", real_h)

    @property
    def num_rx(self) -> int:
        return self.complex_h.shape[0]

    @property
    def num_users(self) -> int:
        return self.complex_h.shape[1]

    @property
    def num_dims(self) -> int:
        """Number of real observation dimensions N = 2 * num_rx."""
        return 2 * self.num_rx


def lift_channel(h_complex) -> LiftedChannel:
    """Build the real-valued lifting of a complex channel matrix."""
    return LiftedChannel(np.asarray(h_complex, dtype=np.complex128))


def draw_channel(num_users: int, num_rx: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an i.i.d. CN(0,1) Rayleigh channel matrix of shape (num_rx, num_users)."""
    if num_users < 1 or num_rx < 1:
        raise ValueError("num_users and num_rx must be >= 1")
    parts = rng.standard_normal((2, num_rx, num_users))
    return (parts[0] + 1j * parts[1]) / np.sqrt(2.0)


def one_bit_quantize(v) -> np.ndarray:
    """Per-entry sign quantizer: 0 where v >= 0, 1 where v < 0."""
    v = np.asarray(v, dtype=float)
    if np.isnan(v).any():
        raise ValueError("quantizer input contains NaN")
    return (v < 0).astype(np.uint8)


def snr_scale(snr_db: float) -> float:
    """Linear amplitude scale applied to unit-energy symbols."""
    return float(np.sqrt(10.0 ** (snr_db / 10.0)))


def transmit(channel: LiftedChannel, x, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """One time slot through the lifted channel: quantize(H * sqrt(snr) * x + z)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (channel.real_h.shape[1],):
        raise ValueError(
            f"symbol vector has shape {x.shape}, expected ({channel.real_h.shape[1]},)"
        )
    noise = NOISE_STD * rng.standard_normal(channel.num_dims)
    return one_bit_quantize(channel.real_h @ (snr_scale(snr_db) * x) + noise)


def transmit_block(channel: LiftedChannel, x_block, snr_db: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Transmit T slots at once; returns observations of shape (T, num_dims).

    Noise for the whole block is drawn as one (num_dims, T) array, so the
    realization differs from T sequential :func:`transmit` calls but is
    deterministic for a given generator state.
    """
    x_block = np.asarray(x_block, dtype=float)
    if x_block.ndim != 2 or x_block.shape[0] != channel.real_h.shape[1]:
        raise ValueError(
            f"symbol block has shape {x_block.shape}, expected "
            f"({channel.real_h.shape[1]}, T)"
        )
    noise = NOISE_STD * rng.standard_normal((channel.num_dims, x_block.shape[1]))
    v = channel.real_h @ (snr_scale(snr_db) * x_block) + noise
    return one_bit_quantize(v).T
