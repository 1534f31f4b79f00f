"""Soft-output detection from one-bit observations.

The single-pass detector computes per-bit LLRs as differences of minimum
weighted Hamming distances over the two bit-split halves of the spatial code.
The successive detector decodes users one at a time and shrinks the search
code slot by slot with the already-decoded users' re-encoded messages; the
ordered variant additionally picks each next user greedily, maximizing the
centroid distance between the bit-split halves of the code refined at the
decoded users' majority messages (ordering needs a single refinement per
block, so the per-slot messages are collapsed by majority vote there).

LLR sign convention: positive favors coded bit 0.  Users are labeled 1..K.
"""

from dataclasses import dataclass

import numpy as np

from .baseband import LiftedChannel, messages_from_coded_bits
from .spatial_code import SpatialCode, expand_index, indices_for_fixed

# Residual variance of a +-1 hard limiter output around its linear estimate;
# used as the quantization distortion floor of the ZF baseline.
ZF_DISTORTION_FLOOR = 1.0 - 2.0 / np.pi


@dataclass
class ScanCounter:
    """Counts codeword-distance evaluations, the search cost of the detectors.

    One LLR computation for a user over a subcode of size S examines S
    distances per (time slot, bit position) group.
    """

    evaluations: int = 0

    def record(self, subcode_size: int, slots: int, bit_positions: int):
        self.evaluations += int(subcode_size) * int(slots) * int(bit_positions)


def _check_user(user: int, code: SpatialCode):
    if not 1 <= user <= code.num_users:
        raise ValueError(f"user {user} out of range 1..{code.num_users}")


def _bit_min_llrs(code: SpatialCode, dist: np.ndarray, indices: np.ndarray,
                  user: int) -> np.ndarray:
    """Per-bit LLRs from distances dist (S, T) of subcode `indices` to T slots."""
    p = code.bits_per_symbol
    out = np.empty((dist.shape[1], p))
    bits = code.user_bits[user - 1][:, indices]
    for i in range(p):
        sel = bits[i]
        if not sel.any() or sel.all():
            raise RuntimeError("bit-split of the subcode is empty")
        out[:, i] = dist[sel].min(axis=0) - dist[~sel].min(axis=0)
    return out


def _full_code_bit_llrs(code: SpatialCode, dist: np.ndarray, user: int) -> np.ndarray:
    """Fast path of :func:`_bit_min_llrs` for the unrefined code.

    Views the (m**K, T) distance table as an m^K message grid and reduces all
    axes except the target user's, then splits that user's m per-message
    minima by bit value.  Same minima as the masked path, fewer passes.
    """
    m, k, p = code.m, code.num_users, code.bits_per_symbol
    slots = dist.shape[1]
    grid = dist.reshape((m,) * k + (slots,))
    # ell = sum_j digit_j * m**j, so C-order axis j holds the digit of user k-j
    axis = k - user
    reduce_axes = tuple(a for a in range(k) if a != axis)
    msg_min = grid.min(axis=reduce_axes) if reduce_axes else grid  # (m, T)
    values = np.arange(m)
    out = np.empty((slots, p))
    for i in range(p):
        picks = (values >> (p - 1 - i)) & 1
        out[:, i] = msg_min[picks == 1].min(axis=0) - msg_min[picks == 0].min(axis=0)
    return out


def llr_stream_from_slots(slot_llrs: np.ndarray) -> np.ndarray:
    """Lay (T, p) per-slot LLRs into the coded-bit stream.

    Bit position i (MSB first) of slot t lands at stream index p*t + p - i,
    matching the message packing of ``messages_from_coded_bits``.
    """
    slot_llrs = np.asarray(slot_llrs)
    return slot_llrs[:, ::-1].reshape(-1)


def so_llrs(obs, code: SpatialCode, user: int) -> np.ndarray:
    """Single-pass LLRs for one user's p bits from one observation."""
    _check_user(user, code)
    dist = code.distances(np.atleast_2d(obs))
    return _bit_min_llrs(code, dist, np.arange(code.size), user)[0]


def scso_llrs(obs, code: SpatialCode, user: int, fixed: dict) -> np.ndarray:
    """LLRs for one user with other users' messages pinned.

    ``fixed`` maps user labels to known messages; with an empty mapping this
    takes the exact :func:`so_llrs` code path (bit-identical output).
    """
    _check_user(user, code)
    if user in fixed:
        raise ValueError(f"user {user} cannot be both target and fixed")
    if not fixed:
        return so_llrs(obs, code, user)
    indices = indices_for_fixed(code, fixed)
    dist = code.distances(np.atleast_2d(obs), indices)
    return _bit_min_llrs(code, dist, indices, user)[0]


def _split_score(code: SpatialCode, user: int, indices) -> float:
    """Sum over bit positions of the centroid distance between bit-splits.

    Equals summing :func:`~onebit_mimo.spatial_code.set_distance` over the
    bit-split index sets: within any message-refined subcode each value of the
    target user's digit appears equally often, so the split centroids are
    ratios of per-digit-value codeword sums.  Codeword bits are 0/1 integers
    and the group sizes are powers of two, so the scores are exact and
    tie-breaks are deterministic.
    """
    m, p, n = code.m, code.bits_per_symbol, code.num_dims
    if indices is None:
        axis = code.num_users - user
        grid = code.codewords.reshape((m,) * code.num_users + (n,))
        other = tuple(a for a in range(code.num_users) if a != axis)
        sums = grid.sum(axis=other, dtype=np.int64)           # (m, n)
        per_value = code.size // m
    else:
        digits = code.user_digits[user - 1][indices]
        words = code.codewords[indices]
        sums = np.empty((m, n), dtype=np.int64)
        for value in range(m):
            sums[value] = words[digits == value].sum(axis=0, dtype=np.int64)
        per_value = indices.size // m
    half = per_value * (m // 2)
    values = np.arange(m)
    score = 0.0
    for i in range(p):
        picks = (values >> (p - 1 - i)) & 1
        diff = (sums[picks == 1].sum(axis=0) - sums[picks == 0].sum(axis=0)) / half
        score += float(diff @ diff)
    return score


def _argmax_user(code: SpatialCode, candidates, indices) -> int:
    best_user, best = -1, -np.inf
    for user in candidates:
        score = _split_score(code, user, indices)
        if score > best:
            best_user, best = user, score
    return best_user


def select_first_user(code: SpatialCode) -> int:
    """Greedy choice of the first user to decode; ties go to the lowest label."""
    return _argmax_user(code, range(1, code.num_users + 1), None)


def select_next_user(code: SpatialCode, already, majority_msgs) -> int:
    """Greedy choice of the next user given majority messages of decoded ones."""
    already = list(already)
    majority_msgs = list(majority_msgs)
    if not already:
        raise ValueError("no users decoded yet; use select_first_user")
    if len(already) != len(majority_msgs):
        raise ValueError("already and majority_msgs must align")
    remaining = sorted(set(range(1, code.num_users + 1)) - set(already))
    if not remaining:
        raise ValueError("all users already decoded")
    indices = indices_for_fixed(code, dict(zip(already, majority_msgs)))
    return _argmax_user(code, remaining, indices)


def majority(values) -> int:
    """Most frequent value; ties broken by the smallest value."""
    values = np.asarray(values, dtype=np.int64)
    if values.size == 0:
        raise ValueError("majority of an empty sequence")
    if values.min() < 0:
        raise ValueError("majority expects nonnegative messages")
    return int(np.bincount(values).argmax())


def ml_hard_detect(obs, code: SpatialCode) -> np.ndarray:
    """Exact-likelihood hard decision; returns the per-user message vector.

    Ties go to the smallest codeword index.
    """
    obs = np.asarray(obs)
    mismatch = code.codewords != obs[None, :]
    loglik = np.where(mismatch, np.log(code.eps), np.log1p(-code.eps)).sum(axis=1)
    return expand_index(int(np.argmax(loglik)), code.m, code.num_users)


def _zf_pinv(channel: LiftedChannel):
    h = channel.real_h
    if np.linalg.matrix_rank(h) < h.shape[1]:
        raise np.linalg.LinAlgError("lifted channel is not full column rank")
    pinv = np.linalg.pinv(h)
    noise_var = 0.5 * (pinv**2).sum(axis=1) + ZF_DISTORTION_FLOOR
    return pinv, noise_var


def zf_soft_llrs(obs, channel: LiftedChannel, snr_db: float) -> np.ndarray:
    """ZF-type soft baseline for one slot; returns (num_users, 2) axis LLRs.

    Documented reconstruction: map bits to +-1, pseudo-invert the lifted
    channel, and scale each user's real/imaginary estimate by an effective
    variance (pseudo-inverse noise gain plus a hard-limiter distortion floor).
    The variance model has no SNR term, so ``snr_db`` only documents the
    operating point; LLR scale is irrelevant to the min-sum SC decoder anyway.
    """
    pinv, noise_var = _zf_pinv(channel)
    return _zf_slot_llrs(pinv, noise_var, channel.num_users, np.asarray(obs))


def _zf_slot_llrs(pinv, noise_var, num_users, obs):
    y = 1.0 - 2.0 * obs.astype(float)
    if y.ndim == 1:
        est = 2.0 * (pinv @ y) / noise_var
        return np.stack([est[:num_users], est[num_users:]], axis=1)
    est = 2.0 * (pinv @ y.T) / noise_var[:, None]
    return np.stack([est[:num_users], est[num_users:]], axis=2)


def _check_frame(obs, num_dims: int, codec, bits_per_symbol: int) -> int:
    obs = np.asarray(obs)
    if obs.ndim != 2 or obs.shape[1] != num_dims:
        raise ValueError(f"observations must be (T, {num_dims}), got {obs.shape}")
    slots = obs.shape[0]
    if codec.block_len != slots * bits_per_symbol:
        raise ValueError(
            f"codec block length {codec.block_len} != slots*p = "
            f"{slots * bits_per_symbol}"
        )
    return slots


def detect_frame_so(obs, code: SpatialCode, codec):
    """Single-pass detection and decoding of all users.

    Returns (decoded info bits of shape (K, num_info), ScanCounter).
    """
    slots = _check_frame(obs, code.num_dims, codec, code.bits_per_symbol)
    counter = ScanCounter()
    dist = code.distances(obs)
    decoded = np.empty((code.num_users, codec.num_info), dtype=np.uint8)
    for user in range(1, code.num_users + 1):
        counter.record(code.size, slots, code.bits_per_symbol)
        slot_llrs = _full_code_bit_llrs(code, dist, user)
        decoded[user - 1] = codec.decode(llr_stream_from_slots(slot_llrs))
    return decoded, counter


def _slotwise_llrs(code: SpatialCode, dist: np.ndarray, user: int,
                   slot_fixed: dict, counter: ScanCounter) -> np.ndarray:
    """LLRs for one user with prior users pinned to per-slot messages.

    ``dist`` is the (m**K, T) distance table of the frame (computed once and
    shared across stages; only the min-search domain shrinks).  ``slot_fixed``
    maps user labels to (T,) per-slot message arrays.
    """
    slots = dist.shape[1]
    p = code.bits_per_symbol
    if not slot_fixed:
        counter.record(code.size, slots, p)
        return _full_code_bit_llrs(code, dist, user)
    m, k = code.m, code.num_users
    counter.record(code.size // m ** len(slot_fixed), slots, p)
    # view as (T, digit of user K, ..., digit of user 1) and pin the decoded
    # users' axes with their per-slot messages; the T index leads, so numpy
    # broadcasts the pick to shape (T, free axes...)
    grid = np.moveaxis(dist.reshape((m,) * k + (slots,)), -1, 0)
    index = [np.arange(slots)]
    free_users = []
    for axis in range(k):
        axis_user = k - axis
        if axis_user in slot_fixed:
            index.append(np.asarray(slot_fixed[axis_user], dtype=np.intp))
        else:
            index.append(slice(None))
            free_users.append(axis_user)
    sub = grid[tuple(index)]
    target = 1 + free_users.index(user)
    reduce_axes = tuple(a for a in range(1, sub.ndim) if a != target)
    msg_min = sub.min(axis=reduce_axes) if reduce_axes else sub  # (T, m)
    values = np.arange(m)
    out = np.empty((slots, p))
    for i in range(p):
        picks = (values >> (p - 1 - i)) & 1
        out[:, i] = (msg_min[:, picks == 1].min(axis=1)
                     - msg_min[:, picks == 0].min(axis=1))
    return out


def detect_frame_scso(obs, code: SpatialCode, codec, genie_messages=None):
    """Successive detection in natural user order 1..K.

    After decoding a user, its bit-stream is re-encoded and mapped back to
    per-slot messages, which pin that user in the refined code of every later
    stage (slot by slot).  With ``genie_messages`` (shape (K, T), the true
    per-slot messages) the pinning uses the truth instead of decisions,
    bounding the achievable cancellation gain.
    Returns (decoded info bits, ScanCounter).
    """
    _check_frame(obs, code.num_dims, codec, code.bits_per_symbol)
    obs = np.asarray(obs)
    p = code.bits_per_symbol
    counter = ScanCounter()
    decoded = np.empty((code.num_users, codec.num_info), dtype=np.uint8)
    dist = code.distances(obs)
    slot_fixed = {}
    for user in range(1, code.num_users + 1):
        slot_llrs = _slotwise_llrs(code, dist, user, slot_fixed, counter)
        info = codec.decode(llr_stream_from_slots(slot_llrs))
        decoded[user - 1] = info
        if user < code.num_users:
            if genie_messages is None:
                slot_fixed[user] = messages_from_coded_bits(codec.encode(info), p)
            else:
                slot_fixed[user] = np.asarray(genie_messages)[user - 1]
    return decoded, counter


def detect_frame_ordered_scso(obs, code: SpatialCode, codec):
    """Successive detection with greedy decoding-order selection.

    The order is chosen per block: each step picks the remaining user whose
    bit-splits of the majority-refined code have the largest centroid
    distance; LLRs then use the per-slot refinement as in
    :func:`detect_frame_scso`.  Decoder failures are not detected here; wrong
    decisions simply propagate and count as frame errors downstream.
    Returns (decoded info bits in natural user order, decoding order,
    ScanCounter).
    """
    _check_frame(obs, code.num_dims, codec, code.bits_per_symbol)
    obs = np.asarray(obs)
    p = code.bits_per_symbol
    counter = ScanCounter()
    decoded = np.empty((code.num_users, codec.num_info), dtype=np.uint8)
    dist = code.distances(obs)
    slot_fixed = {}
    order = []
    for step in range(code.num_users):
        if step == 0:
            user = select_first_user(code)
        else:
            user = select_next_user(
                code, order, [majority(slot_fixed[u]) for u in order]
            )
        slot_llrs = _slotwise_llrs(code, dist, user, slot_fixed, counter)
        info = codec.decode(llr_stream_from_slots(slot_llrs))
        decoded[user - 1] = info
        slot_fixed[user] = messages_from_coded_bits(codec.encode(info), p)
        order.append(user)
    return decoded, order, counter


def detect_frame_zf(obs, channel: LiftedChannel, snr_db: float, codec):
    """ZF-type soft baseline over a frame; defined for two bits per symbol."""
    obs = np.asarray(obs)
    slots = _check_frame(obs, channel.num_dims, codec, 2)
    pinv, noise_var = _zf_pinv(channel)
    llrs = _zf_slot_llrs(pinv, noise_var, channel.num_users, obs)  # (K, T, 2)
    decoded = np.empty((channel.num_users, codec.num_info), dtype=np.uint8)
    for user in range(1, channel.num_users + 1):
        decoded[user - 1] = codec.decode(llr_stream_from_slots(llrs[user - 1]))
    return decoded
