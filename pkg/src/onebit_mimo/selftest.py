"""Built-in property checks behind the ``selftest`` CLI command.

Small, fast versions of the key invariants; the full suite lives in the
pytest tests.  Each check prints one OK/FAIL line.
"""

import numpy as np

from .baseband import (
    coded_bits_from_messages,
    constellation_by_name,
    draw_channel,
    lift_channel,
    messages_from_coded_bits,
    one_bit_quantize,
)
from .detectors import ml_hard_detect, scso_llrs, so_llrs
from .fec import PolarCode, polar_encode, polar_sc_decode
from .sim import SimConfig, run_fer_sweep
from .spatial_code import (
    SubcodeSelector,
    build_code,
    crossover,
    exact_loglikelihood,
    expand_index,
    subcode_indices,
)


def _all_observations(num_dims):
    return ((np.arange(1 << num_dims)[:, None] >> np.arange(num_dims)) & 1).astype(np.uint8)


def _check_bit_packing():
    rng = np.random.default_rng(7)
    for p in (1, 2, 4):
        tau = rng.integers(0, 2, size=12 * p)
        back = coded_bits_from_messages(messages_from_coded_bits(tau, p), p)
        if not np.array_equal(tau, back):
            return False
    return True


def _check_lifting():
    rng = np.random.default_rng(3)
    h = draw_channel(3, 4, rng)
    ch = lift_channel(h)
    ok = np.array_equal(ch.real_h[:4, :3], h.real)
    ok &= np.array_equal(ch.real_h[:4, 3:], -h.imag)
    ok &= np.array_equal(ch.real_h[4:, :3], h.imag)
    ok &= np.array_equal(ch.real_h[4:, 3:], h.real)
    return bool(ok)


def _check_crossover():
    q1 = crossover(np.sqrt(0.5), np.sqrt(0.5))
    return abs(q1 - 0.15865525393145707) < 1e-12 and crossover(0.0, 1.0) == 0.5


def _check_subcodes():
    rng = np.random.default_rng(11)
    code = build_code(lift_channel(draw_channel(2, 2, rng)),
                      constellation_by_name("4qam"), 0.0)
    got = subcode_indices(SubcodeSelector(fixed=((1, 3),)), code)
    want = [ell for ell in range(16) if expand_index(ell, 4, 2)[0] == 3]
    return got.tolist() == want


def _check_scso_reduces_to_so():
    rng = np.random.default_rng(5)
    code = build_code(lift_channel(draw_channel(2, 2, rng)),
                      constellation_by_name("4qam"), 2.0)
    for obs in _all_observations(code.num_dims):
        for user in (1, 2):
            if not np.array_equal(so_llrs(obs, code, user),
                                  scso_llrs(obs, code, user, {})):
                return False
    return True


def _check_ml_oracle():
    rng = np.random.default_rng(13)
    code = build_code(lift_channel(draw_channel(2, 2, rng)),
                      constellation_by_name("4qam"), 0.0)
    for obs in _all_observations(code.num_dims):
        best = max(range(code.size),
                   key=lambda ell: (exact_loglikelihood(obs, ell, code), -ell))
        if not np.array_equal(ml_hard_detect(obs, code),
                              expand_index(best, code.m, code.num_users)):
            return False
    return True


def _check_polar_roundtrip():
    code = PolarCode.construct(128, 0.5)
    rng = np.random.default_rng(17)
    for _ in range(50):
        info = rng.integers(0, 2, size=code.num_info, dtype=np.uint8)
        llrs = 1000.0 * (1.0 - 2.0 * polar_encode(info, code))
        if not np.array_equal(polar_sc_decode(llrs, code), info):
            return False
    return True


def _check_quantizer():
    return one_bit_quantize([0.5, -0.3, 0.0]).tolist() == [0, 1, 0]


def _check_sweep_determinism():
    cfg = SimConfig(num_users=2, num_rx=2, code_spec="polar:16:0.5",
                    detectors=("so", "scso"), snr_start=0.0, snr_stop=2.0,
                    snr_step=2.0, frames=10, seed=99)
    return run_fer_sweep(cfg) == run_fer_sweep(cfg)


CHECKS = (
    ("bit packing round trip", _check_bit_packing),
    ("channel lifting block structure", _check_lifting),
    ("crossover probability", _check_crossover),
    ("subcode selection vs enumeration", _check_subcodes),
    ("successive LLRs reduce to single-pass", _check_scso_reduces_to_so),
    ("ML hard decision vs exhaustive likelihood", _check_ml_oracle),
    ("polar noiseless round trip", _check_polar_roundtrip),
    ("one-bit quantizer", _check_quantizer),
    ("sweep determinism", _check_sweep_determinism),
)


def run_selftest() -> bool:
    all_ok = True
    for name, check in CHECKS:
        try:
            ok = check()
        except Exception as exc:  # a crash is a failure, keep going
            print(f"FAIL {name}: {exc!r}")
            all_ok = False
            continue
        print(f"{'OK  ' if ok else 'FAIL'} {name}")
        all_ok &= ok
    return all_ok
