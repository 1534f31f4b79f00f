"""Coded uplink MU-MIMO link simulator and soft-output detectors for one-bit ADCs."""

from .baseband import (
    Constellation,
    LiftedChannel,
    bpsk,
    coded_bits_from_messages,
    constellation_by_name,
    draw_channel,
    gray_qam,
    lift_channel,
    lift_symbols,
    messages_from_coded_bits,
    modulate,
    one_bit_quantize,
    pack_bits,
    transmit,
    transmit_block,
    unpack_bits,
)
from .detectors import (
    ScanCounter,
    detect_frame_ordered_scso,
    detect_frame_scso,
    detect_frame_so,
    detect_frame_zf,
    majority,
    ml_hard_detect,
    scso_llrs,
    select_first_user,
    select_next_user,
    so_llrs,
    zf_soft_llrs,
)
from .fec import (
    PolarCode,
    PolarCodec,
    RepetitionCode,
    construct_frozen_set,
    polar_encode,
    polar_sc_decode,
)
from .sim import (
    ConfigError,
    FerPoint,
    SimConfig,
    emit_results,
    read_points_csv,
    read_points_json,
    run_fer_sweep,
)
from .spatial_code import (
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

__version__ = "0.1.0"
