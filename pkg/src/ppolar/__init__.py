"""Partially polarized polar codes: construction, codecs, experiment harness."""

from .channel import (
    Awgn,
    Bec,
    LLR_SENTINEL,
    bpsk_capacity,
    bpsk_pair_capacities,
    ebn0_db,
    llr_check_combine,
    llr_check_combine_minsum,
    repetition_combine,
    standard_normals,
    transmit,
    trial_rng,
)
from .codec import (
    CrcPolar,
    PppCode,
    RNTI_BITS,
    TwoStageResult,
    decode_single_batch,
    f_preprocess,
    g_combine,
    noiseless_llrs,
    ppp_encode,
    ppp_encode_batch,
    scl_decode_batch,
    scl_decode_segment,
    two_stage_decode,
    two_stage_decode_batch,
)
from .construction import (
    BETA,
    ConstructionParams,
    FrozenBitmap,
    ReliabilityProfile,
    alpha_beta_metrics,
    beta_metrics,
    dump_reliability_sequence,
    gaussian_approx_polar,
    gaussian_approx_profile,
    load_reliability_sequence,
    reliability_order,
    select_frozen_set,
)
from .graph import (
    PartialRatio,
    PppLayout,
    bec_combine,
    build_layout,
    effective_segment_capacity,
    evolve_bec_profile,
    polar_bec_profile,
)
from .harness import (
    BlerRecord,
    BlindStats,
    ExperimentConfig,
    bec_sc_block_error,
    build_code_bundle,
    capacity_report,
    format_capacity_report,
    format_tau_report,
    mc_sc_block_error,
    records_to_csv,
    run_bler_sweep,
    run_blind_experiment,
    select_partial_ratio,
    wilson_interval,
    write_csv,
)
from .polar import (
    CRC_PRESETS,
    CrcConfig,
    apply_rnti_mask,
    bit_reversal_permutation,
    bits_to_int,
    crc_compute,
    crc_remainder_matrix,
    int_to_bits,
    polar_transform,
)

__version__ = "0.1.0"
