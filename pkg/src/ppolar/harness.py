"""Monte-Carlo experiment harness: BLER sweeps, blind decoding, tau selection.

Determinism contract: trial t draws its payload bits and channel randomness
from a generator seeded with base_seed XOR t, in a fixed order (payloads,
then channel draws), so per-trial outcomes do not depend on batch grouping
or worker-thread count.  Sweep points run trials in contiguous chunks across
a thread pool and reduce counters in chunk order; rerunning an identical
config therefore reproduces the CSV byte for byte at any thread count.
The CSV `seconds` column is zeroed by default for the same reason; pass
timing=True (CLI --timing) to record wall-clock instead.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import (
    Awgn,
    Bec,
    LLR_SENTINEL,
    bpsk_capacity,
    bpsk_pair_capacities,
    standard_normals,
    trial_rng,
)
from .codec import (
    CrcPolar,
    PppCode,
    RNTI_BITS,
    decode_single_batch,
    ppp_encode_batch,
    two_stage_decode_batch,
)
from .construction import (
    ConstructionParams,
    ReliabilityProfile,
    alpha_beta_metrics,
    beta_metrics,
    gaussian_approx_polar,
    gaussian_approx_profile,
    select_frozen_set,
)
from .graph import (
    PartialRatio,
    build_layout,
    effective_segment_capacity,
    evolve_bec_profile,
    polar_bec_profile,
)
from .polar import CRC_PRESETS, CrcConfig, int_to_bits

SCHEMES = ("ppp", "segmentation", "full-polar", "repetition-aggregation")
CONSTRUCTION_METHODS = ("ab", "ga", "bec")
CSV_HEADER = "scheme,N,tau,L,snr_db,trials,errors,bler,early_term_frac,stage1_fa,stage1_md,seconds"
RNTI_SPACE = 1 << RNTI_BITS
_BATCH = 256


@dataclass
class ExperimentConfig:
    """One experiment: code family, construction, channel sweep, budgets.

    sweep points are Es/N0 in dB for channel="awgn" and erasure probabilities
    for channel="bec".  payload_split pins (k1, k2) exactly; left None, the
    split falls out of frozen-set selection under the min_unfrozen floors.
    design is the construction parameter (Es/N0 dB for "ga", erasure
    probability for "bec"; "ab" needs none).  Single-code schemes
    (full-polar, repetition-aggregation) use crc2 as their only CRC and
    ignore ratio/crc1; repetition-aggregation sends N coded bits
    `repetitions` times.
    """

    scheme: str = "ppp"
    N: int = 1024
    ratio: PartialRatio | None = None
    method: str = "ab"
    design: float | None = None
    unfrozen_total: int = 184
    payload_split: tuple[int, int] | None = None
    crc1: str | CrcConfig = "crc8"
    crc2: str | CrcConfig = "crc16"
    list_size: int = 8
    channel: str = "awgn"
    sweep: tuple[float, ...] = ()
    trials: int = 10000
    base_seed: int = 0
    threads: int = 1
    rnti: int = 0x3039
    rnti_in_first_segment: bool = False
    min_unfrozen_first: int = 0
    min_unfrozen_second: int = 0
    early_termination: bool = True
    exact_combine: bool = True
    repetitions: int = 2


@dataclass
class BlerRecord:
    """Counts for one sweep point; stage1_fa/md and early are raw counts."""

    scheme: str
    N: int
    tau: str
    L: int
    snr_db: float
    trials: int
    errors: int
    early_terminated: int
    stage1_fa: int
    stage1_md: int
    seconds: float

    @property
    def bler(self) -> float:
        return self.errors / self.trials

    @property
    def early_term_frac(self) -> float:
        return self.early_terminated / self.trials


@dataclass
class BlindStats:
    """Aggregate outcome of a blind-decoding candidate pool."""

    candidates: int
    valid_count: int
    invalid_count: int
    stage2_avoided: float
    false_alarm_rate: float
    crc1_false_pass_rate: float
    missed_detection_rate: float


@dataclass
class _CodeBundle:
    kind: str  # "two-stage" | "single"
    tau: str
    n_uses: int
    reps: int
    ppp: PppCode | None = None
    single: CrcPolar | None = None
    profile: ReliabilityProfile | None = None


def _resolve_crc(spec: str | CrcConfig) -> CrcConfig:
    if isinstance(spec, CrcConfig):
        return spec
    try:
        return CRC_PRESETS[spec]
    except KeyError:
        raise ValueError(f"unknown CRC preset {spec!r}; available: {sorted(CRC_PRESETS)}") from None


def _need_design(cfg: ExperimentConfig) -> float:
    if cfg.design is None:
        raise ValueError(f"construction method {cfg.method!r} needs a design parameter")
    return float(cfg.design)


def _ppp_profile(cfg: ExperimentConfig, layout) -> ReliabilityProfile:
    if cfg.method == "ab":
        return alpha_beta_metrics(cfg.N, layout.ratio, ConstructionParams())
    if cfg.method == "ga":
        return gaussian_approx_profile(layout, _need_design(cfg))
    return ReliabilityProfile(
        metrics=evolve_bec_profile(layout, _need_design(cfg)), kind="erasure-prob"
    )


def _single_profile(cfg: ExperimentConfig, m: int) -> ReliabilityProfile:
    if cfg.method == "ab":
        return beta_metrics(m)
    if cfg.method == "ga":
        return gaussian_approx_polar(m, _need_design(cfg))
    return ReliabilityProfile(metrics=polar_bec_profile(m, _need_design(cfg)), kind="erasure-prob")


def build_code_bundle(cfg: ExperimentConfig) -> _CodeBundle:
    """Validate the config and construct the code it describes.

    Every config error surfaces here, before any trial runs.
    """
    if cfg.scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {cfg.scheme!r}; available: {SCHEMES}")
    if cfg.method not in CONSTRUCTION_METHODS:
        raise ValueError(f"unknown construction {cfg.method!r}; available: {CONSTRUCTION_METHODS}")
    if cfg.trials < 1:
        raise ValueError(f"trials must be >= 1, got {cfg.trials}")
    if cfg.list_size < 1:
        raise ValueError(f"list size must be >= 1, got {cfg.list_size}")
    if cfg.threads < 1:
        raise ValueError(f"threads must be >= 1, got {cfg.threads}")
    if not 0 <= cfg.rnti < RNTI_SPACE:
        raise ValueError(f"rnti must be a {RNTI_BITS}-bit value, got {cfg.rnti}")
    if cfg.channel not in ("awgn", "bec"):
        raise ValueError(f"channel must be 'awgn' or 'bec', got {cfg.channel!r}")
    if cfg.channel == "bec":
        for z in cfg.sweep:
            if not 0.0 <= z <= 1.0:
                raise ValueError(f"BEC sweep points must lie in [0, 1], got {z}")
    crc2 = _resolve_crc(cfg.crc2)

    if cfg.scheme in ("ppp", "segmentation"):
        crc1 = _resolve_crc(cfg.crc1)
        ratio = cfg.ratio
        if cfg.scheme == "segmentation":
            if ratio is None:
                ratio = PartialRatio(0, 1)
            elif ratio.lam != 0:
                raise ValueError(f"segmentation means tau = 0, got ratio {ratio}")
        elif ratio is None:
            raise ValueError("scheme 'ppp' needs a partial ratio")
        layout = build_layout(cfg.N, ratio)
        profile = _ppp_profile(cfg, layout)
        if cfg.payload_split is not None:
            k1, k2 = cfg.payload_split
            mins = (k1 + crc1.width, k2 + crc2.width)
            if mins[0] + mins[1] != cfg.unfrozen_total:
                raise ValueError(
                    f"payload split {cfg.payload_split} + CRC widths "
                    f"({crc1.width}, {crc2.width}) must sum to unfrozen_total "
                    f"{cfg.unfrozen_total}"
                )
        else:
            mins = (cfg.min_unfrozen_first, cfg.min_unfrozen_second)
        bitmap = select_frozen_set(profile, cfg.unfrozen_total, *mins)
        n1, n2 = bitmap.unfrozen_count_per_segment
        if n1 <= crc1.width or n2 <= crc2.width:
            raise ValueError(
                f"segment unfrozen counts ({n1}, {n2}) leave no payload after "
                f"CRCs ({crc1.width}, {crc2.width}); raise the per-segment minimums"
            )
        code = PppCode(layout, bitmap.frozen, crc1, crc2, cfg.rnti_in_first_segment)
        return _CodeBundle(
            kind="two-stage", tau=str(ratio), n_uses=cfg.N, reps=1, ppp=code, profile=profile
        )

    # single-code baselines
    reps = cfg.repetitions if cfg.scheme == "repetition-aggregation" else 1
    if reps < 1:
        raise ValueError(f"repetition count must be >= 1, got {reps}")
    profile = _single_profile(cfg, cfg.N)
    bitmap = select_frozen_set(profile, cfg.unfrozen_total)
    seg = CrcPolar(bitmap.frozen, crc2)
    tau = "1/1" if cfg.scheme == "full-polar" else "-"
    return _CodeBundle(
        kind="single", tau=tau, n_uses=cfg.N * reps, reps=reps, single=seg, profile=profile
    )


def _channel_llrs(
    cfg: ExperimentConfig, point: float, x: np.ndarray, draws: np.ndarray, reps: int
) -> np.ndarray:
    """Per-use LLRs for a batch of codewords, folded over repetitions."""
    s = 1.0 - 2.0 * x.astype(float)
    if reps > 1:
        s = np.tile(s, (1, reps))
    if cfg.channel == "awgn":
        sigma2 = 0.5 * 10.0 ** (-point / 10.0)
        uses = 2.0 * (s + math.sqrt(sigma2) * draws) / sigma2
    else:
        uses = np.where(draws < point, 0.0, s * LLR_SENTINEL)
    if reps == 1:
        return uses
    return uses.reshape(x.shape[0], reps, x.shape[1]).sum(axis=1)


def _draw_channel(cfg: ExperimentConfig, rng: np.random.Generator, count: int) -> np.ndarray:
    if cfg.channel == "awgn":
        return standard_normals(rng, count)
    return rng.random(count)


def _two_stage_chunk(
    cfg: ExperimentConfig, code: PppCode, point: float, lo: int, hi: int
) -> tuple[int, int, int, int]:
    k1, k2 = code.payload_split
    errors = early = fa = md = 0
    for a in range(lo, hi, _BATCH):
        b = min(a + _BATCH, hi)
        nb = b - a
        p1 = np.empty((nb, k1), dtype=np.uint8)
        p2 = np.empty((nb, k2), dtype=np.uint8)
        draws = np.empty((nb, code.N))
        for i, t in enumerate(range(a, b)):
            rng = trial_rng(cfg.base_seed, t)
            p1[i] = rng.integers(0, 2, k1, dtype=np.uint8)
            p2[i] = rng.integers(0, 2, k2, dtype=np.uint8)
            draws[i] = _draw_channel(cfg, rng, code.N)
        if code.rnti_in_first_segment:
            p1[:, :RNTI_BITS] = int_to_bits(cfg.rnti, RNTI_BITS)
        rntis = np.full(nb, cfg.rnti, dtype=np.int64)
        x = ppp_encode_batch(p1, p2, rntis, code)
        llr = _channel_llrs(cfg, point, x, draws, 1)
        out = two_stage_decode_batch(
            llr, code, cfg.list_size, cfg.rnti, cfg.early_termination, cfg.exact_combine
        )
        mism1 = (out["stage1_payload"] != p1).any(axis=1)
        mism2 = (out["stage2_payload"] != p2).any(axis=1)
        accept = out["crc1_pass"] & out["rnti_match"] & out["stage2_crc_pass"]
        errors += int((mism1 | mism2 | ~accept).sum())
        early += int(out["early_terminated"].sum())
        fa += int((out["crc1_pass"] & mism1).sum())
        md += int(out["early_terminated"].sum())
    return errors, early, fa, md


def _single_chunk(
    cfg: ExperimentConfig, bundle: _CodeBundle, point: float, lo: int, hi: int
) -> tuple[int, int, int, int]:
    seg = bundle.single
    errors = fa = 0
    for a in range(lo, hi, _BATCH):
        b = min(a + _BATCH, hi)
        nb = b - a
        p = np.empty((nb, seg.k), dtype=np.uint8)
        draws = np.empty((nb, bundle.n_uses))
        for i, t in enumerate(range(a, b)):
            rng = trial_rng(cfg.base_seed, t)
            p[i] = rng.integers(0, 2, seg.k, dtype=np.uint8)
            draws[i] = _draw_channel(cfg, rng, bundle.n_uses)
        x = seg.encode_batch(p, None)
        llr = _channel_llrs(cfg, point, x, draws, bundle.reps)
        out = decode_single_batch(llr, seg, cfg.list_size, None, cfg.exact_combine)
        mism = (out["payload"] != p).any(axis=1)
        errors += int((mism | ~out["crc_pass"]).sum())
        fa += int((out["crc_pass"] & mism).sum())
    return errors, 0, fa, 0


def _chunk_ranges(total: int, parts: int) -> list[tuple[int, int]]:
    q, r = divmod(total, parts)
    out, lo = [], 0
    for i in range(parts):
        hi = lo + q + (1 if i < r else 0)
        if hi > lo:
            out.append((lo, hi))
        lo = hi
    return out


def _run_point(cfg: ExperimentConfig, bundle: _CodeBundle, point: float) -> tuple[int, ...]:
    worker = _two_stage_chunk if bundle.kind == "two-stage" else _single_chunk
    code = bundle.ppp if bundle.kind == "two-stage" else bundle
    ranges = _chunk_ranges(cfg.trials, cfg.threads)
    if len(ranges) == 1:
        parts = [worker(cfg, code, point, *ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            parts = list(pool.map(lambda r: worker(cfg, code, point, *r), ranges))
    return tuple(int(sum(col)) for col in zip(*parts))


def run_bler_sweep(cfg: ExperimentConfig) -> list[BlerRecord]:
    """Run every sweep point; one BlerRecord per point, in sweep order."""
    if not cfg.sweep:
        raise ValueError("sweep must contain at least one channel point")
    bundle = build_code_bundle(cfg)
    records = []
    for point in cfg.sweep:
        t0 = time.perf_counter()
        errors, early, fa, md = _run_point(cfg, bundle, float(point))
        records.append(
            BlerRecord(
                scheme=cfg.scheme,
                N=cfg.N,
                tau=bundle.tau,
                L=cfg.list_size,
                snr_db=float(point),
                trials=cfg.trials,
                errors=errors,
                early_terminated=early,
                stage1_fa=fa,
                stage1_md=md,
                seconds=time.perf_counter() - t0,
            )
        )
    return records


def records_to_csv(records: list[BlerRecord], timing: bool = False) -> str:
    lines = [CSV_HEADER]
    for r in records:
        secs = r.seconds if timing else 0.0
        lines.append(
            f"{r.scheme},{r.N},{r.tau},{r.L},{r.snr_db:.4f},{r.trials},{r.errors},"
            f"{r.bler:.6f},{r.early_term_frac:.6f},{r.stage1_fa},{r.stage1_md},{secs:.6f}"
        )
    return "\n".join(lines) + "\n"


def write_csv(records: list[BlerRecord], path: str, timing: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records, timing=timing))


def run_blind_experiment(
    cfg: ExperimentConfig, candidate_count: int, valid_fraction: float
) -> BlindStats:
    """Decode a candidate pool where only a fraction carries the UE's RNTI.

    Invalid candidates are codewords addressed to uniformly random other
    RNTIs.  A false alarm is an invalid candidate entering stage 2 (CRC1
    passed and the decoded RNTI field matched); a missed detection is a
    valid candidate terminating early.  crc1_false_pass_rate tracks the
    weaker event of CRC1 alone passing on an invalid candidate.
    """
    if candidate_count < 1:
        raise ValueError(f"candidate_count must be >= 1, got {candidate_count}")
    if not 0.0 <= valid_fraction <= 1.0:
        raise ValueError(f"valid_fraction must lie in [0, 1], got {valid_fraction}")
    bundle = build_code_bundle(cfg)
    if bundle.kind != "two-stage":
        raise ValueError("blind decoding needs a two-stage scheme (ppp or segmentation)")
    if len(cfg.sweep) != 1:
        raise ValueError("blind experiments run at a single channel point")
    code = bundle.ppp
    point = float(cfg.sweep[0])
    n_valid = int(round(valid_fraction * candidate_count))
    k1, k2 = code.payload_split

    def chunk(lo: int, hi: int) -> tuple[int, int, int, int]:
        avoided = fa = crc1_fp = md = 0
        for a in range(lo, hi, _BATCH):
            b = min(a + _BATCH, hi)
            nb = b - a
            p1 = np.empty((nb, k1), dtype=np.uint8)
            p2 = np.empty((nb, k2), dtype=np.uint8)
            draws = np.empty((nb, code.N))
            rntis = np.empty(nb, dtype=np.int64)
            valid = np.arange(a, b) < n_valid
            for i, t in enumerate(range(a, b)):
                rng = trial_rng(cfg.base_seed, t)
                p1[i] = rng.integers(0, 2, k1, dtype=np.uint8)
                p2[i] = rng.integers(0, 2, k2, dtype=np.uint8)
                other = int(rng.integers(0, RNTI_SPACE - 1))
                rntis[i] = cfg.rnti if valid[i] else (cfg.rnti + 1 + other) % RNTI_SPACE
                draws[i] = _draw_channel(cfg, rng, code.N)
            if code.rnti_in_first_segment:
                bitcols = (rntis[:, None] >> np.arange(RNTI_BITS - 1, -1, -1)[None, :]) & 1
                p1[:, :RNTI_BITS] = bitcols.astype(np.uint8)
            x = ppp_encode_batch(p1, p2, rntis, code)
            llr = _channel_llrs(cfg, point, x, draws, 1)
            out = two_stage_decode_batch(
                llr, code, cfg.list_size, cfg.rnti, True, cfg.exact_combine
            )
            early = out["early_terminated"]
            avoided += int(early.sum())
            fa += int((~early & ~valid).sum())
            crc1_fp += int((out["crc1_pass"] & ~valid).sum())
            md += int((early & valid).sum())
        return avoided, fa, crc1_fp, md

    ranges = _chunk_ranges(candidate_count, cfg.threads)
    if len(ranges) == 1:
        parts = [chunk(*ranges[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            parts = list(pool.map(lambda r: chunk(*r), ranges))
    avoided, fa, crc1_fp, md = (int(sum(col)) for col in zip(*parts))
    n_invalid = candidate_count - n_valid
    return BlindStats(
        candidates=candidate_count,
        valid_count=n_valid,
        invalid_count=n_invalid,
        stage2_avoided=avoided / candidate_count,
        false_alarm_rate=fa / max(1, n_invalid),
        crc1_false_pass_rate=crc1_fp / max(1, n_invalid),
        missed_detection_rate=md / max(1, n_valid),
    )


def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """95% (by default) Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= errors <= trials:
        raise ValueError("errors must lie in [0, trials]")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# --- analytic BEC tooling for tau selection ----------------------------------


def bec_sc_block_error(m: int, unfrozen: int, z: float) -> float:
    """Successive-cancellation block-failure probability on a BEC.

    Uses the first-erasure union 1 - prod(1 - z_i) over the best `unfrozen`
    synthesized channels of a plain length-m polar code (exact erasure
    marginals; an erased decision counts as a failure).
    """
    profile = np.sort(polar_bec_profile(m, z))[:unfrozen]
    if profile.size == 0:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(-np.expm1(np.log1p(-profile).sum()))


def _bec_threshold(m: int, bits: int, target_bler: float) -> float:
    """Largest erasure probability at which m-length polar carries `bits`."""
    lo, hi = 0.0, 1.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if bec_sc_block_error(m, bits, mid) <= target_bler:
            lo = mid
        else:
            hi = mid
    return lo


def mc_sc_block_error(
    m: int, unfrozen: int, esn0_db: float, trials: int = 2000, base_seed: int = 1
) -> float:
    """Monte-Carlo SC block-error rate of a plain polar code on BPSK/AWGN."""
    from .codec import scl_decode_batch

    bitmap = select_frozen_set(gaussian_approx_polar(m, esn0_db), unfrozen)
    info = np.flatnonzero(~bitmap.frozen)
    sigma2 = 0.5 * 10.0 ** (-esn0_db / 10.0)
    sigma = math.sqrt(sigma2)
    errors = 0
    for a in range(0, trials, _BATCH):
        nb = min(a + _BATCH, trials) - a
        noise = np.empty((nb, m))
        for i, t in enumerate(range(a, a + nb)):
            noise[i] = standard_normals(trial_rng(base_seed, t), m)
        llr = 2.0 * (1.0 + sigma * noise) / sigma2  # all-zero codeword
        u, _, _ = scl_decode_batch(llr, bitmap.frozen, 1)
        errors += int((u[:, 0, info] != 0).any(axis=1).sum())
    return errors / trials


def _awgn_threshold(m: int, bits: int, target_bler: float, lo: float, hi: float) -> float:
    """Lowest Es/N0 (dB) at which m-length polar carries `bits` (Monte-Carlo)."""
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        if mc_sc_block_error(m, bits, mid) <= target_bler:
            hi = mid
        else:
            lo = mid
    return hi


def select_partial_ratio(
    N: int,
    unfrozen_total: int,
    target_bler: float | None,
    channels: list[Bec] | list[Awgn],
    min_seg1_bits: int,
    Lam: int = 8,
) -> tuple[PartialRatio | None, dict]:
    """Pick the largest dyadic tau whose first-segment capacity covers the budget.

    The operating point is the worst grid channel at which a length-N/2 polar
    code at the overall rate still meets target_bler (analytic for BEC,
    Monte-Carlo for AWGN).  With a target, the segment-1 budget in bits is
    translated into effective-capacity bits via the erasure/SNR threshold at
    which a length-N/2 code carries that many bits at target_bler; without a
    target the budget is taken as raw bits and the operating point is the
    worst grid channel.  tau is feasible when the first-segment effective
    capacity strictly exceeds the translated requirement.
    """
    if N < 4 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 4, got {N}")
    if Lam < 1 or (Lam & (Lam - 1)) != 0 or Lam > N // 2:
        raise ValueError(f"Lambda must be a power of two <= N/2, got {Lam}")
    if min_seg1_bits < 0:
        raise ValueError(f"segment-1 budget cannot be negative, got {min_seg1_bits}")
    if not channels:
        raise ValueError("channel grid is empty")
    kinds = {type(c) for c in channels}
    if len(kinds) != 1 or not kinds & {Bec, Awgn}:
        raise ValueError("channel grid must be all-BEC or all-AWGN")
    half = N // 2

    if isinstance(channels[0], Bec):
        zs = sorted(c.z for c in channels)
        if target_bler is None:
            z_op = zs[-1]
        else:
            ok = [z for z in zs if bec_sc_block_error(half, unfrozen_total // 2, z) <= target_bler]
            if not ok:
                raise ValueError(
                    f"no grid channel supports rate {unfrozen_total}/{N} at BLER {target_bler}"
                )
            z_op = max(ok)
        c_w, c_wm, c_wp = 1.0 - z_op, (1.0 - z_op) ** 2, 1.0 - z_op * z_op
        if target_bler is None:
            requirement = float(min_seg1_bits)
        else:
            requirement = half * (1.0 - _bec_threshold(half, min_seg1_bits, target_bler))
        operating = {"channel": "bec", "point": z_op}
    else:
        es = sorted(c.esn0_db for c in channels)
        if target_bler is None:
            e_op = es[0]
        else:
            ok = [
                e for e in es
                if mc_sc_block_error(half, unfrozen_total // 2, e) <= target_bler
            ]
            if not ok:
                raise ValueError(
                    f"no grid channel supports rate {unfrozen_total}/{N} at BLER {target_bler}"
                )
            e_op = min(ok)
        c_w, c_wm, c_wp = bpsk_pair_capacities(e_op)
        if target_bler is None:
            requirement = float(min_seg1_bits)
        else:
            e_thr = _awgn_threshold(half, min_seg1_bits, target_bler, es[0] - 10.0, es[-1] + 10.0)
            requirement = half * bpsk_capacity(e_thr)
        operating = {"channel": "awgn", "point": e_op}

    table = []
    chosen: PartialRatio | None = None
    for j in range(Lam, -1, -1):
        ratio = PartialRatio(j, Lam)
        c_first, _ = effective_segment_capacity(N, ratio, c_w, c_wm, c_wp)
        feasible = c_first > requirement
        table.append({"tau": str(ratio), "c_first": c_first, "feasible": feasible})
        if feasible and chosen is None:
            chosen = ratio
    report = {
        "N": N,
        "unfrozen_total": unfrozen_total,
        "target_bler": target_bler,
        "operating": operating,
        "requirement_bits": min_seg1_bits,
        "requirement_capacity": requirement,
        "capacities": {"w": c_w, "w_minus": c_wm, "w_plus": c_wp},
        "table": table,
        "chosen": str(chosen) if chosen is not None else None,
    }
    return chosen, report


def format_tau_report(report: dict) -> str:
    op = report["operating"]
    lines = [
        f"N={report['N']} unfrozen={report['unfrozen_total']} "
        f"segment-1 budget={report['requirement_bits']} bits",
        f"operating point: {op['channel']} {op['point']:.6g} "
        f"(target BLER {report['target_bler']})",
        f"requirement as effective capacity: {report['requirement_capacity']:.4f} bits",
    ]
    for row in report["table"]:
        mark = "feasible" if row["feasible"] else "infeasible"
        lines.append(f"  tau={row['tau']:>5}  C_first={row['c_first']:9.4f}  {mark}")
    lines.append(f"chosen: {report['chosen'] if report['chosen'] else 'infeasible on this grid'}")
    return "\n".join(lines)


def capacity_report(N: int, ratio: PartialRatio, channel: Bec | Awgn) -> dict:
    """Effective segment capacities and per-segment profile summaries."""
    layout = build_layout(N, ratio)
    if isinstance(channel, Bec):
        z = channel.z
        c_w, c_wm, c_wp = 1.0 - z, (1.0 - z) ** 2, 1.0 - z * z
        profile = evolve_bec_profile(layout, z)
        per_bit = 1.0 - profile  # bit-channel capacity
        kind, point = "bec", z
    elif isinstance(channel, Awgn):
        c_w, c_wm, c_wp = bpsk_pair_capacities(channel.esn0_db)
        profile = gaussian_approx_profile(layout, channel.esn0_db).metrics
        per_bit = profile  # mean LLR as the goodness proxy
        kind, point = "awgn", channel.esn0_db
    else:
        raise TypeError(f"channel must be Bec or Awgn, got {type(channel).__name__}")
    c_first, c_second = effective_segment_capacity(N, ratio, c_w, c_wm, c_wp)
    half = N // 2
    segments = []
    for vals in (per_bit[:half], per_bit[half:]):
        segments.append(
            {"min": float(vals.min()), "mean": float(vals.mean()), "max": float(vals.max())}
        )
    return {
        "kind": kind,
        "point": point,
        "N": N,
        "tau": str(ratio),
        "c_w": c_w,
        "c_w_minus": c_wm,
        "c_w_plus": c_wp,
        "c_first": c_first,
        "c_second": c_second,
        "c_total": N * c_w,
        "segments": segments,
        "profile": profile,
    }


def format_capacity_report(report: dict) -> str:
    unit = "erasure prob" if report["kind"] == "bec" else "mean LLR"
    lines = [
        f"N={report['N']} tau={report['tau']} {report['kind']} point={report['point']:.6g}",
        f"C(W)={report['c_w']:.6f}  C(W-)={report['c_w_minus']:.6f}  "
        f"C(W+)={report['c_w_plus']:.6f}",
        f"C_first={report['c_first']:.6f}  C_second={report['c_second']:.6f}  "
        f"total={report['c_first'] + report['c_second']:.6f}",
    ]
    for name, seg in zip(("segment 1", "segment 2"), report["segments"]):
        lines.append(
            f"{name} profile ({unit}): min={seg['min']:.6g} "
            f"mean={seg['mean']:.6g} max={seg['max']:.6g}"
        )
    return "\n".join(lines)
