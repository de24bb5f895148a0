"""Command-line front end.

Subcommands: construct, capacity, encode, decode, bler, blind, select-tau.
Every option can also come from a line-oriented key=value config file
(--config) with '#' comments; an explicit command-line flag always wins over
its file key.  Config errors exit nonzero with a message on stderr.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .channel import Awgn, Bec, repetition_combine, trial_rng
from .codec import decode_single_batch, ppp_encode, two_stage_decode
from .construction import dump_reliability_sequence
from .graph import PartialRatio
from .polar import int_to_bits
from .harness import (
    ExperimentConfig,
    _resolve_crc,
    build_code_bundle,
    capacity_report,
    format_capacity_report,
    format_tau_report,
    records_to_csv,
    run_bler_sweep,
    run_blind_experiment,
    select_partial_ratio,
)


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _as_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


class Settings:
    """Layered option lookup: CLI flag, then config-file key, then default."""

    def __init__(self, args: argparse.Namespace):
        self.cli = vars(args)
        path = self.cli.get("config")
        self.file = _parse_config_file(path) if path else {}

    def _raw(self, key):
        value = self.cli.get(key)
        if value is None:
            value = self.file.get(key)
        return value

    def text(self, key: str, default: str | None = None) -> str | None:
        value = self._raw(key)
        return default if value is None else str(value)

    def integer(self, key: str, default: int | None = None) -> int | None:
        value = self._raw(key)
        if value is None:
            return default
        text = str(value)
        return int(text, 16) if text.lower().startswith("0x") else int(text)

    def real(self, key: str, default: float | None = None) -> float | None:
        value = self._raw(key)
        return default if value is None else float(value)

    def flag(self, key: str, default: bool) -> bool:
        value = self._raw(key)
        if value is None:
            return default
        if isinstance(value, bool):
            return value
        return _as_bool(str(value))

    def real_list(self, key: str) -> list[float] | None:
        value = self._raw(key)
        if value is None:
            return None
        return [float(tok) for tok in str(value).split(",") if tok.strip()]

    def require(self, key: str, kind: str = "value"):
        value = self._raw(key)
        if value is None:
            raise ValueError(f"missing required option --{key.replace('_', '-')} ({kind})")
        return value


def _ratio_or_none(s: Settings) -> PartialRatio | None:
    text = s.text("tau")
    return PartialRatio.parse(text) if text is not None else None


def experiment_config(s: Settings, need_sweep: bool) -> ExperimentConfig:
    scheme = s.text("scheme", "ppp")
    crc1 = s.text("crc1", "crc8")
    crc2 = s.text("crc2", "crc16")
    k1 = s.integer("k1")
    k2 = s.integer("k2")
    unfrozen = s.integer("unfrozen")
    two_stage = scheme in ("ppp", "segmentation")
    payload_split = None
    if two_stage:
        if (k1 is None) != (k2 is None):
            raise ValueError("give both --k1 and --k2 or neither")
        if k1 is not None:
            payload_split = (k1, k2)
            derived = k1 + _resolve_crc(crc1).width + k2 + _resolve_crc(crc2).width
            if unfrozen is None:
                unfrozen = derived
            elif unfrozen != derived:
                raise ValueError(
                    f"--unfrozen {unfrozen} contradicts payload split + CRC widths = {derived}"
                )
    elif unfrozen is None and k1 is not None:
        unfrozen = k1 + _resolve_crc(crc2).width
    if unfrozen is None:
        raise ValueError("the code size is undetermined: give --unfrozen or payload sizes")
    sweep = s.real_list("snr")
    if need_sweep and not sweep:
        raise ValueError("missing required option --snr (comma-separated channel points)")
    return ExperimentConfig(
        scheme=scheme,
        N=s.integer("N", 1024),
        ratio=_ratio_or_none(s),
        method=s.text("method", "ab"),
        design=s.real("design"),
        unfrozen_total=unfrozen,
        payload_split=payload_split,
        crc1=crc1,
        crc2=crc2,
        list_size=s.integer("L", 8),
        channel=s.text("channel", "awgn"),
        sweep=tuple(sweep or ()),
        trials=s.integer("trials", 10000),
        base_seed=s.integer("seed", 0),
        threads=s.integer("threads", 1),
        rnti=s.integer("rnti", 0x3039),
        rnti_in_first_segment=s.flag("rnti_in_first", False),
        min_unfrozen_first=s.integer("min_first", 0),
        min_unfrozen_second=s.integer("min_second", 0),
        early_termination=s.flag("early_termination", True),
        exact_combine=s.text("combine", "exact") != "minsum",
        repetitions=s.integer("reps", 2),
    )


def _parse_bits(text: str, want: int, name: str) -> np.ndarray:
    bits = text.strip()
    if bits and set(bits) - {"0", "1"}:
        raise ValueError(f"{name} must be a 0/1 string, got {text!r}")
    if len(bits) != want:
        raise ValueError(f"{name} must have {want} bits, got {len(bits)}")
    return (np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0")).astype(np.uint8)


def _bits_str(bits: np.ndarray) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).ravel())


def cmd_construct(s: Settings) -> int:
    cfg = experiment_config(s, need_sweep=False)
    bundle = build_code_bundle(cfg)
    if bundle.kind == "two-stage":
        code = bundle.ppp
        frozen = code.frozen
        k1, k2 = code.payload_split
        print(f"scheme={cfg.scheme} N={cfg.N} tau={bundle.tau} unfrozen={cfg.unfrozen_total}")
        print(f"payload_split={k1},{k2} crc={code.seg1.crc.width}+{code.seg2.crc.width}")
    else:
        seg = bundle.single
        frozen = seg.frozen
        print(f"scheme={cfg.scheme} N={cfg.N} unfrozen={cfg.unfrozen_total}")
        print(f"payload={seg.k} crc={seg.crc.width} repetitions={bundle.reps}")
    print(f"frozen_bitmap={_bits_str(frozen.astype(np.uint8))}")
    out = s.text("out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(dump_reliability_sequence(bundle.profile, bundle.tau, cfg.method))
        print(f"sequence_file={out}")
    return 0


def _channel_point(s: Settings) -> Bec | Awgn:
    z = s.real("z")
    if z is not None:
        return Bec(z)
    snr = s.real_list("snr")
    if snr:
        return Awgn(snr[0])
    raise ValueError("give a channel point: --z <erasure prob> or --snr <Es/N0 dB>")


def cmd_capacity(s: Settings) -> int:
    text = s.require("tau", "partial ratio")
    ratio = PartialRatio.parse(str(text))
    report = capacity_report(s.integer("N", 1024), ratio, _channel_point(s))
    print(format_capacity_report(report))
    return 0


def cmd_encode(s: Settings) -> int:
    cfg = experiment_config(s, need_sweep=False)
    bundle = build_code_bundle(cfg)
    rng = trial_rng(cfg.base_seed, 0)
    if bundle.kind == "two-stage":
        code = bundle.ppp
        k1, k2 = code.payload_split
        text1, text2 = s.text("payload1"), s.text("payload2")
        p1 = _parse_bits(text1, k1, "payload1") if text1 else rng.integers(0, 2, k1, dtype=np.uint8)
        p2 = _parse_bits(text2, k2, "payload2") if text2 else rng.integers(0, 2, k2, dtype=np.uint8)
        if code.rnti_in_first_segment:
            p1 = p1.copy()
            p1[:16] = int_to_bits(cfg.rnti, 16)
        x = ppp_encode(p1, p2, cfg.rnti, code)
        print(f"payload1={_bits_str(p1)}")
        print(f"payload2={_bits_str(p2)}")
    else:
        seg = bundle.single
        text1 = s.text("payload1")
        p = _parse_bits(text1, seg.k, "payload1") if text1 else rng.integers(0, 2, seg.k, dtype=np.uint8)
        x = seg.encode(p)
        print(f"payload1={_bits_str(p)}")
    print(f"rnti=0x{cfg.rnti:04x}")
    print(f"codeword={_bits_str(x)}")
    return 0


def _read_llrs(s: Settings) -> np.ndarray:
    text = s.text("llrs")
    if text is None:
        path = s.text("infile")
        if path is None:
            raise ValueError("give LLRs: --llrs <comma list> or --in <file>")
        with open(path) as fh:
            text = fh.read()
    tokens = text.replace(",", " ").split()
    if not tokens:
        raise ValueError("no LLR values found")
    return np.array([float(t) for t in tokens])


def cmd_decode(s: Settings) -> int:
    cfg = experiment_config(s, need_sweep=False)
    bundle = build_code_bundle(cfg)
    llr = _read_llrs(s)
    if llr.size != bundle.n_uses:
        raise ValueError(f"expected {bundle.n_uses} LLRs, got {llr.size}")
    if bundle.kind == "two-stage":
        res = two_stage_decode(
            llr, bundle.ppp, cfg.list_size, cfg.rnti, cfg.early_termination, cfg.exact_combine
        )
        print(f"crc1_pass={res.crc1_pass} rnti_match={res.rnti_match} "
              f"early_terminated={res.early_terminated}")
        print(f"stage1_payload={_bits_str(res.stage1_payload)}")
        if res.stage2_payload is not None:
            print(f"stage2_payload={_bits_str(res.stage2_payload)}")
            print(f"stage2_crc_pass={res.stage2_crc_pass}")
        print(f"path_metric={res.path_metric:.6f}")
    else:
        folded = repetition_combine(
            [llr[i * cfg.N : (i + 1) * cfg.N] for i in range(bundle.reps)]
        )
        out = decode_single_batch(
            folded[None, :], bundle.single, cfg.list_size, None, cfg.exact_combine
        )
        print(f"crc_pass={bool(out['crc_pass'][0])}")
        print(f"payload={_bits_str(out['payload'][0])}")
        print(f"path_metric={float(out['metric'][0]):.6f}")
    return 0


def cmd_bler(s: Settings) -> int:
    cfg = experiment_config(s, need_sweep=True)
    records = run_bler_sweep(cfg)
    csv_text = records_to_csv(records, timing=s.flag("timing", False))
    out = s.text("out")
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_blind(s: Settings) -> int:
    cfg = experiment_config(s, need_sweep=True)
    stats = run_blind_experiment(
        cfg, int(s.require("candidates", "candidate count")), s.real("valid_fraction", 0.0)
    )
    print(f"candidates={stats.candidates}")
    print(f"valid={stats.valid_count} invalid={stats.invalid_count}")
    print(f"stage2_avoided={stats.stage2_avoided:.6f}")
    print(f"false_alarm_rate={stats.false_alarm_rate:.6f}")
    print(f"crc1_false_pass_rate={stats.crc1_false_pass_rate:.6f}")
    print(f"missed_detection_rate={stats.missed_detection_rate:.6f}")
    return 0


def cmd_select_tau(s: Settings) -> int:
    z_list = s.real_list("z_list")
    snr = s.real_list("snr")
    if z_list:
        channels: list = [Bec(z) for z in z_list]
    elif snr:
        channels = [Awgn(e) for e in snr]
    else:
        raise ValueError("give a channel grid: --z-list or --snr")
    _, report = select_partial_ratio(
        N=int(s.require("N", "code length")),
        unfrozen_total=int(s.require("unfrozen", "unfrozen budget")),
        target_bler=s.real("target_bler"),
        channels=channels,
        min_seg1_bits=int(s.require("budget", "segment-1 bit budget")),
        Lam=s.integer("Lam", 8),
    )
    print(format_tau_report(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppolar",
        description="Partially polarized polar codes: construction, codecs, experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("code and run options (all accept config-file keys)")
    g.add_argument("--config", help="key=value config file; flags override file keys")
    g.add_argument("--N", help="code length (power of two)")
    g.add_argument("--tau", help="partial ratio lam/Lam, e.g. 7/8")
    g.add_argument("--L", help="list size")
    g.add_argument("--crc1", help="segment-1 CRC preset (crc4|crc8|crc16|crc24)")
    g.add_argument("--crc2", help="segment-2 / single-code CRC preset")
    g.add_argument("--k1", help="segment-1 payload bits (single-code schemes: the payload)")
    g.add_argument("--k2", help="segment-2 payload bits")
    g.add_argument("--unfrozen", help="total unfrozen budget (payload + CRC bits)")
    g.add_argument("--rnti", help="16-bit RNTI, decimal or 0x hex")
    g.add_argument("--rnti-in-first", dest="rnti_in_first", action="store_const", const=True,
                   help="embed the RNTI as the first 16 segment-1 payload bits")
    g.add_argument("--scheme", help="ppp | segmentation | full-polar | repetition-aggregation")
    g.add_argument("--method", help="construction: ab | ga | bec")
    g.add_argument("--design", help="construction parameter (Es/N0 dB for ga, z for bec)")
    g.add_argument("--channel", help="awgn | bec")
    g.add_argument("--snr", help="comma list of channel points (Es/N0 dB, or z for bec)")
    g.add_argument("--trials", help="Monte-Carlo trials per sweep point")
    g.add_argument("--seed", help="base seed; trial t uses seed XOR t")
    g.add_argument("--threads", help="worker threads (results are thread-count independent)")
    g.add_argument("--out", help="output path (CSV for bler, sequence file for construct)")
    g.add_argument("--min-first", dest="min_first", help="minimum unfrozen in segment 1")
    g.add_argument("--min-second", dest="min_second", help="minimum unfrozen in segment 2")
    g.add_argument("--reps", help="repetition count for repetition-aggregation")
    g.add_argument("--et", dest="early_termination", action="store_const", const=True,
                   help="enable early termination (default)")
    g.add_argument("--no-et", dest="early_termination", action="store_const", const=False,
                   help="disable early termination")
    g.add_argument("--timing", action="store_const", const=True,
                   help="write real wall-clock seconds into CSV (breaks byte reproducibility)")
    combine = common.add_mutually_exclusive_group()
    combine.add_argument("--fexact", dest="combine", action="store_const", const="exact",
                         help="exact check-node combination (default)")
    combine.add_argument("--fminsum", dest="combine", action="store_const", const="minsum",
                         help="min-sum check-node combination")

    p = sub.add_parser("construct", parents=[common],
                       help="build a code; print the frozen bitmap, optionally dump a sequence file")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("capacity", parents=[common],
                       help="effective segment capacities at one channel point")
    p.add_argument("--z", help="BEC erasure probability")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("encode", parents=[common], help="encode payload bits into a codeword")
    p.add_argument("--payload1", help="segment-1 payload as a 0/1 string (default: seeded random)")
    p.add_argument("--payload2", help="segment-2 payload as a 0/1 string")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="decode a received LLR vector")
    p.add_argument("--llrs", help="comma-separated channel LLRs")
    p.add_argument("--in", dest="infile", help="file of whitespace/comma-separated LLRs")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("bler", parents=[common], help="Monte-Carlo BLER sweep, CSV output")
    p.set_defaults(func=cmd_bler)

    p = sub.add_parser("blind", parents=[common],
                       help="blind-decoding candidate pool statistics")
    p.add_argument("--candidates", help="number of candidates to decode")
    p.add_argument("--valid-fraction", dest="valid_fraction",
                   help="fraction of candidates carrying the target RNTI")
    p.set_defaults(func=cmd_blind)

    p = sub.add_parser("select-tau", parents=[common],
                       help="pick the largest feasible partial ratio on a dyadic grid")
    p.add_argument("--budget", help="segment-1 requirement in bits (RNTI + CRC)")
    p.add_argument("--target-bler", dest="target_bler", help="operating block-error target")
    p.add_argument("--z-list", dest="z_list", help="comma list of BEC grid points")
    p.add_argument("--Lam", help="ratio grid denominator (power of two)")
    p.set_defaults(func=cmd_select_tau)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = Settings(args)
        return args.func(settings)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
