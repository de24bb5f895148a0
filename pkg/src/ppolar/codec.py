"""Encoder and decoders for partially polarized polar codes.

Encoding runs each length-N/2 segment through the conventional polar
transform, then XORs segment-2 coded bits into segment-1 coded bits on the
retained pairs.  Decoding mirrors that graph in two stages: F (check)
pre-processing feeds a CRC-aided SCL decode of segment 1; its re-encoded
hard decisions enter the G (variable) combination that feeds segment 2.
Early termination fires when stage 1 produces no CRC-valid path or the
decoded RNTI field does not match the target RNTI.

The list decoder is LLR-based with the standard magnitude path-metric
penalty, vectorized across a batch axis and the list axis; path reordering
uses lazy index maps so ancestor tensors are gathered once per graph node
instead of reshuffled on every fork.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import LLR_SENTINEL, llr_check_combine, llr_check_combine_minsum
from .graph import PppLayout
from .polar import (
    CrcConfig,
    apply_rnti_mask,
    crc_compute,
    crc_remainder_matrix,
    int_to_bits,
    polar_transform,
)

RNTI_BITS = 16


class CrcPolar:
    """One CRC-protected polar code: frozen mask, CRC config, payload size.

    Serves both as a PPP segment and as a standalone code (the full-polar and
    repetition baselines).  When ``rnti_field`` is set the first 16 payload
    bits hold the RNTI, MSB first.
    """

    def __init__(self, frozen: np.ndarray, crc: CrcConfig, rnti_field: bool = False):
        frozen = np.asarray(frozen, dtype=bool)
        m = frozen.size
        if m < 2 or (m & (m - 1)) != 0:
            raise ValueError(f"segment length must be a power of two >= 2, got {m}")
        info = np.flatnonzero(~frozen)
        k = info.size - crc.width
        if k < 1:
            raise ValueError(
                f"unfrozen count {info.size} leaves no payload after a {crc.width}-bit CRC"
            )
        if rnti_field and k < RNTI_BITS:
            raise ValueError(f"RNTI field needs k >= {RNTI_BITS}, got {k}")
        self.frozen = frozen
        self.M = m
        self.crc = crc
        self.rnti_field = rnti_field
        self.k = k
        self.info_positions = info
        self.payload_positions = info[:k]
        self.crc_positions = info[k:]
        self._crc_matrix, self._crc_offset = crc_remainder_matrix(k, crc)

    def _mask_bits(self, rnti: int | None) -> np.ndarray:
        mask = np.zeros(self.crc.width, dtype=np.uint8)
        if rnti is not None and self.crc.rnti_mask_width > 0:
            apply_rnti_mask(mask, self.crc, rnti)
        return mask

    def place(self, payload: np.ndarray, rnti: int | None) -> np.ndarray:
        """Assemble the transform input u: payload and CRC on unfrozen slots."""
        payload = np.asarray(payload, dtype=np.uint8).ravel()
        if payload.size != self.k:
            raise ValueError(f"payload must have {self.k} bits, got {payload.size}")
        if self.rnti_field:
            if rnti is None:
                raise ValueError("code carries an RNTI field but no rnti was given")
            payload = payload.copy()
            payload[:RNTI_BITS] = int_to_bits(rnti, RNTI_BITS)
        crc_bits = crc_compute(payload, self.crc, rnti if self.crc.rnti_mask_width else None)
        u = np.zeros(self.M, dtype=np.uint8)
        u[self.payload_positions] = payload
        u[self.crc_positions] = crc_bits
        return u

    def encode(self, payload: np.ndarray, rnti: int | None = None) -> np.ndarray:
        return polar_transform(self.place(payload, rnti))

    def encode_batch(self, payloads: np.ndarray, rntis: np.ndarray | None) -> np.ndarray:
        """Encode (B, k) payloads at once; rntis is (B,) ints or None."""
        payloads = np.asarray(payloads, dtype=np.uint8)
        b = payloads.shape[0]
        if self.rnti_field:
            payloads = payloads.copy()
            bitcols = (rntis[:, None] >> np.arange(RNTI_BITS - 1, -1, -1)[None, :]) & 1
            payloads[:, :RNTI_BITS] = bitcols.astype(np.uint8)
        crc_bits = (payloads.astype(np.int16) @ self._crc_matrix) % 2
        crc_bits = crc_bits.astype(np.uint8) ^ self._crc_offset
        if rntis is not None and self.crc.rnti_mask_width > 0:
            for j in range(self.crc.rnti_mask_width):
                crc_bits[:, self.crc.width - 1 - j] ^= ((rntis >> j) & 1).astype(np.uint8)
        u = np.zeros((b, self.M), dtype=np.uint8)
        u[:, self.payload_positions] = payloads
        u[:, self.crc_positions] = crc_bits
        return polar_transform(u)

    def crc_pass(self, u_bits: np.ndarray, rnti: int | None) -> np.ndarray:
        """CRC check over decoded u bits; leading axes are preserved."""
        payload = u_bits[..., self.payload_positions]
        received = u_bits[..., self.crc_positions]
        expected = (payload.astype(np.int16) @ self._crc_matrix) % 2
        expected = expected.astype(np.uint8) ^ self._crc_offset ^ self._mask_bits(rnti)
        return np.all(expected == received, axis=-1)


class PppCode:
    """A partially polarized code: layout plus two CRC-protected segments."""

    def __init__(
        self,
        layout: PppLayout,
        frozen: np.ndarray,
        crc1: CrcConfig,
        crc2: CrcConfig,
        rnti_in_first_segment: bool = False,
    ):
        frozen = np.asarray(frozen, dtype=bool)
        if frozen.size != layout.N:
            raise ValueError("frozen mask length must equal the code length")
        half = layout.half
        self.layout = layout
        self.frozen = frozen
        self.seg1 = CrcPolar(frozen[:half], crc1, rnti_field=rnti_in_first_segment)
        self.seg2 = CrcPolar(frozen[half:], crc2)
        self.rnti_in_first_segment = rnti_in_first_segment

    @property
    def N(self) -> int:
        return self.layout.N

    @property
    def payload_split(self) -> tuple[int, int]:
        return self.seg1.k, self.seg2.k


def ppp_encode(
    payload1: np.ndarray, payload2: np.ndarray, rnti: int, code: PppCode
) -> np.ndarray:
    """Encode the two payloads into a length-N codeword.

    Segment 1 gets the RNTI stamped into its payload field (when configured)
    and an RNTI-masked CRC; retained pairs then fold segment-2 coded bits
    into segment-1 coded bits.
    """
    c1 = code.seg1.encode(payload1, rnti)
    c2 = code.seg2.encode(payload2, None)
    mask = code.layout.retained_mask
    x = np.concatenate([c1 ^ (mask & (c2 > 0)).astype(np.uint8), c2])
    return x


def ppp_encode_batch(
    payloads1: np.ndarray, payloads2: np.ndarray, rntis: np.ndarray, code: PppCode
) -> np.ndarray:
    c1 = code.seg1.encode_batch(payloads1, rntis)
    c2 = code.seg2.encode_batch(payloads2, None)
    mask = code.layout.retained_mask
    c1 ^= c2 & mask.astype(np.uint8)
    return np.concatenate([c1, c2], axis=1)


def f_preprocess(llr: np.ndarray, layout: PppLayout, exact: bool = True) -> np.ndarray:
    """Check-combine retained pairs into stage-1 input LLRs (pass pruned)."""
    llr = np.asarray(llr, dtype=float)
    half = layout.half
    a, b = llr[..., :half], llr[..., half:]
    f = llr_check_combine if exact else llr_check_combine_minsum
    return np.where(layout.retained_mask, f(a, b), a)


def g_combine(llr: np.ndarray, layout: PppLayout, seg1_coded: np.ndarray) -> np.ndarray:
    """Variable-combine stage-2 input LLRs given segment-1 coded decisions."""
    llr = np.asarray(llr, dtype=float)
    half = layout.half
    a, b = llr[..., :half], llr[..., half:]
    signs = 1.0 - 2.0 * np.asarray(seg1_coded, dtype=float)
    return np.where(layout.retained_mask, b + signs * a, b)


def scl_decode_batch(
    llrs: np.ndarray, frozen: np.ndarray, list_size: int, exact: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched LLR-domain SCL decode of one polar code.

    Returns (u, x, metrics): hard decisions in the u and x domains, shapes
    (B, L', M), plus path metrics (B, L') sorted ascending per batch row.
    L' can be below list_size when the code has fewer than log2(L) info bits.
    """
    llrs = np.asarray(llrs, dtype=float)
    if llrs.ndim != 2:
        raise ValueError("llrs must have shape (batch, M)")
    b, m = llrs.shape
    frozen = np.asarray(frozen, dtype=bool)
    if frozen.size != m:
        raise ValueError("frozen mask length must match the LLR length")
    if list_size < 1:
        raise ValueError("list size must be >= 1")
    f = llr_check_combine if exact else llr_check_combine_minsum

    metrics = np.zeros((b, 1))
    pos = 0

    def descend(span: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nonlocal metrics, pos
        la, w = span.shape[1], span.shape[2]
        if w == 1:
            leaf = span[:, :, 0]
            if frozen[pos]:
                metrics = metrics - np.minimum(leaf, 0.0)
                pos += 1
                return (
                    np.zeros((b, la, 1), dtype=np.uint8),
                    np.broadcast_to(np.arange(la), (b, la)),
                )
            pm0 = metrics + np.maximum(-leaf, 0.0)
            pm1 = metrics + np.maximum(leaf, 0.0)
            cand = np.concatenate([pm0, pm1], axis=1)
            if 2 * la <= list_size:
                order = np.broadcast_to(np.arange(2 * la), (b, 2 * la))
                metrics = cand
            else:
                order = np.argsort(cand, axis=1, kind="stable")[:, :list_size]
                metrics = np.take_along_axis(cand, order, axis=1)
            bits = (order >= la).astype(np.uint8)[:, :, None]
            pos += 1
            return bits, order % la
        half = w // 2
        x_left, map_left = descend(f(span[:, :, :half], span[:, :, half:]))
        src = np.take_along_axis(span, map_left[:, :, None], axis=1)
        g_in = src[:, :, half:] + (1.0 - 2.0 * x_left) * src[:, :, :half]
        x_right, map_right = descend(g_in)
        x_left = np.take_along_axis(x_left, map_right[:, :, None], axis=1)
        x = np.concatenate([x_left ^ x_right, x_right], axis=2)
        return x, np.take_along_axis(map_left, map_right, axis=1)

    x, _ = descend(llrs[:, None, :])
    order = np.argsort(metrics, axis=1, kind="stable")
    metrics = np.take_along_axis(metrics, order, axis=1)
    x = np.take_along_axis(x, order[:, :, None], axis=1)
    u = polar_transform(x)  # the transform is an involution
    return u, x, metrics


def scl_decode_segment(
    llr: np.ndarray,
    frozen: np.ndarray,
    list_size: int,
    crc: CrcConfig,
    rnti: int | None = None,
    exact: bool = True,
) -> list[tuple[np.ndarray, float, bool]]:
    """Decode one segment, returning (payload, metric, crc_pass) per path.

    Candidates come back sorted by path metric; crc_pass reflects RNTI
    de-masking when an rnti is supplied.
    """
    seg = CrcPolar(frozen, crc)
    u, _, metrics = scl_decode_batch(np.asarray(llr, float)[None, :], seg.frozen, list_size, exact)
    passes = seg.crc_pass(u, rnti)
    return [
        (u[0, l, seg.payload_positions].copy(), float(metrics[0, l]), bool(passes[0, l]))
        for l in range(u.shape[1])
    ]


def _select_candidates(
    seg: CrcPolar, u: np.ndarray, x: np.ndarray, metrics: np.ndarray, rnti: int | None
) -> dict:
    """Pick the best CRC-passing path per row (best metric when none pass)."""
    passes = seg.crc_pass(u, rnti)
    # paths arrive metric-sorted, so the first passing index is the winner;
    # argmax returns 0 when nothing passes, which is the best-metric fallback
    sel = np.argmax(passes, axis=1)
    rows = np.arange(u.shape[0])
    return {
        "payload": u[rows, sel][:, seg.payload_positions],
        "coded": x[rows, sel],
        "metric": metrics[rows, sel],
        "crc_pass": passes[rows, sel],
        "any_pass": passes.any(axis=1),
    }


def decode_single_batch(
    llrs: np.ndarray, seg: CrcPolar, list_size: int, rnti: int | None, exact: bool = True
) -> dict:
    """CRC-aided SCL decode of a standalone code over a batch."""
    u, x, metrics = scl_decode_batch(llrs, seg.frozen, list_size, exact)
    return _select_candidates(seg, u, x, metrics, rnti)


@dataclass
class TwoStageResult:
    """Outcome of one two-stage decode."""

    stage1_payload: np.ndarray
    stage2_payload: np.ndarray | None
    crc1_pass: bool
    rnti_match: bool
    early_terminated: bool
    stage2_crc_pass: bool | None
    path_metric: float


def two_stage_decode_batch(
    llrs: np.ndarray,
    code: PppCode,
    list_size: int,
    ue_rnti: int,
    early_termination: bool = True,
    exact: bool = True,
) -> dict:
    """Vectorized two-stage decode over a batch of received LLR vectors.

    Returns arrays keyed stage1_payload, stage2_payload, crc1_pass,
    rnti_match, early_terminated, stage2_crc_pass, path_metric; stage-2
    entries of early-terminated rows stay zero/False.
    """
    llrs = np.asarray(llrs, dtype=float)
    b = llrs.shape[0]
    s1 = decode_single_batch(
        f_preprocess(llrs, code.layout, exact), code.seg1, list_size,
        ue_rnti if code.seg1.crc.rnti_mask_width else None, exact,
    )
    crc1_pass = s1["crc_pass"]
    if code.rnti_in_first_segment:
        want = int_to_bits(ue_rnti, RNTI_BITS)
        rnti_match = np.all(s1["payload"][:, :RNTI_BITS] == want, axis=1)
    else:
        rnti_match = np.ones(b, dtype=bool)
    accept = crc1_pass & rnti_match
    early = early_termination & ~accept

    stage2_payload = np.zeros((b, code.seg2.k), dtype=np.uint8)
    stage2_pass = np.zeros(b, dtype=bool)
    metric = s1["metric"].copy()
    run = ~early
    if run.any():
        g_in = g_combine(llrs[run], code.layout, s1["coded"][run])
        s2 = decode_single_batch(g_in, code.seg2, list_size, None, exact)
        stage2_payload[run] = s2["payload"]
        stage2_pass[run] = s2["crc_pass"]
        metric[run] += s2["metric"]
    return {
        "stage1_payload": s1["payload"],
        "stage2_payload": stage2_payload,
        "crc1_pass": crc1_pass,
        "rnti_match": rnti_match,
        "early_terminated": early,
        "stage2_ran": run,
        "stage2_crc_pass": stage2_pass,
        "path_metric": metric,
    }


def two_stage_decode(
    llr: np.ndarray,
    code: PppCode,
    list_size: int,
    ue_rnti: int,
    early_termination: bool = True,
    exact: bool = True,
) -> TwoStageResult:
    """Decode one received vector; see two_stage_decode_batch for the policy."""
    out = two_stage_decode_batch(
        np.asarray(llr, float)[None, :], code, list_size, ue_rnti, early_termination, exact
    )
    ran = bool(out["stage2_ran"][0])
    return TwoStageResult(
        stage1_payload=out["stage1_payload"][0],
        stage2_payload=out["stage2_payload"][0] if ran else None,
        crc1_pass=bool(out["crc1_pass"][0]),
        rnti_match=bool(out["rnti_match"][0]),
        early_terminated=bool(out["early_terminated"][0]),
        stage2_crc_pass=bool(out["stage2_crc_pass"][0]) if ran else None,
        path_metric=float(out["path_metric"][0]),
    )


def noiseless_llrs(codeword: np.ndarray) -> np.ndarray:
    """Sentinel LLRs matching a codeword exactly (testing/demo helper)."""
    return (1.0 - 2.0 * np.asarray(codeword, float)) * LLR_SENTINEL
