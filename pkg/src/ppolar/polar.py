"""Polar-code primitives: bit reversal, the GF(2) transform, and CRC handling.

Conventions fixed once for the whole package:

* codeword indexing is natural order (no bit-reversal inside the transform);
* CRC registers start at zero, no final XOR, MSB-first processing;
* an RNTI masks the last ``rnti_mask_width`` CRC bits (XOR with the
  low-order RNTI bits, least-significant bit onto the last CRC position).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def bit_reversal_permutation(n: int) -> np.ndarray:
    """Return the bit-reversal permutation of {0, ..., 2**n - 1}.

    Entry ``j`` holds the integer whose n-bit binary expansion is the
    reversal of j's.  The permutation is an involution.
    """
    if not isinstance(n, (int, np.integer)) or n < 1 or n > 30:
        raise ValueError(f"bit width must be an integer in [1, 30], got {n!r}")
    perm = np.zeros(1 << n, dtype=np.int64)
    for j in range(1 << n):
        v = 0
        for t in range(n):
            v = (v << 1) | ((j >> t) & 1)
        perm[j] = v
    return perm


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply x = u . G over GF(2), G the n-th Kronecker power of [[1,0],[1,1]].

    Natural-order indexing; the transform is applied along the last axis, so
    batched inputs of shape (..., N) are handled in one call.  G is its own
    inverse over GF(2), so this function also inverts itself.
    """
    u = np.asarray(u)
    m = u.shape[-1]
    if m < 1 or (m & (m - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {m}")
    x = np.ascontiguousarray(u).astype(np.uint8, copy=True)
    d = m // 2
    while d >= 1:
        view = x.reshape(x.shape[:-1] + (m // (2 * d), 2, d))
        view[..., 0, :] ^= view[..., 1, :]
        d //= 2
    return x.reshape(u.shape)


@dataclass(frozen=True)
class CrcConfig:
    """CRC parameters.

    ``polynomial`` holds the coefficients below the leading (implicit) x^width
    term as an integer bit mask, e.g. x^4 + x + 1 -> width 4, polynomial 0x3.
    ``rnti_mask_width`` is how many trailing CRC bits an RNTI mask touches.
    """

    width: int
    polynomial: int
    initial: int = 0
    rnti_mask_width: int = 0

    def __post_init__(self) -> None:
        if self.width not in (4, 8, 16, 24):
            raise ValueError(f"unsupported CRC width {self.width}")
        if not 0 <= self.polynomial < (1 << self.width):
            raise ValueError("polynomial must fit below the leading term")
        if not 0 <= self.initial < (1 << self.width):
            raise ValueError("initial register must fit the CRC width")
        if not 0 <= self.rnti_mask_width <= min(self.width, 16):
            raise ValueError("rnti_mask_width must be in [0, min(width, 16)]")


# Generators: CRC-4 = ITU x^4+x+1; CRC-8/CRC-24 = the 5G NR control-channel
# generators (x^8+x^7+x^4+x^3+x+1 and the 24C polynomial); CRC-16 = CCITT.
CRC_PRESETS: dict[str, CrcConfig] = {
    "crc4": CrcConfig(4, 0x3, rnti_mask_width=4),
    "crc8": CrcConfig(8, 0x9B, rnti_mask_width=8),
    "crc16": CrcConfig(16, 0x1021, rnti_mask_width=16),
    "crc24": CrcConfig(24, 0xB2B117, rnti_mask_width=16),
}


def crc_compute(payload: np.ndarray, cfg: CrcConfig, rnti: int | None = None) -> np.ndarray:
    """Compute the CRC remainder of a bit vector, optionally RNTI-masked.

    MSB-first shift-register division.  When ``rnti`` is given, its low
    ``cfg.rnti_mask_width`` bits are XORed onto the trailing CRC positions,
    least-significant RNTI bit onto the last position.
    """
    payload = np.asarray(payload).ravel()
    if payload.size == 0:
        raise ValueError("payload must be non-empty")
    if rnti is not None and cfg.rnti_mask_width == 0:
        raise ValueError("rnti supplied but rnti_mask_width is 0")
    reg = cfg.initial
    top = 1 << (cfg.width - 1)
    for bit in payload:
        fb = ((reg & top) != 0) ^ (int(bit) & 1)
        reg = (reg << 1) & ((1 << cfg.width) - 1)
        if fb:
            reg ^= cfg.polynomial
    out = np.array([(reg >> (cfg.width - 1 - i)) & 1 for i in range(cfg.width)], dtype=np.uint8)
    if rnti is not None:
        apply_rnti_mask(out, cfg, rnti)
    return out


def apply_rnti_mask(crc_bits: np.ndarray, cfg: CrcConfig, rnti: int) -> np.ndarray:
    """XOR the low rnti_mask_width RNTI bits onto the trailing CRC bits, in place."""
    if not 0 <= rnti < (1 << 16):
        raise ValueError("rnti must be a 16-bit value")
    w = cfg.rnti_mask_width
    for j in range(w):
        crc_bits[..., cfg.width - 1 - j] ^= (rnti >> j) & 1
    return crc_bits


def crc_remainder_matrix(k: int, cfg: CrcConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return (M, c) with crc(p) = p @ M xor c for every length-k payload p.

    Valid because the shift-register map is affine over GF(2); used to check
    CRCs over whole decoder candidate lists in one matrix product.
    """
    if k < 1:
        raise ValueError("payload length must be positive")
    zero = np.zeros(k, dtype=np.uint8)
    offset = crc_compute(zero, cfg)
    rows = np.empty((k, cfg.width), dtype=np.uint8)
    for i in range(k):
        unit = zero.copy()
        unit[i] = 1
        rows[i] = crc_compute(unit, cfg) ^ offset
    return rows, offset


def int_to_bits(value: int, width: int) -> np.ndarray:
    """MSB-first bit vector of a non-negative integer."""
    if not 0 <= value < (1 << width):
        raise ValueError(f"value does not fit in {width} bits")
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits: np.ndarray) -> int:
    """Inverse of int_to_bits."""
    out = 0
    for b in np.asarray(bits).ravel():
        out = (out << 1) | (int(b) & 1)
    return out
