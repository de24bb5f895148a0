"""Partial inter-segment polarization layer and BEC reliability tracking.

A length-N code is built from two length-N/2 polar segments joined by a
partial polarization layer: pair (i, i + N/2) is XOR-coupled iff the retained
mask is true at i.  Retention follows the dyadic rule ``i mod Lambda < lambda``
in natural decoder-order indexing, which realizes the periodic synthesized-
input patterns (e.g. alternating degraded/plain channels at ratio 1/2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


@dataclass(frozen=True)
class PartialRatio:
    """Dyadic partial polarization ratio tau = lam / Lam, Lam a power of two."""

    lam: int
    Lam: int

    def __post_init__(self) -> None:
        if self.Lam < 1 or (self.Lam & (self.Lam - 1)) != 0:
            raise ValueError(f"Lambda must be a positive power of two, got {self.Lam}")
        if not 0 <= self.lam <= self.Lam:
            raise ValueError(f"lambda must lie in [0, {self.Lam}], got {self.lam}")

    @property
    def tau(self) -> float:
        return self.lam / self.Lam

    @classmethod
    def parse(cls, text: str) -> "PartialRatio":
        """Parse 'lam/Lam' (or a bare '0' / '1') into a ratio."""
        frac = Fraction(text.strip())
        if not 0 <= frac <= 1:
            raise ValueError(f"tau must lie in [0, 1], got {text!r}")
        # promote to a power-of-two denominator if needed (e.g. '1' -> 1/1)
        den = frac.denominator
        if den & (den - 1) != 0:
            raise ValueError(f"tau must be dyadic (denominator a power of two), got {text!r}")
        return cls(frac.numerator, frac.denominator)

    def __str__(self) -> str:
        return f"{self.lam}/{self.Lam}"


@dataclass(frozen=True)
class PppLayout:
    """Code length plus the retained inter-segment XOR mask."""

    N: int
    ratio: PartialRatio
    retained_mask: np.ndarray = field(repr=False)

    @property
    def half(self) -> int:
        return self.N // 2

    @property
    def retained_count(self) -> int:
        return int(self.retained_mask.sum())


def build_layout(N: int, ratio: PartialRatio) -> PppLayout:
    """Build the partial-layer layout for code length N.

    retained_mask[i] is true iff pair (i, i + N/2) keeps its XOR; the rule
    ``i mod Lambda < lambda`` retains the first lam operations out of every
    Lam, giving exactly tau * N/2 retained pairs.
    """
    if N < 4 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 4, got {N}")
    if (N // 2) % ratio.Lam != 0:
        raise ValueError(f"N/2 = {N // 2} not divisible by Lambda = {ratio.Lam}")
    idx = np.arange(N // 2)
    mask = (idx % ratio.Lam) < ratio.lam
    return PppLayout(N=N, ratio=ratio, retained_mask=mask)


def bec_combine(z1: float, z2: float) -> tuple[float, float]:
    """One polarization step on erasure probabilities: (z-, z+).

    z- = 1 - (1-z1)(1-z2) is the degraded check combination, z+ = z1*z2 the
    upgraded variable combination; capacity is conserved exactly.
    """
    if not (0.0 <= z1 <= 1.0 and 0.0 <= z2 <= 1.0):
        raise ValueError(f"erasure probabilities must lie in [0, 1], got {z1}, {z2}")
    return 1.0 - (1.0 - z1) * (1.0 - z2), z1 * z2


def _evolve_segment(channels: np.ndarray) -> np.ndarray:
    """Evolve per-position channel erasure probs through a full polar graph.

    Standard recursion in decoder order: the first half of the outputs comes
    from check-combining pairs (i, i + M/2), the second half from variable-
    combining them.
    """
    m = channels.size
    if m == 1:
        return channels.copy()
    a, b = channels[: m // 2], channels[m // 2 :]
    upper = 1.0 - (1.0 - a) * (1.0 - b)
    lower = a * b
    return np.concatenate([_evolve_segment(upper), _evolve_segment(lower)])


def polar_bec_profile(m: int, z: float) -> np.ndarray:
    """Erasure probabilities of a plain length-m polar code's bit-channels."""
    if m < 1 or (m & (m - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {m}")
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {z}")
    return _evolve_segment(np.full(m, float(z)))


def evolve_bec_profile(layout: PppLayout, z: float) -> np.ndarray:
    """Erasure probability of every synthesized bit-channel, decoder order.

    The partial layer maps retained pairs to (z-, z+) feeding segments 1 and
    2, pruned pairs pass z to both; each segment then runs the conventional
    length-N/2 recursion.  Segment 1 occupies output indices 0 .. N/2 - 1.
    """
    if not 0.0 <= z <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {z}")
    mask = layout.retained_mask
    zm, zp = 1.0 - (1.0 - z) ** 2, z * z
    seg1_in = np.where(mask, zm, z)
    seg2_in = np.where(mask, zp, z)
    return np.concatenate([_evolve_segment(seg1_in), _evolve_segment(seg2_in)])


def effective_segment_capacity(
    N: int, ratio: PartialRatio, cW: float, cWminus: float, cWplus: float
) -> tuple[float, float]:
    """Effective capacities (bits per block) of the two segments.

    C_first  = (N/2) (tau C(W-) + (1-tau) C(W))
    C_second = (N/2) (tau C(W+) + (1-tau) C(W))
    """
    for c in (cW, cWminus, cWplus):
        if not 0.0 <= c <= 1.0:
            raise ValueError(f"capacities must lie in [0, 1], got {c}")
    tau = ratio.tau
    half = N / 2
    c_first = half * (tau * cWminus + (1.0 - tau) * cW)
    c_second = half * (tau * cWplus + (1.0 - tau) * cW)
    return c_first, c_second
