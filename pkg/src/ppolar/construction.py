"""Reliability metrics and frozen-bit selection for partially polarized codes.

Four metric sources: exact erasure tracking (``evolve_bec_profile``），the
Gaussian approximation of mean LLRs, the closed-form beta / alpha-beta
expansions, and imported sequence files.  All of them end in
``select_frozen_set``, which honors per-segment minimum-unfrozen floors.

Tie-breaking is fixed package-wide: on equal metric the lower index counts as
the more reliable position.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import PartialRatio, PppLayout

BETA = 2.0 ** 0.25

_KINDS = ("erasure-prob", "mean-llr", "expansion-metric")


@dataclass(frozen=True)
class ReliabilityProfile:
    """Per-position reliability metrics in decoder order.

    ``kind`` sets the sort direction: erasure-prob is lower-is-better, the
    other two are higher-is-better.
    """

    metrics: np.ndarray = field(repr=False)
    kind: str = "erasure-prob"

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")

    @property
    def N(self) -> int:
        return int(np.asarray(self.metrics).size)

    def goodness(self) -> np.ndarray:
        """Metric rescaled so that larger always means more reliable."""
        m = np.asarray(self.metrics, dtype=float)
        return -m if self.kind == "erasure-prob" else m


@dataclass(frozen=True)
class ConstructionParams:
    """Knobs of the expansion constructions.

    ``alpha_fn`` maps the partial ratio tau to the scaling of the segment
    bit's weight; it must satisfy alpha_fn(0) = 0 and alpha_fn(1) = 1.  The
    default alpha(tau) = tau is deliberately simple; refined choices can be
    injected.
    """

    beta: float = BETA
    alpha_fn: Callable[[float], float] = lambda tau: tau

    def __post_init__(self) -> None:
        if abs(self.alpha_fn(0.0)) > 1e-12 or abs(self.alpha_fn(1.0) - 1.0) > 1e-12:
            raise ValueError("alpha_fn must satisfy alpha(0) = 0 and alpha(1) = 1")


def reliability_order(profile: ReliabilityProfile) -> np.ndarray:
    """Indices from most to least reliable (ties: lower index first)."""
    g = profile.goodness()
    return np.lexsort((np.arange(g.size), -g))


def beta_metrics(N: int) -> ReliabilityProfile:
    """Beta-expansion metric: index j (1-based) with binary expansion
    (a_n, ..., a_1) of j-1 scores sum_t a_t * beta^t, beta = 2^(1/4)."""
    return alpha_beta_metrics(N, PartialRatio(1, 1), ConstructionParams())


def alpha_beta_metrics(N: int, ratio: PartialRatio, params: ConstructionParams) -> ReliabilityProfile:
    """Alpha-beta expansion: the segment bit a_n is weighted alpha(tau)*beta^n.

    tau = 1 recovers the plain beta expansion; tau = 0 makes the two segments
    score identically.
    """
    if N < 2 or (N & (N - 1)) != 0:
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    n = N.bit_length() - 1
    alpha = params.alpha_fn(ratio.tau)
    j = np.arange(N)
    bits = (j[:, None] >> np.arange(n)[None, :]) & 1  # column t-1 holds a_t
    weights = params.beta ** np.arange(1, n + 1)
    weights = weights.copy()
    weights[n - 1] *= alpha
    metrics = bits @ weights
    return ReliabilityProfile(metrics=metrics, kind="expansion-metric")


# --- Gaussian approximation ------------------------------------------------
#
# Single-parameter GA on mean LLRs with the usual two-branch phi(x):
# exp(-0.4527 x^0.86 + 0.0218) below x = 10, the asymptotic
# sqrt(pi/x) e^(-x/4) (1 - 10/(7x)) form above; inverse by bisection.

_PHI_SPLIT = 10.0
_PHI_INV_HI = 1e15


def _phi(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    small = np.minimum(1.0, np.exp(-0.4527 * np.power(np.maximum(x, 0.0), 0.86) + 0.0218))
    with np.errstate(divide="ignore", invalid="ignore"):
        large = np.sqrt(np.pi / np.maximum(x, 1e-300)) * np.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * np.maximum(x, 1e-300)))
    return np.where(x < _PHI_SPLIT, small, large)


def _phi_inv(y: np.ndarray) -> np.ndarray:
    """Bisection inverse of _phi to 1e-9 absolute, vectorized."""
    y = np.asarray(y, dtype=float)
    lo = np.zeros_like(y)
    hi = np.full_like(y, _PHI_INV_HI)
    # ~80 halvings take the bracket from 1e15 below 1e-9
    for _ in range(85):
        mid = 0.5 * (lo + hi)
        too_high = _phi(mid) > y  # phi decreasing: phi(mid) > y means mid left of root
        lo = np.where(too_high, mid, lo)
        hi = np.where(too_high, hi, mid)
    return 0.5 * (lo + hi)


def _ga_check(m1: np.ndarray, m2: np.ndarray) -> np.ndarray:
    return _phi_inv(1.0 - (1.0 - _phi(m1)) * (1.0 - _phi(m2)))


def _ga_segment(means: np.ndarray) -> np.ndarray:
    m = means.size
    if m == 1:
        return means.copy()
    a, b = means[: m // 2], means[m // 2 :]
    return np.concatenate([_ga_segment(_ga_check(a, b)), _ga_segment(a + b)])


def gaussian_approx_profile(layout: PppLayout, design_esn0_db: float) -> ReliabilityProfile:
    """Mean-LLR profile of the partially polarized graph at a design Es/N0.

    The channel mean is 4 * 10^(esn0/10) (BPSK, LLR = 2y/sigma^2); retained
    pairs feed the check update to segment 1 and the variable (sum) update to
    segment 2, pruned pairs pass the channel mean unchanged.
    """
    if not np.isfinite(design_esn0_db):
        raise ValueError(f"design Es/N0 must be finite, got {design_esn0_db}")
    mean = 4.0 * 10.0 ** (design_esn0_db / 10.0)
    mask = layout.retained_mask
    ch = np.full(layout.half, mean)
    seg1_in = np.where(mask, _ga_check(ch, ch), ch)
    seg2_in = np.where(mask, 2.0 * mean, ch)
    metrics = np.concatenate([_ga_segment(seg1_in), _ga_segment(seg2_in)])
    return ReliabilityProfile(metrics=metrics, kind="mean-llr")


def gaussian_approx_polar(m: int, design_esn0_db: float) -> ReliabilityProfile:
    """Mean-LLR profile of a plain length-m polar code at a design Es/N0."""
    if m < 1 or (m & (m - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {m}")
    if not np.isfinite(design_esn0_db):
        raise ValueError(f"design Es/N0 must be finite, got {design_esn0_db}")
    mean = 4.0 * 10.0 ** (design_esn0_db / 10.0)
    return ReliabilityProfile(metrics=_ga_segment(np.full(m, mean)), kind="mean-llr")


# --- frozen-set selection ---------------------------------------------------


@dataclass(frozen=True)
class FrozenBitmap:
    """Boolean frozen mask (true = frozen) over the full code length."""

    frozen: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return int(self.frozen.size)

    @property
    def unfrozen_count_per_segment(self) -> tuple[int, int]:
        half = self.N // 2
        return (
            int(np.count_nonzero(~self.frozen[:half])),
            int(np.count_nonzero(~self.frozen[half:])),
        )

    def unfrozen_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen)


def select_frozen_set(
    profile: ReliabilityProfile,
    unfrozen_total: int,
    min_unfrozen_first: int = 0,
    min_unfrozen_second: int = 0,
) -> FrozenBitmap:
    """Freeze the least reliable positions subject to per-segment floors.

    Walks positions from least to most reliable and freezes each one unless
    its segment is already down to its minimum unfrozen count, stopping once
    exactly N - unfrozen_total are frozen.
    """
    N = profile.N
    half = N // 2
    if not 0 <= unfrozen_total <= N:
        raise ValueError(f"unfrozen_total must lie in [0, {N}], got {unfrozen_total}")
    if min_unfrozen_first < 0 or min_unfrozen_second < 0:
        raise ValueError("minimum unfrozen counts cannot be negative")
    if min_unfrozen_first > half or min_unfrozen_second > half:
        raise ValueError("per-segment minimum exceeds segment size")
    if min_unfrozen_first + min_unfrozen_second > unfrozen_total:
        raise ValueError("per-segment minimums exceed the unfrozen budget")

    freeze_order = reliability_order(profile)[::-1]  # least reliable first
    frozen = np.zeros(N, dtype=bool)
    unfrozen_left = [half, N - half]
    floors = (min_unfrozen_first, min_unfrozen_second)
    need = N - unfrozen_total
    for idx in freeze_order:
        if need == 0:
            break
        seg = 0 if idx < half else 1
        if unfrozen_left[seg] <= floors[seg]:
            continue
        frozen[idx] = True
        unfrozen_left[seg] -= 1
        need -= 1
    if need:
        raise ValueError("constraints leave too few freezable positions")
    return FrozenBitmap(frozen=frozen)


# --- sequence files ----------------------------------------------------------


def load_reliability_sequence(text: str, N: int) -> ReliabilityProfile:
    """Parse a sequence file: a permutation of 1..N, least reliable first.

    Whitespace/newline separated, '#' starts a comment.  The returned profile
    scores position j-1 with the rank of j in the sequence (0 = least
    reliable), so later entries are more reliable.
    """
    seen: dict[int, int] = {}
    order: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        for token in line.split():
            try:
                j = int(token)
            except ValueError:
                raise ValueError(f"line {lineno}: {token!r} is not an integer") from None
            if not 1 <= j <= N:
                raise ValueError(f"line {lineno}: index {j} outside 1..{N}")
            if j in seen:
                raise ValueError(f"line {lineno}: index {j} repeats (first seen on line {seen[j]})")
            seen[j] = lineno
            order.append(j)
    if len(order) != N:
        raise ValueError(f"sequence lists {len(order)} of {N} indices")
    metrics = np.empty(N, dtype=float)
    for rank, j in enumerate(order):
        metrics[j - 1] = rank
    return ReliabilityProfile(metrics=metrics, kind="expansion-metric")


def dump_reliability_sequence(profile: ReliabilityProfile, tau: str, method: str) -> str:
    """Render a profile in the sequence-file format load_reliability_sequence reads."""
    order = reliability_order(profile)[::-1] + 1  # least reliable first, 1-based
    lines = [
        f"# reliability sequence: N={profile.N} tau={tau} method={method}",
        "# 1-based bit-channel indices, least reliable first",
    ]
    for start in range(0, order.size, 16):
        lines.append(" ".join(str(int(j)) for j in order[start : start + 16]))
    return "\n".join(lines) + "\n"
