"""Channel models, deterministic noise generation, and LLR-domain math.

LLR convention: positive favors bit 0.  Known bits use a large finite
sentinel instead of infinity; a BEC erasure is exactly 0.

Reproducibility contract: every trial draws from its own PCG64 stream seeded
with ``base_seed XOR trial_index``; Gaussian variates come from Box-Muller
applied to that stream's uniforms in a fixed order.  Identical seeds therefore
reproduce identical LLR vectors regardless of batching or thread count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LLR_SENTINEL = 1.0e6

_LN2 = float(np.log(2.0))


def llr_check_combine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact check-node combination 2 atanh(tanh(a/2) tanh(b/2)).

    Evaluated in the overflow-safe box-plus form
    sign(a)sign(b) min(|a|,|b|) + log1p(e^-|a+b|) - log1p(e^-|a-b|),
    which also sends sentinel and zero (erasure) inputs where they belong.
    The correction arguments must be |a+b| and |a-b| (not sums of absolute
    values): when the operands disagree in sign the two terms trade places,
    which is exactly what keeps the correction on the right side of min.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    out += np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    return out


def llr_check_combine_minsum(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min-sum check-node combination sign(a) sign(b) min(|a|, |b|)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def trial_rng(base_seed: int, trial_index: int) -> np.random.Generator:
    """Per-trial generator: PCG64 seeded with base_seed XOR trial_index."""
    return np.random.Generator(np.random.PCG64(int(base_seed) ^ int(trial_index)))


def standard_normals(rng: np.random.Generator, count: int) -> np.ndarray:
    """Box-Muller standard normals with fixed ordering.

    Pairs (r cos, r sin) are interleaved in draw order and truncated to
    ``count``; uniforms are mapped through 1-u to keep log() off zero.
    """
    pairs = (count + 1) // 2
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * pairs)
    out[0::2] = r * np.cos(2.0 * np.pi * u2)
    out[1::2] = r * np.sin(2.0 * np.pi * u2)
    return out[:count]


@dataclass(frozen=True)
class Bec:
    """Binary erasure channel with erasure probability z."""

    z: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.z <= 1.0:
            raise ValueError(f"erasure probability must lie in [0, 1], got {self.z}")

    @property
    def capacity(self) -> float:
        return 1.0 - self.z

    def llrs(self, codeword: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        bits = np.asarray(codeword)
        erased = rng.random(bits.size) < self.z
        signs = 1.0 - 2.0 * bits.astype(float)
        return np.where(erased, 0.0, signs * LLR_SENTINEL)


@dataclass(frozen=True)
class Awgn:
    """BPSK over AWGN at Es/N0 in dB; 0 -> +1, 1 -> -1, LLR = 2y/sigma^2."""

    esn0_db: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.esn0_db):
            raise ValueError(f"Es/N0 must be finite, got {self.esn0_db}")

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * 10.0 ** (self.esn0_db / 10.0))

    def llrs(self, codeword: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        bits = np.asarray(codeword)
        sigma2 = self.sigma2
        y = (1.0 - 2.0 * bits.astype(float)) + np.sqrt(sigma2) * standard_normals(rng, bits.size)
        return 2.0 * y / sigma2


ChannelModel = Bec | Awgn


def transmit(codeword: np.ndarray, channel: ChannelModel, rng: np.random.Generator) -> np.ndarray:
    """Send a codeword through the channel, returning per-position LLRs."""
    return channel.llrs(codeword, rng)


def repetition_combine(copies: list[np.ndarray]) -> np.ndarray:
    """Sum LLRs of repeated transmissions (optimal for independent noise)."""
    if not copies:
        raise ValueError("need at least one LLR vector")
    first = np.asarray(copies[0], dtype=float)
    out = first.copy()
    for c in copies[1:]:
        c = np.asarray(c, dtype=float)
        if c.shape != first.shape:
            raise ValueError("repetition copies must have equal length")
        out += c
    return out


def ebn0_db(esn0_db: float, rate: float) -> float:
    """Convert Es/N0 to Eb/N0 for a given code rate (reporting helper)."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must lie in (0, 1], got {rate}")
    return esn0_db - 10.0 * np.log10(rate)


# --- BPSK-AWGN capacities (Gauss-Hermite quadrature) -------------------------

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(61)


def _softbit_entropy(llrs: np.ndarray) -> np.ndarray:
    # log2(1 + e^-L), the conditional entropy term of a symmetric LLR
    return np.logaddexp(0.0, -llrs) / _LN2


def bpsk_capacity(esn0_db: float) -> float:
    """Capacity (bits/use) of BPSK over AWGN at the given Es/N0."""
    mean = 4.0 * 10.0 ** (esn0_db / 10.0)
    l = mean + 2.0 * np.sqrt(mean) * _GH_NODES
    return float(1.0 - np.sum(_GH_WEIGHTS * _softbit_entropy(l)) / np.sqrt(np.pi))


def bpsk_pair_capacities(esn0_db: float) -> tuple[float, float, float]:
    """(C(W), C(W-), C(W+)) for one polarization step of BPSK-AWGN.

    C(W-) integrates the exact check combination of two independent channel
    LLRs on a tensor quadrature grid; C(W+) follows from conservation.
    """
    mean = 4.0 * 10.0 ** (esn0_db / 10.0)
    l = mean + 2.0 * np.sqrt(mean) * _GH_NODES
    c_w = float(1.0 - np.sum(_GH_WEIGHTS * _softbit_entropy(l)) / np.sqrt(np.pi))
    combined = llr_check_combine(l[:, None], l[None, :])
    w2 = _GH_WEIGHTS[:, None] * _GH_WEIGHTS[None, :]
    c_minus = float(1.0 - np.sum(w2 * _softbit_entropy(combined)) / np.pi)
    return c_w, c_minus, 2.0 * c_w - c_minus
