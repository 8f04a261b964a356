"""All-zero-codeword transmission over a Rayleigh/MRC fading channel with 16-QAM.

The transmitted bits are a seeded pseudo-random scrambling sequence (the
all-zero codeword XOR the scrambler), so the QAM symbols cover the whole
constellation.  The receiver demaps with exact log-MAP and undoes the
scrambling on the LLRs, so every returned LLR refers to a code bit of 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

BITS_PER_SYMBOL = 4


@dataclass(frozen=True)
class ChannelSpec:
    """Mean SNR ``snr_db`` is Es/N0 in dB with Es = 1."""

    snr_db: float
    branches: int = 4
    fading_enabled: bool = True

    def __post_init__(self):
        if self.branches < 1:
            raise ValueError("branches must be >= 1")

    @property
    def es(self) -> float:
        return 1.0

    @property
    def n0(self) -> float:
        return self.es * 10.0 ** (-self.snr_db / 10.0)


def _check_len(n: int) -> None:
    if n % BITS_PER_SYMBOL:
        raise ValueError(f"bit count {n} is not a multiple of {BITS_PER_SYMBOL}")


def scramble_allzero(n: int, rng: np.random.Generator) -> np.ndarray:
    _check_len(n)
    return rng.integers(0, 2, size=n, dtype=np.uint8)


def modulate_16qam(bits) -> np.ndarray:
    """Gray-mapped unit-energy 16-QAM, bit quadruples ``(b0, b1, b2, b3)``."""
    bits = np.asarray(bits, dtype=np.int64)
    _check_len(bits.size)
    q = 1 - 2 * bits.reshape(-1, 4)
    re = q[:, 0] * (2 - q[:, 2])
    im = q[:, 1] * (2 - q[:, 3])
    return (re + 1j * im) / np.sqrt(10.0)


# constellation point for every 4-bit label, label bit m = (idx >> (3 - m)) & 1
_LABELS = ((np.arange(16)[:, None] >> (3 - np.arange(4))[None, :]) & 1).astype(np.uint8)
CONSTELLATION = modulate_16qam(_LABELS.ravel())


def apply_channel(symbols, spec: ChannelSpec, rng: np.random.Generator):
    """Return received symbols ``y = alpha x + noise`` and the real MRC gains ``alpha``."""
    x = np.asarray(symbols, dtype=np.complex128)
    k = x.size
    if spec.fading_enabled:
        h = rng.standard_normal((k, spec.branches, 2)) * np.sqrt(0.5 / spec.branches)
        alpha = np.sqrt((h ** 2).sum(axis=(1, 2)))
    else:
        alpha = np.ones(k)
    w = rng.standard_normal((k, 2)) * np.sqrt(spec.n0 / 2)
    y = alpha * x + (w[:, 0] + 1j * w[:, 1])
    return y, alpha


def demap_llr(y, alpha, n0: float, scramble) -> np.ndarray:
    """Exact log-MAP bit LLRs, sign-flipped where the scramble bit is 1."""
    if not n0 > 0:
        raise ValueError("noise power must be positive")
    y = np.asarray(y, dtype=np.complex128).ravel()
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), y.shape)
    metric = -np.abs(y[:, None] - alpha[:, None] * CONSTELLATION[None, :]) ** 2 / n0
    llr = np.empty((y.size, 4))
    for m in range(4):
        zero = _LABELS[:, m] == 0
        llr[:, m] = logsumexp(metric[:, zero], axis=1) - logsumexp(metric[:, ~zero], axis=1)
    llr = llr.ravel()
    s = np.asarray(scramble, dtype=np.int64)
    if s.size != llr.size:
        raise ValueError("scramble sequence length does not match the bit count")
    return np.where(s == 1, -llr, llr)


def generate_allzero_llrs(n: int, spec: ChannelSpec, rng: np.random.Generator) -> np.ndarray:
    s = scramble_allzero(n, rng)
    y, alpha = apply_channel(modulate_16qam(s), spec, rng)
    return demap_llr(y, alpha, spec.n0, s)
