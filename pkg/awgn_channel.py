"""
Seedable AWGN for real (1D) and complex (2D) sample streams.

Every noise sequence is a pure function of (samples, sigma2, seed, stream_id):
the generator is numpy's PCG64 seeded through SeedSequence(seed,
spawn_key=(stream_id, purpose)), and Gaussian draws come from
Generator.standard_normal (ziggurat). numpy is pinned in requirements.txt
so golden CSVs stay byte-stable. Parallel workers must use disjoint
stream_ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from layered_bpsk_model import InvalidParameterError

# spawn_key purposes: one seed/stream pair can drive several independent generators.
NOISE = 0
SYMBOLS = 1
MIXTURE = 2

PER_DIMENSION = "per-dimension"
TOTAL_POWER = "total-power"
NOISE_CONVENTIONS = (PER_DIMENSION, TOTAL_POWER)

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class NoiseSpec:
    sigma2: float
    seed: int = 0
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma2) and self.sigma2 >= 0):
            raise InvalidParameterError(f"sigma2 must be >= 0 (got {self.sigma2!r})")
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not (0 <= int(value) <= _UINT64_MAX):
                raise InvalidParameterError(f"{name} must be a 64-bit unsigned integer (got {value!r})")

    def with_stream(self, stream_id: int) -> "NoiseSpec":
        return NoiseSpec(self.sigma2, self.seed, stream_id)


def make_generator(seed: int, stream_id: int, purpose: int = NOISE) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed), spawn_key=(int(stream_id), int(purpose)))
    return np.random.Generator(np.random.PCG64(seq))


def awgn_real(samples: Sequence[float], spec: NoiseSpec) -> np.ndarray:
    """samples + N(0, sigma2) per sample."""
    x = np.array(samples, dtype=float).reshape(-1)
    if spec.sigma2 == 0:
        return x
    rng = make_generator(spec.seed, spec.stream_id, NOISE)
    return x + math.sqrt(spec.sigma2) * rng.standard_normal(x.size)


def awgn_complex(samples: Sequence[complex], spec: NoiseSpec) -> np.ndarray:
    """samples + CN(0, sigma2): real and imaginary parts each carry sigma2 / 2."""
    x = np.array(samples, dtype=complex).reshape(-1)
    if spec.sigma2 == 0:
        return x
    rng = make_generator(spec.seed, spec.stream_id, NOISE)
    draws = rng.standard_normal((2, x.size))
    scale = math.sqrt(spec.sigma2 / 2.0)
    return x + scale * (draws[0] + 1j * draws[1])


def dimension_variance(sigma2: float, convention: str = PER_DIMENSION) -> float:
    """
    Noise variance each real dimension sees in the 2D scheme.

    per-dimension: every axis carries the 1D analysis' sigma2.
    total-power:   sigma2 is the complex noise power, split over both axes.
    """
    if convention == PER_DIMENSION:
        return sigma2
    if convention == TOTAL_POWER:
        return sigma2 / 2.0
    raise InvalidParameterError(
        f"unknown noise convention {convention!r} (use one of {', '.join(NOISE_CONVENTIONS)})"
    )


def complex_noise_power(sigma2: float, convention: str = PER_DIMENSION) -> float:
    """Total CN power to hand awgn_complex so each axis sees dimension_variance()."""
    return 2.0 * dimension_variance(sigma2, convention)


def noise_density(axis_variance: float) -> float:
    """One-sided N0 of a channel whose real axes each carry axis_variance."""
    return 2.0 * axis_variance
