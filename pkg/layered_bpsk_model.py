"""
Layered BPSK domain types and the weight table.

Two BPSK streams x and z are superimposed: each z symbol rides on two
consecutive x symbols, and the weight vector w applied to (x, z) depends on
the block's symbol pattern. The eight equiprobable (x_odd, x_even, z) blocks
and their transmit amplitudes are enumerated here in one place; every other
module derives its amplitudes from this table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, List, Tuple


class InvalidParameterError(ValueError):
    """Amplitudes, noise power or another numeric parameter out of range."""


class LengthMismatchError(ValueError):
    """x and z streams do not frame into whole two-symbol blocks."""


class BpskSymbol(IntEnum):
    PLUS = 1
    MINUS = -1


def as_symbol(value: int) -> BpskSymbol:
    """Coerce +1/-1 (or a BpskSymbol) into a BpskSymbol."""
    try:
        return BpskSymbol(int(value))
    except ValueError as exc:
        raise InvalidParameterError(f"BPSK symbol must be +1 or -1, got {value!r}") from exc


def decide(soft: float) -> BpskSymbol:
    """Hard BPSK decision; an exact zero decides +1."""
    return BpskSymbol.MINUS if soft < 0 else BpskSymbol.PLUS


def validate_amplitudes(alpha: float, beta: float, *, label: str = "alpha/beta") -> None:
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise InvalidParameterError(f"{label} must be finite (got {alpha!r}, {beta!r})")
    if beta <= 0:
        raise InvalidParameterError(f"{label}: beta must be > 0 (got {beta!r})")
    if alpha <= beta:
        raise InvalidParameterError(f"{label}: alpha must exceed beta (got {alpha!r} <= {beta!r})")


# Weight-branch names.
SPLIT = "split"  # x_odd != x_even
ALIGNED = "aligned"  # x_odd == x_even == z
OPPOSED = "opposed"  # x_odd == x_even != z

# Case table row order: (x_odd, x_even, z).
CASE_TRIPLES: Tuple[Tuple[int, int, int], ...] = (
    (+1, -1, +1),
    (+1, -1, -1),
    (-1, +1, +1),
    (-1, +1, -1),
    (+1, +1, +1),
    (-1, -1, -1),
    (+1, +1, -1),
    (-1, -1, +1),
)


@dataclass(frozen=True)
class LayerConfig:
    """Scheme parameters: in-phase (alpha, beta), quadrature (alpha_q, beta_q), noise power."""

    alpha: float
    beta: float
    alpha_q: float
    beta_q: float
    sigma2: float

    def __post_init__(self) -> None:
        validate_amplitudes(self.alpha, self.beta, label="alpha/beta")
        validate_amplitudes(self.alpha_q, self.beta_q, label="alpha_q/beta_q")
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise InvalidParameterError(f"sigma2 must be > 0 (got {self.sigma2!r})")

    @classmethod
    def symmetric(cls, alpha: float, beta: float, sigma2: float) -> "LayerConfig":
        """Both dimensions layered with the same (alpha, beta)."""
        return cls(alpha, beta, alpha, beta, sigma2)

    @classmethod
    def from_ratio(cls, ratio: float, sigma2: float, power: float = 1.0) -> "LayerConfig":
        """
        Solve alpha from (12 alpha^2 + 9 beta^2) / 16 = power with beta = alpha / ratio,
        i.e. the average transmit power per real dimension equals `power`.
        """
        if not (ratio > 1):
            raise InvalidParameterError(f"alpha/beta ratio must be > 1 (got {ratio!r})")
        if not (power > 0):
            raise InvalidParameterError(f"power must be > 0 (got {power!r})")
        alpha = math.sqrt(16.0 * power / (12.0 + 9.0 / (ratio * ratio)))
        return cls.symmetric(alpha, alpha / ratio, sigma2)

    def quadrature_layer(self) -> "LayerConfig":
        """The (alpha_q, beta_q) layer as a one-dimensional config."""
        return LayerConfig.symmetric(self.alpha_q, self.beta_q, self.sigma2)

    def with_sigma2(self, sigma2: float) -> "LayerConfig":
        return LayerConfig(self.alpha, self.beta, self.alpha_q, self.beta_q, sigma2)


@dataclass(frozen=True)
class WeightVector:
    w1: float
    w2: float

    def apply(self, x: int, z: int) -> float:
        return self.w1 * x + self.w2 * z


@dataclass(frozen=True)
class BlockCase:
    """One case-table row: symbols of a two-period block and the two transmit amplitudes."""

    index: int
    x_odd: BpskSymbol
    x_even: BpskSymbol
    z: BpskSymbol
    amp_odd: float
    amp_even: float

    @property
    def branch(self) -> str:
        return weight_branch(self.x_odd, self.x_even, self.z)


def weight_branch(x_odd: int, x_even: int, z: int) -> str:
    if x_odd != x_even:
        return SPLIT
    if x_odd == z:
        return ALIGNED
    return OPPOSED


def select_weights(x_odd: int, x_even: int, z: int, alpha: float, beta: float) -> WeightVector:
    validate_amplitudes(alpha, beta)
    branch = weight_branch(as_symbol(x_odd), as_symbol(x_even), as_symbol(z))
    if branch == SPLIT:
        return WeightVector(alpha, beta)
    if branch == ALIGNED:
        return WeightVector(alpha, 0.0)
    return WeightVector(0.0, beta / 2.0)


def case_index(x_odd: int, x_even: int, z: int) -> int:
    """1-based case-table row of a symbol triple."""
    triple = (int(as_symbol(x_odd)), int(as_symbol(x_even)), int(as_symbol(z)))
    return CASE_TRIPLES.index(triple) + 1


def classify_block(x_odd: int, x_even: int, z: int, alpha: float, beta: float) -> BlockCase:
    w = select_weights(x_odd, x_even, z, alpha, beta)
    return BlockCase(
        index=case_index(x_odd, x_even, z),
        x_odd=as_symbol(x_odd),
        x_even=as_symbol(x_even),
        z=as_symbol(z),
        amp_odd=w.apply(x_odd, z),
        amp_even=w.apply(x_even, z),
    )


def all_cases(alpha: float, beta: float) -> List[BlockCase]:
    return [classify_block(xo, xe, z, alpha, beta) for xo, xe, z in CASE_TRIPLES]


def case_class_probabilities(alpha: float, beta: float) -> Dict[str, float]:
    """Probability of each weight branch, counted over the equiprobable case-table rows."""
    cases = all_cases(alpha, beta)
    counts = {SPLIT: 0, ALIGNED: 0, OPPOSED: 0}
    for case in cases:
        counts[case.branch] += 1
    return {branch: n / len(cases) for branch, n in counts.items()}
