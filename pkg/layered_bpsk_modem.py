"""
Layered BPSK transmitter and receiver, one- and two-dimensional.

Block m occupies channel uses 2m-1 and 2m. The receiver first decides z_m
from y_odd + y_even, then strips z_hat * beta from each period and decides
the two x symbols. The two-dimensional scheme runs an independent layer on
the imaginary axis, so quadrature symbols {+j, -j} are carried here as their
imaginary-axis signs {+1, -1}.

Scalar block functions mirror the receiver equations one block at a time;
the *_stream_* functions are the vectorised equivalents used by the Monte
Carlo runs and agree with the block functions element for element.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from layered_bpsk_model import (
    BpskSymbol,
    InvalidParameterError,
    LayerConfig,
    LengthMismatchError,
    classify_block,
    decide,
)


@dataclass(frozen=True)
class TxBlock1D:
    s_odd: float
    s_even: float


@dataclass(frozen=True)
class TxBlock2D:
    s_odd: complex
    s_even: complex


@dataclass(frozen=True)
class DecidedBlock1D:
    x_odd_hat: BpskSymbol
    x_even_hat: BpskSymbol
    z_hat: BpskSymbol
    z_soft: float
    x_odd_soft: float
    x_even_soft: float

    @property
    def symbols(self) -> Tuple[int, int, int]:
        return int(self.x_odd_hat), int(self.x_even_hat), int(self.z_hat)


@dataclass(frozen=True)
class DecidedBlock2D:
    x_odd_hat: BpskSymbol
    x_even_hat: BpskSymbol
    z_hat: BpskSymbol
    x_odd_q_hat: BpskSymbol
    x_even_q_hat: BpskSymbol
    z_q_hat: BpskSymbol
    z_soft: complex
    x_odd_soft: complex
    x_even_soft: complex

    def in_phase(self) -> DecidedBlock1D:
        return DecidedBlock1D(
            self.x_odd_hat,
            self.x_even_hat,
            self.z_hat,
            self.z_soft.real,
            self.x_odd_soft.real,
            self.x_even_soft.real,
        )

    def quadrature(self) -> DecidedBlock1D:
        return DecidedBlock1D(
            self.x_odd_q_hat,
            self.x_even_q_hat,
            self.z_q_hat,
            self.z_soft.imag,
            self.x_odd_soft.imag,
            self.x_even_soft.imag,
        )


# ---------------------------------------------------------------------------
# Block-at-a-time
# ---------------------------------------------------------------------------


def modulate_block_1d(x_odd: int, x_even: int, z: int, cfg: LayerConfig) -> TxBlock1D:
    case = classify_block(x_odd, x_even, z, cfg.alpha, cfg.beta)
    return TxBlock1D(case.amp_odd, case.amp_even)


def demod_z(y_odd: float, y_even: float) -> Tuple[BpskSymbol, float]:
    z_soft = y_odd + y_even
    return decide(z_soft), z_soft


def demod_x(y: float, z_hat: int, beta: float) -> Tuple[BpskSymbol, float]:
    if beta <= 0:
        raise InvalidParameterError(f"beta must be > 0 (got {beta!r})")
    x_soft = y - int(z_hat) * beta
    return decide(x_soft), x_soft


def demod_block_1d(y_odd: float, y_even: float, cfg: LayerConfig) -> DecidedBlock1D:
    z_hat, z_soft = demod_z(y_odd, y_even)
    x_odd_hat, x_odd_soft = demod_x(y_odd, z_hat, cfg.beta)
    x_even_hat, x_even_soft = demod_x(y_even, z_hat, cfg.beta)
    return DecidedBlock1D(x_odd_hat, x_even_hat, z_hat, z_soft, x_odd_soft, x_even_soft)


def modulate_block_2d(
    x_odd: int,
    x_even: int,
    z: int,
    x_odd_q: int,
    x_even_q: int,
    z_q: int,
    cfg: LayerConfig,
) -> TxBlock2D:
    in_phase = modulate_block_1d(x_odd, x_even, z, cfg)
    quad = modulate_block_1d(x_odd_q, x_even_q, z_q, cfg.quadrature_layer())
    return TxBlock2D(
        complex(in_phase.s_odd, quad.s_odd),
        complex(in_phase.s_even, quad.s_even),
    )


def demod_block_2d(y_odd: complex, y_even: complex, cfg: LayerConfig) -> DecidedBlock2D:
    y_odd = complex(y_odd)
    y_even = complex(y_even)
    z_soft = y_odd + y_even
    z_hat = decide(z_soft.real)
    z_q_hat = decide(z_soft.imag)
    # z_q rides on the imaginary axis, so its beta_q term is subtracted there.
    offset = complex(int(z_hat) * cfg.beta, int(z_q_hat) * cfg.beta_q)
    x_odd_soft = y_odd - offset
    x_even_soft = y_even - offset
    return DecidedBlock2D(
        x_odd_hat=decide(x_odd_soft.real),
        x_even_hat=decide(x_even_soft.real),
        z_hat=z_hat,
        x_odd_q_hat=decide(x_odd_soft.imag),
        x_even_q_hat=decide(x_even_soft.imag),
        z_q_hat=z_q_hat,
        z_soft=z_soft,
        x_odd_soft=x_odd_soft,
        x_even_soft=x_even_soft,
    )


# ---------------------------------------------------------------------------
# Streams
# ---------------------------------------------------------------------------


def _symbol_array(values: Sequence[int], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int8).reshape(-1)
    if arr.size and not np.all(np.abs(arr) == 1):
        raise InvalidParameterError(f"{name} must contain only +1/-1 symbols")
    return arr


def split_stream_blocks(samples: Sequence) -> Tuple[np.ndarray, np.ndarray]:
    """(odd-period, even-period) views of a stream framed into two-sample blocks."""
    arr = np.asarray(samples)
    if arr.shape[0] % 2:
        raise LengthMismatchError(
            f"stream length {arr.shape[0]} is odd; blocks need two channel uses"
        )
    return arr[0::2], arr[1::2]


def layer_amplitudes(
    x_odd: np.ndarray,
    x_even: np.ndarray,
    z: np.ndarray,
    alpha: float,
    beta: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised case-table lookup: transmit amplitudes for arrays of symbol triples."""
    split = x_odd != x_even
    aligned = ~split & (x_odd == z)
    w1 = np.where(split | aligned, alpha, 0.0)
    w2 = np.where(split, beta, np.where(aligned, 0.0, beta / 2.0))
    return w1 * x_odd + w2 * z, w1 * x_even + w2 * z


def modulate_stream_1d(x: Sequence[int], z: Sequence[int], cfg: LayerConfig) -> np.ndarray:
    x_arr = _symbol_array(x, "x")
    z_arr = _symbol_array(z, "z")
    if x_arr.size != 2 * z_arr.size:
        raise LengthMismatchError(
            f"x must hold exactly two symbols per z symbol (len(x)={x_arr.size}, len(z)={z_arr.size})"
        )
    out = np.empty(x_arr.size, dtype=float)
    out[0::2], out[1::2] = layer_amplitudes(
        x_arr[0::2], x_arr[1::2], z_arr, cfg.alpha, cfg.beta
    )
    return out


def modulate_stream_2d(
    x: Sequence[int],
    z: Sequence[int],
    x_q: Sequence[int],
    z_q: Sequence[int],
    cfg: LayerConfig,
) -> np.ndarray:
    real = modulate_stream_1d(x, z, cfg)
    imag = modulate_stream_1d(x_q, z_q, cfg.quadrature_layer())
    if real.size != imag.size:
        raise LengthMismatchError("in-phase and quadrature streams differ in length")
    return real + 1j * imag


def _hard(soft: np.ndarray) -> np.ndarray:
    return np.where(soft < 0, -1, 1).astype(np.int8)


def demod_stream_1d(
    y: Sequence[float],
    beta: float,
    z_known: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Decide (x, z) for a real received stream. With z_known the x decisions use
    the true z instead of z_hat (genie-aided diagnostic); z decisions are unchanged.
    """
    y_odd, y_even = split_stream_blocks(np.asarray(y, dtype=float))
    z_hat = _hard(y_odd + y_even)
    z_ref = z_hat if z_known is None else _symbol_array(z_known, "z_known")
    x_hat = np.empty(2 * z_hat.size, dtype=np.int8)
    x_hat[0::2] = _hard(y_odd - z_ref * beta)
    x_hat[1::2] = _hard(y_even - z_ref * beta)
    return x_hat, z_hat


def demod_stream_2d(
    y: Sequence[complex],
    cfg: LayerConfig,
    z_known: Optional[Sequence[int]] = None,
    z_q_known: Optional[Sequence[int]] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    y_arr = np.asarray(y, dtype=complex)
    x_hat, z_hat = demod_stream_1d(y_arr.real, cfg.beta, z_known)
    x_q_hat, z_q_hat = demod_stream_1d(y_arr.imag, cfg.beta_q, z_q_known)
    return x_hat, z_hat, x_q_hat, z_q_hat
