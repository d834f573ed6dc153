"""
Equivalent-SNR algebra, average-power accounting and Monte Carlo BER for the
layered BPSK modem.

The SNR expressions weight the three weight branches by their case-table
probabilities (split rows 1-4, aligned rows 5-6, opposed rows 7-8) as
enumerated in layered_bpsk_model.case_class_probabilities.

BER runs are cut into fixed-size chunks of blocks; chunk k draws its symbols
and noise from stream_id = spec.stream_id + k, so the counts (and the CSV
built from them) do not depend on how many workers run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import erfc

from awgn_channel import (
    PER_DIMENSION,
    SYMBOLS,
    NoiseSpec,
    awgn_complex,
    awgn_real,
    complex_noise_power,
    make_generator,
)
from layered_bpsk_model import (
    ALIGNED,
    CASE_TRIPLES,
    OPPOSED,
    SPLIT,
    InvalidParameterError,
    LayerConfig,
    all_cases,
    case_class_probabilities,
)
from layered_bpsk_modem import demod_stream_1d, demod_stream_2d, modulate_stream_1d, modulate_stream_2d

MODE_1D = "1d"
MODE_2D = "2d"
BER_MODES = (MODE_1D, MODE_2D)

BER_MIN_BLOCKS = 1_000
BER_CHUNK_BLOCKS = 1 << 16

_TRIPLES = np.array(CASE_TRIPLES, dtype=np.int8)


@dataclass(frozen=True)
class SnrReport:
    rho_x: float
    rho_z: float
    rho_bpsk: float
    gap: float


@dataclass(frozen=True)
class BerReport:
    ber_x: float
    ber_z: float
    ber_x_genie: float
    n_blocks: int
    mode: str


# ---------------------------------------------------------------------------
# SNR algebra
# ---------------------------------------------------------------------------


def rho_x(cfg: LayerConfig) -> float:
    p = case_class_probabilities(cfg.alpha, cfg.beta)
    a, b = cfg.alpha, cfg.beta
    return (p[SPLIT] * a * a + p[ALIGNED] * (a - b) ** 2 + p[OPPOSED] * (b / 2.0) ** 2) / cfg.sigma2


def rho_z(cfg: LayerConfig) -> float:
    p = case_class_probabilities(cfg.alpha, cfg.beta)
    a, b = cfg.alpha, cfg.beta
    # y_odd + y_even carries two noise samples
    return (p[SPLIT] * (2.0 * b) ** 2 + p[ALIGNED] * (2.0 * a) ** 2 + p[OPPOSED] * b * b) / (2.0 * cfg.sigma2)


def average_symbol_power(cfg: LayerConfig) -> float:
    """Mean transmit power per channel use over the eight equiprobable blocks."""
    cases = all_cases(cfg.alpha, cfg.beta)
    energy = math.fsum(c.amp_odd ** 2 + c.amp_even ** 2 for c in cases)
    return energy / (2 * len(cases))


def rho_bpsk(cfg: LayerConfig) -> float:
    return average_symbol_power(cfg) / cfg.sigma2


def power_sharing_gap(cfg: LayerConfig) -> float:
    """rho_x + rho_z / 2 - rho_bpsk, which reduces to ((alpha - beta)^2 / 4 + beta^2 / 16) / sigma2."""
    return rho_x(cfg) + rho_z(cfg) / 2.0 - rho_bpsk(cfg)


def snr_report(cfg: LayerConfig) -> SnrReport:
    return SnrReport(rho_x(cfg), rho_z(cfg), rho_bpsk(cfg), power_sharing_gap(cfg))


# ---------------------------------------------------------------------------
# BER
# ---------------------------------------------------------------------------


def q_function(x):
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


def ber_z_semianalytic(alpha: float, beta: float, variance: float) -> float:
    """z error probability: a Gaussian tail per weight branch of y_odd + y_even (means 2beta, 2alpha, beta)."""
    if variance == 0:
        return 0.0
    if not (variance > 0):
        raise InvalidParameterError(f"variance must be >= 0 (got {variance!r})")
    p = case_class_probabilities(alpha, beta)
    scale = math.sqrt(2.0 * variance)
    return float(
        p[SPLIT] * q_function(2.0 * beta / scale)
        + p[ALIGNED] * q_function(2.0 * alpha / scale)
        + p[OPPOSED] * q_function(beta / scale)
    )


def _draw_blocks(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """n equiprobable case-table blocks as (x stream, z stream)."""
    triples = _TRIPLES[rng.integers(0, len(CASE_TRIPLES), size=n)]
    x = np.empty(2 * n, dtype=np.int8)
    x[0::2] = triples[:, 0]
    x[1::2] = triples[:, 1]
    return x, triples[:, 2].copy()


def _ber_chunk(task: Tuple[LayerConfig, str, int, NoiseSpec]) -> Tuple[int, int, int, int, int]:
    """(x errors, z errors, genie x errors, x bits, z bits) for one chunk."""
    cfg, mode, n, spec = task
    rng = make_generator(spec.seed, spec.stream_id, SYMBOLS)
    x, z = _draw_blocks(rng, n)
    if mode == MODE_1D:
        y = awgn_real(modulate_stream_1d(x, z, cfg), spec)
        x_hat, z_hat = demod_stream_1d(y, cfg.beta)
        x_genie, _ = demod_stream_1d(y, cfg.beta, z_known=z)
        return (
            int(np.count_nonzero(x_hat != x)),
            int(np.count_nonzero(z_hat != z)),
            int(np.count_nonzero(x_genie != x)),
            x.size,
            z.size,
        )

    x_q, z_q = _draw_blocks(rng, n)
    s = modulate_stream_2d(x, z, x_q, z_q, cfg)
    y = awgn_complex(s, NoiseSpec(complex_noise_power(spec.sigma2, PER_DIMENSION), spec.seed, spec.stream_id))
    x_hat, z_hat, x_q_hat, z_q_hat = demod_stream_2d(y, cfg)
    x_genie, _, x_q_genie, _ = demod_stream_2d(y, cfg, z_known=z, z_q_known=z_q)
    return (
        int(np.count_nonzero(x_hat != x) + np.count_nonzero(x_q_hat != x_q)),
        int(np.count_nonzero(z_hat != z) + np.count_nonzero(z_q_hat != z_q)),
        int(np.count_nonzero(x_genie != x) + np.count_nonzero(x_q_genie != x_q)),
        2 * x.size,
        2 * z.size,
    )


def ber_monte_carlo(
    cfg: LayerConfig,
    mode: str,
    n_blocks: int,
    spec: NoiseSpec,
    workers: int = 1,
) -> BerReport:
    """
    Simulate n_blocks random blocks through modulate -> AWGN -> demodulate.

    spec.sigma2 is the noise variance on each real dimension (cfg.sigma2 is not
    used here); in 2D mode both axes carry it. Genie x BER feeds the true z to
    the x demodulator.
    """
    mode = mode.lower()
    if mode not in BER_MODES:
        raise InvalidParameterError(f"mode must be one of {', '.join(BER_MODES)} (got {mode!r})")
    if n_blocks < BER_MIN_BLOCKS:
        raise InvalidParameterError(f"n_blocks must be >= {BER_MIN_BLOCKS} (got {n_blocks})")

    tasks = []
    remaining = n_blocks
    k = 0
    while remaining:
        n = min(remaining, BER_CHUNK_BLOCKS)
        tasks.append((cfg, mode, n, spec.with_stream(spec.stream_id + k)))
        remaining -= n
        k += 1

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_ber_chunk, tasks))
    else:
        counts = [_ber_chunk(t) for t in tasks]

    x_err, z_err, genie_err, x_bits, z_bits = (sum(col) for col in zip(*counts))
    return BerReport(
        ber_x=x_err / x_bits,
        ber_z=z_err / z_bits,
        ber_x_genie=genie_err / x_bits,
        n_blocks=n_blocks,
        mode=mode,
    )
