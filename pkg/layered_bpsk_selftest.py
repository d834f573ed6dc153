"""
Self-test checks behind `layered_bpsk_experiments.py selftest`.

Each check returns CheckResult objects tagged with a failure-category bit;
run_selftest ORs the bits of failed checks into the process exit code:

    1  noiseless round-trip (8 one-dimensional, 64 two-dimensional blocks)
    2  SNR identities
    4  closed-form entropy and rate limits
    8  quadrature vs Monte Carlo entropy
    16 simulated z BER vs the Q-function expression

Checks take their building blocks as arguments so a broken modulator or
entropy routine can be swapped in to prove the check notices.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

from awgn_channel import NoiseSpec, awgn_complex, awgn_real, make_generator
from info_rates import (
    GaussianMixture1D,
    QuadratureSettings,
    gaussian_capacity,
    gaussian_entropy_bits,
    mixture_entropy,
    mixture_entropy_mc,
    rate_1d,
    rate_2d,
    xi_mixtures,
    zeta_mixtures,
)
from layered_bpsk_model import CASE_TRIPLES, LayerConfig
from layered_bpsk_modem import demod_block_1d, demod_block_2d, modulate_block_1d, modulate_block_2d
from link_metrics import (
    MODE_1D,
    average_symbol_power,
    ber_monte_carlo,
    ber_z_semianalytic,
    power_sharing_gap,
    rho_bpsk,
    rho_x,
    rho_z,
)

ROUND_TRIP = 1
SNR_IDENTITIES = 2
CLOSED_FORM = 4
ORACLE = 8
BER_ORACLE = 16


@dataclass(frozen=True)
class CheckResult:
    name: str
    category: int
    passed: bool
    detail: str = ""


def _result(name: str, category: int, passed: bool, detail: str = "") -> CheckResult:
    return CheckResult(name, category, bool(passed), detail)


def check_round_trip(
    cfg: LayerConfig,
    modulate_1d: Callable = modulate_block_1d,
    modulate_2d: Callable = modulate_block_2d,
) -> List[CheckResult]:
    noiseless = NoiseSpec(0.0)
    failures_1d = []
    for triple in CASE_TRIPLES:
        block = modulate_1d(*triple, cfg)
        y = awgn_real([block.s_odd, block.s_even], noiseless)
        got = demod_block_1d(y[0], y[1], cfg).symbols
        if got != triple:
            failures_1d.append(f"{triple} -> {got}")

    failures_2d = []
    for i_triple, q_triple in itertools.product(CASE_TRIPLES, repeat=2):
        block = modulate_2d(*i_triple, *q_triple, cfg)
        y = awgn_complex([block.s_odd, block.s_even], noiseless)
        decided = demod_block_2d(y[0], y[1], cfg)
        got = (decided.in_phase().symbols, decided.quadrature().symbols)
        if got != (i_triple, q_triple):
            failures_2d.append(f"{i_triple}/{q_triple} -> {got}")

    return [
        _result("round-trip 1D (8 blocks)", ROUND_TRIP, not failures_1d, "; ".join(failures_1d[:3])),
        _result("round-trip 2D (64 blocks)", ROUND_TRIP, not failures_2d, "; ".join(failures_2d[:3])),
    ]


def check_snr_identities(n_configs: int = 1000, seed: int = 0) -> List[CheckResult]:
    rng = make_generator(seed, 0)
    worst_gap = 0.0
    worst_power = 0.0
    positive = True
    scale_ok = True
    for _ in range(n_configs):
        beta = float(rng.uniform(0.01, 2.0))
        alpha = beta * float(rng.uniform(1.001, 10.0))
        sigma2 = float(10 ** rng.uniform(-3, 3))
        cfg = LayerConfig.symmetric(alpha, beta, sigma2)
        closed = ((alpha - beta) ** 2 / 4 + beta * beta / 16) / sigma2
        gap = power_sharing_gap(cfg)
        positive = positive and gap > 0
        worst_gap = max(worst_gap, abs(gap - closed) / closed)
        worst_power = max(worst_power, abs(average_symbol_power(cfg) - sigma2 * rho_bpsk(cfg)) / average_symbol_power(cfg))

        c = float(rng.uniform(0.1, 10.0))
        scaled = LayerConfig.symmetric(c * alpha, c * beta, c * c * sigma2)
        for fn in (rho_x, rho_z, rho_bpsk):
            if not math.isclose(fn(cfg), fn(scaled), rel_tol=1e-12):
                scale_ok = False

    ref = LayerConfig.symmetric(1.0, 0.5, 1.0)
    ref_values = (rho_x(ref), rho_z(ref), rho_bpsk(ref), power_sharing_gap(ref))
    ref_ok = all(math.isclose(v, e, rel_tol=1e-12) for v, e in zip(ref_values, (0.578125, 0.78125, 0.890625, 0.078125)))
    return [
        _result("power-sharing gap closed form", SNR_IDENTITIES, positive and worst_gap < 1e-12, f"worst rel err {worst_gap:.2e}"),
        _result("average power = sigma2 * rho_bpsk", SNR_IDENTITIES, worst_power < 1e-12, f"worst rel err {worst_power:.2e}"),
        _result("SNR scale invariance", SNR_IDENTITIES, scale_ok),
        _result("SNR reference values (1, 0.5, 1)", SNR_IDENTITIES, ref_ok, str(ref_values)),
    ]


def check_closed_forms(
    qs: QuadratureSettings,
    ratios: Sequence[float] = (2.0, 3.0, 4.0),
    entropy: Callable = mixture_entropy,
) -> List[CheckResult]:
    results = []
    far = GaussianMixture1D.symmetric_pair(100.0, 1.0)
    h_far = entropy(far, qs)
    results.append(
        _result("separated pair = Gaussian + 1 bit", CLOSED_FORM, abs(h_far - 3.047095585180641) < 1e-6, f"{h_far:.9f}")
    )
    single = GaussianMixture1D((0.3,), (1.0,), 2.5)
    h_single = entropy(single, qs)
    results.append(
        _result(
            "single component = Gaussian entropy",
            CLOSED_FORM,
            abs(h_single - gaussian_entropy_bits(2.5)) < 1e-9,
            f"{h_single:.12f}",
        )
    )

    configs = [LayerConfig.symmetric(1.0, 0.5, 1e-6)] + [LayerConfig.from_ratio(r, 1e-6) for r in ratios]
    worst_r1 = max(abs(rate_1d(c, qs) - 1.5) for c in configs)
    results.append(_result("rate_1d saturates at 1.5", CLOSED_FORM, worst_r1 < 1e-3, f"worst |R1 - 1.5| {worst_r1:.2e}"))
    worst_r2 = max(abs(rate_2d(c, qs) - 3.0) for c in configs)
    results.append(_result("rate_2d saturates at 3", CLOSED_FORM, worst_r2 < 2e-3, f"worst |R2 - 3| {worst_r2:.2e}"))

    doubling = max(abs(rate_2d(c.with_sigma2(s), qs) - 2 * rate_1d(c.with_sigma2(s), qs)) for c in configs for s in (0.1, 1.0, 10.0))
    results.append(_result("rate_2d = 2 rate_1d", CLOSED_FORM, doubling <= 1e-12, f"worst {doubling:.2e}"))

    rho = 1e-3
    limit_db = 10 * math.log10(rho / gaussian_capacity(rho))
    results.append(
        _result("Gaussian Eb/N0 limit near -1.59 dB", CLOSED_FORM, abs(limit_db + 1.59) < 0.05, f"{limit_db:.4f} dB")
    )
    return results


def oracle_mixtures(cfg: LayerConfig) -> List[GaussianMixture1D]:
    """Distinct zeta and xi mixtures of one configuration."""
    out: List[GaussianMixture1D] = []
    for gm in zeta_mixtures(cfg) + xi_mixtures(cfg):
        if gm not in out:
            out.append(gm)
    return out


def check_oracle_agreement(
    qs: QuadratureSettings,
    grid: Sequence[Tuple[float, float]],
    n_samples: int,
    seed: int,
    entropy: Callable = mixture_entropy,
    n_sigmas: float = 3.0,
) -> List[CheckResult]:
    """Quadrature entropy of every mixture on (ratio, sigma2) grid vs its Monte Carlo estimate."""
    worst = 0.0
    worst_label = ""
    stream = 0
    for ratio, sigma2 in grid:
        for gm in oracle_mixtures(LayerConfig.from_ratio(ratio, sigma2)):
            h_quad = entropy(gm, qs)
            h_mc, se = mixture_entropy_mc(gm, n_samples, NoiseSpec(gm.variance, seed, stream))
            stream += 1
            score = abs(h_quad - h_mc) / se
            if score > worst:
                worst = score
                worst_label = f"ratio={ratio:g} sigma2={sigma2:g} means={gm.means} var={gm.variance:g}"
    return [
        _result(
            f"quadrature vs Monte Carlo ({n_samples} samples)",
            ORACLE,
            worst < n_sigmas,
            f"worst {worst:.2f} standard errors ({worst_label})",
        )
    ]


def check_ber_oracle(
    cfg: LayerConfig,
    sigma2_grid: Sequence[float],
    n_blocks: int,
    seed: int,
    n_sigmas: float = 3.0,
) -> List[CheckResult]:
    worst = 0.0
    detail = ""
    for k, sigma2 in enumerate(sigma2_grid):
        report = ber_monte_carlo(cfg, MODE_1D, n_blocks, NoiseSpec(sigma2, seed, k << 32))
        theory = ber_z_semianalytic(cfg.alpha, cfg.beta, sigma2)
        se = math.sqrt(max(theory * (1 - theory), 1.0 / n_blocks) / n_blocks)
        score = abs(report.ber_z - theory) / se
        if score > worst:
            worst = score
            detail = f"sigma2={sigma2:g} simulated {report.ber_z:.6g} vs {theory:.6g}"
    return [_result(f"z BER vs Q-function ({n_blocks} blocks)", BER_ORACLE, worst < n_sigmas, f"worst {worst:.2f} se; {detail}")]


def run_selftest(
    qs: QuadratureSettings,
    *,
    seed: int,
    mc_samples: int,
    ber_blocks: int,
    ratios: Sequence[float] = (2.0, 3.0, 4.0),
    ber_sigma2_grid: Sequence[float] = (0.01, 0.04, 0.16, 0.64),
    quiet: bool = False,
) -> Tuple[List[CheckResult], int]:
    """Run every check; returns (results, failure bit mask)."""
    results: List[CheckResult] = []
    results += check_round_trip(LayerConfig.symmetric(1.0, 0.5, 1.0))
    for ratio in ratios:
        results += check_round_trip(LayerConfig.from_ratio(ratio, 1.0))
    results += check_snr_identities(seed=seed)
    results += check_closed_forms(qs, ratios)
    oracle_grid = [(r, s) for r in ratios[:2] for s in (0.1, 1.0)]
    results += check_oracle_agreement(qs, oracle_grid, mc_samples, seed)
    results += check_ber_oracle(LayerConfig.symmetric(1.0, 0.5, 1.0), ber_sigma2_grid, ber_blocks, seed)

    mask = 0
    for r in results:
        if not r.passed:
            mask |= r.category
        if not quiet or not r.passed:
            mark = "✅" if r.passed else "❌"
            print(f"{mark} {r.name}" + (f"  [{r.detail}]" if r.detail else ""), file=sys.stderr)
    return results, mask
