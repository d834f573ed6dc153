"""
Achievable-rate engine.

Every rate here is "output differential entropy minus noise entropy" for a
Gaussian mixture. 1D mixtures are integrated with QUADPACK's adaptive
Gauss-Kronrod panels (scipy.integrate.quad) over the effective support
[min(means) - r*sigma, max(means) + r*sigma]; stretches farther than r*sigma
from every mean are skipped because the density there is below
exp(-r^2 / 2). Complex (2D) constellations use product Gauss-Hermite
quadrature over the noise. A Monte Carlo estimator is kept as an
independent oracle for the quadrature.

Integration runs in units of the noise standard deviation, so the log2(sigma)
terms of mixture and noise entropy cancel exactly instead of numerically.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.integrate import quad
from scipy.special import logsumexp, ndtri
from scipy.stats import entropy as discrete_entropy

from awgn_channel import MIXTURE, NoiseSpec, make_generator
from layered_bpsk_model import InvalidParameterError, LayerConfig

LN2 = math.log(2.0)
HALF_LOG2_2PIE = 0.5 * math.log2(2.0 * math.pi * math.e)

MC_MIN_SAMPLES = 10_000
MC_CHUNK = 1_000_000

# x carries 1 bit per use, z 1 bit per two uses
RATE_1D_MAX = 1.5


class QuadratureError(RuntimeError):
    """Adaptive quadrature exhausted its subdivisions before reaching tolerance."""


class UndefinedRateError(ValueError):
    """Eb/N0 requested for a zero rate."""


@dataclass(frozen=True)
class GaussianMixture1D:
    """Equal-variance Gaussian mixture: sum_i w_i N(mean_i, variance)."""

    means: Tuple[float, ...]
    weights: Tuple[float, ...]
    variance: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.means or len(self.means) != len(self.weights):
            raise InvalidParameterError("mixture needs one weight per mean (and at least one mean)")
        if not all(math.isfinite(m) for m in self.means):
            raise InvalidParameterError("mixture means must be finite")
        if not all(w > 0 for w in self.weights):
            raise InvalidParameterError("mixture weights must be > 0")
        if abs(math.fsum(self.weights) - 1.0) > 1e-9:
            raise InvalidParameterError(f"mixture weights must sum to 1 (got {math.fsum(self.weights)!r})")
        if not (math.isfinite(self.variance) and self.variance > 0):
            raise InvalidParameterError(f"mixture variance must be > 0 (got {self.variance!r})")

    @classmethod
    def symmetric_pair(cls, mean: float, variance: float) -> "GaussianMixture1D":
        """Equal-weight components at +mean and -mean."""
        return cls((mean, -mean), (0.5, 0.5), variance)

    @property
    def second_moment(self) -> float:
        return math.fsum(w * m * m for w, m in zip(self.weights, self.means)) + self.variance

    def log_density(self, y: np.ndarray) -> np.ndarray:
        """Natural-log density at each y."""
        y = np.asarray(y, dtype=float)
        means = np.asarray(self.means)
        expo = np.log(self.weights) - (y[..., None] - means) ** 2 / (2.0 * self.variance)
        return logsumexp(expo, axis=-1) - 0.5 * math.log(2.0 * math.pi * self.variance)


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-10
    range_sigmas: float = 10.0
    max_subdivisions: int = 200
    hermite_order: int = 64

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise InvalidParameterError("quadrature tolerances must be > 0")
        if not (self.range_sigmas >= 8):
            raise InvalidParameterError(f"range_sigmas must be >= 8 (got {self.range_sigmas!r})")
        if self.max_subdivisions < 1:
            raise InvalidParameterError("max_subdivisions must be >= 1")
        if self.hermite_order < 2:
            raise InvalidParameterError("hermite_order must be >= 2")


@dataclass(frozen=True)
class RatePoint:
    sigma2: float
    rate_bits: float
    avg_power: float
    ebn0_db: Optional[float]


# ---------------------------------------------------------------------------
# Entropies
# ---------------------------------------------------------------------------


def gaussian_entropy_bits(variance: float) -> float:
    """log2(sqrt(2 pi e variance))."""
    return HALF_LOG2_2PIE + 0.5 * math.log2(variance)


def _support_panels(means: Sequence[float], reach: float) -> List[Tuple[float, float, List[float]]]:
    """Merged [m - reach, m + reach] intervals, each with the means inside it."""
    panels: List[Tuple[float, float, List[float]]] = []
    for m in sorted(set(means)):
        lo, hi = m - reach, m + reach
        if panels and lo <= panels[-1][1]:
            a, _, inside = panels[-1]
            panels[-1] = (a, hi, inside + [m])
        else:
            panels.append((lo, hi, [m]))
    return panels


def standardized_entropy(gm: GaussianMixture1D, qs: QuadratureSettings) -> Tuple[float, float]:
    """
    Entropy in bits of the mixture rescaled to unit component variance, with
    QUADPACK's accumulated error estimate. H(gm) = this + log2(sigma).
    """
    sigma = math.sqrt(gm.variance)
    means = np.asarray(gm.means) / sigma
    log_w = np.log(gm.weights)
    log_norm = 0.5 * math.log(2.0 * math.pi)

    def integrand(u: float) -> float:
        expo = log_w - 0.5 * (u - means) ** 2
        top = expo.max()
        lp = top + math.log(np.exp(expo - top).sum()) - log_norm
        return -math.exp(lp) * lp

    panels = _support_panels(means.tolist(), qs.range_sigmas)
    panel_tol = qs.abs_tol / len(panels)
    total = 0.0
    total_err = 0.0
    for a, b, inside in panels:
        points = [p for p in inside if a < p < b] or None
        result = quad(
            integrand,
            a,
            b,
            epsabs=panel_tol * LN2,
            epsrel=qs.rel_tol,
            limit=qs.max_subdivisions,
            points=points,
            full_output=1,
        )
        if len(result) > 3:
            raise QuadratureError(
                f"mixture entropy did not converge on [{a:.6g}, {b:.6g}] "
                f"(max_subdivisions={qs.max_subdivisions}): {result[3]}"
            )
        total += result[0]
        total_err += result[1]
    h, err = total / LN2, total_err / LN2
    _check_entropy_envelope(gm, h, err, qs)
    return h, err


def _check_entropy_envelope(gm: GaussianMixture1D, h_std: float, err: float, qs: QuadratureSettings) -> None:
    """
    A mixture is at least as spread as one component and at most as spread as
    the Gaussian of its second moment; both bounds in standardized units.
    """
    slack = err + qs.abs_tol
    lower = HALF_LOG2_2PIE
    upper = HALF_LOG2_2PIE + 0.5 * math.log2(gm.second_moment / gm.variance)
    if not (lower - slack <= h_std <= upper + slack):
        raise QuadratureError(
            f"mixture entropy {h_std:.12g} outside [{lower:.12g}, {upper:.12g}] "
            f"by more than {slack:.3e} (means={gm.means}, variance={gm.variance:.6g})"
        )


def mixture_entropy(gm: GaussianMixture1D, qs: QuadratureSettings) -> float:
    h_std, _ = standardized_entropy(gm, qs)
    return h_std + 0.5 * math.log2(gm.variance)


def _strata(rng: np.random.Generator, n: int, *, shuffle: bool) -> np.ndarray:
    """One uniform draw inside each of n equal strata of (0, 1)."""
    order = rng.permutation(n) if shuffle else np.arange(n)
    u = (order + rng.random(n)) / n
    return np.clip(u, np.finfo(float).tiny, np.nextafter(1.0, 0.0))


def mixture_entropy_mc(gm: GaussianMixture1D, n_samples: int, spec: NoiseSpec) -> Tuple[float, float]:
    """
    Sample-mean estimate of E{-log2 p(Y)} and its standard error.

    Y is a mixture mean plus N(0, spec.sigma2), which must be the mixture's
    component variance. Component labels and noise are drawn as a Latin
    hypercube (each of the n equal-probability strata gets one sample per
    coordinate), so the reported i.i.d. standard error is an upper bound on
    the actual spread.
    """
    if n_samples < MC_MIN_SAMPLES:
        raise InvalidParameterError(f"n_samples must be >= {MC_MIN_SAMPLES} (got {n_samples})")
    if not math.isclose(spec.sigma2, gm.variance, rel_tol=1e-12):
        raise InvalidParameterError(
            f"noise variance {spec.sigma2!r} does not match the mixture's component variance {gm.variance!r}"
        )
    rng = make_generator(spec.seed, spec.stream_id, MIXTURE)
    means = np.asarray(gm.means)
    cum_w = np.cumsum(gm.weights)
    sigma = math.sqrt(spec.sigma2)

    count = 0
    mean = 0.0
    m2 = 0.0
    remaining = n_samples
    while remaining:
        n = min(remaining, MC_CHUNK)
        comp = np.searchsorted(cum_w, _strata(rng, n, shuffle=True), side="right")
        y = means[np.minimum(comp, means.size - 1)] + sigma * ndtri(_strata(rng, n, shuffle=False))
        h = -gm.log_density(y) / LN2
        chunk_mean = float(h.mean())
        chunk_m2 = float(((h - chunk_mean) ** 2).sum())
        delta = chunk_mean - mean
        total = count + n
        mean += delta * n / total
        m2 += chunk_m2 + delta * delta * count * n / total
        count = total
        remaining -= n
    std_error = math.sqrt(m2 / (count - 1) / count)
    return mean, std_error


# ---------------------------------------------------------------------------
# Layered BPSK rates
# ---------------------------------------------------------------------------


def zeta_mixtures(cfg: LayerConfig) -> List[GaussianMixture1D]:
    """x-demodulator input after removing z_hat * beta; one mixture per case row pair."""
    a, b, v = cfg.alpha, cfg.beta, cfg.sigma2
    return [
        GaussianMixture1D.symmetric_pair(a, v),
        GaussianMixture1D.symmetric_pair(a, v),
        GaussianMixture1D.symmetric_pair(a - b, v),
        GaussianMixture1D.symmetric_pair(b / 2.0, v),
    ]


def xi_mixtures(cfg: LayerConfig) -> List[GaussianMixture1D]:
    """z-demodulator statistic y_odd + y_even: two noise samples, so variance 2 sigma2."""
    a, b, v = cfg.alpha, cfg.beta, 2.0 * cfg.sigma2
    return [
        GaussianMixture1D.symmetric_pair(2.0 * b, v),
        GaussianMixture1D.symmetric_pair(2.0 * b, v),
        GaussianMixture1D.symmetric_pair(2.0 * a, v),
        GaussianMixture1D.symmetric_pair(b, v),
    ]


def _average_excess_entropy(mixtures: Sequence[GaussianMixture1D], qs: QuadratureSettings) -> Tuple[float, float]:
    """(1/n) sum H(mixture) - H(noise), each identical mixture integrated once."""
    cache = {}
    values = []
    errors = []
    for gm in mixtures:
        if gm not in cache:
            cache[gm] = standardized_entropy(gm, qs)
        h, err = cache[gm]
        values.append(h)
        errors.append(err)
    n = len(mixtures)
    return math.fsum(values) / n - HALF_LOG2_2PIE, math.fsum(errors) / n


def _clamp_rate(value: float, err: float, qs: QuadratureSettings, label: str) -> float:
    if value >= 0:
        return value
    bound = err + qs.abs_tol
    if -value > bound:
        raise QuadratureError(f"{label} = {value:.3e} is negative beyond quadrature tolerance {bound:.3e}")
    print(f"⚠️  {label} = {value:.3e} clamped to 0 (quadrature round-off)", file=sys.stderr)
    return 0.0


def mi_x_given_z(cfg: LayerConfig, qs: QuadratureSettings) -> float:
    value, err = _average_excess_entropy(zeta_mixtures(cfg), qs)
    return _clamp_rate(value, err, qs, "I(X;Y|Z)")


def mi_z(cfg: LayerConfig, qs: QuadratureSettings) -> float:
    value, err = _average_excess_entropy(xi_mixtures(cfg), qs)
    # one z symbol per two channel uses
    return 0.5 * _clamp_rate(value, err, qs, "I(Z;Y)")


def rate_1d(cfg: LayerConfig, qs: QuadratureSettings) -> float:
    """Bits per channel use, capped at the 1.5 bits the two layers carry."""
    return min(mi_x_given_z(cfg, qs) + mi_z(cfg, qs), RATE_1D_MAX)


def rate_2d(cfg: LayerConfig, qs: QuadratureSettings) -> float:
    r1 = rate_1d(cfg, qs)
    if (cfg.alpha_q, cfg.beta_q) == (cfg.alpha, cfg.beta):
        return 2.0 * r1
    return r1 + rate_1d(cfg.quadrature_layer(), qs)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def _unit_power(points: np.ndarray) -> np.ndarray:
    return points / math.sqrt(float(np.mean(np.abs(points) ** 2)))


def baseline_constellation(name: str) -> np.ndarray:
    """Unit-average-power BPSK, QPSK, 8PSK or 16QAM points."""
    key = name.lower()
    if key == "bpsk":
        return np.array([1.0, -1.0], dtype=complex)
    if key == "qpsk":
        return np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4)))
    if key == "8psk":
        return np.exp(2j * np.pi * np.arange(8) / 8)
    if key == "16qam":
        levels = np.array([-3.0, -1.0, 1.0, 3.0])
        return _unit_power((levels[:, None] + 1j * levels[None, :]).reshape(-1))
    raise InvalidParameterError(f"unknown baseline constellation {name!r}")


def _excess_entropy_2d(points: np.ndarray, probs: np.ndarray, sigma2: float, order: int) -> float:
    """
    H(Y) - H(N) in bits for Y = X + CN(0, sigma2), X on `points`.

    With n = sigma (t_k + j t_l) over Gauss-Hermite nodes,
    H(Y) - H(N) = -sum_i p_i E_n[log2 sum_j p_j exp(-(|x_i - x_j + n|^2 - |n|^2) / sigma2)];
    the |n|^2 term is integrated exactly by the rule.
    """
    t, w = hermgauss(order)
    sigma = math.sqrt(sigma2)
    noise = sigma * (t[:, None] + 1j * t[None, :]).reshape(-1)
    node_w = (w[:, None] * w[None, :]).reshape(-1) / math.pi
    diff = points[:, None] - points[None, :]  # [i, j]
    shifted = diff[:, :, None] + noise[None, None, :]  # [i, j, node]
    expo = np.log(probs)[None, :, None] - (np.abs(shifted) ** 2 - np.abs(noise) ** 2) / sigma2
    inner = logsumexp(expo, axis=1) / LN2  # [i, node]
    return float(-(probs[:, None] * inner * node_w[None, :]).sum())


def mixture_entropy_2d(points: Sequence[complex], sigma2: float, qs: QuadratureSettings, probabilities: Optional[Sequence[float]] = None) -> float:
    """Differential entropy (bits) of a circular complex Gaussian mixture with component power sigma2."""
    pts, probs = _constellation_arrays(points, probabilities)
    return _excess_entropy_2d(pts, probs, sigma2, qs.hermite_order) + math.log2(math.pi * math.e * sigma2)


def _constellation_arrays(points: Sequence[complex], probabilities: Optional[Sequence[float]]) -> Tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(points, dtype=complex).reshape(-1)
    if pts.size == 0:
        raise InvalidParameterError("constellation must have at least one point")
    if probabilities is None:
        probs = np.full(pts.size, 1.0 / pts.size)
    else:
        probs = np.asarray(probabilities, dtype=float).reshape(-1)
        if probs.size != pts.size or np.any(probs <= 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidParameterError("constellation probabilities must be positive, one per point, summing to 1")
    return pts, probs


def constellation_mi(
    points: Sequence[complex],
    sigma2: float,
    qs: QuadratureSettings,
    probabilities: Optional[Sequence[float]] = None,
) -> float:
    """
    I(X;Y) of a discrete-input AWGN channel. Real constellations see real noise
    of variance sigma2; complex ones see CN(0, sigma2) (sigma2 / 2 per axis).
    Never above H(X), log2(M) for M equiprobable points.
    """
    if not (sigma2 > 0):
        raise InvalidParameterError(f"sigma2 must be > 0 (got {sigma2!r})")
    pts, probs = _constellation_arrays(points, probabilities)
    input_bits = float(discrete_entropy(probs, base=2))
    if np.all(pts.imag == 0):
        gm = GaussianMixture1D(tuple(pts.real), tuple(probs), sigma2)
        h_std, err = standardized_entropy(gm, qs)
        value = _clamp_rate(h_std - HALF_LOG2_2PIE, err, qs, "I(X;Y)")
    else:
        value = _clamp_rate(_excess_entropy_2d(pts, probs, sigma2, qs.hermite_order), 0.0, qs, "I(X;Y)")
    return min(value, input_bits)


def gaussian_capacity(rho: float) -> float:
    if not (rho >= 0):
        raise InvalidParameterError(f"SNR must be >= 0 (got {rho!r})")
    return math.log1p(rho) / LN2


def ebn0_db(rate_bits: float, avg_power: float, sigma2: float) -> float:
    """10 log10(Eb / sigma2) with Eb = avg_power / rate_bits and sigma2 the one-sided density N0."""
    if rate_bits == 0:
        raise UndefinedRateError("Eb/N0 is undefined at zero rate")
    if not (rate_bits > 0 and avg_power > 0 and sigma2 > 0):
        raise InvalidParameterError(
            f"rate, power and sigma2 must be > 0 (got {rate_bits!r}, {avg_power!r}, {sigma2!r})"
        )
    return 10.0 * math.log10(avg_power / rate_bits / sigma2)


def rate_point(sigma2: float, rate_bits: float, avg_power: float, n0: Optional[float] = None) -> RatePoint:
    """
    RatePoint with ebn0_db left as None when the rate is zero.

    n0 is the one-sided noise density used for Eb/N0 (twice the per-axis
    variance); it defaults to sigma2, the complex noise power.
    """
    density = sigma2 if n0 is None else n0
    ebn0 = ebn0_db(rate_bits, avg_power, density) if rate_bits > 0 else None
    return RatePoint(sigma2, rate_bits, avg_power, ebn0)
