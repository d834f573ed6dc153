#!/usr/bin/env python3
"""
Layered BPSK experiment runner (CSV datasets + JSON run ledger).

Subcommands:
  fig1      achievable rate vs Eb/N0 for Gaussian input, BPSK, QPSK, 8PSK, 16QAM
  fig2      layered 1D/2D rates per alpha/beta ratio, with BPSK/QPSK/Gaussian baselines
  ber       Monte Carlo bit error rates of the layered modem
  rates     all rates and SNRs of one (alpha, beta, sigma2) point
  selftest  round-trip, SNR identity, entropy, oracle and BER checks

Settings come from --config (or $LAYERED_BPSK_CONFIG), then flags. CSVs go to
reports/<command>.csv unless --out is given (--out - prints to stdout and
skips the ledger). See experiment.example.conf.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from awgn_channel import NoiseSpec, dimension_variance, noise_density
from experiment_config import (
    ALL_SCHEMES,
    BASELINE_SCHEMES,
    CONFIG_KEYS,
    ExperimentConfig,
    config_path_from_env,
    option_type,
    parse_config_file,
    resolve_experiment_config,
)
from info_rates import (
    QuadratureError,
    QuadratureSettings,
    UndefinedRateError,
    baseline_constellation,
    constellation_mi,
    gaussian_capacity,
    mi_x_given_z,
    mi_z,
    rate_1d,
    rate_2d,
    rate_point,
)
from layered_bpsk_model import InvalidParameterError, LayerConfig
from layered_bpsk_selftest import run_selftest
from link_metrics import average_symbol_power, ber_monte_carlo, ber_z_semianalytic, snr_report
from sweep_output import (
    BER_COLUMNS,
    SWEEP_COLUMNS,
    BerRow,
    SweepRow,
    build_ledger,
    ledger_path_for,
    render_csv,
    write_ber_csv,
    write_ledger,
    write_sweep_csv,
)

ROOT = Path(__file__).resolve().parent

FIG1_SCHEMES = BASELINE_SCHEMES
FIG2_SCHEMES = ("layered1d", "layered2d", "bpsk", "qpsk", "gaussian")

EXIT_OK = 0
EXIT_ROWS_FAILED = 1

# One sweep grid point: (scheme, ratio or None for baselines, sigma2).
SweepTask = Tuple[str, Optional[float], float]


def _progress(msg: str, quiet: bool) -> None:
    if not quiet:
        print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Sweep points
# ---------------------------------------------------------------------------


def evaluate_sweep_point(task: SweepTask, qs: QuadratureSettings, noise_convention: str) -> SweepRow:
    """
    Rate, average power and Eb/N0 of one grid point.

    bpsk and layered1d see real noise of variance sigma2; qpsk, 8psk, 16qam and
    gaussian see complex noise of total power sigma2. layered2d puts
    dimension_variance(sigma2, noise_convention) on each axis and counts the
    complex symbol power (2 per channel use at unit power per dimension).

    Every row divides by the same N0: twice the noise variance on one real
    axis. So real-noise rows use 2 sigma2 and complex rows use sigma2.
    """
    scheme, ratio, sigma2 = task
    if scheme == "gaussian":
        point = rate_point(sigma2, gaussian_capacity(1.0 / sigma2), 1.0)
        alpha = beta = None
    elif scheme in BASELINE_SCHEMES:
        points = baseline_constellation(scheme)
        n0 = noise_density(sigma2) if np.all(points.imag == 0) else sigma2
        point = rate_point(sigma2, constellation_mi(points, sigma2, qs), 1.0, n0)
        alpha = beta = None
    elif scheme == "layered1d":
        cfg = LayerConfig.from_ratio(ratio, sigma2)
        point = rate_point(sigma2, rate_1d(cfg, qs), average_symbol_power(cfg), noise_density(sigma2))
        alpha, beta = cfg.alpha, cfg.beta
    elif scheme == "layered2d":
        cfg = LayerConfig.from_ratio(ratio, dimension_variance(sigma2, noise_convention))
        power = average_symbol_power(cfg) + average_symbol_power(cfg.quadrature_layer())
        point = rate_point(sigma2, rate_2d(cfg, qs), power, noise_density(cfg.sigma2))
        alpha, beta = cfg.alpha, cfg.beta
    else:
        raise InvalidParameterError(f"unknown scheme {scheme!r}")
    return SweepRow(scheme, alpha, beta, sigma2, point.rate_bits, point.avg_power, point.ebn0_db)


def _evaluate_task(args: Tuple[SweepTask, QuadratureSettings, str]) -> Tuple[SweepTask, Optional[SweepRow], Optional[str]]:
    task, qs, convention = args
    try:
        return task, evaluate_sweep_point(task, qs, convention), None
    except (QuadratureError, UndefinedRateError, InvalidParameterError) as exc:
        return task, None, f"{type(exc).__name__}: {exc}"


def sweep_tasks(schemes: Iterable[str], cfg: ExperimentConfig) -> List[SweepTask]:
    tasks: List[SweepTask] = []
    for scheme in schemes:
        ratios: Sequence[Optional[float]] = cfg.ratios if scheme.startswith("layered") else (None,)
        for ratio in ratios:
            for sigma2 in cfg.sigma2_grid:
                tasks.append((scheme, ratio, sigma2))
    return tasks


def run_sweep(tasks: List[SweepTask], cfg: ExperimentConfig, quiet: bool) -> Tuple[List[SweepRow], List[Dict[str, Any]]]:
    """Evaluate every task (in a process pool when workers > 1); failed points are logged and skipped."""
    qs = cfg.quad_settings()
    jobs = [(t, qs, cfg.noise_convention) for t in tasks]
    _progress(f"🚀 {len(tasks)} grid points on {cfg.workers} worker(s)", quiet)
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            outcomes = list(pool.map(_evaluate_task, jobs, chunksize=4))
    else:
        outcomes = [_evaluate_task(job) for job in jobs]

    rows: List[SweepRow] = []
    runs: List[Dict[str, Any]] = []
    for (scheme, ratio, sigma2), row, error in outcomes:
        entry: Dict[str, Any] = {"scheme": scheme, "ratio": ratio, "sigma2": sigma2}
        if row is None:
            print(f"⚠️  {scheme} ratio={ratio} sigma2={sigma2:.6g}: {error}", file=sys.stderr)
            entry.update(status="error", error=error)
        else:
            rows.append(row)
            entry.update(status="ok", rate_bits=row.rate_bits)
        runs.append(entry)
    return rows, runs


# ---------------------------------------------------------------------------
# Dataset shape check for fig2
# ---------------------------------------------------------------------------


def _row_ratio(row: SweepRow) -> float:
    return round(row.alpha / row.beta, 9)


def fig2_shape_report(rows: Sequence[SweepRow], margin: float = 1e-6) -> Dict[str, Any]:
    """
    (a) beats_bpsk: some layered1d point lies above the BPSK rate curve at the
        same Eb/N0 (BPSK interpolated, only inside its Eb/N0 range);
    (b) ordering_flips: between the smallest and largest ratio, layered1d rate
        is higher on some sigma2 and lower on another.
    """
    bpsk = sorted((r.ebn0_db, r.rate_bits) for r in rows if r.scheme == "bpsk" and r.ebn0_db is not None)
    layered = [r for r in rows if r.scheme == "layered1d"]

    best_gain = None
    best_point = None
    if len(bpsk) >= 2:
        e_grid = np.array([e for e, _ in bpsk])
        r_grid = np.array([r for _, r in bpsk])
        for row in layered:
            if row.ebn0_db is None or not (e_grid[0] <= row.ebn0_db <= e_grid[-1]):
                continue
            gain = row.rate_bits - float(np.interp(row.ebn0_db, e_grid, r_grid))
            if best_gain is None or gain > best_gain:
                best_gain = gain
                best_point = {"ratio": _row_ratio(row), "sigma2": row.sigma2, "ebn0_db": row.ebn0_db}

    ratios = sorted({_row_ratio(r) for r in layered})
    flips = False
    extremes: Dict[str, Any] = {}
    if len(ratios) >= 2:
        lo = {r.sigma2: r.rate_bits for r in layered if _row_ratio(r) == ratios[0]}
        hi = {r.sigma2: r.rate_bits for r in layered if _row_ratio(r) == ratios[-1]}
        diffs = [hi[s] - lo[s] for s in sorted(set(lo) & set(hi))]
        if diffs:
            flips = max(diffs) > margin and min(diffs) < -margin
            extremes = {"ratios": [ratios[0], ratios[-1]], "max_diff": max(diffs), "min_diff": min(diffs)}

    return {
        "beats_bpsk": best_gain is not None and best_gain > margin,
        "best_gain_bits": best_gain,
        "best_point": best_point,
        "ordering_flips": flips,
        "ratio_extremes": extremes,
    }


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _to_stdout(out: Optional[Path]) -> bool:
    return out is not None and str(out) == "-"


def _emit(
    out: Optional[Path],
    command: str,
    header: Sequence[str],
    rows: Sequence[Any],
    write,
    cfg: ExperimentConfig,
    runs: List[Dict[str, Any]],
    extra: Optional[Dict[str, Any]] = None,
) -> Optional[Path]:
    """Write the CSV (or print it for --out -) and the ledger next to it; returns the CSV path."""
    if _to_stdout(out):
        sys.stdout.write(render_csv(header, rows))
        return None
    path = _out_path(out, command)
    write(path, rows)
    ledger = build_ledger(command, cfg.as_dict(), path, runs)
    if extra:
        ledger.update(extra)
    write_ledger(ledger_path_for(path), ledger)
    return path


def _out_path(out: Optional[Path], command: str) -> Path:
    if out is None:
        return ROOT / "reports" / f"{command}.csv"
    return out


def _sweep_command(command: str, schemes: Sequence[str], cfg: ExperimentConfig, out: Optional[Path], quiet: bool) -> int:
    chosen = [s for s in schemes if s in cfg.schemes]
    if not chosen:
        print(f"❌ none of {', '.join(schemes)} selected by schemes={','.join(cfg.schemes)}", file=sys.stderr)
        return EXIT_ROWS_FAILED
    rows, runs = run_sweep(sweep_tasks(chosen, cfg), cfg, quiet)

    extra = None
    if command == "fig2":
        shape = fig2_shape_report(rows)
        extra = {"shape_check": shape}
        _progress(
            f"   layered1d beats BPSK at matched Eb/N0: {shape['beats_bpsk']}; "
            f"ratio ordering flips across sigma2: {shape['ordering_flips']}",
            quiet,
        )

    path = _emit(out, command, SWEEP_COLUMNS, rows, write_sweep_csv, cfg, runs, extra)
    failed = sum(1 for r in runs if r["status"] != "ok")
    if path is not None:
        _progress(f"✅ {path}: {len(rows)} rows, {failed} failed", quiet)
    return EXIT_ROWS_FAILED if failed else EXIT_OK


def cmd_fig1(cfg: ExperimentConfig, out: Optional[Path] = None, quiet: bool = False) -> int:
    return _sweep_command("fig1", FIG1_SCHEMES, cfg, out, quiet)


def cmd_fig2(cfg: ExperimentConfig, out: Optional[Path] = None, quiet: bool = False) -> int:
    return _sweep_command("fig2", FIG2_SCHEMES, cfg, out, quiet)


def cmd_ber(cfg: ExperimentConfig, out: Optional[Path] = None, quiet: bool = False) -> int:
    rows: List[BerRow] = []
    runs: List[Dict[str, Any]] = []
    index = 0
    for mode in cfg.ber_modes:
        for ratio in cfg.ratios:
            layer = LayerConfig.from_ratio(ratio, 1.0)
            for sigma2 in cfg.ber_sigma2_grid:
                variance = sigma2 if mode == "1d" else dimension_variance(sigma2, cfg.noise_convention)
                # disjoint stream ranges per row; chunks inside a row add their index
                spec = NoiseSpec(variance, cfg.seed, index << 32)
                index += 1
                _progress(f"   {mode} ratio={ratio:g} sigma2={sigma2:.6g}", quiet)
                report = ber_monte_carlo(layer, mode, cfg.ber_blocks, spec, workers=cfg.workers)
                rows.append(
                    BerRow(
                        mode=mode,
                        ratio=ratio,
                        alpha=layer.alpha,
                        beta=layer.beta,
                        sigma2=sigma2,
                        n_blocks=report.n_blocks,
                        ber_x=report.ber_x,
                        ber_z=report.ber_z,
                        ber_x_genie=report.ber_x_genie,
                        ber_z_theory=ber_z_semianalytic(layer.alpha, layer.beta, variance),
                    )
                )
                runs.append({"mode": mode, "ratio": ratio, "sigma2": sigma2, "status": "ok"})
    path = _emit(out, "ber", BER_COLUMNS, rows, write_ber_csv, cfg, runs)
    if path is not None:
        _progress(f"✅ {path}: {len(rows)} rows", quiet)
    return EXIT_OK


def rates_report(cfg: ExperimentConfig) -> Dict[str, Any]:
    if cfg.sigma2 is None:
        raise ValueError("rates needs --sigma2")
    if cfg.alpha is not None and cfg.beta is not None:
        alpha_q = cfg.alpha_q if cfg.alpha_q is not None else cfg.alpha
        beta_q = cfg.beta_q if cfg.beta_q is not None else cfg.beta
        layer = LayerConfig(cfg.alpha, cfg.beta, alpha_q, beta_q, cfg.sigma2)
    elif cfg.alpha is None and cfg.beta is None:
        layer = LayerConfig.from_ratio(cfg.ratios[0], cfg.sigma2)
    else:
        raise ValueError("give both --alpha and --beta, or neither (then --ratio sets them)")

    qs = cfg.quad_settings()
    snr = snr_report(layer)
    r1 = rate_1d(layer, qs)
    power = average_symbol_power(layer)
    point = rate_point(layer.sigma2, r1, power, noise_density(layer.sigma2))
    return {
        "alpha": layer.alpha,
        "beta": layer.beta,
        "alpha_q": layer.alpha_q,
        "beta_q": layer.beta_q,
        "sigma2": layer.sigma2,
        "rho_x": snr.rho_x,
        "rho_z": snr.rho_z,
        "rho_bpsk": snr.rho_bpsk,
        "power_sharing_gap": snr.gap,
        "avg_power": power,
        "mi_x_given_z": mi_x_given_z(layer, qs),
        "mi_z": mi_z(layer, qs),
        "rate_1d": r1,
        "rate_2d": rate_2d(layer, qs),
        "ebn0_db_1d": point.ebn0_db,
        "ber_z_theory": ber_z_semianalytic(layer.alpha, layer.beta, layer.sigma2),
    }


def cmd_rates(cfg: ExperimentConfig, fmt: str = "text") -> int:
    report = rates_report(cfg)
    if fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        width = max(len(k) for k in report)
        for key, value in report.items():
            shown = "-" if value is None else f"{value:.12g}"
            print(f"{key:<{width}}  {shown}")
    return EXIT_OK


def cmd_selftest(cfg: ExperimentConfig, quiet: bool = False) -> int:
    _progress("🚀 self-test", quiet)
    results, mask = run_selftest(
        cfg.quad_settings(),
        seed=cfg.seed,
        mc_samples=cfg.mc_samples,
        ber_blocks=cfg.ber_blocks,
        ratios=cfg.ratios,
        quiet=quiet,
    )
    failed = sum(1 for r in results if not r.passed)
    if mask:
        print(f"❌ {failed} of {len(results)} checks failed (exit {mask})", file=sys.stderr)
    else:
        _progress(f"✅ all {len(results)} checks passed", quiet)
    return mask


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _csv_list(text: str) -> Tuple[str, ...]:
    return tuple(part.strip().lower() for part in text.split(",") if part.strip())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value config file (default: $LAYERED_BPSK_CONFIG)")
    common.add_argument("--alpha", type=float, help="In-phase x weight (rates)")
    common.add_argument("--beta", type=float, help="In-phase z weight (rates)")
    common.add_argument("--alpha-q", type=float, help="Quadrature x weight (rates; default alpha)")
    common.add_argument("--beta-q", type=float, help="Quadrature z weight (rates; default beta)")
    common.add_argument(
        "--ratio",
        type=float,
        action="append",
        dest="ratios",
        help="alpha/beta ratio (repeatable; replaces the configured list)",
    )
    common.add_argument(
        "--sigma2",
        type=float,
        help="Noise variance: the point for rates, a one-point grid for fig1/fig2",
    )
    common.add_argument("--sigma2-min", type=float)
    common.add_argument("--sigma2-max", type=float)
    common.add_argument("--sigma2-points", type=option_type("sigma2_points"))
    common.add_argument(
        "--sigma2-grid",
        type=option_type("sigma2_grid"),
        help="Comma-separated sigma2 values (replaces min/max/points and --sigma2)",
    )
    common.add_argument("--schemes", type=_csv_list, help=f"Comma-separated subset of {','.join(ALL_SCHEMES)}")
    common.add_argument("--seed", type=option_type("seed"))
    common.add_argument("--mc-samples", type=option_type("mc_samples"), help="Monte Carlo samples per oracle entropy (selftest)")
    common.add_argument("--abs-tol", type=float, help="Quadrature absolute tolerance (bits)")
    common.add_argument("--rel-tol", type=float, help="Quadrature relative tolerance")
    common.add_argument("--range-sigmas", type=float, help="Integration reach around each mean, in noise sigmas (>= 8)")
    common.add_argument("--max-subdivisions", type=option_type("max_subdivisions"))
    common.add_argument("--hermite-order", type=option_type("hermite_order"), help="Gauss-Hermite nodes per axis (2D baselines)")
    common.add_argument("--ber-blocks", type=option_type("ber_blocks"), help="Blocks per BER row")
    common.add_argument("--ber-sigma2-grid", type=option_type("ber_sigma2_grid"), help="Comma-separated per-axis noise variances for ber")
    common.add_argument("--ber-modes", type=option_type("ber_modes"), help="Comma-separated subset of 1d,2d")
    common.add_argument("--noise-convention", choices=("per-dimension", "total-power"))
    common.add_argument("--workers", type=option_type("workers"), help="Worker processes (output does not depend on this)")
    common.add_argument("--out", type=Path, help="CSV path (default reports/<command>.csv; '-' for stdout)")
    common.add_argument("--quiet", action="store_true", help="Only print warnings and errors")

    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fig1", "Baseline rate curves"),
        ("fig2", "Layered BPSK rate curves per ratio"),
        ("ber", "Monte Carlo BER table"),
        ("selftest", "Run the self-test checks"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    rates = sub.add_parser("rates", parents=[common], help="Rates and SNRs of one point")
    rates.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {key: getattr(args, key) for key in CONFIG_KEYS if key != "ratios"}
    values["ratios"] = tuple(args.ratios) if args.ratios else None
    if args.sigma2 is not None and args.sigma2_grid is None and args.command in ("fig1", "fig2"):
        values["sigma2_grid"] = (args.sigma2,)
    return values


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config_path = config_path_from_env(args.config)
        file_values = parse_config_file(config_path) if config_path else {}
        cfg = resolve_experiment_config(file_values, _overrides(args))
    except ValueError as exc:
        parser.error(str(exc))

    if args.command == "fig1":
        return cmd_fig1(cfg, args.out, args.quiet)
    if args.command == "fig2":
        return cmd_fig2(cfg, args.out, args.quiet)
    if args.command == "ber":
        return cmd_ber(cfg, args.out, args.quiet)
    if args.command == "rates":
        try:
            return cmd_rates(cfg, args.format)
        except ValueError as exc:
            parser.error(str(exc))
        except QuadratureError as exc:
            print(f"❌ Error: {exc}", file=sys.stderr)
            return EXIT_ROWS_FAILED
    return cmd_selftest(cfg, args.quiet)


if __name__ == "__main__":
    raise SystemExit(main())
