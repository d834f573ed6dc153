import math
import os
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

from experiment_config import (
    ALL_SCHEMES,
    CONFIG_ENV,
    DEFAULT_BER_SIGMA2,
    ExperimentConfig,
    config_path_from_env,
    log_grid,
    parse_config_file,
    parse_config_text,
    resolve_experiment_config,
)

ROOT = Path(__file__).resolve().parent


class ParseConfigTests(unittest.TestCase):
    def test_comments_lists_and_dashed_keys(self):
        text = "\n".join(
            [
                "# header comment",
                "schemes = Layered1D, bpsk  # trailing comment",
                "",
                "ratios = 2, 3.5",
                "mc-samples = 2e5",
                "noise_convention = TOTAL-POWER",
            ]
        )
        values = parse_config_text(text)
        self.assertEqual(values["schemes"], ("layered1d", "bpsk"))
        self.assertEqual(values["ratios"], (2.0, 3.5))
        self.assertEqual(values["mc_samples"], 200_000)
        self.assertEqual(values["noise_convention"], "total-power")

    def test_unknown_key_names_source_and_line(self):
        with self.assertRaises(ValueError) as ctx:
            parse_config_text("seed = 1\n\nsnr_db = 3\n", "exp.conf")
        self.assertIn("exp.conf:3", str(ctx.exception))
        self.assertIn("snr_db", str(ctx.exception))

    def test_bad_values_and_lines(self):
        with self.assertRaises(ValueError):
            parse_config_text("seed = 1.5")
        with self.assertRaises(ValueError):
            parse_config_text("ratios 2, 3")
        with self.assertRaises(ValueError):
            parse_config_text("alpha = one")

    def test_missing_file_is_value_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ValueError):
                parse_config_file(Path(tmp) / "missing.conf")

    def test_example_config_resolves_to_defaults(self):
        values = parse_config_file(ROOT / "experiment.example.conf")
        cfg = resolve_experiment_config(values, {})
        self.assertEqual(cfg.schemes, ALL_SCHEMES)
        self.assertEqual(cfg.ratios, (2.0, 3.0, 4.0))
        self.assertEqual(len(cfg.sigma2_grid), 60)
        self.assertEqual(cfg.mc_samples, 1_000_000)
        self.assertEqual(cfg.ber_blocks, 100_000)
        self.assertEqual(cfg.ber_modes, ("1d", "2d"))
        for got, want in zip(cfg.ber_sigma2_grid, DEFAULT_BER_SIGMA2):
            self.assertTrue(math.isclose(got, want, rel_tol=1e-12))


class ResolveConfigTests(unittest.TestCase):
    def test_default_grid(self):
        cfg = resolve_experiment_config({}, {})
        self.assertEqual(len(cfg.sigma2_grid), 60)
        self.assertAlmostEqual(cfg.sigma2_grid[0], 1e-4, places=15)
        self.assertTrue(math.isclose(cfg.sigma2_grid[-1], 10**3.5, rel_tol=1e-12))
        self.assertEqual(list(cfg.sigma2_grid), sorted(cfg.sigma2_grid))

    def test_overrides_beat_file_and_none_is_ignored(self):
        cfg = resolve_experiment_config(
            {"seed": 1, "workers": 3, "ratios": (2.0,)},
            {"seed": 99, "workers": None, "ratios": None},
        )
        self.assertEqual(cfg.seed, 99)
        self.assertEqual(cfg.workers, 3)
        self.assertEqual(cfg.ratios, (2.0,))

    def test_explicit_grid_wins_over_range(self):
        cfg = resolve_experiment_config({"sigma2_min": 1.0, "sigma2_points": 5}, {"sigma2_grid": (0.5, 2.0)})
        self.assertEqual(cfg.sigma2_grid, (0.5, 2.0))
        cfg = resolve_experiment_config({"sigma2_min": 0.1, "sigma2_max": 10.0, "sigma2_points": 3}, {})
        for got, want in zip(cfg.sigma2_grid, (0.1, 1.0, 10.0)):
            self.assertTrue(math.isclose(got, want, rel_tol=1e-12))

    def test_range_overrides_replace_grid_from_file(self):
        cfg = resolve_experiment_config(
            {"sigma2_grid": (0.5, 2.0)},
            {"sigma2_min": 0.1, "sigma2_max": 10.0, "sigma2_points": 3, "sigma2_grid": None},
        )
        self.assertEqual(len(cfg.sigma2_grid), 3)
        self.assertTrue(math.isclose(cfg.sigma2_grid[1], 1.0, rel_tol=1e-12))

    def test_rejects_invalid_settings(self):
        for overrides in (
            {"ratios": (1.0,)},
            {"ratios": (0.5, 2.0)},
            {"schemes": ("64qam",)},
            {"noise_convention": "per-axis"},
            {"mc_samples": 10},
            {"ber_blocks": 999},
            {"workers": 0},
            {"range_sigmas": 4.0},
            {"sigma2_grid": (0.0,)},
            {"sigma2_min": 10.0, "sigma2_max": 1.0},
            {"ber_modes": ("3d",)},
        ):
            with self.subTest(overrides=overrides):
                with self.assertRaises(ValueError):
                    resolve_experiment_config({}, overrides)

    def test_unknown_override_rejected(self):
        with self.assertRaises(ValueError):
            resolve_experiment_config({}, {"snr": 3.0})

    def test_log_grid_single_point(self):
        self.assertEqual(log_grid(0.3, 0.3, 1), (0.3,))
        with self.assertRaises(ValueError):
            log_grid(0.1, 1.0, 0)

    def test_quad_settings_carry_tolerances(self):
        cfg = ExperimentConfig(abs_tol=1e-8, hermite_order=32)
        qs = cfg.quad_settings()
        self.assertEqual((qs.abs_tol, qs.hermite_order), (1e-8, 32))
        self.assertIn("abs_tol", cfg.as_dict())


class ConfigPathTests(unittest.TestCase):
    def test_explicit_path_beats_environment(self):
        with patch.dict(os.environ, {CONFIG_ENV: "/tmp/from-env.conf"}):
            self.assertEqual(config_path_from_env(Path("given.conf")), Path("given.conf"))
            self.assertEqual(config_path_from_env(None), Path("/tmp/from-env.conf"))

    def test_unset_or_blank_environment(self):
        with patch.dict(os.environ, {CONFIG_ENV: "  "}):
            self.assertIsNone(config_path_from_env(None))
        with patch.dict(os.environ, {}, clear=True):
            self.assertIsNone(config_path_from_env(None))


if __name__ == "__main__":
    unittest.main()
