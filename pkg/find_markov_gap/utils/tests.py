import csv
import json
import math
import tempfile
from pathlib import Path
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from find_markov_gap.band_models import ModelSpec, solve_bands
from find_markov_gap.geometry import SmootherShape
from find_markov_gap.optimizer import NoiseSchedule, OptimizerConfig
from find_markov_gap.optimizer.disentangler import TraceRow
from find_markov_gap.utils.config import coerce_sweep_value, load_config, parse_config
from find_markov_gap.utils.errors import ConfigError
from find_markov_gap.utils.report_io import (
    SWEEP_COLUMNS,
    TRACE_COLUMNS,
    c_plus_estimate,
    in_log2_units,
    write_bands_csv,
    write_json,
    write_sweep_csv,
    write_trace_csv,
)
from find_markov_gap.utils.sentry import init_sentry

REPO_ROOT = Path(__file__).resolve().parents[2]


class ConfigTests(SimpleTestCase):
    def test_defaults_resolve_to_a_centred_lattice(self):
        config = parse_config({}).resolved()
        geo = config.geometry
        self.assertEqual((geo.l_a, geo.l_b, geo.margin), (24, 24, 8))
        self.assertEqual((geo.width, geo.height), (64, 40))
        self.assertEqual(geo.anchor, (8, 8))
        self.assertEqual(geo.shape, SmootherShape.TWO_CIRCLES)

    def test_margin_follows_the_radius(self):
        geo = parse_config({"GEOMETRY": {"RADIUS": 6}}).resolved().geometry
        self.assertEqual(geo.margin, 12)
        self.assertEqual(geo.width % 4, 0)

    def test_width_must_be_a_multiple_of_q(self):
        with self.assertRaisesRegex(ConfigError, "multiple"):
            parse_config({"GEOMETRY": {"WIDTH": 10}})

    def test_unknown_keys_are_rejected(self):
        with self.assertRaises(ConfigError):
            parse_config({"MODEL": {"FLUX": 3}})
        with self.assertRaises(ConfigError):
            parse_config({"GEOMETRY": {"SHAPE": "square"}})

    def test_flux_in_lowest_terms(self):
        with self.assertRaises(ConfigError):
            parse_config({"MODEL": {"FLUX_NUMERATOR": 2, "FLUX_DENOMINATOR": 4}})

    def test_time_reversal_constraint_needs_two_layers(self):
        with self.assertRaises(ConfigError):
            parse_config({"OPTIMIZER": {"TR_CONSTRAINED": True}})
        config = parse_config({
            "MODEL": {"LAYERS": [{"P_SIGN": 1, "CHEMICAL_POTENTIAL": 2.0}, {"P_SIGN": -1, "CHEMICAL_POTENTIAL": 2.0}]},
            "OPTIMIZER": {"TR_CONSTRAINED": True},
        })
        self.assertEqual(config.n_layers, 2)
        self.assertEqual(config.to_model_spec().layer(1).p, -1)
        self.assertEqual(config.lattice().layers, 2)

    def test_expected_chern_length(self):
        with self.assertRaises(ConfigError):
            parse_config({"MODEL": {"EXPECTED_CHERN": [1, -1]}})

    def test_overrides_recompute_dependent_defaults(self):
        config = parse_config({"GEOMETRY": {"RADIUS": 2}})
        swept = config.with_overrides(R=6, SEED=7, OUTPUT_DIR="elsewhere")
        self.assertEqual(swept.geometry.radius, 6)
        self.assertEqual(swept.resolved().geometry.margin, 12)
        self.assertEqual(swept.seed, 7)
        self.assertEqual(swept.output.dir, "elsewhere")
        self.assertEqual(config.with_overrides(SEED=None).seed, 0)
        with self.assertRaises(ConfigError):
            config.with_overrides(WIDTH=8)

    def test_optimizer_config_takes_the_seed(self):
        config = parse_config({"SEED": 11, "OPTIMIZER": {"NOISE_SCHEDULE": "never", "MAX_ITERS": 3}})
        opt = config.to_optimizer_config()
        self.assertEqual(opt.rng_seed, 11)
        self.assertEqual(opt.max_iters, 3)
        self.assertIs(opt.noise_schedule, NoiseSchedule.NEVER)

    def test_optimizer_section_shares_the_optimizer_checks(self):
        for bad in ({"SHRINK_FACTOR": 1.5}, {"GRAD_TOL": 0}, {"LOG_EVERY": 0}, {"EPS": 1.0}, {"RNG_SEED": 3}):
            with self.assertRaises(ConfigError, msg=bad):
                parse_config({"OPTIMIZER": bad})
        section = parse_config({"OPTIMIZER": {"PLATEAU_WINDOW": 4}}).optimizer
        self.assertIsInstance(section, OptimizerConfig)
        self.assertEqual(section.plateau_window, 4)
        self.assertNotIn("RNG_SEED", parse_config({}).echo()["OPTIMIZER"])

    def test_echo_has_every_resolved_key(self):
        echo = parse_config({}).echo()
        self.assertEqual(echo["GEOMETRY"]["MARGIN"], 8)
        self.assertEqual(echo["GEOMETRY"]["SHAPE"], "two_circles")
        self.assertEqual(echo["OPTIMIZER"]["GRAD_TOL"], 3e-3)
        self.assertEqual(parse_config(echo).resolved(), parse_config({}).resolved())

    def test_sweep_values(self):
        self.assertEqual(coerce_sweep_value("R", "4"), 4)
        self.assertEqual(coerce_sweep_value("shape", "joint"), "joint")
        with self.assertRaises(ConfigError):
            coerce_sweep_value("R", "four")
        with self.assertRaises(ConfigError):
            coerce_sweep_value("shape", "ring")
        with self.assertRaises(ConfigError):
            coerce_sweep_value("WIDTH", "8")


class LoadConfigTests(SimpleTestCase):
    def test_example_files_are_valid(self):
        example = load_config(REPO_ROOT / "config_example.yaml")
        self.assertEqual(example.resolved(), parse_config({}).resolved())
        self.assertEqual(load_config(REPO_ROOT / "config.yaml").geometry.radius, 4)

    def test_missing_file(self):
        with self.assertRaisesRegex(ConfigError, "not found"):
            load_config("/nonexistent/config.yaml")

    def test_malformed_files(self):
        with tempfile.TemporaryDirectory() as tmp:
            broken = Path(tmp) / "broken.yaml"
            broken.write_text("MODEL: [unclosed\n")
            with self.assertRaises(ConfigError):
                load_config(broken)
            listing = Path(tmp) / "list.yaml"
            listing.write_text("- 1\n- 2\n")
            with self.assertRaisesRegex(ConfigError, "mapping"):
                load_config(listing)
            empty = Path(tmp) / "empty.yaml"
            empty.write_text("")
            self.assertEqual(load_config(empty).geometry.l_a, 24)


class ReportIOTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_central_charge_from_the_gap(self):
        self.assertAlmostEqual(c_plus_estimate(math.log(2) / 3), 1.0, places=12)
        self.assertAlmostEqual(in_log2_units(math.log(2)), 1.0, places=12)

    def test_json_accepts_numpy_values(self):
        path = write_json(self.out / "nested" / "report.json", {"h": np.float64(0.25), "n": np.int64(3), "v": np.arange(2), "g": float("nan")})
        data = json.loads(path.read_text())
        self.assertEqual(data, {"g": None, "h": 0.25, "n": 3, "v": [0, 1]})

    def test_trace_csv(self):
        rows = [TraceRow(0, math.log(2), float("nan"), 0.0, "start"), TraceRow(1, 0.5, 0.1, 0.25)]
        with open(write_trace_csv(self.out / "trace.csv", rows)) as f:
            table = list(csv.reader(f))
        self.assertEqual(tuple(table[0]), TRACE_COLUMNS)
        self.assertEqual(len(table), 3)
        self.assertAlmostEqual(float(table[1][2]), 1.0)
        self.assertEqual(table[1][5], "start")

    def test_sweep_csv_keeps_failed_rows(self):
        rows = [{"value": 1, "final_h": 0.2, "error": ""}, {"value": 2, "error": "margin too small", "config": {}}]
        with open(write_sweep_csv(self.out / "sweep_R.csv", rows)) as f:
            table = list(csv.DictReader(f))
        self.assertEqual(tuple(table[0].keys()), SWEEP_COLUMNS)
        self.assertEqual(table[1]["error"], "margin too small")
        self.assertEqual(table[1]["final_h"], "")

    def test_bands_csv(self):
        sol = solve_bands(ModelSpec(1, 4), 4)
        with open(write_bands_csv(self.out / "bands.csv", [sol])) as f:
            table = list(csv.reader(f))
        self.assertEqual(table[0], ["layer", "kx", "ky", "e_1", "e_2", "e_3", "e_4"])
        self.assertEqual(len(table), 1 + 16)


class SentryTests(SimpleTestCase):
    def test_without_dsn_nothing_is_initialized(self):
        with mock.patch("find_markov_gap.utils.sentry.sentry_sdk.init") as init:
            self.assertFalse(init_sentry(None))
            self.assertFalse(init_sentry(""))
        init.assert_not_called()

    def test_with_dsn(self):
        with mock.patch("find_markov_gap.utils.sentry.sentry_sdk.init") as init:
            self.assertTrue(init_sentry("https://key@example.invalid/1", "ci"))
        self.assertEqual(init.call_args.kwargs["environment"], "ci")
        self.assertEqual(init.call_args.kwargs["traces_sample_rate"], 0.0)
