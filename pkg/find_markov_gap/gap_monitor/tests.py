import csv
import json
import math
import tempfile
from pathlib import Path

import numpy as np
import yaml
from django.test import SimpleTestCase, TestCase

import main
from find_markov_gap.band_models import ModelSpec, solve_bands
from find_markov_gap.gap_monitor.monitor_gap import MarkovGapMonitor
from find_markov_gap.utils.config import parse_config
from find_markov_gap.utils.errors import ConfigError, GuardrailError

SMALL_RUN = {
    "GEOMETRY": {"WIDTH": 16, "HEIGHT": 14, "L_A": 4, "MARGIN": 3, "RADIUS": 0},
    "OPTIMIZER": {"MAX_ITERS": 5, "NOISE_SCHEDULE": "never"},
}


def small_config(**geometry):
    data = {section: dict(values) for section, values in SMALL_RUN.items()}
    data["GEOMETRY"].update(geometry)
    return parse_config(data)


class MonitorRunTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_zero_radius_reports_the_bare_gap(self):
        report = MarkovGapMonitor(small_config()).run(self.out, record=False)
        self.assertTrue(report.converged)
        self.assertEqual(report.iterations, 0)
        self.assertAlmostEqual(report.final_h, report.bare_h, places=10)
        self.assertGreater(report.bare_h, 0.0)
        self.assertIsNone(report.generators_path)
        data = json.loads((self.out / "report.json").read_text())
        self.assertAlmostEqual(data["c_plus_estimate"], 3 * data["final_h"] / math.log(2), places=12)
        self.assertAlmostEqual(data["final_h_log2"] * math.log(2), data["final_h"], places=12)
        self.assertEqual(data["config"]["GEOMETRY"]["ANCHOR"], [4, 5])
        self.assertEqual(data["dimension"], 32)
        components = data["bare_components"]
        self.assertAlmostEqual(components["reflected_entropy"] - components["mutual_information"], components["h"], places=12)
        self.assertIn("numpy", data["versions"])

    def test_descent_writes_trace_and_generators(self):
        report = MarkovGapMonitor(small_config(RADIUS=1, SHAPE="joint")).run(self.out, record=False)
        self.assertLessEqual(report.final_h, report.bare_h + 1e-12)
        with open(report.trace_path) as f:
            trace = list(csv.DictReader(f))
        self.assertEqual(trace[0]["event"], "start")
        h = [float(row["h"]) for row in trace]
        self.assertTrue(all(b <= a + 1e-12 for a, b in zip(h, h[1:])))
        with np.load(report.generators_path) as generators:
            self.assertGreater(len(generators.files), 0)

    def test_same_seed_gives_the_same_report(self):
        config = small_config(RADIUS=1, SHAPE="joint")
        first = MarkovGapMonitor(config).run(self.out / "first", record=False).to_dict()
        second = MarkovGapMonitor(config).run(self.out / "second", record=False).to_dict()
        for key in ("bare_h", "final_h", "iterations", "converged", "final_components", "config"):
            self.assertEqual(first[key], second[key], msg=key)
        self.assertEqual(
            (self.out / "first" / "trace.csv").read_text(), (self.out / "second" / "trace.csv").read_text()
        )

    def test_dimension_guardrail(self):
        config = parse_config({**SMALL_RUN, "OUTPUT": {"MAX_DIMENSION": 10}})
        with self.assertRaises(GuardrailError):
            MarkovGapMonitor(config).setup()
        self.assertEqual(MarkovGapMonitor(config, force=True).setup().dimension, 32)

    def test_sweep_keeps_going_after_a_failed_row(self):
        monitor = MarkovGapMonitor(small_config())
        rows = monitor.sweep("L_A", ["2", "4", "8"], out_dir=self.out)
        self.assertEqual([row["value"] for row in rows], [2, 4, 8])
        self.assertEqual(rows[0]["error"], "")
        self.assertEqual(rows[1]["error"], "")
        self.assertIn("margin", rows[2]["error"].lower())
        with open(self.out / "sweep_L_A.csv") as f:
            self.assertEqual(len(list(csv.DictReader(f))), 3)

    def test_radius_sweep_recomputes_the_margin(self):
        rows = MarkovGapMonitor(parse_config({"GEOMETRY": {"WIDTH": 16, "HEIGHT": 14, "L_A": 4}})).sweep(
            "R", ["0"], out_dir=self.out
        )
        # default margin of 8 does not fit a 16x14 lattice
        self.assertNotEqual(rows[0]["error"], "")

    def test_empty_sweep_writes_only_the_header(self):
        rows = MarkovGapMonitor(small_config()).sweep("R", [], out_dir=self.out)
        self.assertEqual(rows, [])
        with open(self.out / "sweep_R.csv") as f:
            self.assertEqual(len(list(csv.reader(f))), 1)

    def test_sweep_rejects_bad_values(self):
        with self.assertRaises(ConfigError):
            MarkovGapMonitor(small_config()).sweep("R", ["one"], out_dir=self.out)

    def test_export_bands(self):
        path = MarkovGapMonitor(small_config()).export_bands(self.out, grid_n=8)
        with open(path) as f:
            self.assertEqual(len(list(csv.reader(f))), 1 + 64)

    def test_oracle_check(self):
        summary = MarkovGapMonitor(small_config()).check_oracle(self.out, n_states=5)
        self.assertTrue(summary.passed)
        data = json.loads((self.out / "oracle_check.json").read_text())
        self.assertEqual(data["n_states"], 5)
        self.assertEqual(data["failures"], [])


class MonitorValidateTests(SimpleTestCase):
    def test_lowest_band_passes(self):
        report = MarkovGapMonitor(small_config()).validate()
        self.assertTrue(report.passed, msg=[c for c in report.checks if not c.passed])
        self.assertEqual(
            [c.name for c in report.checks], ["geometry", "purity[layer 0]", "chern[layer 0]", "projector"]
        )

    def test_wrong_expected_chern_fails(self):
        config = parse_config({**SMALL_RUN, "MODEL": {"EXPECTED_CHERN": [-1]}})
        report = MarkovGapMonitor(config).validate()
        self.assertFalse(report.passed)
        self.assertEqual([c.name for c in report.checks if not c.passed], ["chern[layer 0]"])

    def test_chemical_potential_inside_a_band_fails(self):
        lowest = solve_bands(ModelSpec(1, 4), 16).energies[..., 0]
        mu = -0.5 * (lowest.min() + lowest.max())
        config = parse_config({**SMALL_RUN, "MODEL": {"FILLED_BANDS": None, "CHEMICAL_POTENTIAL": float(mu)}})
        report = MarkovGapMonitor(config).validate()
        self.assertFalse(report.passed)
        self.assertIn("crosses a band", next(c.message for c in report.checks if c.name == "purity[layer 0]"))

    def test_topological_insulator_is_time_reversal_symmetric(self):
        config = parse_config({
            **SMALL_RUN,
            "MODEL": {"LAYERS": [{"P_SIGN": 1, "CHEMICAL_POTENTIAL": 2.0}, {"P_SIGN": -1, "CHEMICAL_POTENTIAL": 2.0}]},
            "OPTIMIZER": {"TR_CONSTRAINED": True},
        })
        report = MarkovGapMonitor(config).validate()
        self.assertTrue(report.passed, msg=[c for c in report.checks if not c.passed])
        self.assertIn("time_reversal", [c.name for c in report.checks])

    def test_bad_geometry_is_reported(self):
        report = MarkovGapMonitor(small_config(MARGIN=6)).validate()
        self.assertFalse(report.checks[0].passed)
        self.assertEqual(report.checks[0].name, "geometry")


class MonitorRecordTests(TestCase):
    def test_run_and_sweep_are_recorded(self):
        from runs.models import GapRunModel, SweepModel

        with tempfile.TemporaryDirectory() as tmp:
            monitor = MarkovGapMonitor(small_config())
            report = monitor.run(Path(tmp) / "run", record=True)
            monitor.config = monitor.config.model_copy(
                update={"output": monitor.config.output.model_copy(update={"record_to_database": True})}
            )
            monitor.sweep("L_A", ["4", "8"], out_dir=Path(tmp) / "sweep")

        single = GapRunModel.objects.get(command="run")
        self.assertAlmostEqual(single.final_h, report.final_h)
        self.assertAlmostEqual(single.c_plus_estimate, report.c_plus_estimate)
        sweep = SweepModel.objects.get()
        self.assertEqual(sweep.key, "L_A")
        self.assertEqual(sweep.values, [4, 8])
        rows = list(sweep.runs.order_by("id"))
        self.assertEqual([r.sweep_value for r in rows], ["4", "8"])
        self.assertEqual(rows[0].error, "")
        self.assertIsNone(rows[1].final_h)
        self.assertNotEqual(rows[1].error, "")


class MainTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, data) -> str:
        path = self.dir / "config.yaml"
        path.write_text(yaml.safe_dump(data))
        return str(path)

    def test_run_exit_codes(self):
        path = self.write_config(SMALL_RUN)
        self.assertEqual(main.main(["run", "--config", path, "--out", str(self.dir / "out")]), 0)
        self.assertTrue((self.dir / "out" / "report.json").exists())

    def test_not_converged(self):
        data = {
            "GEOMETRY": {**SMALL_RUN["GEOMETRY"], "RADIUS": 1, "SHAPE": "joint"},
            "OPTIMIZER": {"MAX_ITERS": 1, "GRAD_TOL": 1e-12, "NOISE_SCHEDULE": "never"},
        }
        path = self.write_config(data)
        self.assertEqual(main.main(["run", "--config", path, "--out", str(self.dir / "out")]), 5)

    def test_config_errors(self):
        self.assertEqual(main.main(["validate", "--config", str(self.dir / "missing.yaml")]), 2)
        path = self.write_config({"GEOMETRY": {"WIDTH": 10}})
        self.assertEqual(main.main(["validate", "--config", path]), 2)

    def test_geometry_error(self):
        path = self.write_config({**SMALL_RUN, "GEOMETRY": {**SMALL_RUN["GEOMETRY"], "L_A": 8}})
        self.assertEqual(main.main(["run", "--config", path, "--out", str(self.dir / "out")]), 3)

    def test_guardrail(self):
        path = self.write_config({**SMALL_RUN, "OUTPUT": {"MAX_DIMENSION": 10}})
        self.assertEqual(main.main(["run", "--config", path, "--out", str(self.dir / "out")]), 6)
        self.assertEqual(main.main(["run", "--config", path, "--out", str(self.dir / "out"), "--force"]), 0)

    def test_validate_and_bands(self):
        path = self.write_config(SMALL_RUN)
        self.assertEqual(main.main(["validate", "--config", path]), 0)
        self.assertEqual(main.main(["bands", "--config", path, "--out", str(self.dir), "--grid", "4"]), 0)
        self.assertTrue((self.dir / "bands.csv").exists())

    def test_validate_failure(self):
        path = self.write_config({**SMALL_RUN, "MODEL": {"EXPECTED_CHERN": [2]}})
        self.assertEqual(main.main(["validate", "--config", path]), 1)
