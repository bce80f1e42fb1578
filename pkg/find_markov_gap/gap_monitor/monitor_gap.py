import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import scipy

import find_markov_gap
from find_markov_gap.band_models import (
    band_gap,
    chern_number,
    covariance_real_space,
    diophantine_chern,
    filled_band_count,
    solve_bands,
    tr_operator,
    tr_residual,
)
from find_markov_gap.band_models.topology import GAP_TOL
from find_markov_gap.gaussian import GapComponents, spectrum
from find_markov_gap.geometry import SmootherSupport, Tripartition, build_tripartition, smoother_support
from find_markov_gap.optimizer import OptimizationReport, load_generators, optimize, save_generators
from find_markov_gap.oracle import EquivalenceSummary, run_equivalence_suite
from find_markov_gap.utils.config import RunConfig, coerce_sweep_value, parse_config
from find_markov_gap.utils.errors import GuardrailError, MarkovGapError
from find_markov_gap.utils.report_io import (
    c_plus_estimate,
    in_log2_units,
    write_bands_csv,
    write_json,
    write_sweep_csv,
    write_trace_csv,
)

CHERN_GRID = 32
BAND_GRID = 64
PROJECTOR_CHECK_MODES = 1600
PURITY_TOL = 1e-8
TR_TOL = 1e-9


def _components(c: Optional[GapComponents]) -> Optional[dict[str, float]]:
    if c is None:
        return None
    return {
        "reflected_entropy": c.reflected_entropy,
        "mutual_information": c.mutual_information,
        "h": c.markov_gap,
        "reflected_entropy_log2": in_log2_units(c.reflected_entropy),
        "mutual_information_log2": in_log2_units(c.mutual_information),
        "h_log2": in_log2_units(c.markov_gap),
    }


def versions() -> dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "find_markov_gap": find_markov_gap.__version__,
    }


@dataclass
class RunReport:
    config: dict[str, Any]
    bare_h: float
    final_h: float
    iterations: int
    converged: bool
    dimension: int
    runtime: float
    bare_components: Optional[dict[str, float]] = None
    final_components: Optional[dict[str, float]] = None
    saddle_events: list[dict[str, Any]] = field(default_factory=list)
    final_grad_norm: float = float("nan")
    trace_path: Optional[str] = None
    generators_path: Optional[str] = None
    report_path: Optional[str] = None

    @property
    def c_plus_estimate(self) -> float:
        return c_plus_estimate(self.final_h)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "bare_h": self.bare_h,
            "bare_h_log2": in_log2_units(self.bare_h),
            "final_h": self.final_h,
            "final_h_log2": in_log2_units(self.final_h),
            "c_plus_estimate": self.c_plus_estimate,
            "bare_components": self.bare_components,
            "final_components": self.final_components,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_grad_norm": self.final_grad_norm,
            "dimension": self.dimension,
            "saddle_events": self.saddle_events,
            "trace_path": self.trace_path,
            "generators_path": self.generators_path,
            "runtime": self.runtime,
            "versions": versions(),
        }


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    message: str


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, passed: bool, message: str) -> None:
        self.checks.append(CheckResult(name, passed, message))
        log = logging.info if passed else logging.warning
        log(f"[{'pass' if passed else 'FAIL'}] {name}: {message}")


@dataclass(frozen=True)
class Setup:
    """Everything a run needs before the optimizer starts."""

    config: RunConfig
    partition: Tripartition
    supports: SmootherSupport
    modes: Any

    @property
    def dimension(self) -> int:
        return len(self.modes)


def _sweep_row(config_data: dict, key: str, value, out_dir: str, force: bool) -> dict[str, Any]:
    """One sweep point; runs in a worker process, so it takes and returns plain data."""
    row: dict[str, Any] = {"value": value, "error": ""}
    start = time.perf_counter()
    try:
        config = parse_config(config_data).with_overrides(**{key: value})
        report = MarkovGapMonitor(config, force=force).run(Path(out_dir) / f"{key}_{value}", record=False)
        row.update(
            bare_h=report.bare_h,
            final_h=report.final_h,
            final_h_log2=in_log2_units(report.final_h),
            iterations=report.iterations,
            converged=report.converged,
            config=report.config,
            trace_path=report.trace_path,
        )
    except MarkovGapError as e:
        logging.error(f"Sweep row {key}={value} failed: {e}")
        row["error"] = str(e)
    row["runtime"] = time.perf_counter() - start
    return row


class MarkovGapMonitor:
    """Builds models and geometries from a run config and computes bare and optimized Markov gaps."""

    def __init__(self, config: RunConfig, force: bool = False) -> None:
        self._unresolved = config
        self.config = config.resolved()
        self.force = force
        self.spec = self.config.to_model_spec()
        self.lattice = self.config.lattice()

    def setup(self) -> Setup:
        geo = self.config.geometry
        partition = build_tripartition(self.lattice, geo.l_a, geo.l_b, tuple(geo.anchor), geo.margin)
        supports = smoother_support(partition, self.lattice, geo.shape, geo.radius)
        modes = partition.a_mask.union(partition.b_mask, supports.union)
        logging.info(
            f"Lattice {self.lattice.width}x{self.lattice.height}x{self.lattice.layers}, "
            f"|A|={len(partition.a_mask)}, |B|={len(partition.b_mask)}, "
            f"smoother {supports.shape.value} R={supports.R} sizes {[len(m) for m in supports.masks]}; "
            f"estimated matrix dimension {len(modes)}"
        )
        limit = self.config.output.max_dimension
        if len(modes) > limit and not self.force:
            raise GuardrailError(f"Matrix dimension {len(modes)} exceeds MAX_DIMENSION={limit}; pass --force to run anyway")
        return Setup(self.config, partition, supports, modes)

    def run(self, out_dir: Union[str, Path, None] = None, record: Optional[bool] = None) -> RunReport:
        """Bare gap, descent over smoother unitaries, report files."""
        start = time.perf_counter()
        out = Path(out_dir if out_dir is not None else self.config.output.dir)
        setup = self.setup()
        C = covariance_real_space(self.spec, self.lattice, setup.modes)
        logging.info(f"Covariance built on {setup.dimension} modes")

        opt_cfg = self.config.to_optimizer_config()
        tr_op = tr_operator(self.lattice, setup.modes) if opt_cfg.tr_constrained else None
        warm = self.config.optimizer.warm_start
        initial = load_generators(warm) if warm else None
        result: OptimizationReport = optimize(
            C, setup.partition, setup.supports, opt_cfg, setup.modes, tr_op, initial
        )

        trace_path = write_trace_csv(out / "trace.csv", result.h_trace)
        generators_path = None
        if self.config.optimizer.save_generators and not setup.supports.is_empty:
            generators_path = save_generators(out / "generators.npz", result.generators)
        report = RunReport(
            config=self.config.echo(),
            bare_h=result.bare_h,
            final_h=result.final_h,
            iterations=result.iterations,
            converged=result.converged,
            dimension=setup.dimension,
            runtime=time.perf_counter() - start,
            bare_components=_components(result.bare_components),
            final_components=_components(result.final_components),
            saddle_events=[vars(e).copy() for e in result.saddle_events],
            final_grad_norm=result.final_grad_norm,
            trace_path=str(trace_path),
            generators_path=str(generators_path) if generators_path else None,
        )
        report.report_path = str(write_json(out / "report.json", report.to_dict()))
        logging.info(
            f"bare h={report.bare_h:.6f}, final h={report.final_h:.6f} "
            f"({in_log2_units(report.final_h):.4f} log 2), c+ estimate {report.c_plus_estimate:.4f}; "
            f"report written to {report.report_path}"
        )
        if self._record(record):
            self._save_run("run", report)
        return report

    def sweep(self, key: str, raw_values: Sequence[str], out_dir=None, jobs: int = 1) -> list[dict[str, Any]]:
        """One run per value of ``key``; failing rows keep their error message and the sweep goes on."""
        values = [coerce_sweep_value(key, raw) for raw in raw_values]
        out = Path(out_dir if out_dir is not None else self.config.output.dir)
        # unresolved, so per-value defaults (margin, lattice size) are recomputed
        base = self._unresolved.model_dump(mode="json", by_alias=True)
        args = [(base, key, value, str(out), self.force) for value in values]
        if jobs > 1 and len(values) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(_sweep_row, *zip(*args)))
        else:
            rows = [_sweep_row(*a) for a in args]
        path = write_sweep_csv(out / f"sweep_{key}.csv", rows)
        logging.info(f"Sweep over {key} with {len(rows)} values written to {path}")
        if self._record(None):
            self._save_sweep(key, values, rows)
        return rows

    def validate(self) -> ValidationReport:
        """Cheap consistency checks: geometry, gapped filling, Chern numbers, time reversal."""
        checks = ValidationReport()
        setup = None
        try:
            setup = self.setup()
            geo = self.config.geometry
            checks.add("geometry", True, f"margins >= {geo.margin}, dimension {setup.dimension}")
        except MarkovGapError as e:
            checks.add("geometry", False, str(e))

        expected = self.config.model.expected_chern
        for index in range(self.spec.n_layers):
            layer = self.spec.layer(index)
            sol = solve_bands(layer, BAND_GRID)
            try:
                r = filled_band_count(layer, sol)
            except MarkovGapError as e:
                checks.add(f"purity[layer {index}]", False, str(e))
                continue
            gap = band_gap(sol, r)
            if gap <= GAP_TOL:
                checks.add(f"purity[layer {index}]", False, f"no gap above the {r} filled bands (gap {gap:.2e})")
                continue
            checks.add(f"purity[layer {index}]", True, f"{r} filled bands, gap {gap:.4f}")

            target = expected[index] if expected is not None else diophantine_chern(layer.p, layer.q, r)
            try:
                value = chern_number(solve_bands(layer, CHERN_GRID), range(r))
            except MarkovGapError as e:
                checks.add(f"chern[layer {index}]", False, str(e))
                continue
            if target is None:
                checks.add(f"chern[layer {index}]", True, f"C={value:+d} (no unambiguous prediction)")
            else:
                checks.add(f"chern[layer {index}]", value == target, f"C={value:+d}, expected {target:+d}")

        if checks.passed and self.lattice.n_modes <= PROJECTOR_CHECK_MODES:
            lam, _ = spectrum(covariance_real_space(self.spec, self.lattice))
            defect = float(np.max(np.minimum(np.abs(lam), np.abs(1 - lam))))
            checks.add("projector", defect < PURITY_TOL, f"max distance of covariance eigenvalues from {{0, 1}}: {defect:.2e}")

        if self.config.optimizer.tr_constrained and setup is not None:
            C = covariance_real_space(self.spec, self.lattice, setup.modes)
            residual = tr_residual(C, tr_operator(self.lattice, setup.modes))
            checks.add("time_reversal", residual <= TR_TOL, f"residual {residual:.2e}")
        return checks

    def export_bands(self, out_dir=None, grid_n: int = BAND_GRID) -> Path:
        out = Path(out_dir if out_dir is not None else self.config.output.dir)
        solutions = [solve_bands(self.spec.layer(i), grid_n) for i in range(self.spec.n_layers)]
        path = write_bands_csv(out / "bands.csv", solutions)
        logging.info(f"Band structure on a {grid_n}x{grid_n} grid written to {path}")
        return path

    def check_oracle(self, out_dir=None, n_states: int = 50) -> EquivalenceSummary:
        out = Path(out_dir if out_dir is not None else self.config.output.dir)
        summary = run_equivalence_suite(n_states=n_states, seed=self.config.seed, min_modes=6, max_modes=8)
        write_json(
            out / "oracle_check.json",
            {
                "n_states": n_states,
                "seed": self.config.seed,
                "max_deviation": summary.max_deviation,
                "tolerance": summary.tolerance,
                "passed": summary.passed,
                "failures": [row.index for row in summary.failures],
                "versions": versions(),
            },
        )
        return summary

    def _record(self, record: Optional[bool]) -> bool:
        return self.config.output.record_to_database if record is None else record

    def _save_run(self, command: str, report: RunReport, sweep=None, value: str = "") -> None:
        from runs.models import GapRunModel

        GapRunModel.objects.create(
            sweep=sweep,
            command=command,
            sweep_value=value,
            config=report.config,
            seed=self.config.seed,
            bare_h=report.bare_h,
            final_h=report.final_h,
            c_plus_estimate=report.c_plus_estimate,
            iterations=report.iterations,
            converged=report.converged,
            runtime=report.runtime,
            trace_path=report.trace_path or "",
        )

    def _save_sweep(self, key: str, values: list, rows: list[dict[str, Any]]) -> None:
        from runs.models import GapRunModel, SweepModel

        sweep = SweepModel.objects.create(key=key, values=values, config=self.config.echo())
        for row in rows:
            final_h = row.get("final_h")
            GapRunModel.objects.create(
                sweep=sweep,
                command="sweep",
                sweep_value=str(row["value"]),
                config=row.get("config", {}),
                seed=self.config.seed,
                bare_h=row.get("bare_h"),
                final_h=final_h,
                c_plus_estimate=c_plus_estimate(final_h) if final_h is not None else None,
                iterations=row.get("iterations", 0),
                converged=bool(row.get("converged", False)),
                runtime=row["runtime"],
                trace_path=row.get("trace_path") or "",
                error=row["error"],
            )
