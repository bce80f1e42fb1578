import csv
import json
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from find_markov_gap.band_models import BlochSolution

LOG2 = math.log(2)
TRACE_COLUMNS = ("iteration", "h", "h_log2", "grad_norm", "step", "event")
SWEEP_COLUMNS = ("value", "bare_h", "final_h", "final_h_log2", "iterations", "converged", "runtime", "error")


def in_log2_units(value: float) -> float:
    return value / LOG2


def c_plus_estimate(final_h: float) -> float:
    """Chiral central charge implied by h = (c_+ / 3) log 2."""
    return 3 * final_h / LOG2


def _ensure_parent(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return None
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def write_json(path, payload: Mapping) -> Path:
    path = _ensure_parent(Path(path))
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=_jsonable)
        f.write("\n")
    return path


def write_trace_csv(path, rows: Iterable) -> Path:
    """One row per optimizer iteration (TraceRow-like objects)."""
    path = _ensure_parent(Path(path))
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_COLUMNS)
        for row in rows:
            writer.writerow([row.iteration, repr(row.h), repr(in_log2_units(row.h)), repr(row.grad_norm), repr(row.step), row.event])
    return path


def write_sweep_csv(path, rows: Sequence[Mapping]) -> Path:
    path = _ensure_parent(Path(path))
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: row.get(key, "") for key in SWEEP_COLUMNS})
    return path


def write_bands_csv(path, solutions: Sequence[BlochSolution]) -> Path:
    """Band energies per layer and momentum: layer, kx, ky, e_1 .. e_q."""
    path = _ensure_parent(Path(path))
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        n_bands = max(sol.n_bands for sol in solutions) if solutions else 0
        writer.writerow(["layer", "kx", "ky"] + [f"e_{i + 1}" for i in range(n_bands)])
        for layer, sol in enumerate(solutions):
            for a, kx in enumerate(sol.kx):
                for b, ky in enumerate(sol.ky):
                    writer.writerow([layer, repr(float(kx)), repr(float(ky))] + [repr(float(e)) for e in sol.energies[a, b]])
    return path
