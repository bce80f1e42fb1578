import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

from find_markov_gap.gaussian import CovarianceMatrix
from find_markov_gap.optimizer.config import OptimizerConfig
from find_markov_gap.optimizer.generators import Generator, apply_unitary

SUFFICIENT_DECREASE = 1e-12
INV_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class LineSearchResult:
    dt: float
    h_new: float
    stalled: bool
    evaluations: int


def search_step(phi: Callable[[float], float], config: OptimizerConfig, h0: Optional[float] = None) -> LineSearchResult:
    """
    Minimize phi along dt >= 0.

    Backtrack from the initial step until phi drops below phi(0), keep doubling
    while a first-try step still improves, then golden-section refine inside
    [dt * shrink, dt / shrink]. The best point seen is returned.
    """
    evaluations = 0

    def f(dt: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return float(phi(dt))

    if h0 is None:
        h0 = f(0.0)

    dt, accepted = config.initial_step, None
    for _ in range(config.max_backtracks):
        h = f(dt)
        if h < h0 - SUFFICIENT_DECREASE:
            accepted = (dt, h)
            break
        dt *= config.shrink_factor
    if accepted is None:
        return LineSearchResult(0.0, h0, True, evaluations)

    best_dt, best_h = accepted
    if best_dt == config.initial_step:
        for _ in range(config.max_expansions):
            trial = best_dt / config.shrink_factor
            h = f(trial)
            if h >= best_h:
                break
            best_dt, best_h = trial, h

    if config.max_bisections:
        lo, hi = best_dt * config.shrink_factor, best_dt / config.shrink_factor
        c, d = hi - INV_GOLDEN * (hi - lo), lo + INV_GOLDEN * (hi - lo)
        fc, fd = f(c), f(d)
        for _ in range(config.max_bisections):
            for point, value in ((c, fc), (d, fd)):
                if value < best_h:
                    best_dt, best_h = point, value
            if fc < fd:
                hi, d, fd = d, c, fc
                c = hi - INV_GOLDEN * (hi - lo)
                fc = f(c)
            else:
                lo, c, fc = c, d, fd
                d = lo + INV_GOLDEN * (hi - lo)
                fd = f(d)
        for point, value in ((c, fc), (d, fd)):
            if value < best_h:
                best_dt, best_h = point, value

    logging.debug(f"Line search: dt={best_dt:.4g}, h={best_h:.8f} after {evaluations} evaluations")
    return LineSearchResult(best_dt, best_h, False, evaluations)


def line_search(
    C: CovarianceMatrix,
    X: Generator,
    objective: Callable[[CovarianceMatrix], float],
    config: OptimizerConfig,
    h0: Optional[float] = None,
) -> LineSearchResult:
    """Step size along exp(i X dt) minimizing ``objective``; dt = 0 and stalled when nothing decreases."""
    if X.norm == 0.0:
        return LineSearchResult(0.0, objective(C) if h0 is None else h0, True, 0)
    return search_step(lambda dt: objective(apply_unitary(C, X, dt)), config, h0)
