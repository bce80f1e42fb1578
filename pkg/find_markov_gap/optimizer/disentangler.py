import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from find_markov_gap.gaussian import GapComponents, ModeMask, as_covariance, gap_components, markov_gap, restrict
from find_markov_gap.geometry import SmootherSupport, Tripartition
from find_markov_gap.optimizer.config import OptimizerConfig
from find_markov_gap.optimizer.generators import (
    Generator,
    apply_unitary,
    combine,
    exp_generator,
    generator_from_unitary,
    project_tr,
    random_generator,
    restrict_operator,
)
from find_markov_gap.optimizer.kernels import descent_commutator, generator_from_commutator
from find_markov_gap.optimizer.line_search import line_search
from find_markov_gap.utils.errors import ConfigError, MaskError

ESCAPE_DROP = 1e-3


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    h: float
    grad_norm: float
    step: float
    event: str = ""


@dataclass
class SaddleEvent:
    iteration: int
    h: float
    grad_norm: float
    trigger: str
    escaped: bool = False


@dataclass
class OptimizationReport:
    bare_h: float
    final_h: float
    h_trace: list[TraceRow]
    generators: dict[str, Generator]
    converged: bool
    iterations: int
    final_grad_norm: float
    saddle_events: list[SaddleEvent] = field(default_factory=list)
    grad_norm_kind: str = "frobenius"
    bare_components: Optional[GapComponents] = None
    final_components: Optional[GapComponents] = None


def _plateaued(history: list[float], window: int, rtol: float) -> bool:
    if window < 1 or len(history) <= window:
        return False
    old = history[-1 - window]
    return old > 0 and abs(history[-1] - old) / old < rtol


class Disentangler:
    """Gradient descent of h(A:B) over Gaussian unitaries on the smoother supports."""

    def __init__(
        self,
        C,
        partition: Tripartition,
        supports: SmootherSupport,
        config: OptimizerConfig,
        modes: Optional[ModeMask] = None,
        tr_op: Optional[np.ndarray] = None,
    ) -> None:
        C = as_covariance(C)
        modes = modes if modes is not None else ModeMask.full(C.dim)
        if len(modes) != C.dim:
            raise MaskError(f"Mode list has {len(modes)} entries for a {C.dim}-mode covariance")
        self.config = config
        self.supports = supports
        self.abs_mask = partition.a_mask.union(partition.b_mask, *supports.masks)
        local = modes.positions_of(self.abs_mask)
        self.C = restrict(C, local)
        self.a = self.abs_mask.positions_of(partition.a_mask)
        self.b = self.abs_mask.positions_of(partition.b_mask)
        self.local_supports = [self.abs_mask.positions_of(m) for m in supports.masks]
        self.unitaries = [np.eye(len(s), dtype=np.complex128) for s in self.local_supports]
        self.tr_blocks = None
        if config.tr_constrained:
            if tr_op is None:
                raise ConfigError("Time-reversal constrained optimization needs the time-reversal operator")
            S_abs = restrict_operator(np.asarray(tr_op), local)
            self.tr_blocks = [restrict_operator(S_abs, s) for s in self.local_supports]
        self.rng = np.random.default_rng(config.rng_seed)
        self.noise_amplitude = config.noise_amplitude

    def objective(self, C) -> float:
        return markov_gap(C, self.a, self.b)

    def _rotate(self, generators: list[Generator], dt: float) -> None:
        self.C = apply_unitary(self.C, combine(generators), dt)
        for i, g in enumerate(generators):
            self.unitaries[i] = exp_generator(g, dt) @ self.unitaries[i]

    def warm_start(self, generators: Mapping[str, Generator]) -> None:
        """Apply saved generators (global supports) before descending."""
        for name, gen in generators.items():
            if name not in self.supports.names:
                raise MaskError(f"Warm-start generator {name!r} has no matching support")
            i = self.supports.names.index(name)
            if gen.support != self.supports.masks[i]:
                raise MaskError(f"Warm-start generator {name!r} was saved for a different support")
            local = [Generator.zero(s) for s in self.local_supports]
            local[i] = Generator(self.local_supports[i], gen.X)
            self._rotate(local, 1.0)
        logging.info(f"Applied {len(generators)} warm-start generators")

    def gradient(self) -> list[Generator]:
        G = descent_commutator(self.C, self.a, self.b, self.config.eps)
        generators = [generator_from_commutator(G, s) for s in self.local_supports]
        if self.tr_blocks is not None:
            generators = [project_tr(g, S) for g, S in zip(generators, self.tr_blocks)]
        return generators

    def _inject_noise(self) -> None:
        kicks = [random_generator(s, self.rng) for s in self.local_supports]
        total = np.sqrt(sum(g.norm**2 for g in kicks))
        scaled = [Generator(g.support, g.X * (self.noise_amplitude / total)) for g in kicks]
        self._rotate(scaled, 1.0)

    def final_generators(self) -> dict[str, Generator]:
        return {
            name: generator_from_unitary(u, mask)
            for name, u, mask in zip(self.supports.names, self.unitaries, self.supports.masks)
        }

    def run(self, bare_h: Optional[float] = None) -> OptimizationReport:
        cfg = self.config
        h = self.objective(self.C)
        bare_h = h if bare_h is None else bare_h
        trace = [TraceRow(0, h, float("nan"), 0.0, "start")]
        events: list[SaddleEvent] = []
        if self.supports.is_empty:
            logging.info(f"Empty smoother support, Markov gap stays at {h:.6f}")
            return OptimizationReport(bare_h, h, trace, self.final_generators(), True, 0, 0.0, events)

        noise_allowed = not cfg.tr_constrained and self.noise_amplitude > 0
        history: list[float] = []
        best = (h, self.C, list(self.unitaries))
        converged, iterations, grad_norm = False, cfg.max_iters, float("nan")
        for it in range(1, cfg.max_iters + 1):
            generators = self.gradient()
            grad_norm = float(np.sqrt(sum(g.norm**2 for g in generators)))
            if grad_norm < cfg.grad_tol:
                converged, iterations = True, it - 1
                break

            step = line_search(self.C, combine(generators), self.objective, cfg, h0=h)
            if not step.stalled:
                self._rotate(generators, step.dt)
                h = step.h_new
                if h < best[0]:
                    best = (h, self.C, list(self.unitaries))
            history.append(grad_norm)

            for event in events:
                if not event.escaped and h < event.h - ESCAPE_DROP:
                    event.escaped = True
                    self.noise_amplitude *= 0.5
                    logging.info(f"Escaped plateau at h={event.h:.6f}; noise amplitude now {self.noise_amplitude:.2e}")

            trigger = "stall" if step.stalled else None
            if trigger is None and _plateaued(history, cfg.plateau_window, cfg.plateau_rtol):
                trigger = "plateau"
            label = ""
            if trigger and noise_allowed and cfg.noise_schedule.fires_on(trigger):
                events.append(SaddleEvent(it, h, grad_norm, trigger))
                self._inject_noise()
                h = self.objective(self.C)
                history.clear()
                label = f"noise:{trigger}"
                logging.info(f"Iteration {it}: {trigger} at grad norm {grad_norm:.3e}, injected noise, h={h:.6f}")
            elif step.stalled:
                trace.append(TraceRow(it, h, grad_norm, 0.0, "stall"))
                iterations = it
                logging.warning(f"Line search stalled at iteration {it} with grad norm {grad_norm:.3e}")
                break
            trace.append(TraceRow(it, h, grad_norm, step.dt, label))
            if it % cfg.log_every == 0:
                logging.info(f"Iteration {it}: h={h:.6f}, grad norm={grad_norm:.3e}, step={step.dt:.3g}")

        if h > best[0]:
            h, self.C, self.unitaries = best
            trace.append(TraceRow(iterations, h, grad_norm, 0.0, "best"))
            logging.info(f"Restored the lowest accepted point, h={h:.6f}")
        if converged:
            logging.info(f"Converged after {iterations} iterations: h={h:.6f}")
        else:
            logging.warning(f"Stopped after {iterations} iterations without reaching grad_tol: h={h:.6f}")
        return OptimizationReport(
            bare_h, h, trace, self.final_generators(), converged, iterations, grad_norm, events
        )


def optimize(
    C,
    partition: Tripartition,
    supports: SmootherSupport,
    config: OptimizerConfig,
    modes: Optional[ModeMask] = None,
    tr_op: Optional[np.ndarray] = None,
    initial_generators: Optional[Mapping[str, Generator]] = None,
) -> OptimizationReport:
    """
    Minimize h(A:B) over smoother unitaries.

    ``modes`` lists the global modes carried by ``C`` (all lattice modes when
    omitted); ``tr_op`` is the time-reversal operator on the same modes and is
    required when ``config.tr_constrained`` is set.
    """
    disentangler = Disentangler(C, partition, supports, config, modes, tr_op)
    bare = gap_components(disentangler.C, disentangler.a, disentangler.b)
    if initial_generators:
        disentangler.warm_start(initial_generators)
    report = disentangler.run(bare.markov_gap)
    report.bare_components = bare
    report.final_components = gap_components(disentangler.C, disentangler.a, disentangler.b)
    return report


def save_generators(path, generators: Mapping[str, Generator]) -> Path:
    path = Path(path)
    arrays = {}
    for name, gen in generators.items():
        arrays[f"{name}__support"] = gen.support.array
        arrays[f"{name}__X"] = gen.X
    np.savez(path, **arrays)
    return path if path.suffix == ".npz" else path.with_name(path.name + ".npz")


def load_generators(path) -> dict[str, Generator]:
    with np.load(Path(path)) as data:
        names = sorted({key.rsplit("__", 1)[0] for key in data.files})
        return {
            name: Generator(ModeMask(tuple(data[f"{name}__support"].tolist())), data[f"{name}__X"])
            for name in names
        }
