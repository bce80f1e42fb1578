from find_markov_gap.optimizer.config import NoiseSchedule, OptimizerConfig
from find_markov_gap.optimizer.disentangler import (
    Disentangler,
    OptimizationReport,
    SaddleEvent,
    TraceRow,
    load_generators,
    optimize,
    save_generators,
)
from find_markov_gap.optimizer.generators import (
    Generator,
    apply_unitary,
    combine,
    exp_generator,
    generator_from_unitary,
    project_tr,
    random_generator,
)
from find_markov_gap.optimizer.kernels import (
    descent_commutator,
    gap_kernel,
    gradient_generator,
    mutual_info_kernel,
    reflected_kernel,
)
from find_markov_gap.optimizer.line_search import LineSearchResult, line_search, search_step

__all__ = [
    "NoiseSchedule",
    "OptimizerConfig",
    "Disentangler",
    "OptimizationReport",
    "SaddleEvent",
    "TraceRow",
    "load_generators",
    "optimize",
    "save_generators",
    "Generator",
    "apply_unitary",
    "combine",
    "exp_generator",
    "generator_from_unitary",
    "project_tr",
    "random_generator",
    "descent_commutator",
    "gap_kernel",
    "gradient_generator",
    "mutual_info_kernel",
    "reflected_kernel",
    "LineSearchResult",
    "line_search",
    "search_step",
]
