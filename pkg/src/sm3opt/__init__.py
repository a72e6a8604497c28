"""Memory-efficient adaptive optimization over parameter covers.

The SM3 family keeps one second-moment accumulator per cover set instead
of one per parameter, cutting optimizer state from d scalars to k, where
covers built from tensor slices give k = sum of the tensor's dims.
Includes Adagrad and Adam baselines, an online convex problem suite,
regret/memory metrics, and a config-driven experiment CLI.
"""

from .cover import (
    AxisCover,
    Cover,
    CoverSpec,
    CoverStats,
    GenericCover,
    axis_cover,
    full_axis_cover,
    load_cover,
    save_cover,
    singleton_cover,
)
from .metrics import (
    DumpRow,
    MemoryAccount,
    RunRecord,
    accumulator_dump,
    memory_account,
    regret,
    regret_bound_rhs,
)
from .optim import (
    ALGORITHMS,
    Adagrad,
    Adam,
    OptimizerConfig,
    SM3I,
    SM3II,
    StepDiagnostics,
    apply_momentum,
    build_optimizer,
    project_linf,
)
from .problems import (
    ActivationPatternSpec,
    LinearAdversaryProblem,
    Problem,
    QuadraticProblem,
    SparseLogregProblem,
    linear_adversary_problem,
    quadratic_problem,
    sparse_logreg_problem,
)
from .runner import ShadowAccumulators, execute_compare, execute_run
from .schedules import ScheduleSpec, schedule_multiplier
from .tensor import ParamTensor, Shape, broadcast_min, elementwise, slice_reduce

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "ActivationPatternSpec",
    "Adagrad",
    "Adam",
    "AxisCover",
    "Cover",
    "CoverSpec",
    "CoverStats",
    "DumpRow",
    "GenericCover",
    "LinearAdversaryProblem",
    "MemoryAccount",
    "OptimizerConfig",
    "ParamTensor",
    "Problem",
    "QuadraticProblem",
    "RunRecord",
    "SM3I",
    "SM3II",
    "ScheduleSpec",
    "Shape",
    "ShadowAccumulators",
    "SparseLogregProblem",
    "StepDiagnostics",
    "accumulator_dump",
    "apply_momentum",
    "axis_cover",
    "broadcast_min",
    "build_optimizer",
    "elementwise",
    "execute_compare",
    "execute_run",
    "full_axis_cover",
    "linear_adversary_problem",
    "load_cover",
    "memory_account",
    "project_linf",
    "quadratic_problem",
    "regret",
    "regret_bound_rhs",
    "save_cover",
    "schedule_multiplier",
    "singleton_cover",
    "slice_reduce",
    "sparse_logreg_problem",
]
