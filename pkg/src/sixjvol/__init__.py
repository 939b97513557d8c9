"""Quantum 6j-symbol transforms and hyperbolic volumes of truncated tetrahedra."""

__version__ = "0.1.0"

from .qcore import (
    Coloring6,
    PhaseLog,
    RootContext,
    SignedAccumulator,
    SignedLog,
    admissible_six,
    admissible_triple,
    brace_factorial_log_abs,
    dft_kernel,
    quantum_factorial,
    quantum_integer,
    sixj,
    sixj_batch,
    triangle_factor,
)
from .transform import (
    DeepPartition,
    DftInput,
    DftResult,
    cancellation_depth,
    dft_tetra,
    dft_tetra_mp,
    duality_check,
    duality_factor,
)
from .geometry import (
    CriticalData,
    PotentialPoint,
    TetraSpec,
    complex_potential,
    covolume,
    critical_point,
    critical_potential,
    deep_angles,
    dilog,
    gram_matrix,
    lengths_from_angles,
    lobachevsky,
    real_potential,
    tetra_exists,
    volume,
)
from .asymptotics import (
    COLORING_RULES,
    DEFAULT_COLORING_RULE,
    FitResult,
    RunRecord,
    angle_sweep,
    coloring_for,
    fit_growth,
    run_conjecture,
)

__all__ = [
    "__version__",
    "Coloring6", "PhaseLog", "RootContext", "SignedAccumulator", "SignedLog",
    "admissible_six", "admissible_triple", "brace_factorial_log_abs", "dft_kernel",
    "quantum_factorial", "quantum_integer", "sixj", "sixj_batch", "triangle_factor",
    "DeepPartition", "DftInput", "DftResult", "dft_tetra", "dft_tetra_mp",
    "cancellation_depth", "duality_check", "duality_factor",
    "CriticalData", "PotentialPoint", "TetraSpec", "complex_potential", "covolume",
    "critical_point", "critical_potential", "deep_angles", "dilog", "gram_matrix",
    "lengths_from_angles", "lobachevsky", "real_potential", "tetra_exists", "volume",
    "COLORING_RULES", "DEFAULT_COLORING_RULE", "FitResult", "RunRecord",
    "angle_sweep", "coloring_for", "fit_growth", "run_conjecture",
]
