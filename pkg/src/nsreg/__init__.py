"""Scale-invariant interior-regularity diagnostics for 3-D incompressible flow fields."""

__version__ = "0.1.0"

from .criteria import (  # noqa: E402
    CriterionVerdict,
    DecayTrace,
    IterationParams,
    decay_trace,
    eps_regularity,
    evaluate_criterion,
    report,
)
from .errors import (  # noqa: E402
    ExponentError,
    FieldFormatError,
    NsregError,
    NumericalError,
    ScaleError,
    ValidationError,
)
from .exponents import ExponentPair  # noqa: E402
from .field import FlowParams, Snapshot, SpaceTimeField, constant_field, from_snapshots, rescale_field  # noqa: E402
from .generate import generate_field, random_solenoidal  # noqa: E402
from .grid import Grid3  # noqa: E402
from .inequalities import (  # noqa: E402
    InequalityCheck,
    TestFunction,
    build_test_function,
    check_energy_bound,
    check_global_bounds,
    check_harmonic_lemma,
    check_interpolation,
    check_poincare_reduction,
    check_pressure_decay,
    local_energy_residual,
)
from .io import load_field, persist_field  # noqa: E402
from .pressure import build_cutoff, decompose_cutoff, decompose_sec3, pressure_field, solve_pressure  # noqa: E402
from .quantities import mixed_norm, quantity, quantity_sweep  # noqa: E402
from .regions import CylinderSpec  # noqa: E402
from .solver import ns_evolve  # noqa: E402
from .spectral import differential_op, leray_project  # noqa: E402

__all__ = [
    "__version__",
    "CriterionVerdict",
    "CylinderSpec",
    "DecayTrace",
    "ExponentError",
    "ExponentPair",
    "FieldFormatError",
    "FlowParams",
    "Grid3",
    "InequalityCheck",
    "IterationParams",
    "NsregError",
    "NumericalError",
    "ScaleError",
    "Snapshot",
    "SpaceTimeField",
    "TestFunction",
    "ValidationError",
    "build_cutoff",
    "build_test_function",
    "check_energy_bound",
    "check_global_bounds",
    "check_harmonic_lemma",
    "check_interpolation",
    "check_poincare_reduction",
    "check_pressure_decay",
    "constant_field",
    "decay_trace",
    "decompose_cutoff",
    "decompose_sec3",
    "differential_op",
    "eps_regularity",
    "evaluate_criterion",
    "from_snapshots",
    "generate_field",
    "leray_project",
    "load_field",
    "local_energy_residual",
    "mixed_norm",
    "ns_evolve",
    "persist_field",
    "pressure_field",
    "quantity",
    "quantity_sweep",
    "random_solenoidal",
    "report",
    "rescale_field",
    "solve_pressure",
]
