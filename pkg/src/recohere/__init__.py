"""Recovery of damped cavity-field superpositions via post-selected atom probes.

The pipeline: a pure field state decoheres under zero-temperature photon
loss; two-level atoms are sent through the cavity one at a time, each
prepared in an optimized superposition, coupled resonantly for an optimized
pulse area, and post-selected in an optimized final state. Accepting only
the successful post-selections steers the field back toward the original
superposition with quantifiable probability.
"""
from .damping import DampingSpec, apply_damping, lindblad_rhs, loss_kraus, rk4_evolve
from .errors import (
    IntegrationQualityError,
    InternalConsistencyError,
    OptimizationFailedError,
    RecoveryError,
    TruncationLeakError,
    ValidationError,
    ZeroProbabilityError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    baseline_states,
    export_qgrids,
    load_config,
    run_experiment,
)
from .jaynes_cummings import JcInteraction, evolve_composite, jc_unitary
from .measurement import PROBABILITY_FLOOR, CmOutcome, CmParams, cm_step, conditional_measure
from .metrics import (
    CostSpec,
    QGrid,
    QGridSpec,
    cost,
    distance,
    error_matrix,
    filtering_probability,
    q_function,
)
from .optimizer import (
    OptimizerConfig,
    RecoveryRecord,
    SaturationSummary,
    optimize_single_cm,
    run_sequence,
    saturation_report,
)
from .reference_runs import CASES, REFERENCE_CM, reference_config
from .states import (
    AtomKet,
    CompositeDensityMatrix,
    FieldDensityMatrix,
    FieldKet,
    compose_with_atom,
    engine_n_max,
    partial_trace_atom,
    pure_density,
    purity,
)
from .version import __version__

__all__ = [
    "AtomKet",
    "CASES",
    "CmOutcome",
    "CmParams",
    "CompositeDensityMatrix",
    "CostSpec",
    "DampingSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "FieldDensityMatrix",
    "FieldKet",
    "IntegrationQualityError",
    "InternalConsistencyError",
    "JcInteraction",
    "OptimizationFailedError",
    "OptimizerConfig",
    "PROBABILITY_FLOOR",
    "QGrid",
    "QGridSpec",
    "REFERENCE_CM",
    "RecoveryError",
    "RecoveryRecord",
    "SaturationSummary",
    "TruncationLeakError",
    "ValidationError",
    "ZeroProbabilityError",
    "__version__",
    "apply_damping",
    "baseline_states",
    "cm_step",
    "compose_with_atom",
    "conditional_measure",
    "cost",
    "distance",
    "engine_n_max",
    "error_matrix",
    "evolve_composite",
    "export_qgrids",
    "filtering_probability",
    "jc_unitary",
    "lindblad_rhs",
    "load_config",
    "loss_kraus",
    "optimize_single_cm",
    "partial_trace_atom",
    "pure_density",
    "purity",
    "q_function",
    "reference_config",
    "rk4_evolve",
    "run_experiment",
    "run_sequence",
    "saturation_report",
]
