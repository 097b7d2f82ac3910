"""Kaczmarz linear-system solver simulator.

Classical randomized row-projection iteration, a matrix-level
block-encoding algebra with a unitary and an encoded-operator backend,
the five-step quantum iteration built from that algebra, resource and
complexity accounting, and a reproducible experiment harness.
"""

__version__ = "0.1.0"

from ._kernels import KERNEL_BACKEND
from .blockenc import (AmplificationWindowError, BlockEncoding, StatePrepCost,
                       amplification_query_count, be_amplify,
                       be_linear_combination, be_product, be_scale_down,
                       be_tensor, dilate, encoded_of, principal_column,
                       promote_system_to_ancilla, state_prep,
                       validate_block_encoding)
from .experiments import ConfigError, ExperimentConfig, run_experiment
from .instances import (InstanceSpec, generate_instance, read_system,
                        write_system)
from .kaczmarz import (IterateTrace, LinearSystem, SelectionStrategy,
                       convergence_bound, iteration_count, kaczmarz_step,
                       run_kaczmarz, select_row, t_lower_bound, t_upper_bound)
from .linalg import (SpectralSummary, least_squares_oracle, spectral_summary,
                     svd)
from .pipeline import (DimensionGuardError, MeasurementOutcome,
                       QuantumIterationState, measure, run_quantum_kaczmarz,
                       step1_inner_product, step2_rx, step3_residual_column,
                       step4_combine, step5_deflate)
from .resources import (ComplexityEstimate, ResourceLedger, StepRecord,
                        ledger_advance, ledger_closed_form, theorem1_estimate)

__all__ = [
    "__version__",
    "KERNEL_BACKEND",
    "AmplificationWindowError",
    "BlockEncoding",
    "StatePrepCost",
    "amplification_query_count",
    "be_amplify",
    "be_linear_combination",
    "be_product",
    "be_scale_down",
    "be_tensor",
    "dilate",
    "encoded_of",
    "principal_column",
    "promote_system_to_ancilla",
    "state_prep",
    "validate_block_encoding",
    "ConfigError",
    "ExperimentConfig",
    "run_experiment",
    "InstanceSpec",
    "generate_instance",
    "read_system",
    "write_system",
    "IterateTrace",
    "LinearSystem",
    "SelectionStrategy",
    "convergence_bound",
    "iteration_count",
    "kaczmarz_step",
    "run_kaczmarz",
    "select_row",
    "t_lower_bound",
    "t_upper_bound",
    "SpectralSummary",
    "least_squares_oracle",
    "spectral_summary",
    "svd",
    "DimensionGuardError",
    "MeasurementOutcome",
    "QuantumIterationState",
    "measure",
    "run_quantum_kaczmarz",
    "step1_inner_product",
    "step2_rx",
    "step3_residual_column",
    "step4_combine",
    "step5_deflate",
    "ComplexityEstimate",
    "ResourceLedger",
    "StepRecord",
    "ledger_advance",
    "ledger_closed_form",
    "theorem1_estimate",
]
