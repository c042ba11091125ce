"""Truncated-Fock-space simulator of a cubic-gate receiver for binary coherent states."""
from .decomposition import (
    DecompositionPlan,
    ResourceCount,
    commutator_sequence,
    error_scaling_exponent,
    gate_count_comparison,
    iterated_unitary,
    resource_table,
    splitting_sequence,
)
from .errors import (
    ContractViolation,
    CvrxError,
    DegenerateInputError,
    InsufficientSignalError,
    InvalidDimensionError,
    NumericError,
    TruncationError,
)
from .gates import GateSequence, GateSpec, gate_matrix, sequence_matrix
from .information import BinaryChannel, bac_capacity, bac_capacity_closed_form, binary_entropy, pie, pie_bound
from .noise import DetectorModel, LossModel, loss_channel
from .optimize import OptimizeReport, minimize_multi, minimize_scalar
from .receivers import (
    ErrorRateResult,
    ReceiverConfig,
    decomposed,
    decomposed_noisy,
    helstrom,
    homodyne,
    kennedy,
    optimize_squeezing_mitigation,
    optimized_displacement,
    optimized_displacement_squeezing,
    sh_exact,
)
from .sasaki_hirota import coefficients, generator, optimal_time

__version__ = "0.1.0"
