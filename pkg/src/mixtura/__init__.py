"""Density operators, partial traces, purification and ensemble steering."""

from .decompositions import (
    SchmidtDecomposition,
    SteeringResult,
    ancilla_realize,
    ghjw_steer,
    lemma_unitary,
    purify,
    schmidt,
)
from .errors import (  # noqa: F401
    AncillaTooSmall,
    DegenerateWeights,
    DimensionMismatch,
    DuplicateKet,
    InvariantViolation,
    MarginalMismatch,
    MarginalsDiffer,
    MixturaError,
    NotADecomposition,
    NotHermitian,
    NotNormalized,
    StateFileSyntaxError,
    WeightsNotNormalized,
    ZeroVector,
)
from .numerics import DEFAULT_TOL, Tolerance, dagger, eig_hermitian, svd, tensor
from .scenarios import (
    PreparationModel,
    ScenarioReport,
    Verdict,
    combine_distinguishable,
    combine_indistinguishable,
    despagnat_scenario,
    premeasurement,
    prepare_with_environment,
)
from .states import (
    BipartiteDims,
    DensityOperator,
    Ensemble,
    Ket,
    convex_mix,
    is_pure,
    is_uncorrelated,
    partial_trace,
    projector,
    purity,
)
from .stateio import StateFile, parse_state_file, serialize_state_file

__version__ = "0.1.0"
