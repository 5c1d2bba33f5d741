"""Gaussian random fields on compact metric graphs.

Construction and validation of metric graphs; geodesic and resistance
metrics; exact Markov fields of unit smoothness exponent via per-edge
Neumann fields conditioned on vertex continuity; spectral covariances and
Karhunen-Loeve sampling for arbitrary exponents; kriging; and numeric
demonstrators of the isotropy/Markov incompatibility on composite graphs.
"""

from .errors import (
    ConditioningError,
    DanglingEndpointError,
    DegenerateCaseError,
    DisconnectedGraphError,
    GraphFieldError,
    GraphValidationError,
    MeshResolutionError,
    NonPositiveLengthError,
    NotPositiveDefiniteError,
    NumericalError,
    PointError,
    UnsupportedAlphaError,
    UnsupportedGraphError,
    ValidationError,
)
from .graph import (
    Edge,
    GraphClass,
    MetricGraph,
    PointOnGraph,
    build_graph,
    canonical,
    circle,
    classify,
    figure_eight,
    interval,
    mesh,
    one_sum,
    star,
    subdivide_edge,
    tadpole,
)
from .metrics import (
    ResistanceStructure,
    geodesic_distance,
    resistance_distance,
    resistance_structure,
)
from .models import CovMatrix, FieldModel
from .kernels import (
    CircleMarkovKernel,
    ExponentialKernel,
    GapResult,
    IsotropicModel,
    circle_cov,
    cycle_plus_edge_profile,
    iso_cov_matrix,
    nonexistence_gap,
    two_cycles_profile,
)
from .exact import (
    EdgeBasis,
    bridge_cov,
    condition_on_constraints,
    continuity_constraints,
    edge_basis,
    endpoint_prior_cov,
    full_cov,
    kirchhoff_residual,
    markov_check,
    neumann_edge_cov,
    sample,
    vertex_field_cov,
)
from .spectral import DiscreteOperator, assemble, kl_sample, spectral_cov
from .inference import KrigingResult, exact_cov_source, krige, loglik

__version__ = "0.1.0"
