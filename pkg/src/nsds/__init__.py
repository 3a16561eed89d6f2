"""Discontinuous dynamical systems toolkit.

Simulation under convexified (Filippov-style), integral (Caratheodory-style),
and sample-and-hold solution semantics; generalized gradients and proximal
subdifferentials for a closed nonsmooth function class; set-valued Lie
derivatives and sample-based Lyapunov certification.
"""

from .errors import (
    DegenerateSurfaceError,
    DimensionMismatchError,
    EmptySetError,
    ModelError,
    NotSlidingError,
    NsdsError,
    SingularityError,
    UnsupportedError,
)
from .fields import (
    ControlField,
    PiecewiseField,
    SurfaceClassification,
    SwitchingSurface,
    classify_point,
    control_inclusion,
    field_from_config,
    filippov_set,
    one_sided_lipschitz_test,
    sliding_field,
    transversality_test,
)
from .geometry import (
    ConvexPolygon,
    Polytope,
    affine_image,
    contains,
    hausdorff_distance,
    least_norm,
    maximin_value,
    minkowski_sum,
    support,
)
from .integrate import (
    ConsensusResult,
    IntegratorConfig,
    PartitionSchedule,
    Trajectory,
    consensus_flow,
    gradient_flow,
    integrate_caratheodory,
    integrate_filippov,
    limit_set_estimate,
    sample_and_hold,
)
from .lie import (
    GridSpec,
    LieInterval,
    StabilityReport,
    exclude_band,
    invariance_candidate_set,
    lower_upper_lie,
    lyapunov_certify,
    monotonicity_verdict,
    set_lie_derivative,
)
from .nonsmooth import (
    ALL_SPACE,
    UNSUPPORTED,
    GradientResult,
    Graph,
    NsFunction,
    descent_direction,
    descent_inequality_check,
    disagreement,
    generalized_gradient,
    hsp,
    make_function,
    proximal_subdifferential,
    smq,
    smq_gradient,
)
from .scenarios import SCENARIOS, RunSpec, Scenario, get_scenario, run_batch

__version__ = "0.1.0"
