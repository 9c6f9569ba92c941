"""Fixed points of enriched contractions in 2-normed spaces.

The package certifies (b, theta)-enriched contractivity of a self-map, turns
the certificate into the averaged Krasnoselskij iteration with factor
d = theta/(b+1), and drives it to the unique fixed point with a posteriori
stopping and a priori tail bounds, all measured in a 2-norm against a finite
witness set.
"""

from .space import (
    AxiomReport,
    AxiomViolation,
    SpaceElement,
    SpaceKind,
    TwoNormSpace,
    WitnessSet,
    check_axioms,
    cross2_norm,
    cross2_space,
    gram_norm,
    gram_space,
    in_closed_ball,
    in_open_ball,
    seminorm,
    standard_basis,
    two_norm,
    two_norm_batch,
    witness_residual,
)
from .mapping import (
    Averaged,
    Iterated,
    PiecewiseTwoSet,
    Reflection,
    ScalarAffine,
    SelfMap,
    SupNormRegion,
    affine_reduction,
    averaged,
    default_piecewise,
    iterated,
)
from .analyzer import (
    ContractionCheck,
    EnrichedCertificate,
    NotCertifiableError,
    Provenance,
    SamplingBox,
    ThetaEstimate,
    certify,
    certify_sampled,
    estimate_theta,
    optimize_b,
    theta_scalar_affine,
    verify_averaged_contraction,
)
from .solver import (
    Box,
    Domain,
    IterationTrace,
    SolveConfig,
    SolveReport,
    SolveStatus,
    TraceRow,
    TwoNormBall,
    aposteriori_step_threshold,
    apriori_bound,
    asymptotic_solve,
    detect_cycle,
    krasnoselskij_solve,
    local_ball_solve,
    picard_solve,
)
from .cli import (
    ScenarioConfig,
    ScenarioError,
    emit_report,
    emit_trace_csv,
    parse_scenario,
    parse_scenario_text,
    run_scenario,
    write_scenario,
)

__version__ = "0.1.0"
