"""Numerical laboratory for gradient-descent maps of small piecewise
analytic networks."""

from .calculus import (
    EvalResult,
    Jet2,
    PiecewiseFn,
    PiecewiseValidationError,
    activation_from_key,
    eval012,
    figure1_loss,
    jet2_add,
    jet2_lift,
    jet2_mul,
    jet2_scale,
    make_piecewise,
)
from .network import (
    Dense,
    NetworkSpec,
    ParamVector,
    SoftmaxAttention,
    Tied,
    breakpoint_proximity,
    conv1d_tie_pattern,
    forward,
    forward_jet2,
    spec_from_json,
    spec_to_json,
)
from .objective import (
    Dataset,
    LossSpec,
    NetworkObjective,
    ScalarObjective,
    appendix_c_objective,
    empirical_loss,
    figure1_objective,
    loss_jet2,
    minibatch_loss,
    objective_by_name,
    quadratic_objective,
)
from .dynamics import (
    DetProbeResult,
    GDConfig,
    Trajectory,
    det_and_eigs,
    det_probe,
    gd_jacobian,
    gd_map,
    iterate,
    region_image_probe,
    sgd_step,
    singular_stepsizes,
    step_rng,
)
from .orbits import (
    OrbitRecord,
    bifurcation_sweep,
    classify_orbit,
    diagonal_map,
    find_periodic_1d,
    find_periodic_nd,
)
from .stability import (
    StabilityConfig,
    StableArcs,
    classify_minimum_generic,
    lambda_sgd,
    mu,
    stable_arcs,
)
