"""pohomin: ground states of -Δu + λu = f(u) in R³ on the Pohozaev manifold."""

from .grid import (
    RadialGrid,
    RadialFunction,
    trapezoid,
    nodal_derivative,
    radial_integral,
    grad_l2_sq,
    h1_norm_sq,
    rescale,
)
from .nonlinearity import (
    NonlinearityModel,
    InfeasibleFamilyError,
    make_power,
    make_asym_linear,
    make_quintic,
    make_nonmonotone,
    G_eval,
    monotonicity_probe,
    two_maxima_profile,
)
from .energy import (
    ProjectionInfeasible,
    ProjectionResult,
    action_I,
    pohozaev_J,
    project_t,
    project,
    h_eval,
    h_prime,
    fiber_scan,
    count_interior_maxima,
)
from .descent import (
    DescentDirection,
    SorNonConvergence,
    assemble_system,
    sor_solve,
    steepest_direction,
)
from .solver import (
    SolverConfig,
    SolveResult,
    LineSearchAnomaly,
    initial_guess,
    line_minimize,
    scan_minimize,
    solve,
    scaling_check,
    ode_residual,
)

__version__ = "0.1.0"
