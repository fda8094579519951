"""cascadecomp: compensator synthesis and simulation for cascade linear
systems driven through actuator dynamics.

Subpackages cover dense matrix operations (matops), the Sylvester
decoupling equation (sylvester), the finite-dimensional design pipeline
(cascade_fd), the input-delay compensator (delay_comp), the heat/ODE
compensator (heat_ode), finite-difference simulation (pde_sim) and the
batch CLI (cli).
"""

from .cascade_fd import (
    CascadePlant,
    CompensatorGains,
    closed_loop_matrix,
    controllability_rank,
    design_compensator,
    place_poles_siso,
    simulate_cascade,
)
from .delay_comp import (
    DelayPlant,
    TransportState,
    history_controller,
    pde_controller,
    predictor_gain,
    simulate_delay_closed_loop,
    transport_s_apply,
)
from .errors import (
    CascadeCompError,
    ConfigError,
    ContourError,
    DesignError,
    DimensionError,
    DivergenceError,
    InfeasibleDesignError,
    InputError,
    NumericalError,
    SingularMatrixError,
    SpectrumSeparationError,
    UncontrollableModeError,
)
from .heat_ode import (
    HeatOdePlant,
    ModalGains,
    PsiKernel,
    design_heat_compensator,
    galerkin_spectrum,
    heat_controller,
    input_shape_b,
    kn_apply,
    modal_coeff,
    psi_eval,
    select_n,
)
from .matops import cosh_sqrt, eig, expm, sinhc_sqrt, solve_linear
from .pde_sim import (
    SimConfig,
    backend_name,
    simulate_heat_closed_loop,
    simulate_heat_open_loop,
)
from .results import SimResult, export_csv
from .sylvester import Contour, SylvesterProblem, residual, solve_contour, solve_direct

__version__ = "0.1.0"
