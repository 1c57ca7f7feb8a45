"""Model-hierarchy predictive control.

Multi-phase trajectory optimization over a schedule of full and reduced
robot models, solved by hybrid-systems DDP, plus a receding-horizon runtime
and benchmark harness.
"""

from .errors import (
    ConfigurationError,
    MHPCError,
    ParameterError,
    RegularizationError,
    RolloutDivergenceError,
    ScheduleExhaustedError,
    SingularContactError,
)
from .multiphase import (
    MultiPhaseProblem,
    PhaseDefinition,
    PhaseTrajectory,
    rollout,
    rollout_phases,
    shift_problem,
    total_cost,
)
from .hsddp import (
    AffinePolicy,
    ALReBParams,
    PhasePolicies,
    QExpansion,
    Solution,
    ValueExpansion,
    augment_phase,
    backward_sweep,
    forward_sweep,
    inner_solve,
    outer_update,
    q_expansion,
    reduced_barrier,
    solve,
    transition_value_update,
    value_step,
    write_iteration_trace,
)

__version__ = "0.1.0"
