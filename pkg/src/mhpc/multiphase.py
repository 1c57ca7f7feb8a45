"""Multi-phase optimal control problem containers and rollout machinery.

A problem is an ordered list of phases. Within a phase the discrete dynamics
are fixed; consecutive phases are linked by a transition map (an impact, a
projection onto a reduced model, or the identity). State and control
dimensions may differ between phases.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, RolloutDivergenceError, ScheduleExhaustedError

Array = np.ndarray


def _default_state_diff(x: Array, x_ref: Array) -> Array:
    return x - x_ref


@dataclass
class PhaseDefinition:
    """One horizon segment with fixed dynamics.

    All maps are discrete-time. ``dynamics(x, u)`` advances one step of
    ``dt``; ``dynamics_jac`` returns ``(fx, fu)`` in tangent (error-state)
    coordinates of dimension ``deriv_dim``. Costs follow the running +
    terminal split; derivative callables return the full bundle used by the
    backward sweep.

    Optional pieces:
      * ``terminal_constraint``: scalar equality on the phase's final state,
        handled by the solver's multiplier loop.
      * ``path_ineq``: vector inequality h(x, u) >= 0, handled by the
        solver's barrier.
      * ``transition``: map from this phase's final state to the successor's
        initial state, with Jacobian ``transition_jac``.
      * ``dynamics_hess``: second-derivative tensors ``(fxx, fuu, fux)``;
        when absent the solver runs in Gauss-Newton mode.
      * ``state_diff``: generalized difference used for feedback and
        derivative perturbations (quaternion states use a 3-parameter local
        chart; everything else defaults to subtraction).
      * ``trajectory_derivs``: fused hook evaluating all step derivatives of
        a phase trajectory at once; model builders provide batched
        implementations here for speed.
    """

    state_dim: int
    control_dim: int
    horizon: int
    dt: float
    dynamics: Callable[[Array, Array], Array]
    dynamics_jac: Callable[[Array, Array], tuple[Array, Array]]
    running_cost: Callable[[Array, Array], float]
    running_cost_derivs: Callable[[Array, Array], tuple[Array, Array, Array, Array, Array]]
    terminal_cost: Callable[[Array], float]
    terminal_cost_derivs: Callable[[Array], tuple[Array, Array]]
    terminal_constraint: Optional[Callable[[Array], float]] = None
    terminal_constraint_derivs: Optional[Callable[[Array], tuple[Array, Array]]] = None
    path_ineq: Optional[Callable[[Array, Array], Array]] = None
    path_ineq_jac: Optional[Callable[[Array, Array], tuple[Array, Array]]] = None
    transition: Optional[Callable[[Array], Array]] = None
    transition_jac: Optional[Callable[[Array], Array]] = None
    transition_output_dim: Optional[int] = None
    dynamics_hess: Optional[Callable[[Array, Array], tuple[Array, Array, Array]]] = None
    error_dim: Optional[int] = None
    state_diff: Callable[[Array, Array], Array] = _default_state_diff
    trajectory_derivs: Optional[Callable[[Array, Array], Any]] = None
    label: str = ""
    transition_kind: str = "none"

    def __post_init__(self):
        if self.state_dim < 1 or self.control_dim < 0:
            raise ConfigurationError(
                f"invalid dimensions ({self.state_dim}, {self.control_dim})"
            )
        if self.horizon < 1:
            raise ConfigurationError(f"horizon must be >= 1, got {self.horizon}")
        if not self.dt > 0.0:
            raise ConfigurationError(f"time step must be positive, got {self.dt}")

    @property
    def deriv_dim(self) -> int:
        """Dimension of the tangent space the solver differentiates in."""
        return self.state_dim if self.error_dim is None else self.error_dim

    def signature(self) -> tuple:
        """Mode type, timing, and transition kind; used for periodicity checks."""
        return (self.label, self.horizon, self.dt, self.transition_kind)


@dataclass
class MultiPhaseProblem:
    """Ordered phases plus the initial state of the first phase.

    ``rebuild`` is an optional closure installed by problem builders; it
    reconstructs the problem for an advanced schedule position and is what
    :func:`shift_problem` delegates to.
    """

    phases: list[PhaseDefinition]
    initial_state: Array
    rebuild: Optional[Callable[[Any], "MultiPhaseProblem"]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        if len(self.phases) < 1:
            raise ConfigurationError("problem needs at least one phase")
        self.initial_state = np.asarray(self.initial_state, dtype=float)
        if self.initial_state.shape != (self.phases[0].state_dim,):
            raise ConfigurationError(
                f"initial state has shape {self.initial_state.shape}, phase 1 "
                f"expects ({self.phases[0].state_dim},)"
            )
        for i, (a, b) in enumerate(zip(self.phases[:-1], self.phases[1:])):
            if a.transition is None:
                raise ConfigurationError(f"phase {i} has a successor but no transition")
            if a.transition_output_dim is not None and a.transition_output_dim != b.state_dim:
                raise ConfigurationError(
                    f"phase {i} transition outputs dim {a.transition_output_dim}, "
                    f"phase {i + 1} expects {b.state_dim}"
                )

    @property
    def n_phases(self) -> int:
        return len(self.phases)

    def signature(self) -> tuple:
        return tuple(p.signature() for p in self.phases)


@dataclass
class PhaseTrajectory:
    """States, controls, and accumulated cost of one phase rollout."""

    states: Array  # (N + 1, state_dim)
    controls: Array  # (N, control_dim)
    cost: float

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.controls = np.asarray(self.controls, dtype=float)
        if self.states.shape[0] != self.controls.shape[0] + 1:
            raise ConfigurationError(
                f"{self.states.shape[0]} states vs {self.controls.shape[0]} controls"
            )


def _check_controls(phases: Sequence[PhaseDefinition],
                    controls: Sequence[Array]) -> list[Array]:
    if len(controls) != len(phases):
        raise ConfigurationError(
            f"{len(controls)} control sequences for {len(phases)} phases"
        )
    out = []
    for i, (phase, u_seq) in enumerate(zip(phases, controls)):
        u_seq = np.asarray(u_seq, dtype=float)
        expected = (phase.horizon, phase.control_dim)
        if u_seq.shape != expected:
            raise ConfigurationError(
                f"phase {i} controls have shape {u_seq.shape}, expected {expected}"
            )
        out.append(u_seq)
    return out


def rollout_phases(phases: Sequence[PhaseDefinition], initial_state: Array,
                   controls: Sequence[Array]) -> list[PhaseTrajectory]:
    """Integrate a phase list under open-loop controls (see :func:`rollout`)."""
    controls = _check_controls(phases, controls)
    x = np.asarray(initial_state, dtype=float)
    trajectories = []
    for i, (phase, u_seq) in enumerate(zip(phases, controls)):
        states = np.empty((phase.horizon + 1, phase.state_dim))
        if x.shape != (phase.state_dim,):
            raise ConfigurationError(
                f"phase {i} starts with state of shape {x.shape}, "
                f"expected ({phase.state_dim},)"
            )
        states[0] = x
        cost = 0.0
        for k in range(phase.horizon):
            if not np.all(np.isfinite(x)):
                raise RolloutDivergenceError(phase=i, step=k)
            u = u_seq[k]
            cost += float(phase.running_cost(x, u))
            x = np.asarray(phase.dynamics(x, u), dtype=float)
            states[k + 1] = x
        if not np.all(np.isfinite(x)):
            raise RolloutDivergenceError(phase=i, step=phase.horizon)
        cost += float(phase.terminal_cost(x))
        trajectories.append(PhaseTrajectory(states=states, controls=u_seq, cost=cost))
        if i + 1 < len(phases):
            x = np.asarray(phase.transition(x), dtype=float)
            if x.shape != (phases[i + 1].state_dim,):
                raise ConfigurationError(
                    f"phase {i} transition produced shape {x.shape}, phase "
                    f"{i + 1} expects ({phases[i + 1].state_dim},)"
                )
    return trajectories


def rollout(problem: MultiPhaseProblem, controls: Sequence[Array]) -> list[PhaseTrajectory]:
    """Integrate the phase dynamics under the given open-loop controls.

    Costs are accumulated per phase (running sum plus terminal). Raises
    :class:`RolloutDivergenceError` if any state goes non-finite, carrying
    the phase and step index.
    """
    return rollout_phases(problem.phases, problem.initial_state, controls)


def total_cost(problem: MultiPhaseProblem, trajectories: Sequence[PhaseTrajectory]) -> float:
    """Re-evaluate the summed running + terminal cost over all phases."""
    if len(trajectories) != problem.n_phases:
        raise ConfigurationError(
            f"{len(trajectories)} trajectories for {problem.n_phases} phases"
        )
    total = 0.0
    for i, (phase, traj) in enumerate(zip(problem.phases, trajectories)):
        if traj.states.shape != (phase.horizon + 1, phase.state_dim):
            raise ConfigurationError(f"phase {i} trajectory shape mismatch")
        for k in range(phase.horizon):
            total += float(phase.running_cost(traj.states[k], traj.controls[k]))
        total += float(phase.terminal_cost(traj.states[-1]))
    return total


def shift_problem(problem: MultiPhaseProblem, schedule) -> MultiPhaseProblem:
    """Rebuild the problem at an already-advanced schedule position.

    The phase list moves forward by one re-planning unit; the builder that
    created the problem re-derives the model-transition boundary (and its
    constraint) for the new position.
    """
    exhausted = getattr(schedule, "is_exhausted", None)
    if exhausted is not None and exhausted():
        raise ScheduleExhaustedError("schedule has no remaining horizon")
    if problem.rebuild is None:
        raise ConfigurationError("problem carries no schedule builder to shift with")
    return problem.rebuild(schedule)
