"""Shared phase-construction helpers for the test suite."""

import numpy as np

from mhpc.multiphase import MultiPhaseProblem, PhaseDefinition


def lqr_phase(A, B, Q, R, Qf, N, dt=1.0, transition=None, transition_jac=None,
              transition_output_dim=None, terminal_constraint=None,
              terminal_constraint_derivs=None, label="lqr"):
    """Linear dynamics with quadratic costs (0.5 factors)."""
    n, m = B.shape
    zero_ux = np.zeros((m, n))

    return PhaseDefinition(
        state_dim=n,
        control_dim=m,
        horizon=N,
        dt=dt,
        dynamics=lambda x, u: A @ x + B @ u,
        dynamics_jac=lambda x, u: (A, B),
        running_cost=lambda x, u: 0.5 * x @ Q @ x + 0.5 * u @ R @ u,
        running_cost_derivs=lambda x, u: (Q @ x, R @ u, Q, R, zero_ux),
        terminal_cost=lambda x: 0.5 * x @ Qf @ x,
        terminal_cost_derivs=lambda x: (Qf @ x, Qf),
        terminal_constraint=terminal_constraint,
        terminal_constraint_derivs=terminal_constraint_derivs,
        transition=transition,
        transition_jac=transition_jac,
        transition_output_dim=transition_output_dim,
        label=label,
    )


def lqr_problem(A, B, Q, R, Qf, N, x0):
    return MultiPhaseProblem(phases=[lqr_phase(A, B, Q, R, Qf, N)], initial_state=x0)


def point_mass_phase(N, dt, target=None, control_weight=1.0,
                     terminal_constraint=None, terminal_constraint_derivs=None,
                     transition=None, transition_jac=None, label="mass"):
    """1-D double integrator (position, velocity), force control."""
    A = np.array([[1.0, dt], [0.0, 1.0]])
    B = np.array([[0.0], [dt]])
    w = control_weight * dt

    return PhaseDefinition(
        state_dim=2,
        control_dim=1,
        horizon=N,
        dt=dt,
        dynamics=lambda x, u: A @ x + B @ u,
        dynamics_jac=lambda x, u: (A, B),
        running_cost=lambda x, u: 0.5 * w * float(u @ u),
        running_cost_derivs=lambda x, u: (
            np.zeros(2), w * u, np.zeros((2, 2)), w * np.eye(1), np.zeros((1, 2)),
        ),
        terminal_cost=lambda x: 0.0,
        terminal_cost_derivs=lambda x: (np.zeros(2), np.zeros((2, 2))),
        terminal_constraint=terminal_constraint,
        terminal_constraint_derivs=terminal_constraint_derivs,
        transition=transition,
        transition_jac=transition_jac,
        transition_output_dim=2 if transition is not None else None,
        label=label,
    )
