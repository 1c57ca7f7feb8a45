"""Hybrid-systems DDP with augmented-Lagrangian terminal constraints and
relaxed-barrier path constraints.

The solver minimizes the multiplier-augmented cost of a
:class:`~mhpc.multiphase.MultiPhaseProblem` by alternating DDP inner solves
with multiplier/penalty updates. Phase boundaries are handled by propagating
the local value expansion through the transition Jacobian, so impacts and
model projections are first-class citizens of the backward sweep.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    MHPCError,
    ParameterError,
    RegularizationError,
    RolloutDivergenceError,
)
from .multiphase import (
    MultiPhaseProblem,
    PhaseDefinition,
    PhaseTrajectory,
    rollout_phases,
)

Array = np.ndarray


# ---------------------------------------------------------------------------
# parameters and local-expansion containers
# ---------------------------------------------------------------------------


@dataclass
class ALReBParams:
    """Multiplier-loop state and solver options.

    ``lam``, ``sigma``, ``delta`` hold one entry per phase. ``sigma`` grows
    by ``beta_sigma`` and ``delta`` shrinks by ``beta_delta`` at every outer
    update. With ``penalty_is_squared`` the terminal-constraint penalty
    coefficient is ``(sigma / 2)**2``; switching it off uses the more common
    ``sigma / 2``.
    """

    lam: Array
    sigma: Array
    delta: Array
    beta_sigma: float = 5.0
    beta_delta: float = 0.2
    outer_tol: float = 1e-3
    max_outer_iters: int = 10
    max_inner_iters: int = 100
    inner_tol: float = 1e-6
    penalty_is_squared: bool = True
    reg_init: float = 0.0
    reg_min: float = 0.0
    reg_max: float = 1e8
    alpha_trials: int = 11  # line search tries alpha = 2**0 .. 2**-(trials-1)

    def __post_init__(self):
        self.lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        self.sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        self.delta = np.atleast_1d(np.asarray(self.delta, dtype=float))
        if np.any(self.sigma <= 0.0):
            raise ParameterError("penalty coefficients must be positive")
        if np.any(self.delta <= 0.0):
            raise ParameterError("barrier relaxations must be positive")
        if not self.beta_sigma > 1.0:
            raise ParameterError("beta_sigma must exceed 1")
        if not 0.0 < self.beta_delta < 1.0:
            raise ParameterError("beta_delta must lie in (0, 1)")

    @classmethod
    def for_problem(
        cls,
        n_phases: int,
        lam: float = 0.0,
        sigma: float = 10.0,
        delta: float = 0.1,
        **kwargs,
    ) -> "ALReBParams":
        return cls(
            lam=np.full(n_phases, lam),
            sigma=np.full(n_phases, sigma),
            delta=np.full(n_phases, delta),
            **kwargs,
        )


@dataclass
class ValueExpansion:
    """Quadratic local model of the cost-to-go: Hessian, gradient, and the
    accumulated expected-improvement scalar."""

    S: Array
    s: Array
    scalar: float = 0.0


@dataclass
class AffinePolicy:
    """Feed-forward correction and feedback gain of one step."""

    kappa: Array
    K: Array


@dataclass
class QExpansion:
    """State-control expansion of the one-step Q function."""

    Qx: Array
    Qu: Array
    Qxx: Array
    Quu: Array
    Qux: Array


@dataclass
class PhasePolicies:
    """Per-step policies of one phase, stored as stacked arrays."""

    kappa: Array  # (N, m)
    K: Array  # (N, m, n)

    def step(self, k: int) -> AffinePolicy:
        return AffinePolicy(kappa=self.kappa[k], K=self.K[k])


class _NotPositiveDefinite(Exception):
    """Internal signal: raise regularization and restart the sweep."""


# ---------------------------------------------------------------------------
# relaxed log barrier
# ---------------------------------------------------------------------------


def reduced_barrier(z, delta: float):
    """Log barrier with a quadratic extension below the relaxation threshold.

    Returns ``(value, first, second)`` derivative arrays, elementwise over
    ``z``. For ``z >= delta`` this is ``-log z``; below, the quadratic that
    matches value, slope, and curvature at ``delta``, so the result is twice
    continuously differentiable and finite for every real ``z``.
    """
    if not delta > 0.0:
        raise ParameterError(f"barrier relaxation must be positive, got {delta}")
    z = np.asarray(z, dtype=float)
    safe = np.maximum(z, delta)
    value = -np.log(safe)
    first = -1.0 / safe
    second = 1.0 / safe**2
    below = z < delta
    if np.any(below):
        r = z - delta  # negative where below
        quad = -np.log(delta) - r / delta + r**2 / (2.0 * delta**2)
        value = np.where(below, quad, value)
        first = np.where(below, -1.0 / delta + r / delta**2, first)
        second = np.where(below, 1.0 / delta**2, second)
    if z.ndim == 0:
        return float(value), float(first), float(second)
    return value, first, second


# ---------------------------------------------------------------------------
# cost augmentation
# ---------------------------------------------------------------------------


class AugmentedPhase:
    """Phase view with multiplier and barrier terms folded into the costs.

    Behaves like a :class:`PhaseDefinition` for rollout purposes; the
    backward sweep additionally reaches through ``base`` for dynamics and
    constraint derivatives.
    """

    def __init__(
        self,
        base: PhaseDefinition,
        lam: float,
        sigma: float,
        delta: float,
        penalty_is_squared: bool = True,
    ):
        if not sigma > 0.0 or not delta > 0.0:
            raise ParameterError("sigma and delta must be positive")
        self.base = base
        self.lam = float(lam)
        self.sigma = float(sigma)
        self.delta = float(delta)
        self.penalty = (sigma / 2.0) ** 2 if penalty_is_squared else sigma / 2.0

    def __getattr__(self, name):
        return getattr(self.base, name)

    # -- running cost -------------------------------------------------

    def running_cost(self, x, u) -> float:
        cost = float(self.base.running_cost(x, u))
        if self.base.path_ineq is not None:
            b, _, _ = reduced_barrier(self.base.path_ineq(x, u), self.delta)
            cost += float(np.sum(b))
        return cost

    def running_cost_derivs(self, x, u):
        lx, lu, lxx, luu, lux = self.base.running_cost_derivs(x, u)
        if self.base.path_ineq is None:
            return lx, lu, lxx, luu, lux
        h = self.base.path_ineq(x, u)
        hx, hu = self.base.path_ineq_jac(x, u)
        _, db, d2b = reduced_barrier(h, self.delta)
        lx = lx + hx.T @ db
        lu = lu + hu.T @ db
        lxx = lxx + (hx.T * d2b) @ hx
        luu = luu + (hu.T * d2b) @ hu
        lux = lux + (hu.T * d2b) @ hx
        return lx, lu, lxx, luu, lux

    # -- terminal cost ------------------------------------------------

    def terminal_cost(self, x) -> float:
        cost = float(self.base.terminal_cost(x))
        if self.base.terminal_constraint is not None:
            g = float(self.base.terminal_constraint(x))
            cost += self.penalty * g * g + self.lam * g
        return cost

    def terminal_cost_derivs(self, x):
        phix, phixx = self.base.terminal_cost_derivs(x)
        if self.base.terminal_constraint is None:
            return phix, phixx
        g = float(self.base.terminal_constraint(x))
        gx, gxx = self.base.terminal_constraint_derivs(x)
        w = 2.0 * self.penalty * g + self.lam
        phix = phix + w * gx
        phixx = phixx + 2.0 * self.penalty * np.outer(gx, gx)
        if gxx is not None:
            phixx = phixx + w * gxx
        return phix, phixx


def augment_phase(
    phase: PhaseDefinition,
    lam: float,
    sigma: float,
    delta: float,
    penalty_is_squared: bool = True,
) -> AugmentedPhase:
    """Fold the constraint machinery of one phase into its cost callables."""
    return AugmentedPhase(phase, lam, sigma, delta, penalty_is_squared)


def augment_problem(problem: MultiPhaseProblem, params: ALReBParams) -> list[AugmentedPhase]:
    if params.lam.shape[0] != problem.n_phases:
        raise ConfigurationError(
            f"params cover {params.lam.shape[0]} phases, problem has {problem.n_phases}"
        )
    return [
        augment_phase(
            phase,
            params.lam[i],
            params.sigma[i],
            params.delta[i],
            params.penalty_is_squared,
        )
        for i, phase in enumerate(problem.phases)
    ]


# ---------------------------------------------------------------------------
# backward sweep building blocks
# ---------------------------------------------------------------------------


def q_expansion(
    l_derivs,
    f_jac,
    next_value: ValueExpansion,
    f_tensors=None,
) -> QExpansion:
    """One-step Q expansion from cost derivatives, dynamics Jacobians, and
    the next step's value expansion. Tensor terms are included only when
    second-derivative tensors are supplied (full-DDP mode)."""
    lx, lu, lxx, luu, lux = l_derivs
    fx, fu = f_jac
    sp, Sp = next_value.s, next_value.S
    Qx = lx + fx.T @ sp
    Qu = lu + fu.T @ sp
    Sfx = Sp @ fx
    Qxx = lxx + fx.T @ Sfx
    Quu = luu + fu.T @ (Sp @ fu)
    Qux = lux + fu.T @ Sfx
    if f_tensors is not None:
        fxx, fuu, fux = f_tensors
        Qxx = Qxx + np.einsum("i,ijk->jk", sp, fxx)
        Quu = Quu + np.einsum("i,ijk->jk", sp, fuu)
        Qux = Qux + np.einsum("i,ijk->jk", sp, fux)
    if not (np.all(np.isfinite(Qx)) and np.all(np.isfinite(Qu))
            and np.all(np.isfinite(Qxx)) and np.all(np.isfinite(Quu))
            and np.all(np.isfinite(Qux))):
        raise MHPCError("non-finite derivative input in Q expansion")
    return QExpansion(Qx=Qx, Qu=Qu, Qxx=Qxx, Quu=Quu, Qux=Qux)


def value_step(q: QExpansion, rho: float, prev_scalar: float = 0.0):
    """Eliminate the control from a Q expansion.

    Returns the value expansion one step earlier and the affine policy.
    Raises the internal positive-definiteness signal when ``Quu + rho I``
    has no Cholesky factor; the sweep catches it and restarts with a larger
    ``rho``.
    """
    m = q.Qu.shape[0]
    n = q.Qx.shape[0]
    if m == 0:
        policy = AffinePolicy(kappa=np.zeros(0), K=np.zeros((0, n)))
        S = 0.5 * (q.Qxx + q.Qxx.T)
        return ValueExpansion(S=S, s=q.Qx.copy(), scalar=prev_scalar), policy
    quu = q.Quu + rho * np.eye(m)
    try:
        chol = np.linalg.cholesky(quu)
    except np.linalg.LinAlgError:
        raise _NotPositiveDefinite()
    rhs = np.column_stack([q.Qu, q.Qux])
    sol = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
    kappa = -sol[:, 0]
    K = -sol[:, 1:]
    s = q.Qx + q.Qux.T @ kappa
    S = q.Qxx + q.Qux.T @ K
    S = 0.5 * (S + S.T)
    scalar = prev_scalar + 0.5 * float(q.Qu @ kappa)
    return ValueExpansion(S=S, s=s, scalar=scalar), AffinePolicy(kappa=kappa, K=K)


def transition_value_update(
    phi_x: Array,
    phi_xx: Array,
    P_x: Array,
    next_value: ValueExpansion,
) -> ValueExpansion:
    """Propagate the value expansion backward through a phase transition.

    The scalar carries over unchanged; gradient and Hessian combine the
    terminal-cost derivatives with the transition Jacobian pull-back of the
    next phase's expansion.
    """
    n_next = next_value.s.shape[0]
    n_this = phi_x.shape[0]
    if P_x.shape != (n_next, n_this):
        raise ConfigurationError(
            f"transition Jacobian has shape {P_x.shape}, expected {(n_next, n_this)}"
        )
    s = phi_x + P_x.T @ next_value.s
    S = phi_xx + P_x.T @ next_value.S @ P_x
    return ValueExpansion(S=0.5 * (S + S.T), s=s, scalar=next_value.scalar)


# ---------------------------------------------------------------------------
# trajectory derivative collection
# ---------------------------------------------------------------------------


@dataclass
class StepDerivs:
    """Stacked per-step derivatives of one phase trajectory.

    Produced either pointwise from the phase callables or in one call by
    the phase's fused ``trajectory_derivs`` hook. Cost derivatives refer to
    the raw running cost; barrier terms are composed on top here.
    """

    fx: Array
    fu: Array
    lx: Array
    lu: Array
    lxx: Array
    luu: Array
    lux: Array
    h: Optional[Array] = None
    hx: Optional[Array] = None
    hu: Optional[Array] = None
    fxx: Optional[Array] = None
    fuu: Optional[Array] = None
    fux: Optional[Array] = None


def _collect_step_derivs(aug: AugmentedPhase, traj: PhaseTrajectory) -> StepDerivs:
    base = aug.base
    xs, us = traj.states, traj.controls
    N = base.horizon
    if base.trajectory_derivs is not None:
        sd = base.trajectory_derivs(xs, us)
    else:
        n, m = base.deriv_dim, base.control_dim
        sd = StepDerivs(
            fx=np.empty((N, n, n)),
            fu=np.empty((N, n, m)),
            lx=np.empty((N, n)),
            lu=np.empty((N, m)),
            lxx=np.empty((N, n, n)),
            luu=np.empty((N, m, m)),
            lux=np.empty((N, m, n)),
        )
        has_h = base.path_ineq is not None
        hs, hxs, hus = [], [], []
        for k in range(N):
            x, u = xs[k], us[k]
            sd.fx[k], sd.fu[k] = base.dynamics_jac(x, u)
            (sd.lx[k], sd.lu[k], sd.lxx[k], sd.luu[k], sd.lux[k]) = (
                base.running_cost_derivs(x, u)
            )
            if has_h:
                hs.append(base.path_ineq(x, u))
                hx, hu = base.path_ineq_jac(x, u)
                hxs.append(hx)
                hus.append(hu)
        if has_h:
            sd.h = np.asarray(hs)
            sd.hx = np.asarray(hxs)
            sd.hu = np.asarray(hus)
        if base.dynamics_hess is not None:
            tensors = [base.dynamics_hess(xs[k], us[k]) for k in range(N)]
            sd.fxx = np.asarray([t[0] for t in tensors])
            sd.fuu = np.asarray([t[1] for t in tensors])
            sd.fux = np.asarray([t[2] for t in tensors])
    # fold the barrier into the running-cost derivatives
    if sd.h is not None:
        _, db, d2b = reduced_barrier(sd.h, aug.delta)
        sd.lx = sd.lx + np.einsum("khn,kh->kn", sd.hx, db)
        sd.lu = sd.lu + np.einsum("khm,kh->km", sd.hu, db)
        sd.lxx = sd.lxx + np.einsum("khn,kh,khp->knp", sd.hx, d2b, sd.hx)
        sd.luu = sd.luu + np.einsum("khm,kh,khp->kmp", sd.hu, d2b, sd.hu)
        sd.lux = sd.lux + np.einsum("khm,kh,khn->kmn", sd.hu, d2b, sd.hx)
    return sd


@dataclass
class _SweepDerivs:
    steps: list[StepDerivs]
    phi_x: list[Array]
    phi_xx: list[Array]
    P_x: list[Optional[Array]]


def _collect_derivatives(aug_phases: Sequence[AugmentedPhase],
                         trajectories: Sequence[PhaseTrajectory]) -> _SweepDerivs:
    steps, phi_x, phi_xx, P_x = [], [], [], []
    for i, (aug, traj) in enumerate(zip(aug_phases, trajectories)):
        steps.append(_collect_step_derivs(aug, traj))
        px, pxx = aug.terminal_cost_derivs(traj.states[-1])
        phi_x.append(px)
        phi_xx.append(pxx)
        if i + 1 < len(aug_phases):
            P_x.append(aug.base.transition_jac(traj.states[-1]))
        else:
            P_x.append(None)
    return _SweepDerivs(steps=steps, phi_x=phi_x, phi_xx=phi_xx, P_x=P_x)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------


def _sweep_once(aug_phases, derivs: _SweepDerivs, rho: float):
    n_phases = len(aug_phases)
    policies: list[Optional[PhasePolicies]] = [None] * n_phases
    value = None
    grad_sq = 0.0
    for i in range(n_phases - 1, -1, -1):
        aug = aug_phases[i]
        N, n, m = aug.horizon, aug.deriv_dim, aug.control_dim
        if value is None:
            value = ValueExpansion(S=derivs.phi_xx[i], s=derivs.phi_x[i], scalar=0.0)
        else:
            value = transition_value_update(
                derivs.phi_x[i], derivs.phi_xx[i], derivs.P_x[i], value
            )
        sd = derivs.steps[i]
        kappa = np.zeros((N, m))
        K = np.zeros((N, m, n))
        for k in range(N - 1, -1, -1):
            tensors = None
            if sd.fxx is not None:
                tensors = (sd.fxx[k], sd.fuu[k], sd.fux[k])
            try:
                q = q_expansion(
                    (sd.lx[k], sd.lu[k], sd.lxx[k], sd.luu[k], sd.lux[k]),
                    (sd.fx[k], sd.fu[k]),
                    value,
                    tensors,
                )
            except MHPCError as err:
                raise MHPCError(f"{err} (phase {i}, step {k})") from None
            value, pol = value_step(q, rho, value.scalar)
            kappa[k] = pol.kappa
            K[k] = pol.K
            grad_sq += float(q.Qu @ q.Qu)
        policies[i] = PhasePolicies(kappa=kappa, K=K)
    return policies, value, float(np.sqrt(grad_sq))


def backward_sweep(
    aug_phases: Sequence[AugmentedPhase],
    trajectories: Sequence[PhaseTrajectory],
    rho: float,
    reg_min: float = 0.0,
    reg_max: float = 1e8,
    derivs: Optional[_SweepDerivs] = None,
):
    """Run the value recursion over all phases, from the final state back to
    the first step, restarting with a larger regularization whenever a
    control Hessian loses positive definiteness.

    Returns ``(policies, value_at_start, grad_norm, rho_used)``; the
    expected cost decrease is ``value_at_start.scalar``.
    """
    if derivs is None:
        derivs = _collect_derivatives(aug_phases, trajectories)
    while True:
        try:
            policies, value, grad_norm = _sweep_once(aug_phases, derivs, rho)
            return policies, value, grad_norm, rho
        except _NotPositiveDefinite:
            rho = max(10.0 * rho, reg_min, 1e-6)
            if rho > reg_max:
                raise RegularizationError(
                    f"control Hessian not positive definite at rho={rho:.3g}"
                )


def forward_sweep(
    aug_phases: Sequence[AugmentedPhase],
    initial_state: Array,
    trajectories: Sequence[PhaseTrajectory],
    policies: Sequence[PhasePolicies],
    alpha: float,
):
    """Roll out the affine policy around the nominal trajectory.

    Returns ``(candidate trajectories, total augmented cost)`` or ``None``
    when the rollout diverges (treated as a failed line-search trial).
    """
    if not 0.0 <= alpha <= 1.0:
        raise ParameterError(f"step size must lie in [0, 1], got {alpha}")
    x = np.asarray(initial_state, dtype=float)
    new_trajs = []
    total = 0.0
    for i, (aug, traj, pol) in enumerate(zip(aug_phases, trajectories, policies)):
        N = aug.horizon
        states = np.empty((N + 1, aug.state_dim))
        controls = np.empty((N, aug.control_dim))
        states[0] = x
        cost = 0.0
        for k in range(N):
            dx = aug.state_diff(x, traj.states[k])
            u = traj.controls[k] + alpha * pol.kappa[k] + pol.K[k] @ dx
            if not np.all(np.isfinite(u)):
                return None
            controls[k] = u
            cost += aug.running_cost(x, u)
            x = np.asarray(aug.dynamics(x, u), dtype=float)
            if not np.all(np.isfinite(x)):
                return None
            states[k + 1] = x
        cost += aug.terminal_cost(x)
        if not np.isfinite(cost):
            return None
        new_trajs.append(PhaseTrajectory(states=states, controls=controls, cost=cost))
        total += cost
        if i + 1 < len(aug_phases):
            x = np.asarray(aug.base.transition(x), dtype=float)
            if not np.all(np.isfinite(x)):
                return None
    return new_trajs, total


# ---------------------------------------------------------------------------
# inner solve (DDP with fixed multipliers)
# ---------------------------------------------------------------------------


@dataclass
class InnerResult:
    trajectories: list[PhaseTrajectory]
    policies: list[PhasePolicies]
    converged: bool
    iterations: int
    accepted_steps: int
    cost: float
    grad_norm: float
    expected_decrease: float
    trace: list[tuple] = field(default_factory=list)  # (inner_iter, cost, rho, alpha)

    @property
    def controls(self) -> list[Array]:
        return [t.controls for t in self.trajectories]


def inner_solve(
    problem: MultiPhaseProblem,
    params: ALReBParams,
    init_controls: Sequence[Array],
) -> InnerResult:
    """Minimize the augmented cost with fixed multipliers.

    Backtracking line search accepts on any decrease of the augmented cost;
    regularization shrinks after accepted steps and grows when the sweep or
    the line search fails. When no step can be accepted at the smallest step
    size and the regularization ceiling, returns ``converged=False`` with
    the last iterate instead of raising.
    """
    aug = augment_problem(problem, params)
    trajs = rollout_augmented(aug, problem.initial_state, init_controls)
    cost = sum(t.cost for t in trajs)
    rho = params.reg_init
    policies = None
    grad_norm = np.inf
    expected = np.inf
    accepted = 0
    iters = 0
    converged = False
    trace: list[tuple] = []
    derivs = None
    for it in range(params.max_inner_iters):
        iters = it + 1
        if derivs is None:
            derivs = _collect_derivatives(aug, trajs)
        try:
            policies, value, grad_norm, rho = backward_sweep(
                aug, trajs, rho, params.reg_min, params.reg_max, derivs
            )
        except RegularizationError:
            converged = False
            break
        expected = value.scalar
        if abs(expected) < params.inner_tol:
            converged = True
            trace.append((it, cost, rho, 0.0))
            break
        step_alpha = 0.0
        candidate = None
        for trial in range(params.alpha_trials):
            alpha = 0.5**trial
            result = forward_sweep(aug, problem.initial_state, trajs, policies, alpha)
            if result is not None and result[1] < cost:
                candidate = result
                step_alpha = alpha
                break
        if candidate is None:
            rho = max(10.0 * rho, params.reg_min, 1e-6)
            trace.append((it, cost, rho, 0.0))
            if rho > params.reg_max:
                converged = False
                break
            continue
        new_trajs, new_cost = candidate
        improvement = cost - new_cost
        trajs, cost = new_trajs, new_cost
        derivs = None
        accepted += 1
        rho = max(params.reg_min, rho / 5.0)
        trace.append((it, cost, rho, step_alpha))
        if improvement < params.inner_tol:
            converged = True
            break
    if policies is None:
        # never swept (cap 0 or immediate regularization failure): expose a
        # zero policy of the right shapes rather than raising
        try:
            policies, value, grad_norm, rho = backward_sweep(
                aug, trajs, rho, params.reg_min, params.reg_max,
                derivs if derivs is not None else _collect_derivatives(aug, trajs),
            )
            expected = value.scalar
        except RegularizationError:
            policies = [
                PhasePolicies(
                    kappa=np.zeros((p.horizon, p.control_dim)),
                    K=np.zeros((p.horizon, p.control_dim, p.deriv_dim)),
                )
                for p in aug
            ]
    return InnerResult(
        trajectories=trajs,
        policies=policies,
        converged=converged,
        iterations=iters,
        accepted_steps=accepted,
        cost=cost,
        grad_norm=grad_norm,
        expected_decrease=expected,
        trace=trace,
    )


def rollout_augmented(aug_phases, initial_state, controls) -> list[PhaseTrajectory]:
    """Open-loop rollout accumulating the augmented (multiplier + barrier)
    phase costs."""
    return rollout_phases(aug_phases, initial_state, controls)


# ---------------------------------------------------------------------------
# outer loop
# ---------------------------------------------------------------------------


def constraint_values(problem: MultiPhaseProblem,
                      trajectories: Sequence[PhaseTrajectory]) -> Array:
    """Terminal-constraint values per phase (zero where unconstrained)."""
    g = np.zeros(problem.n_phases)
    for i, (phase, traj) in enumerate(zip(problem.phases, trajectories)):
        if phase.terminal_constraint is not None:
            g[i] = float(phase.terminal_constraint(traj.states[-1]))
    return g


def outer_update(params: ALReBParams, g: Array) -> ALReBParams:
    """One multiplier-loop update: multipliers move along the constraint
    values scaled by the pre-update penalties, penalties grow, barrier
    relaxations shrink."""
    g = np.asarray(g, dtype=float)
    lam = params.lam + params.sigma * g
    sigma = params.beta_sigma * params.sigma
    delta = params.beta_delta * params.delta
    return replace(params, lam=lam, sigma=sigma, delta=delta)


@dataclass
class Solution:
    trajectories: list[PhaseTrajectory]
    policies: list[PhasePolicies]
    params: ALReBParams
    converged: bool
    outer_iterations: int
    total_inner_iterations: int
    g_norm_history: list[float]
    cost_history: list[float]
    trace: list[tuple] = field(default_factory=list)
    # trace rows: (outer_iter, inner_iter, cost, g_norm, rho, alpha)

    @property
    def controls(self) -> list[Array]:
        return [t.controls for t in self.trajectories]

    @property
    def g_norm(self) -> float:
        return self.g_norm_history[-1] if self.g_norm_history else 0.0


def solve(
    problem: MultiPhaseProblem,
    params: ALReBParams,
    init_controls: Sequence[Array],
) -> Solution:
    """Alternate DDP inner solves with multiplier updates until the terminal
    constraints are met or the outer budget runs out."""
    controls = init_controls
    g_hist: list[float] = []
    cost_hist: list[float] = []
    trace: list[tuple] = []
    total_inner = 0
    result = None
    outer_done = 0
    for outer in range(params.max_outer_iters):
        result = inner_solve(problem, params, controls)
        total_inner += result.iterations
        outer_done = outer + 1
        g = constraint_values(problem, result.trajectories)
        g_norm = float(np.linalg.norm(g))
        g_hist.append(g_norm)
        cost_hist.append(result.cost)
        for (inner_it, cost, rho, alpha) in result.trace:
            trace.append((outer, inner_it, cost, g_norm, rho, alpha))
        controls = result.controls
        if g_norm <= params.outer_tol:
            break
        params = outer_update(params, g)
    converged = bool(g_hist and g_hist[-1] <= params.outer_tol)
    return Solution(
        trajectories=result.trajectories,
        policies=result.policies,
        params=params,
        converged=converged,
        outer_iterations=outer_done,
        total_inner_iterations=total_inner,
        g_norm_history=g_hist,
        cost_history=cost_hist,
        trace=trace,
    )


def write_iteration_trace(path, solution: Solution) -> None:
    """Dump the per-iteration trace as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["outer_iter", "inner_iter", "cost", "g_norm", "rho", "alpha"])
        for row in solution.trace:
            writer.writerow(row)
