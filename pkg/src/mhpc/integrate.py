"""Forward-Euler discretization of continuous dynamics.

The integrator is a pluggable policy: the same code path serves the nominal
step and refined-step oracles (halved step, more substeps).
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def euler_step(f_cont, x, u, dt: float, substeps: int = 1):
    """Advance ``x`` by ``dt`` under ``xdot = f_cont(x, u)`` with forward
    Euler, optionally splitting the step into equal substeps."""
    h = dt / substeps
    for _ in range(substeps):
        x = x + h * np.asarray(f_cont(x, u))
    return x


def make_discrete(f_cont: Callable, dt: float, substeps: int = 1) -> Callable:
    """Wrap continuous dynamics into a discrete one-step map."""

    def step(x, u):
        return euler_step(f_cont, x, u, dt, substeps)

    return step
