"""Time integration of the spatially homogeneous reaction system."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, InvalidParameter, StiffnessError
from .model import FIELD_NAMES, DOMAIN_TOL, DimensionlessParams, State, reaction_terms

# Default perturbation of the healthy state on the damaged-tissue component.
DEFAULT_PERTURBATION = 1e-3


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray  # shape (len(times), 4), columns h, d, m, c
    invariant_violations: list[tuple[float, str, float]] = field(default_factory=list)

    @property
    def states(self) -> list[State]:
        return [State.from_array(row) for row in self.values]

    @property
    def final(self) -> State:
        return State.from_array(self.values[-1])


def solve_system(fun, y0, t_end: float, *, rtol: float = 1e-8, atol: float = 1e-10, n_out: int = 400):
    """Dormand-Prince 5(4) integration of ``y' = fun(t, y)`` sampled on an even grid.

    Returns ``(times, values)``; a step-size collapse raises StiffnessError.
    """
    if not t_end > 0:
        raise InvalidParameter(f"t_end must be positive, got {t_end!r}")
    if n_out < 2:
        raise InvalidParameter("n_out must be at least 2")
    times = np.linspace(0.0, t_end, n_out)
    sol = solve_ivp(fun, (0.0, t_end), np.asarray(y0, dtype=float), method="RK45",
                    t_eval=times, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise StiffnessError(f"integration stopped at t = {sol.t[-1] if sol.t.size else 0.0:.6g}: {sol.message}")
    return sol.t, sol.y.T.copy()


def _police(times, values, atol):
    """Clamp tiny negative undershoots and record anything larger."""
    violations = []
    small = (values < 0.0) & (values >= -atol)
    values[small] = 0.0
    rows, cols = np.nonzero(values < -atol)
    for i, j in zip(rows, cols):
        violations.append((float(times[i]), FIELD_NAMES[j], float(-values[i, j])))
    excess = values[:, 0] + values[:, 1] - 1.0
    for i in np.nonzero(excess > atol)[0]:
        violations.append((float(times[i]), "h+d", float(excess[i])))
    return violations


def integrate(u0: State, p: DimensionlessParams, t_end: float, *, rtol: float = 1e-8,
              atol: float = 1e-10, n_out: int = 400) -> Trajectory:
    """Integrate the homogeneous system from ``u0`` to ``t_end``.

    Sampled components that dip below zero by at most ``atol`` are clamped
    to zero; larger excursions are left untouched and listed in
    ``invariant_violations``.
    """
    if not u0.in_domain(DOMAIN_TOL):
        raise DomainError(f"initial state {u0} lies outside the invariant set")

    def fun(_t, y):
        return np.array(reaction_terms(y[0], y[1], y[2], y[3], p))

    times, values = solve_system(fun, u0.as_array(), t_end, rtol=rtol, atol=atol, n_out=n_out)
    violations = _police(times, values, atol)
    return Trajectory(times=times, values=values, invariant_violations=violations)
