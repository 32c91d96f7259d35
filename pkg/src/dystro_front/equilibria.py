"""Equilibria of the homogeneous reaction system and their stability."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ThresholdDegenerate
from .model import DimensionlessParams, State, reaction_rhs

# Admissibility margin: roots touching the boundary of the invariant set are rejected.
ADMISSIBLE_TOL = 1e-12
# Eigenvalues with |Re| below this are treated as marginal.
STABILITY_TOL = 1e-9


class Regime(str, Enum):
    HEALTHY_ONLY = "HealthyOnly"
    INVASION = "Invasion"
    BISTABLE = "Bistable"


@dataclass(frozen=True)
class PathologicalEquilibrium:
    state: State
    d_star: float
    stable: bool
    residual: float

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_dict(),
            "d_star": self.d_star,
            "stable": self.stable,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class EquilibriumReport:
    healthy: State
    theta: float
    r_d: float
    pathological: tuple[PathologicalEquilibrium, ...]
    regime: Regime

    def to_dict(self) -> dict:
        return {
            "healthy": self.healthy.to_dict(),
            "theta": self.theta,
            "r_d": self.r_d,
            "pathological": [e.to_dict() for e in self.pathological],
            "regime": self.regime.value,
        }


def healthy_equilibrium(p: DimensionlessParams) -> State:
    return State(p.sigma / (1.0 + p.sigma), 0.0, 0.0, 0.0)


def theta(p: DimensionlessParams) -> float:
    """Invasion threshold quantity; the healthy state is stable iff it is positive."""
    return p.delta * (1.0 + p.sigma) + p.rho - p.alpha * p.c_eps * p.sigma


def _removal(p: DimensionlessParams) -> float:
    return p.delta * (1.0 + p.sigma) + p.rho


def reproduction_number(p: DimensionlessParams) -> float:
    return p.alpha * p.c_eps * p.sigma / _removal(p)


def is_threshold_degenerate(p: DimensionlessParams) -> bool:
    return abs(theta(p)) < 1e-12 * _removal(p)


def pathological_coeffs(p: DimensionlessParams) -> tuple[float, float, float]:
    """Coefficients ``(g2, g1, g0)`` of the quadratic whose roots are the d* values."""
    s, rho, a, dl, r, mu, ce = p.sigma, p.rho, p.alpha, p.delta, p.r, p.mu, p.c_eps
    g2 = r * (rho * (1.0 - dl) - a * (dl + s))
    g1 = (
        -dl * (r + mu * rho + r * s)
        + mu * rho
        - r * (rho - a * s)
        - a * mu * (dl + s) * ce
    )
    g0 = -mu * (dl + rho + dl * s) + a * mu * ce * s
    return g2, g1, g0


def quadratic_roots(a: float, b: float, c: float, degenerate_tol: float = 1e-12) -> list[float]:
    """Real roots of ``a x^2 + b x + c`` in increasing order.

    Uses the cancellation-free form ``q = -(b + sign(b) sqrt(disc)) / 2``.
    When ``|a|`` is negligible against ``max(|b|, |c|)`` the linear root is
    returned instead.
    """
    scale = max(abs(b), abs(c))
    if abs(a) <= degenerate_tol * scale:
        if b == 0.0:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    if q == 0.0:
        # b == 0 and c == 0
        return [0.0, 0.0]
    return sorted([q / a, c / q])


def state_from_root(d_star: float, p: DimensionlessParams) -> State:
    h = (p.sigma - (p.sigma + p.delta) * d_star) / (1.0 + p.sigma)
    return State(h, d_star, d_star, p.r / p.mu * d_star)


def jacobian_at(u: State, p: DimensionlessParams) -> np.ndarray:
    """Analytic Jacobian of the reaction field at ``u`` (rows/cols in h, d, m, c order)."""
    h, d, m, c = u.h, u.d, u.m, u.c
    a = p.alpha * (c + p.c_eps) / (1.0 + c)
    da = p.alpha * (1.0 - p.c_eps) / (1.0 + c) ** 2
    free = 1.0 - h - d
    growth = p.sigma + p.rho * d
    J = np.empty((4, 4))
    J[0] = [-growth - 1.0 - a * m, p.rho * free - growth, -a * h, -da * m * h]
    J[1] = [a * m + p.rho * d, -p.delta - p.rho * free + p.rho * d, a * h, da * m * h]
    J[2] = [0.0, p.nu, -p.nu, 0.0]
    J[3] = [0.0, p.r, 0.0, -p.mu]
    return J


def stability_verdict(eigenvalues) -> str:
    """``"stable"``, ``"unstable"`` or ``"marginal"`` from a spectrum."""
    abscissa = float(np.max(np.real(eigenvalues)))
    if abscissa < -STABILITY_TOL:
        return "stable"
    if abscissa > STABILITY_TOL:
        return "unstable"
    return "marginal"


def _admissible(d_star: float, p: DimensionlessParams) -> bool:
    if not d_star > ADMISSIBLE_TOL:
        return False
    u = state_from_root(d_star, p)
    return u.h >= 0.0 and u.h + u.d < 1.0 - ADMISSIBLE_TOL


def pathological_equilibria(p: DimensionlessParams) -> tuple[PathologicalEquilibrium, ...]:
    """Admissible equilibria with d* > 0, sorted by d*."""
    out = []
    for root in quadratic_roots(*pathological_coeffs(p)):
        if not _admissible(root, p):
            continue
        u = state_from_root(root, p)
        eigs = np.linalg.eigvals(jacobian_at(u, p))
        residual = float(np.max(np.abs(reaction_rhs(u, p, check=False))))
        out.append(
            PathologicalEquilibrium(
                state=u,
                d_star=root,
                stable=stability_verdict(eigs) == "stable",
                residual=residual,
            )
        )
    return tuple(out)


def _regime(p: DimensionlessParams, patho) -> Regime:
    if is_threshold_degenerate(p):
        raise ThresholdDegenerate(f"Theta = {theta(p):.3e} is zero to tolerance")
    if theta(p) < 0.0:
        return Regime.INVASION
    if len(patho) >= 2 or any(e.stable for e in patho):
        return Regime.BISTABLE
    return Regime.HEALTHY_ONLY


def classify_regime(p: DimensionlessParams) -> Regime:
    """Regime label of a parameter set.

    Below threshold a single admissible pathological equilibrium counts as
    bistable only when it is stable (coexists with the stable healthy state).
    """
    return _regime(p, pathological_equilibria(p))


def equilibrium_report(p: DimensionlessParams) -> EquilibriumReport:
    patho = pathological_equilibria(p)
    return EquilibriumReport(
        healthy=healthy_equilibrium(p),
        theta=theta(p),
        r_d=reproduction_number(p),
        pathological=patho,
        regime=_regime(p, patho),
    )
