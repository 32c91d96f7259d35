"""Linearisation about the healthy state, from growth rates to front speeds.

The travelling-front ansatz ``exp(-gamma (x - s t))`` leads to the
dispersion factor ``p2(gamma, s)``, quadratic in ``s`` for fixed ``gamma``
and quadratic in ``z = gamma**2`` for ``s = 0``. Everything below reduces to
those two quadratics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibria import quadratic_roots, theta
from .errors import NoInvasion, NotAttained, OutOfBranch
from .model import DimensionlessParams

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TuringReport:
    critical_k_squared: float
    h_at_zero: float
    verdict: str = "NoTuring"


@dataclass(frozen=True)
class DispersionResult:
    gamma_grid: np.ndarray
    s_plus: np.ndarray
    gamma_cutoff: float
    gamma_star: float
    s_star: float


def _dm_decay(p: DimensionlessParams) -> float:
    # Linear loss rate of damaged tissue at the healthy state.
    return p.delta + p.rho / (1.0 + p.sigma)


def constant_term(p: DimensionlessParams) -> float:
    """``p2(0, s)``; equals ``nu * Theta / (1 + sigma)``."""
    return p.delta * p.nu + p.nu * p.rho / (1.0 + p.sigma) - p.alpha * p.c_eps * p.nu * p.sigma / (1.0 + p.sigma)


def _k2_coefficient(p: DimensionlessParams) -> float:
    return p.D_m * p.rho / (1.0 + p.sigma) + p.D_m * p.delta + p.nu * p.D_d


def turing_h(k2, p: DimensionlessParams):
    """Constant term of the (d, m) characteristic quadratic at wavenumber squared ``k2``."""
    return p.D_d * p.D_m * k2**2 + _k2_coefficient(p) * k2 + constant_term(p)


def turing_check(p: DimensionlessParams) -> TuringReport:
    k2 = -_k2_coefficient(p) / (p.D_d * p.D_m)
    return TuringReport(critical_k_squared=k2, h_at_zero=constant_term(p))


def temporal_growth(p: DimensionlessParams) -> tuple[float, float]:
    """Roots ``(lambda_plus, lambda_minus)`` of the homogeneous (d, m) quadratic."""
    a1 = _dm_decay(p) + p.nu
    roots = quadratic_roots(1.0, a1, constant_term(p))
    return roots[1], roots[0]


def p2(gamma, s, p: DimensionlessParams):
    gamma = np.asarray(gamma, dtype=float)
    g2 = gamma * gamma
    linear = gamma * (_dm_decay(p) + p.nu - (p.D_d + p.D_m) * g2)
    const = p.D_d * p.D_m * g2 * g2 - _k2_coefficient(p) * g2 + constant_term(p)
    out = g2 * s * s + linear * s + const
    return float(out) if out.ndim == 0 else out


def decoupled_factors(gamma, s, p: DimensionlessParams):
    """The chemokine and healthy-tissue factors of the front determinant."""
    g2 = np.asarray(gamma, dtype=float) ** 2
    gs = np.asarray(gamma, dtype=float) * s
    return (p.D_c * g2 - gs - p.mu, g2 - gs - (1.0 + p.sigma))


def _require_invasion(p: DimensionlessParams) -> None:
    if not theta(p) < 0.0:
        raise NoInvasion(f"Theta = {theta(p):.6g} >= 0; healthy state is stable")


def gamma_cutoff(p: DimensionlessParams) -> float:
    """The unique ``gamma > 0`` with ``p2(gamma, 0) = 0``."""
    _require_invasion(p)
    roots = quadratic_roots(p.D_d * p.D_m, -_k2_coefficient(p), constant_term(p))
    return math.sqrt(roots[-1])


def _positive_root(gamma, p: DimensionlessParams):
    g2 = gamma * gamma
    b = gamma * (_dm_decay(p) + p.nu - (p.D_d + p.D_m) * g2)
    c = p.D_d * p.D_m * g2 * g2 - _k2_coefficient(p) * g2 + constant_term(p)
    sq = np.sqrt(b * b - 4.0 * g2 * c)
    # a > 0 and c < 0: pick the non-cancelling expression for the positive root
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(b >= 0.0, -2.0 * c / (b + sq), (sq - b) / (2.0 * g2))


def s_plus(gamma, p: DimensionlessParams, cutoff: float | None = None):
    """Positive speed branch; ``gamma`` may be a scalar or an array in ``(0, gamma_cutoff)``."""
    if cutoff is None:
        cutoff = gamma_cutoff(p)
    g = np.asarray(gamma, dtype=float)
    if np.any(g <= 0.0) or np.any(g >= cutoff):
        raise OutOfBranch(f"gamma must lie in (0, {cutoff:.12g})")
    out = _positive_root(g, p)
    return float(out) if out.ndim == 0 else out


def golden_section(f, lo: float, hi: float, xtol: float, max_iter: int = 500) -> float:
    """Minimiser of a unimodal ``f`` on ``[lo, hi]`` to bracket width ``xtol``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    return x1 if f1 <= f2 else x2


def min_speed(p: DimensionlessParams, n_coarse: int = 512) -> tuple[float, float]:
    """Minimal front speed ``(s_star, gamma_star)`` over the positive branch.

    A log-spaced coarse scan brackets the smallest sampled value (ties go
    to the smaller gamma); golden-section search then refines inside that
    bracket. A minimum at either end of the scan raises NotAttained.
    """
    cutoff = gamma_cutoff(p)
    grid = np.geomspace(cutoff * 1e-6, cutoff * (1.0 - 1e-9), n_coarse)
    values = _positive_root(grid, p)
    i = int(np.argmin(values))
    if i == 0 or i == n_coarse - 1:
        raise NotAttained(f"speed branch minimum at the {'lower' if i == 0 else 'upper'} end of (0, gamma_cutoff)")
    gamma_star = golden_section(
        lambda g: float(_positive_root(np.float64(g), p)),
        grid[i - 1],
        grid[i + 1],
        xtol=1e-10 * cutoff,
    )
    return float(_positive_root(np.float64(gamma_star), p)), float(gamma_star)


def dispersion(p: DimensionlessParams, n: int = 1000) -> DispersionResult:
    """Sampled branch on an even grid strictly inside ``(0, gamma_cutoff)`` plus its minimum."""
    cutoff = gamma_cutoff(p)
    grid = np.linspace(0.0, cutoff, n + 2)[1:-1]
    s_star, gamma_star = min_speed(p)
    return DispersionResult(
        gamma_grid=grid,
        s_plus=s_plus(grid, p, cutoff),
        gamma_cutoff=cutoff,
        gamma_star=gamma_star,
        s_star=s_star,
    )
