"""1-D finite-volume discretisation of the full reaction-diffusion-chemotaxis system.

Each step is a Lie splitting of three substeps:

1. forward Euler on the cell-wise reaction terms,
2. forward Euler on the conservative, upwinded chemotaxis flux of ``m``,
3. backward Euler on diffusion, one tridiagonal solve per field.

Cells are uniform on ``[0, L]``; zero-flux boundaries are imposed by mirror
ghost cells, so the diffusion and chemotaxis operators conserve each
field's total mass exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

import numpy as np
from scipy.linalg.lapack import dpttrf, dpttrs

from .equilibria import healthy_equilibrium
from .errors import InvalidParameter, SimulationDiverged, StepTooLarge
from .model import FIELD_NAMES, DimensionlessParams, State, reaction_terms

log = logging.getLogger(__name__)

FIELD_TOL = 1e-9
DIVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class Grid1D:
    L: float
    n: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and self.n >= 16):
            raise InvalidParameter(f"grid needs n >= 16 cells, got {self.n!r}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise InvalidParameter(f"domain length must be positive, got {self.L!r}")

    @property
    def dx(self) -> float:
        return self.L / self.n

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dx


@dataclass
class Field1D:
    """Cell averages of the four fields."""

    grid: Grid1D
    h: np.ndarray
    d: np.ndarray
    m: np.ndarray
    c: np.ndarray

    @classmethod
    def from_stack(cls, grid: Grid1D, values: np.ndarray) -> "Field1D":
        values = np.array(values, dtype=float)
        if values.shape != (4, grid.n):
            raise InvalidParameter(f"expected shape (4, {grid.n}), got {values.shape}")
        return cls(grid, *values)

    @classmethod
    def uniform(cls, grid: Grid1D, u: State) -> "Field1D":
        return cls.from_stack(grid, np.repeat(u.as_array()[:, None], grid.n, axis=1))

    def stack(self) -> np.ndarray:
        return np.vstack([self.h, self.d, self.m, self.c])

    def min_value(self) -> float:
        return float(min(self.h.min(), self.d.min(), self.m.min(), self.c.min()))

    def max_saturation(self) -> float:
        return float(np.max(self.h + self.d))

    def violation(self) -> float:
        """Largest breach of the admissible bounds (0 when the field is admissible)."""
        return max(0.0, -self.min_value(), self.max_saturation() - 1.0)

    def is_valid(self, tol: float = FIELD_TOL) -> bool:
        return self.violation() <= tol


class ICKind(str, Enum):
    LOCALIZED_GAUSSIAN = "LocalizedGaussian"
    EXPONENTIAL_DECAY = "ExponentialDecay"
    UNIFORM_HEALTHY = "UniformHealthy"


@dataclass(frozen=True)
class InitialCondition:
    """Perturbation of the healthy state on the damaged-tissue field.

    ``LocalizedGaussian`` uses ``amplitude * exp(-((x - center) / width)**2)``;
    ``ExponentialDecay`` uses ``amplitude * exp(-gamma * x)``. ``m`` and
    ``c`` start at zero and ``h`` at its healthy value.
    """

    kind: ICKind
    amplitude: float = 1e-3
    center: float = 0.0
    width: float = 5.0
    gamma: float | None = None

    @classmethod
    def gaussian(cls, amplitude=1e-3, center=0.0, width=5.0) -> "InitialCondition":
        return cls(ICKind.LOCALIZED_GAUSSIAN, amplitude=amplitude, center=center, width=width)

    @classmethod
    def exponential(cls, gamma: float, amplitude=1e-3) -> "InitialCondition":
        return cls(ICKind.EXPONENTIAL_DECAY, amplitude=amplitude, gamma=gamma)

    @classmethod
    def uniform_healthy(cls) -> "InitialCondition":
        return cls(ICKind.UNIFORM_HEALTHY, amplitude=0.0)

    @classmethod
    def from_dict(cls, data: dict) -> "InitialCondition":
        data = dict(data)
        try:
            kind = ICKind(data.pop("kind"))
        except (KeyError, ValueError) as exc:
            raise InvalidParameter(f"bad initial-condition kind: {exc}") from exc
        allowed = {"amplitude", "center", "width", "gamma"}
        if set(data) - allowed:
            raise InvalidParameter(f"unknown initial-condition keys: {sorted(set(data) - allowed)}")
        if kind is ICKind.EXPONENTIAL_DECAY and data.get("gamma") is None:
            raise InvalidParameter("ExponentialDecay needs gamma")
        return cls(kind, **data)

    def to_dict(self) -> dict:
        out = {"kind": self.kind.value, "amplitude": self.amplitude}
        if self.kind is ICKind.LOCALIZED_GAUSSIAN:
            out.update(center=self.center, width=self.width)
        elif self.kind is ICKind.EXPONENTIAL_DECAY:
            out["gamma"] = self.gamma
        return out

    def build(self, grid: Grid1D, p: DimensionlessParams) -> Field1D:
        x = grid.x
        if self.kind is ICKind.LOCALIZED_GAUSSIAN:
            d = self.amplitude * np.exp(-(((x - self.center) / self.width) ** 2))
        elif self.kind is ICKind.EXPONENTIAL_DECAY:
            d = self.amplitude * np.exp(-self.gamma * x)
        else:
            d = np.zeros(grid.n)
        h0 = healthy_equilibrium(p).h
        if np.any(d < 0) or np.any(h0 + d > 1.0):
            raise InvalidParameter("initial condition leaves the admissible set")
        return Field1D(grid, np.full(grid.n, h0), d, np.zeros(grid.n), np.zeros(grid.n))


def chemotaxis_flux(m: np.ndarray, c: np.ndarray, dx: float, p: DimensionlessParams) -> np.ndarray:
    """Face fluxes ``chi(c_face) m_upwind dc/dx`` including the two zero boundary faces."""
    flux = np.zeros(m.size + 1)
    if p.chi0 == 0.0:
        return flux
    cf = 0.5 * (c[1:] + c[:-1])
    velocity = p.chi0 * cf / (p.kappa + cf) * (c[1:] - c[:-1]) / dx
    flux[1:-1] = velocity * np.where(velocity > 0.0, m[:-1], m[1:])
    return flux


def _max_chemotactic_speed(c: np.ndarray, dx: float, p: DimensionlessParams) -> float:
    if p.chi0 == 0.0:
        return 0.0
    cf = 0.5 * (c[1:] + c[:-1])
    return float(np.max(np.abs(p.chi0 * cf / (p.kappa + cf) * np.diff(c) / dx), initial=0.0))


def reaction_rate_bound(p: DimensionlessParams) -> float:
    """Largest per-unit-time rate appearing in the explicit reaction update."""
    attack = p.alpha * max(1.0, p.c_eps)
    return max(p.mu, p.nu, attack, 1.0 + p.sigma + p.rho + attack, p.delta + p.rho)


def stable_dt(values: np.ndarray, grid: Grid1D, p: DimensionlessParams) -> float:
    """Explicit stability bound of the reaction and chemotaxis substeps."""
    bound = 1.0 / reaction_rate_bound(p)
    v = _max_chemotactic_speed(values[3], grid.dx, p)
    if v > 0.0:
        bound = min(bound, grid.dx / v)
    return bound


class _ImplicitDiffusion:
    """Backward-Euler diffusion with cached LDL^T factors per dt.

    The matrices are symmetric positive definite tridiagonal, so each solve
    goes through LAPACK ``pttrs``.
    """

    def __init__(self, grid: Grid1D, coefficients):
        self.grid = grid
        self.coefficients = tuple(coefficients)
        self._cache: dict[float, list] = {}

    def _factors(self, dt: float):
        try:
            return self._cache[dt]
        except KeyError:
            pass
        n = self.grid.n
        out = []
        for D in self.coefficients:
            lam = dt * D / self.grid.dx**2
            diag = np.full(n, 1.0 + 2.0 * lam)
            diag[0] = diag[-1] = 1.0 + lam
            off = np.full(n - 1, -lam)
            dd, ee, info = dpttrf(diag, off)
            # strictly diagonally dominant: a breakdown here is a programming error
            assert info == 0, f"tridiagonal factorisation failed (info={info})"
            out.append((dd, ee))
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[dt] = out
        return out

    def apply(self, values: np.ndarray, dt: float) -> None:
        for k, (dd, ee) in enumerate(self._factors(dt)):
            x, info = dpttrs(dd, ee, values[k])
            assert info == 0
            values[k] = x


def _explicit_update(values, grid, p, dt, t, reaction, chemotaxis, forcing):
    new = values.copy()
    if reaction:
        for k, rate in enumerate(reaction_terms(*values, p)):
            new[k] += dt * rate
    if chemotaxis and p.chi0 != 0.0:
        flux = chemotaxis_flux(values[2], values[3], grid.dx, p)
        new[2] -= (dt / grid.dx) * np.diff(flux)
    if forcing is not None:
        new += dt * np.asarray(forcing(grid.x, t))
    return new


def step(field: Field1D, p: DimensionlessParams, dt: float, *, t: float = 0.0,
         reaction: bool = True, chemotaxis: bool = True,
         forcing: Callable[[np.ndarray, float], np.ndarray] | None = None) -> Field1D:
    """Advance ``field`` by one IMEX step of length ``dt``.

    ``reaction`` and ``chemotaxis`` switch substeps off, and ``forcing``
    (a function ``(x, t) -> array of shape (4, n)``) adds an explicit
    source; these exist for verification runs.
    """
    if not dt > 0:
        raise InvalidParameter(f"dt must be positive, got {dt!r}")
    values = field.stack()
    bound = stable_dt(values, field.grid, p) if reaction or chemotaxis else math.inf
    if dt > bound * (1.0 + 1e-12):
        raise StepTooLarge(f"dt = {dt:.6g} exceeds the explicit bound {bound:.6g}")
    new = _explicit_update(values, field.grid, p, dt, t, reaction, chemotaxis, forcing)
    _ImplicitDiffusion(field.grid, p.diffusivities).apply(new, dt)
    return Field1D.from_stack(field.grid, new)


@dataclass
class SimulationResult:
    """Snapshots ``(time, Field1D)`` of one run plus step statistics.

    Iterating over the result yields the snapshots.
    """

    snapshots: list[tuple[float, Field1D]]
    n_steps: int
    dt_min: float
    dt_max: float
    min_value: float
    max_saturation: float
    options: dict = field(default_factory=dict)

    def __iter__(self) -> Iterator[tuple[float, Field1D]]:
        return iter(self.snapshots)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.snapshots])


def _diagnose(values: np.ndarray, t: float, grid: Grid1D) -> SimulationDiverged:
    low = values.min(axis=1)
    k = int(np.argmin(low))
    sat = values[0] + values[1]
    if -low[k] >= sat.max() - 1.0:
        i = int(np.argmin(values[k]))
        what = f"{FIELD_NAMES[k]}[{i}] = {values[k, i]:.3e} at x = {grid.x[i]:.4g}"
    else:
        i = int(np.argmax(sat))
        what = f"h+d[{i}] = {sat[i]:.12g} at x = {grid.x[i]:.4g}"
    return SimulationDiverged(f"invariant breach at t = {t:.6g}: {what}", time=t,
                              field=Field1D.from_stack(grid, values))


def simulate(ic: InitialCondition | Field1D, grid: Grid1D, p: DimensionlessParams, t_end: float, *,
             cfl_safety: float = 0.4, n_snapshots: int = 50) -> SimulationResult:
    """Run the PDE to ``t_end`` and keep ``n_snapshots`` evenly spaced snapshots.

    The first snapshot is the initial field at ``t = 0`` and the last one is
    at ``t_end``. Each step uses ``cfl_safety`` times the explicit bound of
    :func:`stable_dt`, shortened to land on snapshot times.
    """
    if not t_end > 0:
        raise InvalidParameter(f"t_end must be positive, got {t_end!r}")
    if not 0 < cfl_safety <= 1:
        raise InvalidParameter("cfl_safety must lie in (0, 1]")
    if n_snapshots < 2:
        raise InvalidParameter("need at least two snapshots")
    init = ic if isinstance(ic, Field1D) else ic.build(grid, p)
    if init.grid != grid:
        raise InvalidParameter("initial field is defined on a different grid")
    values = init.stack()
    diffusion = _ImplicitDiffusion(grid, p.diffusivities)
    reaction_dt = cfl_safety / reaction_rate_bound(p)

    targets = np.linspace(0.0, t_end, n_snapshots)
    snapshots = [(0.0, Field1D.from_stack(grid, values))]
    t = 0.0
    n_steps = 0
    dt_min, dt_max = math.inf, 0.0
    lowest, highest = init.min_value(), init.max_saturation()
    for target in targets[1:]:
        while t < target:
            dt = reaction_dt
            v = _max_chemotactic_speed(values[3], grid.dx, p)
            if v > 0.0:
                dt = min(dt, cfl_safety * grid.dx / v)
            if t + dt >= target * (1.0 - 1e-12):
                dt = target - t
            values = _explicit_update(values, grid, p, dt, t, True, True, None)
            diffusion.apply(values, dt)
            t = target if dt == target - t else t + dt
            n_steps += 1
            dt_min, dt_max = min(dt_min, dt), max(dt_max, dt)
            low = values.min()
            high = float(np.max(values[0] + values[1]))
            lowest, highest = min(lowest, low), max(highest, high)
            if low < -DIVERGENCE_TOL or high > 1.0 + DIVERGENCE_TOL:
                raise _diagnose(values, t, grid)
        snapshots.append((float(target), Field1D.from_stack(grid, values)))
    log.debug("simulate: %d steps, dt in [%.3g, %.3g]", n_steps, dt_min, dt_max)
    return SimulationResult(
        snapshots=snapshots,
        n_steps=n_steps,
        dt_min=dt_min,
        dt_max=dt_max,
        min_value=float(lowest),
        max_saturation=float(highest),
        options={"cfl_safety": cfl_safety, "n_snapshots": n_snapshots},
    )
