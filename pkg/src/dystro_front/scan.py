"""Regime maps over a parameter plane and one-parameter speed studies.

Every node is independent. With ``threads > 1`` nodes are farmed out to a
process pool and the rows are merged back in sorted axis order, so the
output does not depend on scheduling.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .equilibria import equilibrium_report, pathological_equilibria, theta
from .errors import InvalidParameter, NoInvasion, ThresholdDegenerate
from .front import FrontTrace, boundary_margin, default_level, trace_front
from .linear import gamma_cutoff, min_speed, s_plus
from .model import DimensionlessParams
from .pde import Grid1D, InitialCondition, SimulationResult, simulate

PARAM_NAMES = tuple(f.name for f in dataclasses.fields(DimensionlessParams))

# Cells per unit length of the default acceptance grid (4096 cells on L = 800).
DEFAULT_RESOLUTION = 4096 / 800
# The front should cover this fraction of the usable domain by the end of a run.
HORIZON_FRACTION = 0.8

# Reference regime for front-speed curves and the one-parameter sweeps around it.
FRONT_BASE = dict(sigma=1.0, rho=0.9, alpha=40.0, delta=1.1, nu=7.0, mu=168.0, r=1.0,
              c_eps=0.1, D_d=1.0, D_m=10.0, D_c=100.0, chi0=5.0, kappa=1.0)
FRONT_SWEEPS = {
    "alpha": (dict(rho=0.9, delta=1.1), (32.0, 60.0)),
    "rho": (dict(alpha=40.0, delta=1.1), (0.1, 1.7)),
    "delta": (dict(alpha=40.0, rho=0.9), (0.5, 1.5)),
}
# Base point for (delta, alpha) regime maps.
REGIME_BASE = dict(FRONT_BASE, D_c=1000.0)


class Task(str, Enum):
    REGIME_MAP = "RegimeMap"
    SPEED_SWEEP = "SpeedSweep"
    DISPERSION_STUDY = "DispersionStudy"


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    n: int

    def __post_init__(self):
        if self.name not in PARAM_NAMES:
            raise InvalidParameter(f"unknown parameter {self.name!r}; expected one of {PARAM_NAMES}")
        if not (isinstance(self.n, int) and self.n >= 2):
            raise InvalidParameter(f"axis {self.name} needs n >= 2, got {self.n!r}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
            raise InvalidParameter(f"axis {self.name} needs finite lo < hi")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """Parse ``name=lo:hi:n``."""
        try:
            name, rest = text.split("=", 1)
            lo, hi, n = rest.split(":")
            return cls(name.strip(), float(lo), float(hi), int(n))
        except ValueError as exc:
            raise InvalidParameter(f"bad axis spec {text!r}; expected name=lo:hi:n") from exc

    @classmethod
    def from_obj(cls, obj) -> "Axis":
        if isinstance(obj, str):
            return cls.parse(obj)
        try:
            return cls(obj["name"], float(obj["lo"]), float(obj["hi"]), int(obj["n"]))
        except (KeyError, TypeError) as exc:
            raise InvalidParameter(f"bad axis object {obj!r}") from exc

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SimulationOptions:
    """PDE settings for the simulated columns of sweeps and studies."""

    L: float = 800.0
    n: int | None = None
    cfl_safety: float = 0.4
    n_snapshots: int = 201

    @property
    def cells(self) -> int:
        return self.n if self.n is not None else int(round(DEFAULT_RESOLUTION * self.L))

    @classmethod
    def from_dict(cls, data: dict) -> "SimulationOptions":
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise InvalidParameter(f"unknown simulation options: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class ScanConfig:
    base_params: DimensionlessParams
    task: Task
    axis1: Axis | None = None
    axis2: Axis | None = None
    with_simulation: bool = False
    simulation: SimulationOptions = field(default_factory=SimulationOptions)
    n_gamma: int = 9

    def __post_init__(self):
        if self.task is Task.REGIME_MAP and (self.axis1 is None or self.axis2 is None):
            raise InvalidParameter("RegimeMap needs two axes")
        if self.task is Task.SPEED_SWEEP and self.axis1 is None:
            raise InvalidParameter("SpeedSweep needs axis1")
        if self.n_gamma < 2:
            raise InvalidParameter("n_gamma must be at least 2")

    @classmethod
    def from_dict(cls, data: dict) -> "ScanConfig":
        data = dict(data)
        allowed = {"base_params", "task", "axis1", "axis2", "with_simulation", "simulation", "n_gamma"}
        if set(data) - allowed:
            raise InvalidParameter(f"unknown scan keys: {sorted(set(data) - allowed)}")
        try:
            task = Task(data["task"])
            base = DimensionlessParams.from_dict(data["base_params"])
        except (KeyError, ValueError) as exc:
            raise InvalidParameter(f"bad scan config: {exc}") from exc

        def axis(key):
            return Axis.from_obj(data[key]) if data.get(key) is not None else None

        return cls(
            base_params=base,
            task=task,
            axis1=axis("axis1"),
            axis2=axis("axis2"),
            with_simulation=bool(data.get("with_simulation", False)),
            simulation=SimulationOptions.from_dict(data.get("simulation", {})),
            n_gamma=int(data.get("n_gamma", 9)),
        )


def _pool_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def measure_speed(p: DimensionlessParams, ic: InitialCondition, options: SimulationOptions = SimulationOptions(),
                  *, expected_speed: float | None = None, t_end: float | None = None,
                  level: float | None = None) -> tuple[SimulationResult, FrontTrace]:
    """Simulate from ``ic`` and fit the front speed.

    The horizon defaults to the time the front needs, at ``expected_speed``
    (``s_star`` unless given), to cover 80% of the domain left after the
    boundary margin, so the tail of the record stays clear of the far wall.
    """
    margin = boundary_margin(p)
    if t_end is None:
        speed = expected_speed if expected_speed is not None else min_speed(p)[0]
        t_end = HORIZON_FRACTION * (options.L - margin) / speed
    grid = Grid1D(options.L, options.cells)
    result = simulate(ic, grid, p, t_end, cfl_safety=options.cfl_safety, n_snapshots=options.n_snapshots)
    trace = trace_front(result, default_level(p) if level is None else level, margin=margin)
    return result, trace


def _regime_node(args):
    p, v1, v2 = args
    try:
        report = equilibrium_report(p)
        return (v1, v2, report.regime.value, report.theta, len(report.pathological))
    except ThresholdDegenerate:
        return (v1, v2, "ThresholdDegenerate", theta(p), len(pathological_equilibria(p)))


def regime_map(cfg: ScanConfig, threads: int = 1) -> list[tuple]:
    """Rows ``(axis1, axis2, regime, theta, n_pathological)`` sorted by axis values."""
    if cfg.task is not Task.REGIME_MAP:
        raise InvalidParameter("regime_map needs task RegimeMap")
    a1, a2 = cfg.axis1, cfg.axis2
    nodes = [
        (cfg.base_params.replace(**{a1.name: float(v1), a2.name: float(v2)}), float(v1), float(v2))
        for v1 in a1.values()
        for v2 in a2.values()
    ]
    rows = _pool_map(_regime_node, nodes, threads)
    return sorted(rows, key=lambda r: (r[0], r[1]))


def _speed_node(args):
    p, value, with_simulation, options = args
    try:
        s_star, _ = min_speed(p)
    except NoInvasion:
        return (value, "NoInvasion", "") if with_simulation else (value, "NoInvasion")
    if not with_simulation:
        return (value, s_star)
    _, trace = measure_speed(p, InitialCondition.gaussian(), options)
    return (value, s_star, trace.fitted_speed)


def speed_sweep(cfg: ScanConfig, threads: int = 1) -> list[tuple]:
    """Rows ``(value, s_star_analytical[, s_numerical])``; sub-threshold points carry ``NoInvasion``."""
    if cfg.task is not Task.SPEED_SWEEP:
        raise InvalidParameter("speed_sweep needs task SpeedSweep")
    a = cfg.axis1
    nodes = [(cfg.base_params.replace(**{a.name: float(v)}), float(v), cfg.with_simulation, cfg.simulation)
             for v in a.values()]
    return sorted(_pool_map(_speed_node, nodes, threads), key=lambda r: r[0])


def study_gammas(p: DimensionlessParams, n: int) -> np.ndarray:
    """``n`` evenly spaced decay rates in ``(0, 2 gamma_star]``."""
    _, gamma_star = min_speed(p)
    return np.linspace(2.0 * gamma_star / n, 2.0 * gamma_star, n)


def _dispersion_node(args):
    p, gamma, cutoff, s_star, options = args
    analytical = s_plus(gamma, p, cutoff) if gamma < cutoff else math.nan
    expected = max(analytical, s_star) if math.isfinite(analytical) else s_star
    _, trace = measure_speed(p, InitialCondition.exponential(gamma), options, expected_speed=expected)
    return (gamma, analytical, trace.fitted_speed)


def dispersion_study(cfg: ScanConfig, threads: int = 1) -> list[tuple]:
    """Rows ``(gamma, s_analytical, s_numerical)`` for exponential initial data.

    ``s_analytical`` is NaN where ``gamma`` is past the cutoff of the branch.
    """
    if cfg.task is not Task.DISPERSION_STUDY:
        raise InvalidParameter("dispersion_study needs task DispersionStudy")
    p = cfg.base_params
    cutoff = gamma_cutoff(p)
    s_star, _ = min_speed(p)
    nodes = [(p, float(g), cutoff, s_star, cfg.simulation) for g in study_gammas(p, cfg.n_gamma)]
    return sorted(_pool_map(_dispersion_node, nodes, threads), key=lambda r: r[0])


HEADERS = {
    Task.REGIME_MAP: ("axis1", "axis2", "regime", "theta", "n_pathological"),
    Task.SPEED_SWEEP: ("value", "s_star_analytical", "s_numerical"),
    Task.DISPERSION_STUDY: ("gamma", "s_analytical", "s_numerical"),
}


def run_scan(cfg: ScanConfig, threads: int = 1) -> tuple[tuple[str, ...], list[tuple]]:
    """Dispatch on ``cfg.task``; returns ``(header, rows)``."""
    if cfg.task is Task.REGIME_MAP:
        rows = regime_map(cfg, threads)
    elif cfg.task is Task.SPEED_SWEEP:
        rows = speed_sweep(cfg, threads)
    else:
        rows = dispersion_study(cfg, threads)
    header = HEADERS[cfg.task]
    if cfg.task is Task.SPEED_SWEEP and not cfg.with_simulation:
        header = header[:2]
    return header, rows
