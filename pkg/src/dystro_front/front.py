"""Front position and propagation speed from simulation snapshots."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .equilibria import pathological_equilibria
from .errors import DystroError, InsufficientData, MultiFrontWarning, NoFront
from .linear import min_speed
from .model import DimensionlessParams

FALLBACK_LEVEL = 1e-3
MIN_FIT_POINTS = 10


@dataclass(frozen=True)
class SpeedFit:
    speed: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    n_points: int


@dataclass(frozen=True)
class FrontTrace:
    """Level-crossing history of the damaged-tissue field.

    ``positions`` holds NaN where no crossing exists. ``domain`` and
    ``margin`` define the boundary-exclusion zone used by :func:`fit_speed`.
    """

    times: np.ndarray
    positions: np.ndarray
    level: float
    domain: tuple[float, float] = (-math.inf, math.inf)
    margin: float = 0.0
    fitted_speed: float = math.nan
    fit_window: tuple[float, float] = (math.nan, math.nan)
    r_squared: float = math.nan
    multi_front_times: tuple[float, ...] = ()


def _downward_crossings(d: np.ndarray, level: float) -> np.ndarray:
    return np.nonzero((d[:-1] >= level) & (d[1:] < level))[0]


def front_position(field, level: float) -> float:
    """Rightmost downward crossing of ``field.d`` through ``level``.

    Linear interpolation between neighbouring cell centres. Several
    crossings trigger :class:`MultiFrontWarning`; none raises NoFront.
    """
    d = field.d
    idx = _downward_crossings(d, level)
    if idx.size == 0:
        raise NoFront(f"no downward crossing of level {level:.6g}")
    if idx.size > 1:
        warnings.warn(f"{idx.size} downward crossings of level {level:.6g}", MultiFrontWarning, stacklevel=2)
    i = idx[-1]
    x = field.grid.x
    frac = (d[i] - level) / (d[i] - d[i + 1])
    return float(x[i] + frac * (x[i + 1] - x[i]))


def default_level(p: DimensionlessParams) -> float:
    """Half the pathological plateau height, or a small absolute level without one."""
    patho = pathological_equilibria(p)
    if patho:
        return 0.5 * patho[-1].d_star
    return FALLBACK_LEVEL


def fit_speed(trace: FrontTrace) -> SpeedFit:
    """Least-squares slope of position against time over the second half of the record.

    Snapshots with no front, or with the front within ``trace.margin`` of
    either end of ``trace.domain``, are dropped from the window.
    """
    t = np.asarray(trace.times, dtype=float)
    x = np.asarray(trace.positions, dtype=float)
    if t.size == 0:
        raise InsufficientData("empty front trace")
    t_mid = t[0] + 0.5 * (t[-1] - t[0])
    lo, hi = trace.domain
    use = (t >= t_mid) & np.isfinite(x) & (x >= lo + trace.margin) & (x <= hi - trace.margin)
    n = int(use.sum())
    if n < MIN_FIT_POINTS:
        raise InsufficientData(f"only {n} usable front positions in the fit window (need {MIN_FIT_POINTS})")
    tu, xu = t[use], x[use]
    slope, intercept = np.polyfit(tu, xu, 1)
    resid = xu - (slope * tu + intercept)
    ss_tot = float(np.sum((xu - xu.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SpeedFit(float(slope), float(intercept), r2, (float(tu[0]), float(tu[-1])), n)


def trace_front(snapshots: Iterable, level: float, *, domain=None, margin: float = 0.0,
                fit: bool = True) -> FrontTrace:
    """Track the front through ``(time, Field1D)`` snapshots and optionally fit its speed."""
    times, positions, multi = [], [], []
    grid = None
    for t, field in snapshots:
        grid = field.grid
        times.append(float(t))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", MultiFrontWarning)
            try:
                positions.append(front_position(field, level))
            except NoFront:
                positions.append(math.nan)
        if any(issubclass(w.category, MultiFrontWarning) for w in caught):
            multi.append(float(t))
    if domain is None:
        domain = (0.0, grid.L) if grid is not None else (-math.inf, math.inf)
    trace = FrontTrace(
        times=np.array(times),
        positions=np.array(positions),
        level=level,
        domain=(float(domain[0]), float(domain[1])),
        margin=margin,
        multi_front_times=tuple(multi),
    )
    if not fit:
        return trace
    result = fit_speed(trace)
    return replace(trace, fitted_speed=result.speed, fit_window=result.window, r_squared=result.r_squared)


def boundary_margin(p: DimensionlessParams) -> float:
    """Exclusion zone of twenty analytical front widths, ``20 / gamma_star``."""
    try:
        _, gamma_star = min_speed(p)
    except DystroError:
        return 0.0
    return 20.0 / gamma_star
