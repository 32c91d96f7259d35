"""Parameter sets and the reaction terms acting on the four-field state.

Fields are ordered ``(h, d, m, c)`` everywhere: healthy tissue, damaged
tissue, macrophages and chemokines, all in dimensionless units.
"""

from __future__ import annotations

import json
import math
import numbers
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import DomainError, InvalidParameter

FIELD_NAMES = ("h", "d", "m", "c")


def _check_positive(obj, allow_zero=()) -> None:
    """Validate every field and store it as a plain float."""
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise InvalidParameter(f"{f.name} must be a real number, got {value!r}")
        if not math.isfinite(value):
            raise InvalidParameter(f"{f.name} must be finite, got {value!r}")
        if f.name in allow_zero:
            if value < 0:
                raise InvalidParameter(f"{f.name} must be >= 0, got {value!r}")
        elif value <= 0:
            raise InvalidParameter(f"{f.name} must be > 0, got {value!r}")
        object.__setattr__(obj, f.name, float(value))


class _ParamsMixin:
    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]):
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise InvalidParameter(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
        missing = sorted(names - set(data))
        if missing:
            raise InvalidParameter(f"missing {cls.__name__} keys: {', '.join(missing)}")
        return cls(**{k: data[k] for k in names})

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParameter(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidParameter("parameter document must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path: str | Path):
        return cls.from_json(Path(path).read_text())

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class DimensionalParams(_ParamsMixin):
    D_H: float
    D_D: float
    D_M: float
    D_C: float
    s: float
    r_H: float
    K: float
    mu_H: float
    mu_D: float
    mu_M: float
    mu_C: float
    a_bar: float
    C_eps: float
    k_c: float
    k_chi: float
    r_M: float
    chi_bar: float
    r_C: float

    def __post_init__(self):
        _check_positive(self)


@dataclass(frozen=True)
class DimensionlessParams(_ParamsMixin):
    """The thirteen coefficients of the dimensionless model.

    ``alpha`` and ``chi0`` may be zero (no immune attack, no chemotaxis);
    every other coefficient must be strictly positive.
    """

    sigma: float
    rho: float
    alpha: float
    delta: float
    nu: float
    mu: float
    r: float
    c_eps: float
    D_d: float
    D_m: float
    D_c: float
    chi0: float
    kappa: float

    def __post_init__(self):
        _check_positive(self, allow_zero=("alpha", "chi0"))

    @property
    def diffusivities(self) -> tuple[float, float, float, float]:
        return (1.0, self.D_d, self.D_m, self.D_c)


def nondimensionalize(p: DimensionalParams) -> DimensionlessParams:
    """Map dimensional rates and coefficients onto the dimensionless set.

    Time is scaled by ``mu_H``, length by ``sqrt(D_H / mu_H)``, tissue by
    ``K``, macrophages by ``r_M K / mu_M`` and chemokines by ``k_c``; the
    basal activation is therefore ``C_eps / k_c``.
    """
    return DimensionlessParams(
        sigma=p.s / (p.K * p.mu_H),
        rho=p.r_H / p.mu_H,
        alpha=p.a_bar * p.r_M * p.K / (p.mu_H * p.mu_M),
        delta=p.mu_D / p.mu_H,
        nu=p.mu_M / p.mu_H,
        mu=p.mu_C / p.mu_H,
        r=p.r_C * p.K / (p.k_c * p.mu_H),
        c_eps=p.C_eps / p.k_c,
        D_d=p.D_D / p.D_H,
        D_m=p.D_M / p.D_H,
        D_c=p.D_C / p.D_H,
        chi0=p.chi_bar * p.k_c / p.D_H,
        kappa=p.k_chi / p.k_c,
    )


@dataclass(frozen=True)
class State:
    h: float
    d: float
    m: float
    c: float

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.d, self.m, self.c], dtype=float)

    @classmethod
    def from_array(cls, values) -> "State":
        h, d, m, c = (float(v) for v in values)
        return cls(h, d, m, c)

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    def in_domain(self, tol: float = 0.0) -> bool:
        return (
            min(self.h, self.d, self.m, self.c) >= -tol
            and self.h + self.d <= 1.0 + tol
        )


# Roundoff allowance when validating states handed to checked operations.
DOMAIN_TOL = 1e-12


def _check_concentration(c) -> None:
    if np.any(np.asarray(c) < 0):
        raise DomainError(f"concentration must be non-negative, got {c!r}")


def a_of_c(c, p: DimensionlessParams):
    """Damage rate ``alpha (c + c_eps) / (1 + c)``; works elementwise on arrays."""
    _check_concentration(c)
    return p.alpha * (c + p.c_eps) / (1.0 + c)


def chi_of_c(c, p: DimensionlessParams):
    """Chemotactic sensitivity ``chi0 c / (kappa + c)``."""
    _check_concentration(c)
    return p.chi0 * c / (p.kappa + c)


def reaction_terms(h, d, m, c, p: DimensionlessParams):
    """Unchecked reaction vector field, elementwise over scalars or arrays.

    Returns the tuple ``(dh, dd, dm, dc)``.
    """
    attack = p.alpha * (c + p.c_eps) / (1.0 + c) * m * h
    free = 1.0 - h - d
    dh = (p.sigma + p.rho * d) * free - h - attack
    dd = attack - p.delta * d - p.rho * d * free
    dm = p.nu * (d - m)
    dc = p.r * d - p.mu * c
    return dh, dd, dm, dc


def reaction_rhs(u: State | np.ndarray, p: DimensionlessParams, check: bool = True) -> np.ndarray:
    """Homogeneous vector field at a single state, as a length-4 array.

    With ``check=True`` a state outside the invariant set raises
    :class:`DomainError`. Linearisation and perturbation studies pass
    ``check=False``.
    """
    if not isinstance(u, State):
        u = State.from_array(u)
    if check and not u.in_domain(DOMAIN_TOL):
        raise DomainError(f"state {u} lies outside the invariant set")
    return np.array(reaction_terms(u.h, u.d, u.m, u.c, p), dtype=float)
