"""Weighted spectral norms on frequency fields and space-time trajectories.

Static flavors on a field f̂:

* ``ES_INTEGRAL``  — || <xi>^sigma 2^{s|xi|} f̂ ||_{L2}, with |xi| the l1
  norm and <xi> the Euclidean bracket, evaluated as a Riemann sum.
* ``ES_LATTICE``   — the unit-cube equivalent ( sum_k 2^{2s|k|} <k>^{2 sigma}
  ||f̂||^2_{L2(Q_k)} )^{1/2}.
* ``E21``          — sum_k 2^{s|k|} ||f̂||_{L2(Q_k)}.
* ``HSIGMA``       — the Sobolev norm || <xi>^sigma f̂ ||_{L2} (ignores s).

Time-space norms take the L^gamma_t norm per cube first (trapezoid in
time, supremum for gamma = inf), then the weighted l^q sum over cubes.
All evaluations are deterministic, fixed-order reductions.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .lattice import FrequencyField, FrequencyGrid, cube_l2_table

__all__ = [
    "NormFlavor",
    "NormSpec",
    "TimeSpaceNormSpec",
    "SpaceTimeField",
    "static_norm",
    "timespace_norm",
    "weighted_l1_seq_norm",
]


class NormFlavor(str, enum.Enum):
    ES_INTEGRAL = "ES_INTEGRAL"
    ES_LATTICE = "ES_LATTICE"
    E21 = "E21"
    HSIGMA = "HSIGMA"


@dataclass(frozen=True)
class NormSpec:
    """Which static norm to evaluate.  HSIGMA ignores s; E21 ignores sigma."""

    flavor: NormFlavor
    s: float = 0.0
    sigma: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "flavor", NormFlavor(self.flavor))


@dataclass(frozen=True)
class TimeSpaceNormSpec:
    """Time-space norm: weighted l^q over cubes of per-cube L^gamma_t L^2."""

    gamma: float
    q: int
    s: float = 0.0
    sigma: float = 0.0
    lattice_subset: str = "ALL"  # ALL | EXCLUDE_ZERO

    def __post_init__(self) -> None:
        if not (self.gamma >= 1):
            raise ValueError("gamma must lie in [1, inf]")
        if self.q not in (1, 2):
            raise ValueError("q must be 1 or 2")
        if self.lattice_subset not in ("ALL", "EXCLUDE_ZERO"):
            raise ValueError("lattice_subset must be ALL or EXCLUDE_ZERO")


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """A frequency field per node of a uniform time grid on [0, T]."""

    grid: FrequencyGrid
    tgrid: np.ndarray
    values: np.ndarray  # shape (nt, *grid.shape)

    def __post_init__(self) -> None:
        tg = np.ascontiguousarray(np.asarray(self.tgrid, dtype=float))
        if tg.ndim != 1 or tg.size < 2:
            raise ValueError("tgrid must hold at least two nodes")
        steps = np.diff(tg)
        if np.any(steps <= 0) or abs(steps.max() - steps.min()) > 1e-9 * steps.max():
            raise ValueError("tgrid must be uniform and increasing")
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.complex128))
        if v.shape != (tg.size, *self.grid.shape):
            raise ValueError(
                f"values shape {v.shape} != (nt, *grid.shape) "
                f"{(tg.size, *self.grid.shape)}"
            )
        object.__setattr__(self, "tgrid", tg)
        object.__setattr__(self, "values", v)

    @property
    def nt(self) -> int:
        return self.tgrid.size

    @property
    def T(self) -> float:
        return float(self.tgrid[-1])

    def frame(self, i: int) -> FrequencyField:
        return FrequencyField(self.grid, self.values[i])

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        if self.grid != other.grid or self.nt != other.nt:
            raise ValueError("space-time fields must share grid and tgrid")
        return SpaceTimeField(self.grid, self.tgrid, self.values - other.values)


def _lattice_weights(grid: FrequencyGrid, s: float, sigma: float) -> np.ndarray:
    return 2.0 ** (s * grid.lattice_l1()) * grid.lattice_bracket() ** sigma


def static_norm(f: FrequencyField, spec: NormSpec) -> float:
    """Evaluate a static norm; always finite and nonnegative."""
    grid = f.grid
    hd = grid.h**grid.d
    flavor = spec.flavor
    if flavor is NormFlavor.ES_INTEGRAL:
        w = 2.0 ** (spec.s * grid.l1()) * (1.0 + grid.euclid_sq()) ** (spec.sigma / 2)
        return float(np.sqrt(np.sum((w * np.abs(f.values)) ** 2) * hd))
    if flavor is NormFlavor.HSIGMA:
        w = (1.0 + grid.euclid_sq()) ** (spec.sigma / 2)
        return float(np.sqrt(np.sum((w * np.abs(f.values)) ** 2) * hd))
    table = cube_l2_table(f.values, grid)
    if flavor is NormFlavor.ES_LATTICE:
        w = _lattice_weights(grid, spec.s, spec.sigma)
        return float(np.sqrt(np.sum((w * table) ** 2)))
    if flavor is NormFlavor.E21:
        w = 2.0 ** (spec.s * grid.lattice_l1())
        return float(np.sum(w * table))
    raise ValueError(f"unknown flavor {flavor}")


def _time_norm(table: np.ndarray, tgrid: np.ndarray, gamma: float) -> np.ndarray:
    """L^gamma_t of per-node nonnegative tables, trapezoid on the grid."""
    if math.isinf(gamma):
        return table.max(axis=0)
    if gamma == 1:
        return np.trapezoid(table, tgrid, axis=0)
    return np.trapezoid(table**gamma, tgrid, axis=0) ** (1.0 / gamma)


def timespace_norm(u: SpaceTimeField, spec: TimeSpaceNormSpec) -> float:
    """( sum_k 2^{s|k|q} <k>^{sigma q} ||u||^q_{L^gamma_t L2(Q_k)} )^{1/q}."""
    grid = u.grid
    per_cube = _time_norm(cube_l2_table(u.values, grid), u.tgrid, spec.gamma)
    w = _lattice_weights(grid, spec.s, spec.sigma)
    terms = (w * per_cube) ** spec.q
    if spec.lattice_subset == "EXCLUDE_ZERO":
        terms[(0,) * grid.d] = 0.0
    total = float(np.sum(terms))
    return total ** (1.0 / spec.q)


def weighted_l1_seq_norm(u: SpaceTimeField | FrequencyField, s_tilde: float) -> float:
    """sum_l 2^{s_tilde |l|} sup_t ||u||_{L2(l + [0,1)^d)}.

    Accepts a single field, which is treated as a constant-in-time
    trajectory (the supremum is over one frame).
    """
    if isinstance(u, FrequencyField):
        table = cube_l2_table(u.values, u.grid)
        grid = u.grid
    else:
        table = cube_l2_table(u.values, u.grid).max(axis=0)
        grid = u.grid
    w = 2.0 ** (s_tilde * grid.lattice_l1())
    return float(np.sum(w * table))
