"""Fourier-side initial-data families, dilation operators, and the
scale-factor selection that turns large data into small data.

Data kinds
----------
* ``EXP_HALFLINE``        — v0(xi) = A e^xi on xi >= 1 (d = 1); the golden
  reference datum with a closed-form band solution.
* ``OCTANT_BUMP``         — A on the box [eps0, eps0 + width)^d.
* ``HALFLINE_DERIVATIVE`` — A (i (xi - shift))^k on xi >= shift (d = 1),
  the Fourier side of a modulated derivative of delta(x) + 2i/x.
* ``INFLATION_PAIR``      — the +/-k indicator pair with amplitude
  2^{-s d k / 2} whose cross-convolution piles up near the origin; the
  negative piece is carried as a separate mirrored field and is rejected
  by every solver gate.
* ``INFLATION_BUMP``      — N^{-sigma - d/2} per-axis indicator of
  [N/2d, N/d), the Sobolev-scaled datum of the H-norm inflation probe.

Dilations act on the Fourier side: x -> lam^a f(lam x) becomes
v(xi) -> lam^{a-d} v(xi/lam), resampled onto a target grid by linear
interpolation that respects half-open-cell support semantics.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .lattice import (
    FrequencyField,
    FrequencyGrid,
    make_grid,
    support_stats,
)
from .norms import NormFlavor, NormSpec, static_norm

__all__ = [
    "InitialDataKind",
    "InitialDataSpec",
    "IllposedPair",
    "ScalingPlan",
    "make_initial_data",
    "scale_data",
    "scaled_grid",
    "choose_lambda",
    "rescale_solution",
]


class InitialDataKind(str, enum.Enum):
    EXP_HALFLINE = "EXP_HALFLINE"
    OCTANT_BUMP = "OCTANT_BUMP"
    HALFLINE_DERIVATIVE = "HALFLINE_DERIVATIVE"
    INFLATION_PAIR = "INFLATION_PAIR"
    INFLATION_BUMP = "INFLATION_BUMP"


@dataclass(frozen=True)
class InitialDataSpec:
    """Parameters of one data family member; unused fields are ignored."""

    kind: InitialDataKind
    eps0: float = 1.0
    width: float = 0.5
    amplitude: complex = 1.0
    deriv_order: int = 1
    shift: float = 1.0
    pair_k: int = 16
    scale_n: int = 8
    s: float = -1.0
    sigma: float = 0.0
    m: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", InitialDataKind(self.kind))


@dataclass(frozen=True, eq=False)
class IllposedPair:
    """Positive piece plus mirrored negative piece of the sign-pair datum."""

    pos: FrequencyField
    neg: FrequencyField  # mirrored=True: stored values sample v(-xi)
    amplitude: float
    pair_k: int


@dataclass(frozen=True)
class ScalingPlan:
    """Scale factor, amplitude exponent and rescaled weight index."""

    lam: int
    a: float
    s0: float
    smallness_margin: float


def _indicator_box(grid: FrequencyGrid, lo: float, hi: float) -> np.ndarray:
    """Product of per-axis indicators of [lo, hi) sampled at left edges."""
    out = np.ones(grid.shape)
    for c in grid.coords():
        out = out * ((c >= lo - 1e-12) & (c < hi - 1e-12))
    return out


def _check_cover(grid: FrequencyGrid, hi: float, what: str) -> None:
    if hi > grid.xi_max + 1e-12:
        raise ValueError(
            f"{what} support reaches {hi}, beyond the grid extent {grid.xi_max}"
        )


def make_initial_data(
    spec: InitialDataSpec, grid: FrequencyGrid
) -> FrequencyField | IllposedPair:
    """Sample the requested datum on ``grid``.

    Solver-bound kinds are checked against the octant/eps0 support gates
    at construction.  ``INFLATION_PAIR`` returns an :class:`IllposedPair`,
    which no solver accepts.
    """
    kind = spec.kind
    if kind is InitialDataKind.EXP_HALFLINE:
        if grid.d != 1:
            raise ValueError("EXP_HALFLINE is a one-dimensional datum")
        xi = grid.axis
        vals = spec.amplitude * np.exp(xi) * (xi >= 1.0 - 1e-12)
        f = FrequencyField(grid, vals)
        _gate_solver_datum(f, eps0=1.0)
        return f

    if kind is InitialDataKind.OCTANT_BUMP:
        if spec.eps0 <= 0 or spec.width <= 0:
            raise ValueError("OCTANT_BUMP needs eps0 > 0 and width > 0")
        _check_cover(grid, spec.eps0 + spec.width, "OCTANT_BUMP")
        vals = spec.amplitude * _indicator_box(grid, spec.eps0, spec.eps0 + spec.width)
        f = FrequencyField(grid, vals)
        _gate_solver_datum(f, eps0=spec.eps0)
        return f

    if kind is InitialDataKind.HALFLINE_DERIVATIVE:
        if grid.d != 1:
            raise ValueError("HALFLINE_DERIVATIVE is a one-dimensional datum")
        if spec.deriv_order < 0:
            raise ValueError("derivative order must be nonnegative")
        xi = grid.axis
        mask = xi >= spec.shift - 1e-12
        vals = spec.amplitude * (1j * (xi - spec.shift)) ** spec.deriv_order * mask
        f = FrequencyField(grid, vals)
        if spec.shift > 0:
            _gate_solver_datum(f, eps0=spec.shift)
        return f

    if kind is InitialDataKind.INFLATION_PAIR:
        k, m, d = spec.pair_k, spec.m, grid.d
        if m < 2:
            raise ValueError("INFLATION_PAIR needs m >= 2")
        amp = 2.0 ** (-spec.s * d * k / 2.0)
        pos_hi = (m - 1) * k + 0.5
        neg_w = 1.0 / (2.0 * (m - 1))
        _check_cover(grid, pos_hi, "INFLATION_PAIR positive piece")
        _check_cover(grid, k + neg_w, "INFLATION_PAIR negative piece")
        if neg_w < grid.h - 1e-12:
            raise ValueError("grid too coarse for the negative piece width")
        pos = FrequencyField(grid, amp * _indicator_box(grid, (m - 1) * k, pos_hi))
        # stored as g(xi) = v(-xi): support [k, k + 1/(2(m-1)))
        neg = FrequencyField(
            grid, amp * _indicator_box(grid, k, k + neg_w), mirrored=True
        )
        return IllposedPair(pos, neg, amp, k)

    if kind is InitialDataKind.INFLATION_BUMP:
        N, d = spec.scale_n, grid.d
        if N < 1:
            raise ValueError("INFLATION_BUMP needs a positive scale")
        _check_cover(grid, N / d, "INFLATION_BUMP")
        amp = float(N) ** (-spec.sigma - d / 2.0)
        vals = amp * _indicator_box(grid, N / (2.0 * d), N / d)
        return FrequencyField(grid, vals)

    raise ValueError(f"unknown data kind {kind}")


def _gate_solver_datum(f: FrequencyField, eps0: float) -> None:
    st = support_stats(f)
    if st.empty:
        return
    if not st.in_octant:
        raise ValueError("solver-bound datum must be octant-supported")
    if st.min_linf < eps0 - 1e-12:
        raise ValueError(
            f"datum support starts at |xi|_inf = {st.min_linf}, below eps0 = {eps0}"
        )


def scaled_grid(grid: FrequencyGrid, lam: int) -> FrequencyGrid:
    """Index-preserving dilated grid (lam * xi_max, lam * h).

    Sample i of the output sits at lam times sample i of the input, so
    dilation becomes an exact per-index map.  Requires lam | 1/h.
    """
    if int(lam) != lam or lam < 1:
        raise ValueError("scaled_grid needs a positive integer factor")
    lam = int(lam)
    if grid.n_sub % lam != 0:
        raise ValueError(
            f"scale factor {lam} must divide 1/h = {grid.n_sub} for cube alignment"
        )
    return make_grid(grid.d, grid.xi_max * lam, grid.h * lam)


def _resample_axis(values: np.ndarray, axis: int, src_axis: np.ndarray,
                   src_h: float, out_coords: np.ndarray) -> np.ndarray:
    """Support-aware linear interpolation of one axis onto ``out_coords``.

    A point belongs to the half-open cell containing it; points whose cell
    carries a zero sample map to zero, so dilated supports stay exact.
    Within a support run, values are interpolated linearly, with one-sided
    extrapolation inside the top edge cell.
    """
    v = np.moveaxis(values, axis, -1)
    lead = v.shape[:-1]
    n = v.shape[-1]
    out = np.zeros(lead + (out_coords.size,), dtype=v.dtype)

    cell = np.floor(out_coords / src_h + 1e-9).astype(int)
    inside = (cell >= 0) & (cell < n)
    cid = np.clip(cell, 0, n - 1)
    frac = out_coords / src_h - cid

    flat = v.reshape(-1, n)
    res = out.reshape(-1, out_coords.size)
    nz = flat != 0
    for r in range(flat.shape[0]):
        row = flat[r]
        mask = nz[r]
        base = np.where(inside, cid, 0)
        own = mask[base] & inside
        nxt = np.clip(base + 1, 0, n - 1)
        has_next = mask[nxt] & (base + 1 < n)
        prv = np.clip(base - 1, 0, n - 1)
        has_prev = mask[prv] & (base - 1 >= 0)
        lo = row[base]
        slope_up = row[nxt] - lo
        slope_down = lo - row[prv]
        slope = np.where(has_next, slope_up, np.where(has_prev, slope_down, 0.0))
        res[r] = np.where(own, lo + frac * slope, 0.0)
    return np.moveaxis(out.reshape(lead + (out_coords.size,)), -1, axis)


def scale_data(
    f: FrequencyField,
    lam: float,
    a: float,
    out_grid: FrequencyGrid | None = None,
) -> FrequencyField:
    """Fourier side of x -> lam^a f(lam x): v(xi) -> lam^{a-d} v(xi/lam).

    The default target keeps the spacing and extends the axis to cover the
    dilated support; pass ``scaled_grid(grid, lam)`` for the exact
    index-preserving map.  Raises if the dilated support overflows the
    target grid.
    """
    if lam <= 0:
        raise ValueError("scale factor must be positive")
    grid = f.grid
    if out_grid is None:
        out_grid = make_grid(grid.d, max(1, math.ceil(lam * grid.xi_max)), grid.h)
    if out_grid.d != grid.d:
        raise ValueError("target grid dimension mismatch")
    st = support_stats(f, tol=0.0)
    if not st.empty:
        top = float(grid.linf()[np.abs(f.values) > 0].max()) + grid.h
        if lam * top > out_grid.xi_max + 1e-9:
            raise ValueError(
                f"dilated support reaches {lam * top}, beyond target extent "
                f"{out_grid.xi_max}"
            )
    vals = f.values
    for axis in range(grid.d):
        vals = _resample_axis(vals, axis, grid.axis, grid.h, out_grid.axis / lam)
    vals = lam ** (a - grid.d) * vals
    return FrequencyField(out_grid, vals, f.mirrored)


def choose_lambda(
    f: FrequencyField | float,
    s: float,
    sigma: float,
    m: int,
    eps0: float,
    C_fix: float,
    norm_spec: NormSpec | None = None,
    lam_cap: int = 10**6,
) -> ScalingPlan:
    """Smallest integer lam > max(2, 1/eps0) making the dilated datum small.

    The criterion is C_fix * (lam^{2/(m-1) - d/2 + max(sigma, 0)}
    2^{s (lam-1) eps0} ||f||)^{m-1} <= 1/100, with d read from the field
    (d = 1 when a bare norm value is passed).  Such a lam exists for every
    s < 0; a safety cap guards against misconfiguration.
    """
    if s >= 0:
        raise ValueError("scale selection requires s < 0")
    if eps0 <= 0 or C_fix <= 0:
        raise ValueError("eps0 and C_fix must be positive")
    if isinstance(f, FrequencyField):
        d = f.grid.d
        spec = norm_spec or NormSpec(NormFlavor.ES_INTEGRAL, s=s, sigma=sigma)
        norm = static_norm(f, spec)
    else:
        d = 1
        norm = float(f)

    expo = 2.0 / (m - 1) - d / 2.0 + max(sigma, 0.0)
    lam = math.floor(max(2.0, 1.0 / eps0)) + 1
    if lam > lam_cap:
        raise RuntimeError("scale-factor search exceeded the safety cap")

    def crit(lam_: int) -> float:
        return C_fix * (lam_**expo * 2.0 ** (s * (lam_ - 1) * eps0) * norm) ** (m - 1)

    while crit(lam) > 0.01:
        lam += 1
        if lam > lam_cap:
            raise RuntimeError("scale-factor search exceeded the safety cap")
    return ScalingPlan(lam=lam, a=2.0 / (m - 1), s0=lam * s,
                       smallness_margin=crit(lam))


def rescale_solution(
    u,
    lam: float,
    a: float,
    out_grid: FrequencyGrid | None = None,
    t_limit: float | None = None,
):
    """Undo a dilation on a trajectory: frames pick up lam^{d-a} v(lam xi)
    and the time axis dilates to [0, lam^2 T].

    With ``out_grid`` the inverse of :func:`scaled_grid` the per-index map
    is exact; otherwise values are resampled like :func:`scale_data`.
    """
    from .norms import SpaceTimeField  # local import to avoid a cycle

    if lam <= 0:
        raise ValueError("scale factor must be positive")
    grid = u.grid
    if out_grid is None:
        xi_out = grid.xi_max / lam
        if abs(xi_out - round(xi_out)) > 1e-9 or round(xi_out) < 1:
            raise ValueError(
                "cannot infer an aligned output grid; pass out_grid explicitly"
            )
        out_grid = make_grid(grid.d, int(round(xi_out)), grid.h / lam)
    if out_grid.d != grid.d:
        raise ValueError("target grid dimension mismatch")
    tgrid_out = lam**2 * u.tgrid
    if t_limit is not None and tgrid_out[-1] > t_limit * (1 + 1e-12):
        raise ValueError(
            f"rescaled horizon {tgrid_out[-1]} exceeds the configured limit {t_limit}"
        )
    frames = u.values
    for axis in range(grid.d):
        frames = _resample_axis(
            frames, axis + 1, grid.axis, grid.h, out_grid.axis * lam
        )
    frames = lam ** (grid.d - a) * frames
    return SpaceTimeField(out_grid, tgrid_out, frames)
