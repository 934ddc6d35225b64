"""Frequency-octant lattices: uniform grids, unit-cube projections,
m-fold discrete convolution, and support bookkeeping.

A field lives on a uniform grid over the frequency octant [0, xi_max)^d.
Cells are half-open, samples sit at left edges, and the cell count per
unit cube is an integer, so the unit-cube projections form an exact
partition of every field.  Discrete convolution is direct summation with
a Riemann weight h^d per pairwise convolution; an optional run-aware
trapezoid weighting raises the quadrature order for data that are smooth
within their support, and an FFT path reproduces the direct results.

All operations are pure functions on immutable inputs and use fixed-order
reductions, so repeated runs are bit-identical.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve as _sig_convolve
from scipy.signal import fftconvolve as _sig_fftconvolve

__all__ = [
    "FrequencyGrid",
    "FrequencyField",
    "SupportStats",
    "make_grid",
    "box_project",
    "convolve",
    "convolve_power",
    "support_stats",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid over the frequency octant [0, xi_max)^d.

    Parameters
    ----------
    d : int
        Dimension, 1 <= d <= 3.
    xi_max : int
        Per-axis extent; unit cubes must tile the domain exactly.
    h : float
        Grid spacing; 1/h must be a positive integer so that every unit
        cube k + [0,1)^d is a union of whole cells.
    """

    d: int
    xi_max: int
    h: float

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not float(self.xi_max).is_integer() or self.xi_max < 1:
            raise ValueError(f"xi_max must be a positive integer, got {self.xi_max}")
        object.__setattr__(self, "xi_max", int(self.xi_max))
        inv = 1.0 / self.h
        n_sub = int(round(inv))
        if n_sub < 1 or abs(inv - n_sub) > 1e-9 * inv:
            raise ValueError(
                f"1/h must be a positive integer (cube alignment), got h={self.h}"
            )
        object.__setattr__(self, "h", 1.0 / n_sub)

    @property
    def n_sub(self) -> int:
        """Cells per unit length (1/h)."""
        return int(round(1.0 / self.h))

    @property
    def n(self) -> int:
        """Cells per axis."""
        return self.xi_max * self.n_sub

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    @property
    def axis(self) -> np.ndarray:
        """Sample coordinates along one axis (left cell edges)."""
        return np.arange(self.n) * self.h

    def coords(self) -> list[np.ndarray]:
        """Per-axis coordinate arrays broadcastable to ``shape``."""
        out = []
        for a in range(self.d):
            sh = [1] * self.d
            sh[a] = self.n
            out.append(self.axis.reshape(sh))
        return out

    def l1(self) -> np.ndarray:
        """|xi| = sum_j xi(j) per cell (octant, so no absolute values needed)."""
        out = np.zeros(self.shape)
        for c in self.coords():
            out = out + c
        return out

    def linf(self) -> np.ndarray:
        """|xi|_inf per cell."""
        out = np.zeros(self.shape)
        for c in self.coords():
            out = np.maximum(out, c)
        return out

    def euclid_sq(self) -> np.ndarray:
        """Squared Euclidean norm per cell (the Laplacian symbol)."""
        out = np.zeros(self.shape)
        for c in self.coords():
            out = out + c * c
        return out

    def lattice_l1(self) -> np.ndarray:
        """|k| over the unit-cube lattice, shape (xi_max,)*d."""
        k = np.arange(self.xi_max, dtype=float)
        out = np.zeros((self.xi_max,) * self.d)
        for a in range(self.d):
            sh = [1] * self.d
            sh[a] = self.xi_max
            out = out + k.reshape(sh)
        return out

    def lattice_bracket(self) -> np.ndarray:
        """<k> = (1 + |k|_2^2)^(1/2) over the unit-cube lattice."""
        k = np.arange(self.xi_max, dtype=float)
        out = np.ones((self.xi_max,) * self.d)
        for a in range(self.d):
            sh = [1] * self.d
            sh[a] = self.xi_max
            out = out + (k.reshape(sh)) ** 2
        return np.sqrt(out)


@dataclass(frozen=True, eq=False)
class FrequencyField:
    """Complex samples of a Fourier-side function on a :class:`FrequencyGrid`.

    ``mirrored=True`` marks a field whose stored values are samples of
    v(-xi); it is used only to carry the negative-frequency piece of the
    sign-pair inflation datum and is rejected by every solver gate.
    """

    grid: FrequencyGrid
    values: np.ndarray
    mirrored: bool = False

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.complex128))
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    def copy(self) -> "FrequencyField":
        return FrequencyField(self.grid, self.values.copy(), self.mirrored)


@dataclass(frozen=True)
class SupportStats:
    """Distances from the origin to the numerical support of a field."""

    min_l1: float
    min_linf: float
    in_octant: bool
    tol: float
    empty: bool = False


def make_grid(d: int, xi_max: int, h: float) -> FrequencyGrid:
    """Build a frequency grid; rejects spacings that break cube alignment."""
    return FrequencyGrid(d, xi_max, h)


def box_project(f: FrequencyField, k) -> FrequencyField:
    """Restrict ``f`` to the unit cube k + [0,1)^d, zero elsewhere.

    Out-of-range lattice points give the zero field.  Summing over all k
    reconstructs ``f`` bitwise.
    """
    k = np.atleast_1d(np.asarray(k, dtype=int))
    if k.size != f.grid.d:
        raise ValueError(f"lattice point must have {f.grid.d} components")
    out = np.zeros_like(f.values)
    if np.any(k < 0) or np.any(k >= f.grid.xi_max):
        return FrequencyField(f.grid, out, f.mirrored)
    ns = f.grid.n_sub
    sl = tuple(slice(ki * ns, (ki + 1) * ns) for ki in k)
    out[sl] = f.values[sl]
    return FrequencyField(f.grid, out, f.mirrored)


def cube_l2_table(values: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """L2 norm of a value array over every unit cube, shape (xi_max,)*d.

    Accepts leading batch axes (e.g. time frames).
    """
    lead = values.shape[: values.ndim - grid.d]
    X, ns = grid.xi_max, grid.n_sub
    blocked = values.reshape(*lead, *((X, ns) * grid.d))
    sq = np.abs(blocked) ** 2
    # sum over the sub-cell axes, which sit at odd positions after the lead
    sub_axes = tuple(len(lead) + 1 + 2 * a for a in range(grid.d))
    return np.sqrt(np.sum(sq, axis=sub_axes) * grid.h**grid.d)


def _shifted_nonzero(mask: np.ndarray, axis: int, step: int) -> np.ndarray:
    """mask of "neighbor at offset -step along axis is nonzero" (zero fill)."""
    out = np.zeros_like(mask)
    src = [slice(None)] * mask.ndim
    dst = [slice(None)] * mask.ndim
    if step == 1:  # neighbor to the left
        dst[axis] = slice(1, None)
        src[axis] = slice(None, -1)
    else:  # neighbor to the right
        dst[axis] = slice(None, -1)
        src[axis] = slice(1, None)
    out[tuple(dst)] = mask[tuple(src)]
    return out


def _raw_convolve(a: np.ndarray, b: np.ndarray, method: str) -> np.ndarray:
    if method == "direct":
        return _sig_convolve(a, b, mode="full", method="direct")
    if method == "fft":
        full = _sig_fftconvolve(a, b, mode="full")
        # recover exact support: cell-count convolution of the masks
        counts = _sig_fftconvolve(
            (a != 0).astype(float), (b != 0).astype(float), mode="full"
        )
        full[counts < 0.5] = 0.0
        return full
    raise ValueError(f"unknown convolution method {method!r}")


def convolve(
    f: FrequencyField,
    g: FrequencyField,
    rule: str = "riemann",
    method: str = "direct",
    warn_on_truncation: bool = True,
) -> FrequencyField:
    """Discrete convolution of two octant fields, truncated at xi_max.

    ``rule="riemann"`` weights every product by h^d (exact for indicator
    data sampled on whole cells).  ``rule="trapezoid"`` halves the weight
    of the first and last nonzero product of each contiguous run along
    every axis, which is second-order accurate for data smooth within
    their support.  Octant support only moves upward, so truncation never
    corrupts values below xi_max.
    """
    if f.grid != g.grid:
        raise ValueError("convolve requires a shared grid")
    if f.mirrored or g.mirrored:
        raise ValueError("convolve is defined for octant-stored fields only")
    grid = f.grid
    hd = grid.h**grid.d

    if rule == "riemann":
        full = hd * _raw_convolve(f.values, g.values, method)
    elif rule == "trapezoid":
        mf = f.values != 0
        mg = g.values != 0
        full = np.zeros(tuple(2 * n - 1 for n in grid.shape), dtype=np.complex128)
        for signs in itertools.product((1, -1), repeat=grid.d):
            fm = f.values.copy()
            gm = g.values.copy()
            for axis, s in enumerate(signs):
                fm = fm * _shifted_nonzero(mf, axis, s)
                gm = gm * _shifted_nonzero(mg, axis, -s)
            full = full + _raw_convolve(fm, gm, method)
        full *= hd / 2**grid.d
    else:
        raise ValueError(f"unknown convolution rule {rule!r}")

    cut = tuple(slice(0, n) for n in grid.shape)
    if warn_on_truncation:
        spill = full.copy()
        spill[cut] = 0.0
        if np.any(spill != 0):
            warnings.warn(
                "convolution support reaches xi_max; band of validity shrinks",
                RuntimeWarning,
                stacklevel=2,
            )
    return FrequencyField(grid, full[cut])


def convolve_power(
    f: FrequencyField,
    m: int,
    rule: str = "riemann",
    method: str = "direct",
    warn_on_truncation: bool = True,
) -> FrequencyField:
    """m-fold self-convolution by repeated pairwise convolution (m >= 1)."""
    if m < 1 or int(m) != m:
        raise ValueError(f"power must be a positive integer, got {m}")
    out = f.copy()
    for _ in range(int(m) - 1):
        out = convolve(out, f, rule=rule, method=method,
                       warn_on_truncation=warn_on_truncation)
    return out


def support_stats(f: FrequencyField, tol: float | None = None) -> SupportStats:
    """Scan cells with |value| > tol and report support distances.

    Default tolerance is 1e-13 * max|value| (below quadrature noise).
    """
    mags = np.abs(f.values)
    if tol is None:
        peak = float(mags.max()) if mags.size else 0.0
        tol = 1e-13 * peak
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    mask = mags > tol
    if not np.any(mask):
        return SupportStats(np.inf, np.inf, True, tol, empty=True)
    l1 = f.grid.l1()[mask]
    li = f.grid.linf()[mask]
    in_octant = (not f.mirrored) or float(li.max()) == 0.0
    return SupportStats(float(l1.min()), float(li.min()), in_octant, tol)


def save_field(f: FrequencyField, path) -> None:
    """Write a field as text: header "d h xi_max", then one row per cell
    "i0[,i1[,i2]],re,im" in lexicographic index order."""
    grid = f.grid
    with open(path, "w") as fh:
        fh.write(f"{grid.d} {grid.h!r} {grid.xi_max}\n")
        for idx in np.ndindex(grid.shape):
            v = f.values[idx]
            cells = ",".join(str(i) for i in idx)
            fh.write(f"{cells},{float(v.real)!r},{float(v.imag)!r}\n")


def load_field(path) -> FrequencyField:
    """Read a field written by :func:`save_field`."""
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 3:
            raise ValueError(f"malformed field header in {path}")
        d, h, xi_max = int(head[0]), float(head[1]), int(head[2])
        grid = make_grid(d, xi_max, h)
        vals = np.zeros(grid.shape, dtype=np.complex128)
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != d + 2:
                raise ValueError(f"malformed field row in {path}: {line!r}")
            idx = tuple(int(p) for p in parts[:d])
            vals[idx] = complex(float(parts[d]), float(parts[d + 1]))
    return FrequencyField(grid, vals)
