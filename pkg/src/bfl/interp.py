"""Piecewise-linear and piecewise-constant lifts of lattice fields.

The two interpolants bridge lattice norms and continuum norms: the L2 norm
of the piecewise-linear lift has an exact cellwise closed form, the gap
between the two lifts is (h/sqrt(3)) |D+v|_h exactly, and the sup norm of
the linear lift is the node max. Window interpolants are never extended
past the window; continuum integrals become window integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import AlignmentError, Field, Grid, dplus, norm_h, norm_linf

PIECEWISE_LINEAR = "piecewise-linear"
PIECEWISE_CONSTANT = "piecewise-constant"

# Sharp equivalence constants between |v|_h and the L2 norm of the linear
# lift: cellwise (a^2 + a.b + b^2)/3 lies between (a^2+b^2)/6 and
# (a^2+b^2)/2, with equality at b = -a and b = a respectively.
SANDWICH_LOWER = 1.0 / math.sqrt(3.0)
SANDWICH_UPPER = 1.0

# Regression constant for the discrete Sobolev embedding
# sup|v| <= C |v|_H1h: calibrated once by maximizing the ratio over 1e4
# random fields (both topologies, spans down to 0.04, rough/smooth/peaked
# shapes; measured max 2.15) and frozen with margin. An empirical value for
# this grid family, not a mathematical constant: short domains push it up
# like 1/sqrt(span).
SOBOLEV_EMBED_CONSTANT = 2.3


class DomainError(ValueError):
    """Evaluation point outside the interpolant's window."""


@dataclass(frozen=True)
class InterpolantView:
    """Callable view of a lattice field as a function of x."""

    base: Field
    kind: str

    def __post_init__(self):
        if self.kind not in (PIECEWISE_LINEAR, PIECEWISE_CONSTANT):
            raise ValueError(f"unknown interpolant kind {self.kind!r}")

    def __call__(self, x):
        return evaluate(self, x)


def piecewise_linear(v: Field) -> InterpolantView:
    return InterpolantView(v, PIECEWISE_LINEAR)


def piecewise_constant(v: Field) -> InterpolantView:
    return InterpolantView(v, PIECEWISE_CONSTANT)


def evaluate(view: InterpolantView, x):
    """Evaluate the interpolant at x (scalar or array).

    Periodic grids wrap x; window grids accept x in [x0, x_M] and raise
    DomainError outside. At a node both kinds return the node value.
    """
    grid = view.base.grid
    vals = view.base.values
    x = np.asarray(x, dtype=float)
    scalar_in = x.ndim == 0
    x = np.atleast_1d(x)
    if grid.periodic:
        rel = np.mod(x - grid.x0, grid.length)
    else:
        span = grid.h * (grid.n_nodes - 1)
        rel = x - grid.x0
        if np.any(rel < -1e-12 * grid.h) or np.any(rel > span * (1 + 1e-15) + 1e-12 * grid.h):
            raise DomainError(f"coordinate outside window [{grid.x0}, {grid.x0 + span}]")
        rel = np.clip(rel, 0.0, span)
    idx = np.floor(rel / grid.h).astype(int)
    n_cells = grid.n_nodes if grid.periodic else grid.n_nodes - 1
    idx = np.minimum(idx, n_cells - 1)
    frac = rel / grid.h - idx
    left = vals[idx]
    right = vals[(idx + 1) % grid.n_nodes]
    if view.kind == PIECEWISE_CONSTANT:
        out = left.copy()
        exact = frac >= 1.0 - 1e-15
        if np.any(exact):
            out[exact] = right[exact]
    else:
        f = frac if vals.ndim == 1 else frac[:, None]
        out = left + (right - left) * f
    return out[0] if scalar_in else out


def _cell_pairs(v: Field):
    vals = v.values
    if v.grid.periodic:
        return vals, np.roll(vals, -1, axis=0)
    return vals[:-1], vals[1:]


def l2_norm_linear(v: Field) -> float:
    """L2 norm of the piecewise-linear lift, by the exact cellwise integral.

    The cell [x_i, x_{i+1}] contributes (h/3)(|v_i|^2 + v_i.v_{i+1}
    + |v_{i+1}|^2); the total lies between SANDWICH_LOWER*|v|_h and
    SANDWICH_UPPER*|v|_h (sharp over periodic fields).
    """
    a, b = _cell_pairs(v)
    if v.is_vector:
        cell = (np.einsum("ij,ij->i", a, a) + np.einsum("ij,ij->i", a, b)
                + np.einsum("ij,ij->i", b, b))
    else:
        cell = a * a + a * b + b * b
    return math.sqrt(max(float(np.sum(cell)) * v.grid.h / 3.0, 0.0))


def interp_gap(v: Field) -> float:
    """L2 distance between the linear and constant lifts: (h/sqrt3)|D+v|_h.

    On windows the integral runs over the window cells only; the ghosted
    last difference is zero, so the identity still holds exactly.
    """
    return (v.grid.h / math.sqrt(3.0)) * norm_h(dplus(v))


def sup_norm_linear(v: Field) -> float:
    """Sup norm of the piecewise-linear lift; equals the node max."""
    return norm_linf(v)


def resample(v: Field, coarse: Grid) -> Field:
    """Restrict a fine-grid field to a nested coarser grid by node sampling."""
    fine = v.grid
    if fine.periodic != coarse.periodic or fine.x0 != coarse.x0:
        raise AlignmentError("grids are not nested")
    ratio = coarse.h / fine.h
    r = int(round(ratio))
    if r < 1 or abs(ratio - r) > 1e-9:
        raise AlignmentError("coarse spacing is not an integer multiple of fine")
    if fine.periodic:
        if fine.length != coarse.length or fine.n_nodes != r * coarse.n_nodes:
            raise AlignmentError("periodic grids are not nested")
    else:
        if fine.n_nodes - 1 != r * (coarse.n_nodes - 1):
            raise AlignmentError("window grids are not nested")
    return Field(coarse, v.values[::r][:coarse.n_nodes], v.extension)


def quadrature_cellwise(view_fn, grid: Grid, points_per_cell: int = 10) -> float:
    """Integrate view_fn(x) over the grid's cells with Gauss-Legendre points.

    Exact for piecewise polynomials up to degree 2*points_per_cell - 1,
    which covers every interpolant product used in the tests.
    """
    nodes, weights = np.polynomial.legendre.leggauss(points_per_cell)
    n_cells = grid.n_nodes if grid.periodic else grid.n_nodes - 1
    x_left = grid.x0 + grid.h * np.arange(n_cells)
    total = 0.0
    for xl in x_left:
        x = xl + (nodes + 1.0) * (grid.h / 2.0)
        total += (grid.h / 2.0) * float(np.sum(weights * view_fn(x)))
    return total
