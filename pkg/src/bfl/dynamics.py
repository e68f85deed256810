"""Right-hand sides of the semi-discrete flows and their algebraic identities.

Tangent form (line or periodic):   du/dt = u ^ D+(g D-u)
Curve form (coupled speed allowed): dgamma/dt = g (D+gamma ^ D2 gamma)

Applying D+ to the curve equation reproduces the tangent equation with the
same coefficient samples, and the two ways of writing the tangent rhs,
D+(u ^ g D-u) and u ^ D+(g D-u), agree exactly: their difference telescopes
to g_{i+1} D+u_i ^ D+u_i = 0. Both facts are exposed as testable residuals.

On windows the constant extension makes D-u vanish at the left ghost, so no
spurious torque enters at the ends; keep perturbations at least 10 h away
from the window boundary (a warning polices this, never an error).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .lattice import (
    Field,
    Grid,
    cross,
    delta_g,
    dminus,
    dplus,
    magnitudes,
    norm_linf,
    unit_drift,
)
from .speed import COUPLED, SpeedField, sample

TANGENT = "tangent"
CURVE = "curve"

BOUNDARY_CLEARANCE_NODES = 10


@dataclass(frozen=True)
class FlowState:
    """Time plus the evolving field: the tangent u or the curve gamma."""

    t: float
    field: Field
    speed: SpeedField
    mode: str = TANGENT

    def __post_init__(self):
        if self.mode not in (TANGENT, CURVE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == TANGENT and self.speed.flavor == COUPLED:
            raise ValueError("coupled speed requires the curve form")

    @property
    def grid(self) -> Grid:
        return self.field.grid

    def advanced(self, t: float, field: Field) -> "FlowState":
        return replace(self, t=t, field=field)

    def drift(self) -> float:
        """Deviation of the constrained quantity from 1: |u_i| or |D+gamma_i|."""
        if self.mode == TANGENT:
            return unit_drift(self.field)
        return float(np.max(np.abs(chord_lengths(self.field) - 1.0)))


def chord_lengths(gamma: Field) -> np.ndarray:
    """|D+gamma| over the natural chords (windows drop the ghosted last one)."""
    mags = magnitudes(dplus(gamma))
    return mags if gamma.grid.periodic else mags[:-1]


def pairing_for(speed: SpeedField, grid: Grid) -> str:
    """Cell pairing when the samples sit at midpoints, node pairing otherwise."""
    return "cell" if abs(speed.sampling_offset - grid.h / 2) < 1e-12 * grid.h else "node"


def g_samples(state: FlowState) -> Field:
    gamma = state.field if state.mode == CURVE else None
    return sample(state.speed, state.t, state.grid, gamma=gamma)


def rhs_tangent(state: FlowState, g: Field | None = None) -> Field:
    """u ^ Delta_g u at the state's time; pointwise orthogonal to u."""
    u = state.field
    if g is None:
        g = g_samples(state)
    return cross(u, delta_g(g, u, pairing_for(state.speed, state.grid)))


def rhs_coupled(state: FlowState, g: Field | None = None) -> Field:
    """g (D+gamma ^ D2 gamma); the coupled flavor reads g from the curve."""
    gamma = state.field
    if g is None:
        g = g_samples(state)
    u = dplus(gamma)
    return g * cross(u, dminus(u))


def rhs(state: FlowState, g: Field | None = None) -> Field:
    return rhs_tangent(state, g) if state.mode == TANGENT else rhs_coupled(state, g)


def form_equivalence_residual(u: Field, g: Field) -> float:
    """Max-norm gap between D+(u ^ g D-u) and u ^ D+(g D-u).

    Zero in exact arithmetic; rounding leaves a few ulps of the terms'
    magnitude, so compare against 1e-13 times the result scale.
    """
    torque = cross(u, g * dminus(u))
    conservative = dplus(torque)
    pointwise = cross(u, dplus(g * dminus(u)))
    # the two forms cancel term-by-term; normalize by the size of the
    # differenced terms, not by the (possibly vanishing) result
    scale = max(norm_linf(conservative), norm_linf(pointwise),
                (2.0 / u.grid.h) * norm_linf(torque), 1e-300)
    return float(np.max(np.abs(conservative.values - pointwise.values))) / scale


def tangent_of_coupled_residual(state: FlowState) -> float:
    """Max-norm gap between D+(curve rhs) and the tangent rhs at u = D+gamma.

    Uses one set of coefficient samples for both sides; the identity is
    exact algebra, so the residual is rounding only.
    """
    if state.mode != CURVE:
        raise ValueError("needs a curve state")
    g = g_samples(state)
    lifted = dplus(rhs_coupled(state, g))
    u = dplus(state.field)
    direct = cross(u, delta_g(g, u))
    scale = max(norm_linf(lifted), norm_linf(direct), 1e-300)
    return float(np.max(np.abs(lifted.values - direct.values))) / scale


def warn_if_near_boundary(u0: Field, background: np.ndarray | None = None) -> None:
    """Warn when a window perturbation sits within 10 h of either end.

    ``background`` is the asymptotic node value (defaults to the edge
    values); nodes differing from it count as perturbed.
    """
    grid = u0.grid
    if grid.periodic:
        return
    vals = u0.values if u0.is_vector else u0.values[:, None]
    ref_lo = vals[0] if background is None else background
    ref_hi = vals[-1] if background is None else background
    k = BOUNDARY_CLEARANCE_NODES
    lo = np.max(np.abs(vals[:k] - ref_lo))
    hi = np.max(np.abs(vals[-k:] - ref_hi))
    tol = 1e-8 * max(1.0, float(np.max(np.abs(vals))))
    if lo > tol or hi > tol:
        warnings.warn(
            f"initial data varies within {k} nodes of the window boundary; "
            "the constant-extension ghosts will distort the flow there",
            stacklevel=2)
