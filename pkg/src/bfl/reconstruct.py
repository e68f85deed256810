"""Rebuild the filament from a tangent trajectory.

The curve is the spatial integral of the tangent field plus a
time-dependent base-point drift:

* gamma_integral: left Riemann sum from a designated origin node. The left
  sum is the exact integral of the piecewise-constant lift of u, which is
  what makes D+ gamma = u an identity (telescoping) rather than an
  approximation.
* basepoint_drift: c(t) = integral of the local velocity g u ^ D-u at an
  anchor node, plus the change of the spatial integral up to the anchor.
  For the exact semi-discrete flow the result is anchor-independent in
  exact time integration; the trapezoid rule on stored snapshots and the
  integrator error are the only sources of anchor dispersion, so the
  dispersion shrinks under refinement and doubles as a consistency check.
* reconstruct_curve: gamma(t) = gamma_integral(u(t)) + c(t).

Snapshot spacing bounds the reconstruction accuracy at O(dt_snap^2)
(trapezoid on stored data).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Field, Grid, dminus, magnitudes

RECONSTRUCTED = "reconstructed"
DIRECT = "direct"


@dataclass(frozen=True)
class TangentTrajectory:
    """Ordered tangent snapshots on one grid, with the g samples used."""

    times: tuple
    fields: tuple
    g_samples: tuple

    def __post_init__(self):
        t = np.asarray(self.times)
        if len(t) < 2 or np.any(np.diff(t) <= 0):
            raise ValueError("need at least two strictly increasing snapshot times")
        grid = self.fields[0].grid
        if any(f.grid != grid for f in self.fields):
            raise ValueError("snapshots on mismatched grids")
        if len(self.fields) != len(t) or len(self.g_samples) != len(t):
            raise ValueError("times, fields and g samples must align")

    @property
    def grid(self) -> Grid:
        return self.fields[0].grid

    @staticmethod
    def from_result(result) -> "TangentTrajectory":
        """Adopt an EvolveResult; curve-mode results are differenced to tangents."""
        fields = result.fields
        if result.mode == "curve":
            from .lattice import dplus
            fields = [dplus(f) for f in fields]
        return TangentTrajectory(tuple(result.times), tuple(fields),
                                 tuple(result.g_samples))


@dataclass(frozen=True)
class CurveTrajectory:
    """Ordered curve snapshots with provenance (reconstructed or direct)."""

    times: tuple
    fields: tuple
    provenance: str = RECONSTRUCTED

    def final(self) -> Field:
        return self.fields[-1]


def default_origin(grid: Grid) -> int:
    """Middle node for windows, node 0 for periodic grids."""
    return 0 if grid.periodic else grid.n_nodes // 2


def gamma_integral(u: Field, origin: int | None = None) -> Field:
    """Left Riemann sum of u from the origin node; exact inverse of D+.

    Gamma_i = h * sum_{j=origin}^{i-1} u_j for i > origin, the mirrored sum
    for i < origin, and Gamma_origin = 0.
    """
    grid = u.grid
    i0 = default_origin(grid) if origin is None else origin
    if not 0 <= i0 < grid.n_nodes:
        raise ValueError(f"origin node {i0} outside the grid")
    vals = u.values if u.is_vector else u.values[:, None]
    prefix = np.vstack([np.zeros((1, vals.shape[1])), np.cumsum(grid.h * vals, axis=0)])
    out = prefix[:-1] - prefix[i0]
    if not u.is_vector:
        out = out[:, 0]
    return Field(grid, out)


def basepoint_drift(traj: TangentTrajectory, anchor: int | None = None,
                    origin: int | None = None) -> np.ndarray:
    """Drift time series c(t_k); c(0) = 0 exactly.

    c(t_k) = h sum_{j=origin}^{anchor-1} (u_j(t_0) - u_j(t_k))
             + trapezoid over the snapshots of g_a (u_a ^ D-u_a).
    """
    grid = traj.grid
    i0 = default_origin(grid) if origin is None else origin
    a = i0 if anchor is None else anchor
    if not 0 <= a < grid.n_nodes:
        raise ValueError(f"anchor node {a} outside the grid")

    times = np.asarray(traj.times)
    u0_vals = traj.fields[0].values

    # velocity of the anchor point along the trajectory
    vel = np.empty((len(times), 3))
    for k, (f, g) in enumerate(zip(traj.fields, traj.g_samples)):
        du = dminus(f)
        vel[k] = g.values[a] * np.cross(f.values[a], du.values[a])

    lo, hi = (i0, a) if i0 <= a else (a, i0)
    sign = 1.0 if i0 <= a else -1.0

    out = np.zeros((len(times), 3))
    temporal = np.zeros(3)
    for k in range(1, len(times)):
        spatial = sign * grid.h * np.sum(u0_vals[lo:hi] - traj.fields[k].values[lo:hi],
                                         axis=0)
        temporal = temporal + 0.5 * (times[k] - times[k - 1]) * (vel[k - 1] + vel[k])
        out[k] = spatial + temporal
    return out


def reconstruct_curve(traj: TangentTrajectory, anchor: int | None = None,
                      origin: int | None = None) -> CurveTrajectory:
    """gamma(t_k) = gamma_integral(u(t_k)) + c(t_k), origin pinned at zero."""
    drift = basepoint_drift(traj, anchor=anchor, origin=origin)
    curves = []
    for k, f in enumerate(traj.fields):
        base = gamma_integral(f, origin=origin)
        curves.append(Field(base.grid, base.values + drift[k]))
    return CurveTrajectory(traj.times, tuple(curves), provenance=RECONSTRUCTED)


def anchor_dispersion(traj: TangentTrajectory, anchors, origin: int | None = None) -> float:
    """Max over anchor pairs of the sup distance between drift series.

    The discrete residual of the x-independence of the drift rate; zero for
    exact time integration, so it measures snapshot quadrature plus
    integrator error and must shrink under refinement.
    """
    anchors = list(anchors)
    if len(anchors) < 2:
        raise ValueError("need at least two anchors")
    series = [basepoint_drift(traj, anchor=a, origin=origin) for a in anchors]
    worst = 0.0
    for i in range(len(series)):
        for j in range(i + 1, len(series)):
            worst = max(worst, float(np.max(np.abs(series[i] - series[j]))))
    return worst


def chord_drift(gamma: Field) -> float:
    """max | |D+gamma_i| - 1 | over the natural chords."""
    from .lattice import dplus
    mags = magnitudes(dplus(gamma))
    if not gamma.grid.periodic:
        mags = mags[:-1]
    return float(np.max(np.abs(mags - 1.0)))


def tangent_mismatch(gamma: Field, u: Field) -> float:
    """sup |D+gamma - u| over the natural chords (identity for reconstructions).

    Periodic curves reconstruct over one period; the wrap chord only matches
    u when the tangents sum to zero (a closed curve), so it is excluded.
    """
    from .lattice import dplus
    diff = np.abs(dplus(gamma).values - u.values)
    if diff.ndim == 1:
        diff = diff[:, None]
    return float(np.max(diff[:-1]))
