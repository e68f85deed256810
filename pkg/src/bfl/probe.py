"""Diagnostics, bound monitors, discrete Frenet geometry and exact oracles.

Monitored quantities per snapshot: the unit (or arc-length) drift, the
weighted gradient energy h sum g |D-u|^2, |D+u|_h, |du/dt|_h and its dual
norm, |Delta_g u|_h, and the signed margins of the two a-priori bounds

    |D+u(t)|_h   <= sqrt(beta/alpha) |D+u0|_h exp(beta1 t / (2 alpha))
    |du/dt|_dual <= beta sqrt(beta/alpha) |D+u0|_h exp(beta1 t / (2 alpha))

(negative margin = violation). Oracles: the sampled great circle and the
precessing helix are exact solutions of the lattice flow (the helix rotates
at omega_h = cos(a) (2 - 2cos kh)/h^2, the k = 1, a = pi/2 case is
stationary), and curves built by marching the Frenet frame for a prescribed
curvature/torsion profile, which is how the soliton filament with
kappa = 2 nu sech(nu x), tau = tau0 enters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import CURVE, TANGENT, FlowState
from .integrate import EvolveResult, IntegratorSpec, evolve
from .lattice import (
    Field,
    Grid,
    cross,
    d2,
    d3,
    delta_g,
    dminus,
    dplus,
    magnitudes,
    norm_h,
    norm_h1,
    norm_h1_dual,
    normalized,
    unit_drift,
    unit_field,
)
from .speed import COUPLED, SPACE_TIME, SpeedField

KAPPA_MIN = 1e-8


# --------------------------------------------------------------------------
# per-snapshot diagnostics
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    unit_drift: float
    energy: float
    grad_norm: float
    rhs_norm: float
    rhs_dual_norm: float
    delta_norm: float
    bound_margins: dict = field(default_factory=dict)
    oracle_error: float | None = None


def energy(u: Field, g: Field) -> float:
    """Weighted gradient energy h sum_i g_i |D-u_i|^2."""
    dm = dminus(u)
    vals = dm.values if dm.is_vector else dm.values[:, None]
    return u.grid.h * float(np.sum(g.values * np.einsum("ij,ij->i", vals, vals)))


def gradient_bound_margin(t: float, grad0: float, grad_now: float,
                          speed: SpeedField) -> float:
    """Slack of the gradient a-priori bound at time t (negative = violated)."""
    bound = math.sqrt(speed.beta / speed.alpha) * grad0 * math.exp(
        speed.beta1 * t / (2.0 * speed.alpha))
    return bound - grad_now


def dual_bound_margin(t: float, grad0: float, rhs_dual_now: float,
                      speed: SpeedField) -> float:
    """Slack of the dual-norm bound on du/dt at time t."""
    bound = speed.beta * math.sqrt(speed.beta / speed.alpha) * grad0 * math.exp(
        speed.beta1 * t / (2.0 * speed.alpha))
    return bound - rhs_dual_now


def _diagnose_one(result: EvolveResult, speed: SpeedField, t: float,
                  f: Field, g: Field, grad0: float | None, margins: bool,
                  oracle) -> DiagnosticsRecord:
    with np.errstate(over="raise", invalid="raise"):
        if result.mode == CURVE:
            u = dplus(f)
            drift_vals = magnitudes(u)
            if not f.grid.periodic:
                drift_vals = drift_vals[:-1]
            drift = float(np.max(np.abs(drift_vals - 1.0)))
        else:
            u = f
            drift = unit_drift(f)
        delta = delta_g(g, u)
        du = cross(u, delta)
        grad = norm_h(dplus(u))
        margin_row = {}
        if margins and result.mode == TANGENT:
            base = grad if grad0 is None else grad0
            margin_row["gradient_bound"] = gradient_bound_margin(t, base, grad, speed)
            margin_row["dual_bound"] = dual_bound_margin(
                t, base, norm_h1_dual(du), speed)
        err = None
        if oracle is not None:
            err = float(np.max(np.abs(f.values - oracle(t))))
        return DiagnosticsRecord(
            t=t,
            unit_drift=drift,
            energy=energy(u, g),
            grad_norm=grad,
            rhs_norm=norm_h(du),
            rhs_dual_norm=norm_h1_dual(du),
            delta_norm=norm_h(delta),
            bound_margins=margin_row,
            oracle_error=err,
        )


def diagnose(result: EvolveResult, speed: SpeedField,
             margins: bool = True, oracle=None) -> list[DiagnosticsRecord]:
    """Diagnostics rows for every stored snapshot.

    ``oracle``: optional callable t -> node values; the record then carries
    the sup-norm error against it. Margins are tangent-mode monitors; for
    curve snapshots the tangent u = D+gamma is diagnosed and margins are
    skipped (the coupled bound bookkeeping tracks the energy rate instead).
    Rows stop at the last computable snapshot when a run diverged.
    """
    records = []
    grad0 = None
    for t, f, g in zip(result.times, result.fields, result.g_samples):
        try:
            record = _diagnose_one(result, speed, t, f, g, grad0, margins, oracle)
        except (ValueError, FloatingPointError):
            break  # snapshot just before a divergence can overflow; truncate
        if grad0 is None:
            grad0 = record.grad_norm
        records.append(record)
    return records


def energy_rate_residual(result: EvolveResult, speed: SpeedField) -> float:
    """Worst defect of the energy evolution law over interior snapshots.

    Space-only coefficients conserve the energy exactly; time-dependent ones
    satisfy dE/dt = h sum dg/dt |D-u|^2, and coupled ones pick up the
    curve-transport term h sum (dgamma/dt . grad_gamma g) |D-u|^2 as well.
    Central differences on the snapshots approximate dE/dt; the coefficient
    derivatives are numerically differentiated, so the residual carries the
    snapshot quadrature error, not just the integrator's.
    """
    times = np.asarray(result.times)
    grid = result.fields[0].grid
    x = grid.nodes()
    energies = []
    rates = []
    eps_t = 1e-6
    for t, f, g in zip(result.times, result.fields, result.g_samples):
        u = dplus(f) if result.mode == CURVE else f
        energies.append(energy(u, g))
        dm = dminus(u)
        sq = np.einsum("ij,ij->i", dm.values, dm.values)
        rate = 0.0
        if speed.flavor in (SPACE_TIME, COUPLED):
            gamma_vals = f.values if result.mode == CURVE else None
            gp = speed(t + eps_t, x, gamma_vals)
            gm = speed(t - eps_t, x, gamma_vals)
            dgdt = (np.broadcast_to(gp, x.shape) - np.broadcast_to(gm, x.shape)) / (2 * eps_t)
            rate += grid.h * float(np.sum(dgdt * sq))
        if speed.flavor == COUPLED and result.mode == CURVE:
            vel = g * cross(u, dminus(u))
            grad_g = np.empty_like(f.values)
            for j in range(3):
                shift = np.zeros(3)
                shift[j] = eps_t
                gp = speed(t, x, f.values + shift)
                gm = speed(t, x, f.values - shift)
                grad_g[:, j] = (gp - gm) / (2 * eps_t)
            rate += grid.h * float(np.sum(
                np.einsum("ij,ij->i", vel.values, grad_g) * sq))
        rates.append(rate)

    worst = 0.0
    for k in range(1, len(times) - 1):
        # three-point derivative, exact on quadratics even when the last
        # snapshot interval is shortened
        d1 = times[k] - times[k - 1]
        d0 = times[k + 1] - times[k]
        dedt = (energies[k + 1] * d1 ** 2 - energies[k - 1] * d0 ** 2
                + energies[k] * (d0 ** 2 - d1 ** 2)) / (d0 * d1 * (d0 + d1))
        worst = max(worst, abs(dedt - rates[k]))
    return worst


# --------------------------------------------------------------------------
# discrete Frenet geometry
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FrenetData:
    """Curvature and torsion fields with validity masks.

    ``stencil_valid`` marks nodes whose difference stencils stay inside the
    window (everything on periodic grids); ``tau_defined`` additionally
    excludes near-inflection nodes where torsion has no value.
    """

    kappa: Field
    tau: Field
    tau_defined: np.ndarray
    stencil_valid: np.ndarray


def frenet(gamma: Field, kappa_min: float = KAPPA_MIN) -> FrenetData:
    """kappa_i = |D2 gamma_i| and tau_i = det(D+g, D2g, D3g)_i / kappa_i^2.

    Torsion entries with kappa below ``kappa_min`` are flagged undefined and
    set to zero rather than clamped: torsion has no value at inflections.
    Window nodes whose stencils would read ghost values are zeroed and
    excluded from the masks. Warns when the input is visibly not arc-length
    parametrized.
    """
    chords = magnitudes(dplus(gamma))
    probe_chords = chords if gamma.grid.periodic else chords[:-1]
    if np.max(np.abs(probe_chords - 1.0)) > 1e-3:
        warnings.warn("curve is not arc-length parametrized; curvature and "
                      "torsion values will be distorted", stacklevel=2)
    n = gamma.grid.n_nodes
    valid = np.ones(n, dtype=bool)
    tau_stencil = np.ones(n, dtype=bool)
    if not gamma.grid.periodic:
        valid[0] = valid[-1] = False              # D2 needs both neighbors
        tau_stencil[:] = valid
        tau_stencil[-2] = False                   # D3 reaches two nodes right
    first = dplus(gamma)
    second = d2(gamma)
    third = d3(gamma)
    kappa = np.where(valid, magnitudes(second), 0.0)
    det = np.einsum("ij,ij->i", np.cross(first.values, second.values), third.values)
    defined = tau_stencil & (kappa >= kappa_min)
    tau = np.zeros_like(kappa)
    tau[defined] = det[defined] / kappa[defined] ** 2
    return FrenetData(
        kappa=Field(gamma.grid, kappa, "zero"),
        tau=Field(gamma.grid, tau, "zero"),
        tau_defined=defined,
        stencil_valid=valid,
    )


def peak_location(values: Field) -> float:
    """Sub-node location of the max by parabolic interpolation."""
    grid = values.grid
    mags = magnitudes(values)
    j = int(np.argmax(mags))
    if grid.periodic:
        lo, hi = mags[(j - 1) % grid.n_nodes], mags[(j + 1) % grid.n_nodes]
    else:
        if j == 0 or j == grid.n_nodes - 1:
            return float(grid.nodes()[j])
        lo, hi = mags[j - 1], mags[j + 1]
    denom = lo - 2 * mags[j] + hi
    shift = 0.0 if denom == 0 else 0.5 * (lo - hi) / denom
    return float(grid.nodes()[j] + shift * grid.h)


# --------------------------------------------------------------------------
# exact and constructed oracles
# --------------------------------------------------------------------------

def oracle_great_circle(grid: Grid, k: int = 1) -> Field:
    """Unit tangent of a k-times wound circle; a lattice equilibrium."""
    x = grid.nodes()
    return unit_field(grid, np.stack(
        [np.cos(k * x), np.sin(k * x), np.zeros_like(x)], axis=1))


def oracle_circle_curve(grid: Grid, k: int = 1) -> Field:
    """Closed polygon with exactly unit chords, centered at the origin.

    The curve integral of the great-circle tangents: a regular polygon whose
    vertices sit at the circumradius h / (2 sin(h k / 2)) per winding; every
    chord has length h to rounding, which is the curve-mode invariant.
    """
    if not grid.periodic:
        raise ValueError("a closed circle curve needs a periodic grid")
    from .reconstruct import gamma_integral
    gamma = gamma_integral(oracle_great_circle(grid, k), origin=0)
    centered = gamma.values - gamma.values.mean(axis=0)
    return Field(grid, centered)


def helix_rotation_rate(grid: Grid, alpha: float, k: int) -> float:
    """Exact lattice precession rate cos(a) (2 - 2 cos kh) / h^2."""
    return math.cos(alpha) * (2.0 - 2.0 * math.cos(k * grid.h)) / grid.h ** 2


def oracle_helix(grid: Grid, alpha: float, k: int):
    """Helix tangents u0, the closed-form evolution t -> values, and omega_h."""
    if grid.periodic:
        windings = k * grid.length / (2 * math.pi)
        if abs(windings - round(windings)) > 1e-9:
            raise ValueError("helix wavenumber incompatible with the period")
    x = grid.nodes()
    s, c = math.sin(alpha), math.cos(alpha)
    omega = helix_rotation_rate(grid, alpha, k)

    def closed_form(t: float) -> np.ndarray:
        phase = k * x - omega * t
        return np.stack([s * np.cos(phase), s * np.sin(phase),
                         np.full_like(x, c)], axis=1)

    return unit_field(grid, closed_form(0.0)), closed_form, omega


def frenet_curve(grid: Grid, kappa_fn, tau_fn, substeps: int = 10):
    """March the Frenet frame for prescribed curvature and torsion profiles.

    Fourth-order integration of (gamma, T, N, B)' with substep h/substeps,
    frame re-orthonormalized at every node. Returns the node curve rebuilt
    from unit chords (so |D+gamma| = 1 to rounding) and the matching unit
    tangent field.
    """
    if grid.periodic:
        raise ValueError("Frenet construction runs on window grids")
    n = grid.n_nodes
    h = grid.h
    sub = h / substeps

    def deriv(x, state):
        gamma, t_vec, n_vec, b_vec = state
        kap, tor = kappa_fn(x), tau_fn(x)
        return (t_vec,
                kap * n_vec,
                -kap * t_vec + tor * b_vec,
                -tor * n_vec)

    def rk4(x, state, dx):
        k1 = deriv(x, state)
        s2 = tuple(y + 0.5 * dx * k for y, k in zip(state, k1))
        k2 = deriv(x + 0.5 * dx, s2)
        s3 = tuple(y + 0.5 * dx * k for y, k in zip(state, k2))
        k3 = deriv(x + 0.5 * dx, s3)
        s4 = tuple(y + dx * k for y, k in zip(state, k3))
        k4 = deriv(x + dx, s4)
        return tuple(y + (dx / 6.0) * (a + 2 * b + 2 * c + d)
                     for y, a, b, c, d in zip(state, k1, k2, k3, k4))

    def renormalize(state):
        gamma, t_vec, n_vec, b_vec = state
        t_vec = t_vec / np.linalg.norm(t_vec)
        n_vec = n_vec - (n_vec @ t_vec) * t_vec
        n_vec = n_vec / np.linalg.norm(n_vec)
        b_vec = np.cross(t_vec, n_vec)
        return (gamma, t_vec, n_vec, b_vec)

    state = (np.zeros(3), np.array([1.0, 0.0, 0.0]),
             np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0]))
    # one extra node so every grid node gets a forward chord
    points = np.empty((n + 1, 3))
    points[0] = state[0]
    x = grid.x0
    for i in range(n):
        for _ in range(substeps):
            state = rk4(x, state, sub)
            x += sub
        state = renormalize(state)
        points[i + 1] = state[0]

    chords = points[1:] - points[:-1]
    tangents = chords / np.linalg.norm(chords, axis=1)[:, None]
    curve = np.vstack([np.zeros(3), np.cumsum(h * tangents[:-1], axis=0)])
    return Field(grid, curve), unit_field(grid, tangents)


def oracle_soliton_curve(grid: Grid, nu: float, tau0: float):
    """Filament with kappa = 2 nu sech(nu x), constant torsion tau0.

    The curvature peak travels at speed 2 tau0. Requires a window wide
    enough that the profile has decayed at both ends.
    """
    if grid.periodic:
        raise ValueError("the soliton filament lives on a window grid")
    edge = min(abs(grid.x0), abs(grid.x0 + grid.h * (grid.n_nodes - 1)))
    if 1.0 / math.cosh(nu * edge) >= 1e-8:
        raise ValueError(f"window too narrow for nu = {nu:g}: "
                         f"sech(nu*edge) = {1.0 / math.cosh(nu * edge):.2e}")
    return frenet_curve(grid,
                        lambda x: 2.0 * nu / np.cosh(nu * x),
                        lambda x: tau0)


# --------------------------------------------------------------------------
# empirical stability probe
# --------------------------------------------------------------------------

def smooth_bump(grid: Grid, center: float | None = None,
                width: float | None = None) -> np.ndarray:
    """Compactly supported smooth bump exp(1 - 1/(1 - s^2)) on |s| < 1."""
    x = grid.nodes()
    span = grid.length if grid.periodic else grid.h * (grid.n_nodes - 1)
    if center is None:
        center = grid.x0 + span / 2.0
    if width is None:
        width = span / 4.0
    s = (x - center) / width
    out = np.zeros_like(x)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def perturbed_initial_data(u0: Field, eps: float) -> Field:
    """normalize(u0 + eps v): v a fixed smooth bump projected tangent to u0."""
    if not 0.0 < eps <= 0.1:
        raise ValueError("perturbation scale must lie in (0, 0.1]")
    bump = smooth_bump(u0.grid)
    direction = np.array([0.3, -0.5, 0.8])
    direction /= np.linalg.norm(direction)
    raw = bump[:, None] * direction
    tangent = raw - np.einsum("ij,ij->i", raw, u0.values)[:, None] * u0.values
    return normalized(Field(u0.grid, u0.values + eps * tangent))


def stability_probe(u0: Field, eps: float, speed: SpeedField, horizon: float,
                    spec: IntegratorSpec) -> float:
    """H1 amplification |u(T) - u~(T)|_H1 / |u0 - u~0|_H1 of a bump of size eps."""
    u0_tilde = perturbed_initial_data(u0, eps)
    base = evolve(FlowState(0.0, u0, speed), horizon, spec)
    pert = evolve(FlowState(0.0, u0_tilde, speed), horizon, spec)
    if base.status != "ok" or pert.status != "ok":
        raise RuntimeError("stability probe run diverged")
    num = norm_h1(base.final() - pert.final())
    den = norm_h1(u0 - u0_tilde)
    return num / den
