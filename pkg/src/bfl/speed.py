"""Speed-coefficient models with certified bounds and grid sampling.

A SpeedField wraps the coefficient g in one of four flavors (constant,
space-only, space-time, coupled to the curve) together with caller-declared
bounds: alpha (positive lower bound), beta (sup of g), beta1 (sup of the
time derivative) and beta_prime (sup of the spatial / curve-gradient first
derivatives). The bounds feed the a-priori bound monitors; they are
spot-validated, never inferred.

Sampling offset: 0 samples g at the nodes (first-order accurate inside the
conservative second difference for variable g); h/2 samples cell midpoints,
which the dynamics pairs with the difference across that cell for
second-order accuracy. The coupled flavor never applies an offset, since
the curve exists only at nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .lattice import CoefficientBoundError, Field, Grid

CONSTANT = "constant"
SPACE_ONLY = "space-only"
SPACE_TIME = "space-time"
COUPLED = "coupled"

_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class SpeedField:
    """Coefficient g with declared bounds.

    ``fn`` signature by flavor: constant -> ignored (use ``make_constant``);
    space-only f(x); space-time f(t, x); coupled f(t, x, gamma) with gamma
    of shape (n, 3), vectorized over nodes.
    """

    flavor: str
    fn: Callable
    alpha: float
    beta: float
    beta1: float = 0.0
    beta_prime: float = 0.0
    sampling_offset: float = 0.0
    name: str = ""

    def __post_init__(self):
        if self.flavor not in (CONSTANT, SPACE_ONLY, SPACE_TIME, COUPLED):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if not (self.alpha > 0):
            raise ValueError("lower bound alpha must be positive")
        if self.beta < self.alpha:
            raise ValueError("upper bound beta must dominate alpha")

    @property
    def time_dependent(self) -> bool:
        return self.flavor in (SPACE_TIME, COUPLED)

    def with_offset(self, offset: float) -> "SpeedField":
        return SpeedField(self.flavor, self.fn, self.alpha, self.beta,
                          self.beta1, self.beta_prime, offset, self.name)

    def __call__(self, t, x, gamma=None):
        if self.flavor == CONSTANT:
            return np.broadcast_to(self.fn(), np.shape(x)).astype(float)
        if self.flavor == SPACE_ONLY:
            return np.asarray(self.fn(x), dtype=float)
        if self.flavor == SPACE_TIME:
            return np.asarray(self.fn(t, x), dtype=float)
        return np.asarray(self.fn(t, x, gamma), dtype=float)


def make_constant(c: float, name: str = "") -> SpeedField:
    return SpeedField(CONSTANT, lambda: c, alpha=c, beta=c,
                      name=name or f"const:{c:g}")


def sample(speed: SpeedField, t: float, grid: Grid, gamma: Field | None = None) -> Field:
    """Sample g onto the grid at time t; validates every value in [alpha, beta].

    Non-coupled flavors sample at x_i + sampling_offset. The coupled flavor
    requires gamma and samples at the nodes with the curve values.
    """
    x = grid.nodes()
    if speed.flavor == COUPLED:
        if gamma is None:
            raise ValueError("coupled speed needs the current curve")
        vals = speed(t, x, gamma.values)
    else:
        if gamma is not None and speed.flavor != COUPLED:
            gamma = None
        vals = speed(t, x + speed.sampling_offset)
    vals = np.broadcast_to(np.asarray(vals, dtype=float), x.shape).copy()
    slack = _BOUND_SLACK * max(1.0, abs(speed.beta))
    if np.any(vals < speed.alpha - slack) or np.any(vals > speed.beta + slack):
        bad = int(np.argmax(np.maximum(speed.alpha - vals, vals - speed.beta)))
        raise CoefficientBoundError(
            f"sample {vals[bad]:.6g} at node {bad} (x = {x[bad]:.6g}) "
            f"violates declared bounds [{speed.alpha:g}, {speed.beta:g}]")
    return Field(grid, vals)


@dataclass
class BoundsReport:
    """Worst margins from a dense spot check of the declared bounds."""

    ok: bool
    lower_margin: float          # min g - alpha
    upper_margin: float          # beta - max g
    dt_margin: float | None      # beta1 - max |finite-difference dg/dt|
    dx_margin: float | None      # beta_prime - max |finite-difference dg/dx|
    flags: list = field(default_factory=list)


def validate_bounds(speed: SpeedField, grid: Grid, t_grid=(0.0,),
                    gamma: Field | None = None,
                    points_per_cell: int = 10,
                    derivative_slack: float = 0.05) -> BoundsReport:
    """Dense spot check of alpha <= g <= beta and the derivative bounds.

    Samples ``points_per_cell`` points per cell at every listed time;
    finite-difference estimates of dg/dt and dg/dx must respect beta1 and
    beta_prime within ``derivative_slack`` (5% by default). Violations are
    reported, not raised: the caller decides.
    """
    n_cells = grid.n_nodes if grid.periodic else grid.n_nodes - 1
    xs = grid.x0 + np.linspace(0.0, n_cells * grid.h, n_cells * points_per_cell,
                               endpoint=False)
    gamma_vals = None
    if speed.flavor == COUPLED:
        if gamma is None:
            raise ValueError("coupled speed needs curve samples to validate")
        # curve available at nodes only: validate there
        xs = grid.nodes()
        gamma_vals = gamma.values

    lower = np.inf
    upper = np.inf
    dt_worst = 0.0
    dx_worst = 0.0
    eps_t = 1e-5
    eps_x = 1e-5 * max(grid.h, 1.0)
    for t in t_grid:
        vals = speed(t, xs, gamma_vals)
        vals = np.broadcast_to(np.asarray(vals, float), xs.shape)
        lower = min(lower, float(np.min(vals) - speed.alpha))
        upper = min(upper, float(speed.beta - np.max(vals)))
        if speed.flavor in (SPACE_TIME, COUPLED):
            vp = np.broadcast_to(np.asarray(speed(t + eps_t, xs, gamma_vals), float), xs.shape)
            dt_worst = max(dt_worst, float(np.max(np.abs(vp - vals))) / eps_t)
        if speed.flavor != CONSTANT and speed.flavor != COUPLED:
            vx = np.broadcast_to(np.asarray(speed(t, xs + eps_x, gamma_vals), float), xs.shape)
            dx_worst = max(dx_worst, float(np.max(np.abs(vx - vals))) / eps_x)

    flags = []
    if lower < 0:
        flags.append(f"lower bound violated by {-lower:.3g}")
    if upper < 0:
        flags.append(f"upper bound violated by {-upper:.3g}")
    dt_margin = None
    dx_margin = None
    if speed.flavor in (SPACE_TIME, COUPLED):
        dt_margin = speed.beta1 * (1 + derivative_slack) - dt_worst
        if dt_margin < 0:
            flags.append(f"time-derivative bound exceeded by {-dt_margin:.3g}")
    if speed.flavor in (SPACE_ONLY, SPACE_TIME):
        dx_margin = speed.beta_prime * (1 + derivative_slack) - dx_worst
        if dx_margin < 0:
            flags.append(f"space-derivative bound exceeded by {-dx_margin:.3g}")
    return BoundsReport(ok=not flags, lower_margin=lower, upper_margin=upper,
                        dt_margin=dt_margin, dx_margin=dx_margin, flags=flags)


# --------------------------------------------------------------------------
# named built-ins, selectable from configs
# --------------------------------------------------------------------------

def speed_from_name(spec: str) -> SpeedField:
    """Build a coefficient from its config name.

    Grammar: ``const:c`` | ``sin:a,b,k`` (a + b sin(kx)) |
    ``sintime:a,b,k,w`` (a + b sin(kx) cos(wt)) |
    ``coupled-tanh:a,b`` (a + b tanh(|gamma|^2)).
    """
    head, _, tail = spec.partition(":")
    head = head.strip()
    try:
        args = [float(s) for s in tail.split(",")] if tail.strip() else []
    except ValueError as exc:
        raise ValueError(f"bad coefficient arguments in {spec!r}") from exc

    if head == "const":
        (c,) = args
        if c <= 0:
            raise ValueError("constant coefficient must be positive")
        return make_constant(c, name=spec)
    if head == "sin":
        a, b, k = args
        if a - abs(b) <= 0:
            raise ValueError("sin coefficient dips to zero or below")
        return SpeedField(SPACE_ONLY, lambda x, a=a, b=b, k=k: a + b * np.sin(k * x),
                          alpha=a - abs(b), beta=a + abs(b),
                          beta1=0.0, beta_prime=abs(b * k), name=spec)
    if head == "sintime":
        a, b, k, w = args
        if a - abs(b) <= 0:
            raise ValueError("sintime coefficient dips to zero or below")
        return SpeedField(
            SPACE_TIME,
            lambda t, x, a=a, b=b, k=k, w=w: a + b * np.sin(k * x) * np.cos(w * t),
            alpha=a - abs(b), beta=a + abs(b),
            beta1=abs(b * w), beta_prime=abs(b * k), name=spec)
    if head == "coupled-tanh":
        a, b = args
        if a <= 0 or a + min(b, 0.0) <= 0:
            raise ValueError("coupled-tanh coefficient must stay positive")

        def fn(t, x, gamma, a=a, b=b):
            sq = np.einsum("ij,ij->i", gamma, gamma)
            return a + b * np.tanh(sq)

        # sup_s 2 sqrt(s) sech^2(s) < 1.1, so 1.1|b| dominates |grad_gamma g|
        return SpeedField(COUPLED, fn,
                          alpha=min(a, a + b), beta=max(a, a + b),
                          beta1=0.0, beta_prime=1.1 * abs(b), name=spec)
    raise ValueError(f"unknown coefficient selector {spec!r}")
