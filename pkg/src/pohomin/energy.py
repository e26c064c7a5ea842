"""Action functional, Pohozaev functional, and the manifold projection.

The projection uses the closed-form dilation parameter: for N = 3,
I(u(./t)) = (t/2)||grad u||^2 + t^3 * integral(lambda/2 u^2 - F(u)), so the
fiber maximum sits at t*^2 = ||grad u||^2 / (6 * integral G(u)).  Rescaling
the mesh by t* then lands exactly on J = 0 in the discrete quadrature.
"""

from dataclasses import dataclass

import numpy as np

from .grid import RadialFunction, grad_l2_sq, radial_integral, rescale
from .nonlinearity import G_eval

N_DIM = 3
CRITICAL_EXPONENT = 6  # 2* = 2N/(N-2) for N = 3


class ProjectionInfeasible(Exception):
    """The G-integral is nonpositive: no dilation reaches the manifold."""

    def __init__(self, g_integral):
        super().__init__(f"integral of G is {g_integral:g} <= 0")
        self.g_integral = g_integral


@dataclass(frozen=True)
class ProjectionResult:
    t_star: float
    projected: RadialFunction
    action_at_t: float
    g_integral: float


def action_I(model, w):
    """I(w) = 1/2 integral(|grad w|^2 + lambda w^2) - integral F(w)."""
    quad = grad_l2_sq(w) + model.lam * radial_integral(lambda u: u * u, w)
    return 0.5 * quad - radial_integral(model.F, w)


def g_integral(model, w):
    """4*pi * integral of G(w) r^2 dr."""
    return radial_integral(lambda u: G_eval(model, u), w)


def pohozaev_J(model, w):
    """J(w) = ||grad w||^2 - 6 * integral G(w) (N = 3)."""
    return grad_l2_sq(w) - CRITICAL_EXPONENT * g_integral(model, w)


def project_t(model, w):
    """Dilation parameter t* > 0 with J(w(./t*)) = 0.

    Raises ProjectionInfeasible when integral G(w) <= 0.
    """
    gint = g_integral(model, w)
    if gint <= 0:
        raise ProjectionInfeasible(gint)
    return np.sqrt(grad_l2_sq(w) / (CRITICAL_EXPONENT * gint))


def project(model, w):
    t = project_t(model, w)
    proj = rescale(w, t)
    return ProjectionResult(
        t_star=t,
        projected=proj,
        action_at_t=action_I(model, proj),
        g_integral=g_integral(model, proj),
    )


def h_eval(model, w, t):
    """h(t) = I(w(./t)) via the exact scaling of the discrete integrals."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    grad = grad_l2_sq(w)
    quad = radial_integral(lambda u: u * u, w)
    fint = radial_integral(model.F, w)
    return 0.5 * t * grad + t ** 3 * (0.5 * model.lam * quad - fint)


def h_prime(model, w, t):
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    grad = grad_l2_sq(w)
    quad = radial_integral(lambda u: u * u, w)
    fint = radial_integral(model.F, w)
    return 0.5 * grad + 3.0 * t * t * (0.5 * model.lam * quad - fint)


def fiber_scan(model, w, t_grid):
    """I along the amplitude ray t -> I(t*w) (not the dilation fiber).

    This is the ray used by Nehari-type projections; for non-monotone
    f(u)/u it can carry several maxima.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if not np.all(t_grid > 0):
        raise ValueError("amplitude grid must be positive")
    out = np.empty_like(t_grid)
    for j, t in enumerate(t_grid):
        out[j] = action_I(model, RadialFunction(w.grid, t * w.values))
    return out


def count_interior_maxima(values):
    """Number of strict interior local maxima of a sampled curve."""
    v = np.asarray(values, dtype=float)
    interior = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    return int(np.count_nonzero(interior))


def interior_maxima(t_grid, values):
    """(t, value) pairs at strict interior local maxima."""
    t_grid = np.asarray(t_grid, dtype=float)
    v = np.asarray(values, dtype=float)
    idx = np.nonzero((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:]))[0] + 1
    return [(t_grid[i], v[i]) for i in idx]
