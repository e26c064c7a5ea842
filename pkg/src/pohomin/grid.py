"""Uniform radial grid on [0, R*], nodal functions and quadrature.

Everything downstream (energy, descent, solver) is built on the four
primitives here: trapezoid quadrature, the nodal derivative stencil,
radial integrals with the 4*pi*r^2 spherical weight, and the
mesh-rescaling device that represents u(./t) without resampling.
"""

from dataclasses import dataclass, field

import numpy as np

FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class RadialGrid:
    """M panels, M+1 nodes r_i = i*dr, extent r_star = M*dr."""

    panels: int
    dr: float

    def __post_init__(self):
        if self.panels < 4:
            raise ValueError(f"need at least 4 panels, got {self.panels}")
        if not self.dr > 0:
            raise ValueError(f"spacing must be positive, got {self.dr}")

    @property
    def node_count(self):
        return self.panels + 1

    @property
    def r_star(self):
        return self.panels * self.dr

    @property
    def nodes(self):
        return np.arange(self.node_count) * self.dr

    def with_spacing(self, dr):
        return RadialGrid(self.panels, dr)

    @classmethod
    def from_extent(cls, panels, r_star):
        return cls(panels, r_star / panels)


@dataclass(frozen=True)
class RadialFunction:
    """Nodal samples of a radial function on a RadialGrid.

    Values are copied and frozen at construction; operations return new
    instances.
    """

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.shape[0] != self.grid.node_count:
            raise ValueError(
                f"expected {self.grid.node_count} nodal values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("nodal values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid, fn):
        return cls(grid, fn(grid.nodes))

    def __call__(self, r):
        """Linear interpolation at radii r (zero beyond R*)."""
        return np.interp(r, self.grid.nodes, self.values, right=0.0)


def trapezoid(values, grid):
    """Composite trapezoid rule of nodal values over [0, R*]."""
    vals = np.asarray(values, dtype=float)
    if vals.shape[0] != grid.node_count:
        raise ValueError(
            f"expected {grid.node_count} values, got {vals.shape[0]}"
        )
    return grid.dr * (0.5 * (vals[0] + vals[-1]) + vals[1:-1].sum())


def nodal_derivative(w):
    """Second-order derivative stencil: centered interior, one-sided ends."""
    u = w.values
    dr = w.grid.dr
    d = np.empty_like(u)
    d[1:-1] = (u[2:] - u[:-2]) / (2.0 * dr)
    d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dr)
    d[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dr)
    return d


def radial_integral(transform, w):
    """4*pi * integral of g(w(r)) r^2 dr over [0, R*].

    Approximates the R^3 volume integral of g(w) for radial w, truncated
    at the grid extent.
    """
    g = np.asarray(transform(w.values), dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("transform produced non-finite values")
    r = w.grid.nodes
    return FOUR_PI * trapezoid(g * r * r, w.grid)


def grad_l2_sq(w):
    """4*pi * integral of |w'|^2 r^2 dr, i.e. the L2 norm of the gradient squared."""
    d = nodal_derivative(w)
    r = w.grid.nodes
    return FOUR_PI * trapezoid(d * d * r * r, w.grid)


def h1_norm_sq(w):
    return grad_l2_sq(w) + radial_integral(lambda u: u * u, w)


def rescale(w, t):
    """Represent u(./t) by stretching the grid: r_i -> t*r_i, values kept.

    The discrete sums factor exactly: grad_l2_sq scales by t and every
    radial_integral by t^3 (N = 3).
    """
    if not t > 0:
        raise ValueError(f"scaling factor must be positive, got {t}")
    return RadialFunction(w.grid.with_spacing(t * w.grid.dr), w.values)
