"""Problem-instance definitions: f, its primitive F, and lambda.

Four built-in families:

* power          f(u) = u^3
* asym_linear    f(u) = u^3 / (1 + s u^2), feasible only for lambda*s < 1
* quintic        F(u) = B u^3 - C u^4 + D u^5 (the two-maxima example)
* nonmonotone    f(u) = (u^7 - 2.5 u^5 + 2 u^3) / (1 + s u^6)

All models are extended to negative arguments with f odd and F even.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from .grid import RadialFunction

_FD_PROBES = (0.1, 0.5, 1.0, 2.0, 5.0)
_FD_DELTA = 1e-5


class InfeasibleFamilyError(ValueError):
    """Raised when family parameters admit no ground state (lambda*s >= 1)."""


@dataclass(frozen=True)
class NonlinearityModel:
    name: str
    lam: float
    f: object
    F: object
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if abs(float(self.F(0.0))) > 1e-14:
            raise ValueError("F(0) must vanish")
        for u in _FD_PROBES:
            fd = (self.F(u + _FD_DELTA) - self.F(u - _FD_DELTA)) / (2 * _FD_DELTA)
            fu = float(self.f(u))
            if abs(fd - fu) > 1e-6 * (1.0 + abs(fu)):
                raise ValueError(
                    f"{self.name}: F' and f disagree at u={u} ({fd} vs {fu})"
                )


def _odd(fn):
    return lambda u: np.sign(u) * fn(np.abs(u))


def _even(fn):
    return lambda u: fn(np.abs(u))


def make_power(lam):
    """f(u) = u^3, F(u) = u^4/4."""
    return NonlinearityModel(
        name="power",
        lam=float(lam),
        f=lambda u: u * u * u,
        F=lambda u: 0.25 * u ** 4,
        params={"p": 3.0},
    )


def make_asym_linear(lam, s):
    """Asymptotically linear f(u) = u^3/(1+s u^2); needs lambda*s < 1."""
    lam, s = float(lam), float(s)
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    if lam > 0 and lam * s >= 1.0:
        raise InfeasibleFamilyError(
            f"no ground state for lambda*s = {lam * s:g} >= 1"
        )
    return NonlinearityModel(
        name="asym",
        lam=lam,
        f=lambda u: u ** 3 / (1.0 + s * u * u),
        F=lambda u: u * u / (2 * s) - np.log1p(s * u * u) / (2 * s * s),
        params={"s": s},
    )


def make_quintic(lam, B, C, D):
    """F(u) = B u^3 - C u^4 + D u^5, f = F' on u >= 0, odd-extended."""
    B, C, D = float(B), float(C), float(D)
    if min(B, C, D) <= 0:
        raise ValueError("quintic coefficients must be positive")
    return NonlinearityModel(
        name="quintic",
        lam=float(lam),
        f=_odd(lambda u: 3 * B * u * u - 4 * C * u ** 3 + 5 * D * u ** 4),
        F=_even(lambda u: B * u ** 3 - C * u ** 4 + D * u ** 5),
        params={"B": B, "C": C, "D": D},
    )


_NONMONO_UMAX = 500.0
_NONMONO_DU = 1e-3


def make_nonmonotone(lam, s):
    """f(u) = (u^7 - 2.5 u^5 + 2 u^3)/(1 + s u^6); F tabulated numerically.

    The closed-form primitive is unwieldy, so F is built once by cumulative
    Simpson quadrature of f on a fine u-grid and interpolated monotonically
    (f > 0 on u > 0, so F is increasing).
    """
    lam, s = float(lam), float(s)
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")

    def f_raw(u):
        return (u ** 7 - 2.5 * u ** 5 + 2.0 * u ** 3) / (1.0 + s * u ** 6)

    ug = np.arange(0.0, _NONMONO_UMAX + _NONMONO_DU, _NONMONO_DU)
    Fg = np.concatenate([[0.0], cumulative_simpson(f_raw(ug), x=ug)])
    F_interp = PchipInterpolator(ug, Fg, extrapolate=False)

    def F(u):
        a = np.abs(u)
        if np.any(a > _NONMONO_UMAX):
            raise ValueError(f"nonmonotone F tabulated only up to |u| = {_NONMONO_UMAX}")
        return F_interp(a)

    return NonlinearityModel(
        name="nonmono",
        lam=lam,
        f=f_raw,
        F=F,
        params={"s": s},
    )


def G_eval(model, u):
    """G(u) = -(lambda/2) u^2 + F(u); the primitive in the Pohozaev identity."""
    return -0.5 * model.lam * np.asarray(u) ** 2 + model.F(u)


def monotonicity_probe(model, u_grid):
    """True iff u -> f(u)/u is nondecreasing on the (positive) probe grid."""
    u = np.asarray(u_grid, dtype=float)
    if u.ndim != 1 or len(u) < 2 or not np.all(u > 0) or not np.all(np.diff(u) > 0):
        raise ValueError("probe grid must be positive and strictly increasing")
    ratio = model.f(u) / u
    return bool(np.all(np.diff(ratio) >= -1e-12))


# Two-maxima example: piecewise profile u(r) = 1/sqrt(4 pi) inside r <= R,
# exponential tail outside.  The quintic coefficients below are calibrated so
# that I(t*u) at lambda = 3 has two equal interior maxima at level
# 128/(25 sqrt 5), with the interior minimum of the fiber pinned at t = 1.
# See scripts/derive_two_maxima_constants.py for the derivation.
TWO_MAXIMA_R = 3.075
TWO_MAXIMA_LAMBDA = 3.0
TWO_MAXIMA_B = 15.229982548752295
TWO_MAXIMA_C = 45.61636114430861
TWO_MAXIMA_D = 45.821116176239606
TWO_MAXIMA_LEVEL = 128.0 / (25.0 * np.sqrt(5.0))
TWO_MAXIMA_T1 = 0.7261444837095502
TWO_MAXIMA_T2 = 1.2464111771822086


def two_maxima_profile(grid):
    """The piecewise constant/exponential profile of the two-maxima example."""
    r = grid.nodes
    vals = np.where(r <= TWO_MAXIMA_R, 1.0, np.exp(-(r - TWO_MAXIMA_R)))
    return RadialFunction(grid, vals / np.sqrt(4.0 * np.pi))
