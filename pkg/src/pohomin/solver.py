"""The outer minimization loop: project, descend, line-minimize, repeat.

Steps of one outer iteration:

1. validate/project the iterate onto the Pohozaev manifold (mesh rescaling),
2. steepest descent direction v in H^1 by SOR, stop when ||v|| < eps_stop,
3. scan-and-refine line minimization of the projected action along v,
4. on a failed scan (action decreasing for all K steps, vanishing dilation
   parameter, or an infeasible G-integral) restart from the furthest point
   whose G-integral is still positive.

A second, independent stopping test fires when the action stops moving at
relative level stall_rtol: quadrature error then dominates and ||v|| has hit
its floor for the given grid, which we also report as converged.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import RadialFunction, RadialGrid, nodal_derivative
from .energy import ProjectionInfeasible, action_I, g_integral, project
from .descent import steepest_direction


class LineSearchAnomaly(RuntimeError):
    """The scan neither rose nor fell over K steps: alpha0 is mis-scaled."""


@dataclass(frozen=True)
class SolverConfig:
    m: int = 1000
    r_star: float = 1.0
    alpha0: float = 0.1
    alpha_min: float = 1e-10
    k_max: int = 1000
    eps_stop: float = 1e-3
    sor_omega: float = 1.9
    sor_tol: float = 1e-10
    sor_max_iterations: int = 10 ** 6
    reproject_stride: int = 1
    max_outer: int = 10 ** 4
    t_min: float = 1e-6
    positivity_tol: float = 1e-8
    stall_rtol: float = 1e-14
    guess_amplitude: float = 100.0
    guess_width: float = 10.0

    def __post_init__(self):
        if self.m < 4:
            raise ValueError("need at least 4 panels")
        for name in ("r_star", "alpha0", "alpha_min", "eps_stop", "sor_tol",
                     "t_min", "positivity_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.alpha_min > self.alpha0:
            raise ValueError("alpha_min must not exceed alpha0")
        if not 0 < self.sor_omega < 2:
            raise ValueError("sor_omega must be in (0, 2)")
        if self.k_max < 1 or self.reproject_stride < 1:
            raise ValueError("k_max and reproject_stride must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    action: float
    t_star: float      # net mesh-scale factor applied this step
    alpha_used: float  # total displacement along the unit direction
    grad_norm: float   # ||v|| measured before the step


@dataclass(frozen=True)
class SolveResult:
    solution: RadialFunction
    action: float
    grad_norm: float
    u_at_zero: float
    outer_iterations: int
    restarts: int
    trace: list
    status: str  # converged | max_iterations | restarted_exhausted

    @property
    def r_star_final(self):
        return self.solution.grid.r_star


@dataclass(frozen=True)
class LineSearchResult:
    outcome: str  # "minimum" or "restart"
    point: RadialFunction = None   # projected accepted point (minimum)
    value: float = np.nan
    t_net: float = 1.0
    total_alpha: float = 0.0
    restart_point: RadialFunction = None  # unprojected, G-integral > 0
    restart_k: int = 0


def initial_guess(grid, amplitude=100.0, width=10.0, kind="gaussian"):
    """Gaussian bump A*exp(-width*r^2); the standard starting iterate."""
    if kind != "gaussian":
        raise ValueError(f"unknown guess kind {kind!r}")
    if amplitude <= 0 or width <= 0:
        raise ValueError("amplitude and width must be positive")
    r = grid.nodes
    return RadialFunction(grid, amplitude * np.exp(-width * r * r))


def scan_minimize(phi, alpha0, alpha_min, k_max):
    """Generic scan-and-refine line minimization of phi(alpha), alpha >= 0.

    At each refinement level the step k*level increases until phi rises; the
    last non-rising point becomes the base and the level shrinks by 10 until
    it falls below alpha_min.  A rise at k whose far neighbor k+1 undercuts
    the near neighbor k-1 is treated as a local maximum and jumped over.

    Returns (alpha_best, phi_best).  Raises LineSearchAnomaly when a level
    sees neither a rise nor a strict decrease over all k_max steps.
    """
    base = 0.0
    best = phi(0.0)
    level = alpha0
    while level >= alpha_min * (1 - 1e-12):
        prev_val = best
        prev_k = 0
        moved = False
        k = 1
        while k <= k_max:
            val = phi(base + k * level)
            if val > prev_val:
                if k < k_max:
                    peek = phi(base + (k + 1) * level)
                    if peek < prev_val:
                        prev_val = peek
                        prev_k = k + 1
                        moved = True
                        k += 2
                        continue
                break
            moved = moved or val < prev_val
            prev_val = val
            prev_k = k
            k += 1
        else:
            if not moved:
                raise LineSearchAnomaly(
                    f"phi flat over {k_max} steps of {level:g}"
                )
        base += prev_k * level
        best = prev_val
        level /= 10.0
    return base, best


class _NeedRestart(Exception):
    def __init__(self, base_values, dr, level):
        self.base_values = base_values
        self.dr = dr
        self.level = level


def line_minimize(model, w1, vhat_values, config):
    """Minimize the projected action from w1 along the unit direction.

    Projections are computed every reproject_stride-th candidate; in
    between, the action is evaluated on the unprojected iterate, and an
    accepted unprojected point is reprojected before use.  The values of a
    candidate do not change under projection (only the mesh does), so
    accepted steps compose additively in the nodal values.
    """
    stride = config.reproject_stride
    grid0 = w1.grid

    def make_fn(values, dr):
        return RadialFunction(grid0.with_spacing(dr), values)

    def try_restart(base_values, dr, level):
        # furthest scan point with a positive G-integral becomes the new w0
        for k in range(config.k_max, 0, -1):
            cand = make_fn(base_values + (k * level) * vhat_values, dr)
            if g_integral(model, cand) > 0:
                return LineSearchResult(
                    outcome="restart", restart_point=cand, restart_k=k,
                )
        return LineSearchResult(outcome="restart")

    base_values = w1.values
    dr = grid0.dr
    best = action_I(model, w1)
    t_net = 1.0
    total_alpha = 0.0
    level = config.alpha0
    while level >= config.alpha_min * (1 - 1e-12):
        try:
            base_values, dr, best, t_net, total_alpha = _scan_level(
                model, make_fn, base_values, dr, vhat_values, best,
                level, stride, config, t_net, total_alpha,
            )
        except _NeedRestart as nr:
            return try_restart(nr.base_values, nr.dr, nr.level)
        level /= 10.0
    return LineSearchResult(
        outcome="minimum", point=make_fn(base_values, dr), value=best,
        t_net=t_net, total_alpha=total_alpha,
    )


def _scan_level(model, make_fn, base_values, dr, vhat_values, best,
                level, stride, config, t_net, total_alpha):
    """One refinement level of the projected-action scan."""

    def evaluate(k, force_project=False):
        cand_values = base_values + (k * level) * vhat_values
        if force_project or k % stride == 0:
            pr = project(model, make_fn(cand_values, dr))
            if pr.t_star < config.t_min:
                raise _NeedRestart(base_values, dr, level)
            return pr.action_at_t, (cand_values, dr * pr.t_star, pr.t_star)
        return action_I(model, make_fn(cand_values, dr)), None

    prev_val = best
    prev_k = 0
    prev_state = None
    moved = False
    k = 1
    while k <= config.k_max:
        try:
            val, state = evaluate(k)
        except ProjectionInfeasible:
            raise _NeedRestart(base_values, dr, level)
        if val > prev_val:
            if k < config.k_max:
                try:
                    peek, peek_state = evaluate(k + 1)
                except ProjectionInfeasible:
                    raise _NeedRestart(base_values, dr, level)
                if peek < prev_val:
                    # local maximum at k: jump to the lower far neighbor
                    prev_val, prev_k, prev_state = peek, k + 1, peek_state
                    moved = True
                    k += 2
                    continue
            break
        moved = moved or val < prev_val
        prev_val, prev_k, prev_state = val, k, state
        k += 1
    else:
        if not moved:
            raise LineSearchAnomaly(
                f"projected action flat over {config.k_max} steps of {level:g}"
            )
        raise _NeedRestart(base_values, dr, level)

    if prev_k == 0:
        return base_values, dr, best, t_net, total_alpha
    if prev_state is None:
        # accepted point was evaluated unprojected; reproject it
        try:
            prev_val, prev_state = evaluate(prev_k, force_project=True)
        except ProjectionInfeasible:
            raise _NeedRestart(base_values, dr, level)
    cand_values, new_dr, t_star = prev_state
    return cand_values, new_dr, prev_val, t_net * t_star, \
        total_alpha + prev_k * level


def _descend(model, config, w_start, trace, it0, restarts0):
    """Inner loop without the positivity guard.

    Returns (w, status, grad_norm, iterations_done, restarts_done).
    """
    pr = project(model, w_start)  # Step 1 feasibility + Step 2 projection
    w = pr.projected
    prev_action = pr.action_at_t
    warm = None
    raw_prev = None
    it = it0
    restarts = restarts0
    vn = np.inf
    status = "max_iterations"

    while it < config.max_outer:
        dd = steepest_direction(model, w, config, warm_start=warm)
        raw = dd.direction.values * dd.raw_norm
        # linear extrapolation of the last two solves seeds the next SOR
        warm = raw if raw_prev is None else 2.0 * raw - raw_prev
        raw_prev = raw
        vn = dd.raw_norm
        if vn < config.eps_stop:
            status = "converged"
            break

        ls = line_minimize(model, w, dd.direction.values, config)
        if ls.outcome == "restart":
            if ls.restart_point is None:
                status = "restarted_exhausted"
                break
            pr = project(model, ls.restart_point)
            w = pr.projected
            prev_action = pr.action_at_t
            warm = None
            raw_prev = None
            restarts += 1
            it += 1
            continue

        w = ls.point
        trace.append(TraceRecord(it, ls.value, ls.t_net, ls.total_alpha, vn))
        it += 1
        if abs(prev_action - ls.value) <= config.stall_rtol * (1 + abs(ls.value)):
            # action pinned at the quadrature floor; ||v|| will not drop further
            status = "converged"
            dd = steepest_direction(model, w, config, warm_start=warm)
            vn = dd.raw_norm
            break
        prev_action = ls.value

    return w, status, vn, it, restarts


def solve(model, config=None, guess=None):
    """Run the full minimization; returns a SolveResult.

    Raises ProjectionInfeasible if the starting guess has a nonpositive
    G-integral (Step 1), and LineSearchAnomaly on a flat scan.
    """
    if config is None:
        config = SolverConfig()
    grid = RadialGrid.from_extent(config.m, config.r_star)
    if guess is None:
        guess = initial_guess(grid, config.guess_amplitude, config.guess_width)

    trace = []
    w, status, vn, it, restarts = _descend(model, config, guess, trace, 0, 0)

    # positivity guard: a sign-changing limit is a critical point but not the
    # ground state; retry from a higher bump with smaller starting action
    positivity_restarts = 0
    while (status == "converged" and w.values.min() < -config.positivity_tol
           and positivity_restarts < 3):
        positivity_restarts += 1
        fresh = _fresh_positive_guess(model, config, action_I(model, w))
        if fresh is None:
            break
        w, status, vn, it, restarts = _descend(
            model, config, fresh, trace, it, restarts,
        )
    if status == "converged" and w.values.min() < -config.positivity_tol:
        status = "restarted_exhausted"

    final_action = action_I(model, w)
    if w.grid.r_star < 5.0 / np.sqrt(model.lam):
        warnings.warn(
            f"final extent R* = {w.grid.r_star:.3g} < 5/sqrt(lambda); "
            "the tail is likely truncated", stacklevel=2,
        )
    return SolveResult(
        solution=w, action=final_action, grad_norm=vn,
        u_at_zero=float(w.values[0]), outer_iterations=it,
        restarts=restarts + positivity_restarts, trace=trace, status=status,
    )


def _fresh_positive_guess(model, config, action_bound):
    """A Gaussian guess, amplitude doubled until its projected action
    undercuts the rejected critical value."""
    grid = RadialGrid.from_extent(config.m, config.r_star)
    amp = config.guess_amplitude
    for _ in range(24):
        amp *= 2.0
        cand = initial_guess(grid, amp, config.guess_width)
        try:
            pr = project(model, cand)
        except ProjectionInfeasible:
            continue
        if pr.action_at_t < action_bound:
            return cand
    return None


def scaling_check(u1_result, lam, config=None):
    """Relative error of u_lambda(0) against sqrt(lam)*u_1(0) for f(u)=u^3."""
    from .nonlinearity import make_power
    if lam == 1.0:
        return 0.0
    res = solve(make_power(lam), config)
    expected = np.sqrt(lam) * u1_result.u_at_zero
    return abs(res.u_at_zero - expected) / abs(expected)


def ode_residual(model, w):
    """Max interior residual of -(u'' + 2u'/r) + lambda u - f(u) = 0."""
    u = w.values
    dr = w.grid.dr
    r = w.grid.nodes
    upp = (u[2:] - 2 * u[1:-1] + u[:-2]) / dr ** 2
    up = nodal_derivative(w)[1:-1]
    res = -(upp + 2.0 * up / r[1:-1]) + model.lam * u[1:-1] - model.f(u[1:-1])
    return float(np.abs(res).max())
