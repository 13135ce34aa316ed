"""Constrained minimisation of J on the weighted L^2 sphere.

Two-phase solver.  Phase one is the normalized gradient flow: a semi-implicit
step

    (M + dt K) v~ = M (v + dt (N(v) - lambda(v) v)),    then renormalise,

with the multiplier term included so that fixed points solve the discrete
stationary equation exactly; dt backtracks on any energy increase, so the
accepted flow iterates are J-monotone.  Phase two polishes with a bordered
Newton iteration on the stationary system plus the mass constraint
(tridiagonal solves with one dense border row) and a residual line search.
The gradient flow alone crawls once the landscape flattens (for shallow
wells the multiplier is of order 1e-3 and the soft-mode curvature far
smaller), while Newton alone needs a warm start; the combination converges
in tens of iterations.

The achievable residual is limited by float64 quantisation of the nodal
values near the origin, roughly eps_machine * |v| / (h^2 r_min) in the
weighted norm; on the default grid (r_min = 1e-6, n = 8192) this floor sits
near 1e-6, so tolerances below that need a larger r_min or a coarser grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energies import EnergyReport, energy_J
from .errors import ConvergenceError, DomainError, ParameterError
from .operators import RadialOperator
from .radial import Field, Params, RadialGrid, log_time_coordinate, to_u, unit_ball_volume

__all__ = [
    "StandingWave",
    "normalized_gradient_flow",
    "elliptic_residual",
    "fit_origin",
    "origin_behavior",
    "oracle_minimize",
]

_MASS_RTOL = 1e-10
_J_MONO_TOL = 1e-12


@dataclass(frozen=True)
class StandingWave:
    """Converged minimiser with its multiplier and origin diagnostics."""

    v: Field
    lam: float
    gamma: float
    params: Params
    energies: EnergyReport
    v0: float
    Lambda_origin: float
    residual: float
    iterations: int = 0
    j_history: tuple = field(default=(), repr=False)
    polish_j_history: tuple = field(default=(), repr=False)
    converged: bool = True

    def __post_init__(self):
        vals = np.real(self.v.values)
        peak = float(np.max(np.abs(vals))) or 1.0
        if float(np.min(vals)) < -1e-10 * peak:
            raise ParameterError("standing wave profile must be nonnegative")
        if abs(self.energies.mass_mu - self.gamma) > _MASS_RTOL * self.gamma:
            raise ParameterError(
                f"mass constraint violated: {self.energies.mass_mu} != {self.gamma}"
            )
        if self.converged and not self.v0 > 0.0:
            raise ParameterError("extrapolated origin value must be positive")


def elliptic_residual(v: Field, lam: float, params: Params) -> float:
    """Weighted L^2 norm of the strong residual of the stationary equation:

        -(1/r)(r v')' + lambda v - r^{-(q-2)(N-2)/2} g |v|^{q-2} v,

    measured in the r dr norm with the sphere factor.
    """
    op = RadialOperator(v.grid, params)
    return _residual_norm(op, np.real(v.values), lam)


def _residual_norm(op: RadialOperator, v: np.ndarray, lam: float) -> float:
    res = op.laplacian_like(v) + lam * v - op.w_sing * np.abs(v) ** (op.params.q - 2) * v
    return float(np.sqrt(op.sphere * np.sum(op.mass_diag * res**2)))


def _quotient_multiplier(op: RadialOperator, v: np.ndarray) -> float:
    return (op.params.q * op.nonlinear(v) - op.dirichlet(v)) / op.mass(v)


def _renormalize(op: RadialOperator, v: np.ndarray, gamma: float) -> np.ndarray:
    return v * np.sqrt(gamma / op.mass(v))


def _origin_value(v: np.ndarray, grid: RadialGrid, N: int) -> float:
    """Extrapolate v to the origin: linear fit in t on the three smallest nodes."""
    if grid.r_min >= 1.0:
        raise DomainError("origin extrapolation needs grid nodes below r = 1")
    t = log_time_coordinate(grid.nodes[:3], N)
    design = np.vstack([np.ones_like(t), t]).T
    coef, *_ = np.linalg.lstsq(design, v[:3], rcond=None)
    return float(coef[0])


def _newton_polish(op, v, lam, gamma, tol, max_steps=120):
    """Bordered Newton on (stationary equation, mass constraint).

    Accepts steps only when the residual norm strictly decreases (Armijo on
    the residual); returns the improved iterate either way.  Targets a
    fraction of the tolerance so that converged runs land with margin
    rather than just under the threshold.
    """
    q = op.params.q
    rn = _residual_norm(op, v, lam)
    j_vals = []
    for _ in range(max_steps):
        if rn < 0.2 * tol:
            break
        nl_vec = op.w_sing * np.abs(v) ** (q - 2) * v
        g1 = op.stiffness_apply(v) + op.mass_diag * (lam * v - nl_vec)
        g2 = op.mass(v) - gamma
        jac_diag = lam - (q - 1) * op.w_sing * np.abs(v) ** (q - 2)
        rhs = np.column_stack([-g1, op.mass_diag * v])
        try:
            sol = op.solve_tridiag(jac_diag, rhs)
        except Exception:
            break
        a, b = sol[:, 0], sol[:, 1]
        mv = op.mass_diag * v
        denom = 2.0 * op.sphere * float(np.sum(mv * b))
        if denom == 0.0 or not np.isfinite(denom):
            break
        dlam = (2.0 * op.sphere * float(np.sum(mv * a)) + g2) / denom
        dv = a - dlam * b
        step = 1.0
        accepted = False
        while step > 1e-5:
            v_new = v + step * dv
            if np.all(np.isfinite(v_new)) and op.mass(v_new) > 0.0:
                rn_new = _residual_norm(op, v_new, lam + step * dlam)
                if np.isfinite(rn_new) and rn_new < rn * (1.0 - 0.2 * step):
                    v, lam, rn = v_new, lam + step * dlam, rn_new
                    j_vals.append(op.functional_j(v))
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            break
    return v, lam, rn, j_vals


def normalized_gradient_flow(
    params: Params,
    grid: RadialGrid,
    init: Field | None = None,
    tol: float = 1e-8,
    max_iter: int = 50000,
    dt0: float = 0.1,
    dt_max: float = 500.0,
) -> StandingWave:
    """Minimise J over the sphere of mu-mass gamma; return the standing wave.

    A negative-valued init is replaced by its modulus (the flow preserves
    positivity, so minimisers are reached through nonnegative iterates).
    Raises ConvergenceError with last-iterate diagnostics if the residual
    tolerance is not reached within max_iter flow iterations.
    """
    if params.q > 2.0 + 4.0 / params.N + 1e-12:
        raise ParameterError(
            f"ground state solve requires q <= 2 + 4/N = {2 + 4.0 / params.N:.6g}, got q={params.q}"
        )
    op = RadialOperator(grid, params)
    gamma = params.gamma
    if init is None:
        v = np.exp(-grid.nodes**2 / 2.0)
    else:
        v = np.abs(np.real(op.check_field(init))).astype(float)
        if op.mass(v) <= 0.0:
            raise ParameterError("initial field must have positive mass")
    v = _renormalize(op, v, gamma)

    dt = dt0
    j_val = op.functional_j(v)
    j_history = [j_val]       # flow iterates: J-monotone by backtracking
    polish_history: list = []  # Newton root-finder trace: tracks the residual, not J
    lam = _quotient_multiplier(op, v)
    rn = _residual_norm(op, v, lam)
    switch = 1e-3
    iterations = 0

    while iterations < max_iter:
        if rn < tol:
            break
        if rn < switch:
            v_new, lam_new, rn_new, j_tail = _newton_polish(op, v.copy(), lam, gamma, tol)
            if rn_new < rn:
                v, lam, rn = v_new, lam_new, rn_new
                j_val = op.functional_j(v)
                polish_history.extend(j_tail)
            if rn < tol:
                break
            # Newton stalled above tol: demand a deeper flow start before retrying
            switch = max(rn / 10.0, tol)
        iterations += 1
        lam = _quotient_multiplier(op, v)
        nl_vec = op.w_sing * np.abs(v) ** (params.q - 2) * v
        rhs = op.mass_diag * (v + dt * (nl_vec - lam * v))
        v_try = op.solve_spd(0.0, rhs, dt)
        v_try = _renormalize(op, v_try, gamma)
        j_try = op.functional_j(v_try)
        if j_try <= j_val + _J_MONO_TOL:
            v, j_val = v_try, j_try
            # a partial Newton detour may sit above the recorded minimum;
            # flow steps re-enter the monotone record once they descend past it
            if j_val <= j_history[-1] + _J_MONO_TOL:
                j_history.append(j_val)
            else:
                polish_history.append(j_val)
            lam = _quotient_multiplier(op, v)
            rn = _residual_norm(op, v, lam)
            dt = min(dt * 1.1, dt_max)
        else:
            dt = max(dt / 2.0, 1e-6)

    if rn >= tol:
        raise ConvergenceError(
            f"gradient flow stalled at residual {rn:.3e} after {iterations} iterations "
            f"(tolerance {tol:.1e}); on fine near-origin grids the float64 residual "
            "floor may exceed the requested tolerance",
            diagnostics={
                "residual": rn,
                "iterations": iterations,
                "J": j_val,
                "lambda": lam,
                "dt": dt,
            },
        )

    # guard the constraint against polish roundoff, then re-measure
    v = _renormalize(op, v, gamma)
    lam = _quotient_multiplier(op, v)
    rn = _residual_norm(op, v, lam)
    j_final = op.functional_j(v)  # the converged value; lowest of the run
    if j_final <= j_history[-1] + _J_MONO_TOL:
        j_history.append(j_final)
    else:  # cannot happen for a true minimum; keep the record honest anyway
        polish_history.append(j_final)
    return _package(
        op,
        grid,
        params,
        v,
        lam,
        rn,
        iterations,
        tuple(j_history),
        polish_history=tuple(polish_history),
    )


def _package(
    op, grid, params, v, lam, rn, iterations, j_history, polish_history=(), converged=True
):
    v_field = Field(values=v, grid=grid)
    report = energy_J(v_field, params)
    v0 = _origin_value(v, grid, params.N)
    lam_origin = 0.5 * params.N * (params.N - 2) * unit_ball_volume(params.N) * v0**2
    return StandingWave(
        v=v_field,
        lam=lam,
        gamma=params.gamma,
        params=params,
        energies=report,
        v0=v0,
        Lambda_origin=lam_origin,
        residual=rn,
        iterations=iterations,
        j_history=j_history,
        polish_j_history=polish_history,
        converged=converged,
    )


def fit_origin(u: Field, N: int, fit_window: tuple[float, float] | None = None):
    """(power-law exponent, extrapolated v0) of a u-form profile.

    The exponent is the least-squares slope of log u against log r over
    r in [10 r_min, 1000 r_min]; v0 extrapolates v = to_v(u) to r = 0
    linearly in the origin coordinate t.
    """
    grid = u.grid
    if fit_window is None:
        fit_window = (10.0 * grid.r_min, 1e3 * grid.r_min)
    lo, hi = fit_window
    mask = (grid.nodes >= lo) & (grid.nodes <= hi)
    if np.count_nonzero(mask) < 4:
        raise DomainError(f"fit window [{lo}, {hi}] selects fewer than 4 grid nodes")
    uu = np.abs(np.real(u.values[mask]))
    if np.any(uu == 0.0):
        raise DomainError("profile vanishes inside the origin fit window")
    slope = np.polyfit(np.log(grid.nodes[mask]), np.log(uu), 1)[0]
    v_vals = np.real(u.values) * grid.nodes ** ((N - 2) / 2.0)
    v0 = _origin_value(v_vals, grid, N)
    return float(slope), float(v0)


def origin_behavior(sw: StandingWave, fit_window: tuple[float, float] | None = None):
    """Origin diagnostics of a converged wave: (exponent of u, v0)."""
    return fit_origin(to_u(sw.v, sw.params.N), sw.params.N, fit_window)


def oracle_minimize(
    params: Params,
    grid: RadialGrid,
    restarts: int = 8,
    budget: int = 4000,
    seed: int = 0,
) -> StandingWave:
    """Independent check on the flow: best-of-restarts projected gradient
    descent with Armijo line search, from random positive bump fields.

    Preconditioned by the energy-space metric (K + M); deterministic for a
    fixed seed.  Restricted to small grids; ties between restarts break by
    lowest J, then lowest residual.  Returns the best candidate whether or
    not it meets any residual tolerance (``converged`` is left False).
    """
    if grid.n > 512:
        raise ParameterError("oracle_minimize is restricted to grids with n <= 512")
    op = RadialOperator(grid, params)
    gamma = params.gamma
    rng = np.random.default_rng(seed)
    x = grid.log_nodes
    lo, hi = x[0] + np.log(10.0), x[-1] - np.log(10.0)

    best = None  # (J, residual, v)
    for _ in range(restarts):
        v = np.zeros(grid.n)
        for _ in range(int(rng.integers(2, 6))):
            center = rng.uniform(lo, hi)
            width = rng.uniform(0.4, 1.2)
            v += rng.uniform(0.3, 1.0) * np.exp(-(((x - center) / width) ** 2))
        v = np.abs(v) + 1e-3
        v = _renormalize(op, v, gamma)
        j_val = op.functional_j(v)
        alpha = 1.0
        for _ in range(max(budget, 0)):
            grad = (
                op.stiffness_apply(v)
                + op.mass_diag * v
                - op.mass_diag * op.w_sing * np.abs(v) ** (params.q - 2) * v
            )
            pg = op.solve_spd(1.0, grad, 1.0)  # (M + K)^{-1} grad
            pmv = op.solve_spd(1.0, op.mass_diag * v, 1.0)
            mv = op.mass_diag * v
            theta = float(np.sum(mv * pg) / np.sum(mv * pmv))
            direction = pg - theta * pmv  # tangent to the mass sphere
            if float(np.sum(grad * direction)) <= 1e-30:
                break
            moved = False
            while alpha > 1e-16:
                v_try = v - alpha * direction
                m_try = op.mass(v_try)
                if m_try > 0.0:
                    v_try = v_try * np.sqrt(gamma / m_try)
                    j_try = op.functional_j(v_try)
                    if j_try <= j_val - 1e-15:
                        moved = True
                        break
                alpha *= 0.5
            if not moved:
                break
            v, j_val = v_try, j_try
            alpha = min(alpha * 1.5, 1e4)
        rn = _residual_norm(op, v, _quotient_multiplier(op, v))
        if best is None or (j_val, rn) < (best[0], best[1]):
            best = (j_val, rn, v)

    j_best, rn_best, v_best = best
    lam = _quotient_multiplier(op, v_best)
    return _package(
        op, grid, params, v_best, lam, rn_best, restarts, (j_best,), converged=False
    )
