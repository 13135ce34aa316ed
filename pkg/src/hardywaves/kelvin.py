"""Kelvin-transformed dual problem: inversion r -> 1/r, the W-norm with its
Hardy energy at infinity, and equivalence checks against the direct side.

The image grid of y = x/|x|^2 is represented exactly: reciprocal grids are
built by negating the log-nodes, so a double reciprocal reproduces the
original node array bit for bit, and the transform itself is a pure index
reversal plus nodal scaling (no interpolation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energies import hardy_functional_u, surface_term_limit
from .errors import ShapeError
from .radial import Field, RadialGrid, unit_ball_volume

__all__ = [
    "DualField",
    "reciprocal_grid",
    "kelvin_transform",
    "WNormReport",
    "w_norm",
    "lambda_infinity",
    "kelvin_verify",
]


def reciprocal_grid(grid: RadialGrid) -> RadialGrid:
    """Grid with nodes 1/r (ascending), exact in the log coordinate."""
    x = -grid.log_nodes[::-1]
    nodes = np.exp(x)
    if grid.grading == "log":
        t = np.full(grid.n, x[1] - x[0])
        t[0] *= 0.5
        t[-1] *= 0.5
        weights = t * nodes**2
        return RadialGrid(nodes=nodes, weights=weights, grading="log", log_nodes=x)
    # uniform grids invert to non-uniform ones; keep trapezoid weights in r
    t = np.empty(grid.n)
    dr = np.diff(nodes)
    t[0] = dr[0] / 2
    t[-1] = dr[-1] / 2
    t[1:-1] = (dr[:-1] + dr[1:]) / 2
    return RadialGrid(nodes=nodes, weights=t * nodes, grading="uniform", log_nodes=x)


@dataclass(frozen=True)
class DualField:
    """Radial profile w(x) together with the grid of its Kelvin image."""

    w: Field
    source_grid: RadialGrid

    def __post_init__(self):
        if not np.array_equal(self.source_grid.log_nodes, -self.w.grid.log_nodes[::-1]):
            raise ShapeError("source grid must be the reciprocal of the field grid")

    @classmethod
    def from_field(cls, w: Field) -> "DualField":
        return cls(w=w, source_grid=reciprocal_grid(w.grid))


def kelvin_transform(dual: DualField, N: int) -> Field:
    """psi(y) = |x|^{N-2} w(x) at y = x/|x|^2, on the reciprocal grid."""
    scale = np.exp((N - 2) * dual.w.grid.log_nodes)
    values = (dual.w.values * scale)[::-1]
    return Field(values=values, grid=dual.source_grid)


@dataclass(frozen=True)
class WNormReport:
    """Squared W-norm with the truncated-limit diagnostics at the tail."""

    value: float
    hardy: float
    weighted_mass: float
    tail_radii: tuple
    tail_hardy: tuple       # I over the ball of each tail radius
    tail_surface: tuple     # surface term at each tail radius (enters with +)

    def __float__(self):
        return self.value


def w_norm(dual: DualField, N: int) -> WNormReport:
    """Squared dual-space norm: I(w) + int |x|^{-4} |w|^2 dx.

    The Hardy part is taken over the grid domain without the zero-extension
    tail cell: dual fields may carry the critical r^{-(N-2)/2} tail at
    infinity, for which the defining object is the truncated limit
    I_{<=R} + Lambda_R.  The report carries that pair at the three largest
    radii; the surface term enters additively, mirroring the subtraction on
    the direct side.
    """
    grid = dual.w.grid
    w_vals = dual.w.values
    hardy = _hardy_inside(dual.w, N, grid.r_max)
    sphere = N * unit_ball_volume(N)
    weighted_mass = sphere * grid.quadrature(grid.nodes ** (N - 6) * np.abs(w_vals) ** 2)

    radii = grid.nodes[-3:]
    tail_hardy = []
    tail_surface = []
    for radius in radii:
        tail_hardy.append(_hardy_inside(dual.w, N, radius))
        idx = int(np.searchsorted(grid.nodes, radius))
        tail_surface.append(
            0.5 * (N - 2) * sphere * radius ** (N - 2) * float(np.abs(w_vals[idx]) ** 2)
        )
    return WNormReport(
        value=hardy + weighted_mass,
        hardy=hardy,
        weighted_mass=weighted_mass,
        tail_radii=tuple(float(r) for r in radii),
        tail_hardy=tuple(tail_hardy),
        tail_surface=tuple(tail_surface),
    )


def _hardy_inside(w: Field, N: int, radius: float) -> float:
    """Hardy functional over the ball r <= radius (cell-midpoint form)."""
    grid = w.grid
    x = grid.log_nodes
    h = np.diff(x)
    vals = w.values
    alpha2 = ((N - 2) / 2.0) ** 2
    x_mid = 0.5 * (x[:-1] + x[1:])
    du = np.diff(vals) / h
    u_mid = 0.5 * (vals[:-1] + vals[1:])
    cells = (np.abs(du) ** 2 - alpha2 * np.abs(u_mid) ** 2) * np.exp((N - 2) * x_mid) * h
    keep = grid.nodes[1:] <= radius
    return N * unit_ball_volume(N) * float(np.sum(cells[keep]))


def lambda_infinity(dual: DualField, N: int) -> float:
    """Limit of the surface term at infinity.

    Node for node, the surface term of w at radius R equals the surface term
    of psi = K(w) at radius 1/R, so the limit is extrapolated on the image
    side with the same origin-coordinate model as the direct problem.
    """
    return surface_term_limit(kelvin_transform(dual, N), N)


def kelvin_verify(grid: RadialGrid, N: int, samples: int, seed: int) -> dict:
    """Numerical checks used by tests and the CLI: involution error,
    W-vs-H norm agreement on random fields, and the sign structure of the
    truncated norms."""
    from .radial import integrate_mu, to_v

    rng = np.random.default_rng(seed)
    x = grid.log_nodes
    lo, hi = x[0] + np.log(10.0), x[-1] - np.log(10.0)
    alpha = (N - 2) / 2.0

    worst_inv = 0.0
    worst_iso = 0.0
    for _ in range(samples):
        profile = np.zeros(grid.n)
        for _ in range(int(rng.integers(3, 9))):
            center = rng.uniform(lo, hi)
            width = rng.uniform(0.25, 0.6)
            sign = -1.0 if rng.random() < 0.5 else 1.0
            profile += sign * rng.uniform(0.5, 1.5) * np.exp(-(((x - center) / width) ** 2))
        w_field = Field(values=np.exp(-alpha * x) * profile, grid=grid)
        dual = DualField.from_field(w_field)
        psi = kelvin_transform(dual, N)
        back = kelvin_transform(DualField.from_field(psi), N)
        scale = float(np.max(np.abs(w_field.values))) or 1.0
        worst_inv = max(worst_inv, float(np.max(np.abs(back.values - w_field.values))) / scale)

        wn = w_norm(dual, N).value
        psi_mass = integrate_mu(np.abs(to_v(psi, N).values) ** 2, psi.grid, N)
        hn = hardy_functional_u(psi, N, eps=psi.grid.r_min) + psi_mass
        worst_iso = max(worst_iso, abs(wn - hn) / max(abs(hn), 1e-300))
    return {
        "samples": samples,
        "max_involution_error": worst_inv,
        "max_norm_mismatch": worst_iso,
    }
