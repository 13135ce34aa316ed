"""Discrete radial operators shared by the energy functionals, the ground
state solver, and the propagator.

The operator r^{-1} (r v')' is discretised by piecewise-linear elements in
the grid's native coordinate and symmetrised in the r dr inner product:
stiffness K (tridiagonal, positive semidefinite) and lumped mass
M = diag(quadrature weights).  The boundary conditions are a reflecting
ghost at the origin end (v'(0) = 0) and a zero ghost cell beyond r_max
(v(r_max+) = 0), so the Dirichlet quadratic form reads

    v^T K v = sum_cells s_i |v_{i+1} - v_i|^2 + s_n |v_n|^2 .

Per-cell coefficients s_i = [int_cell (r / dr/dxi) dxi] / (dxi)^2 make the
form exact for fields piecewise linear in the native coordinate; on a log
grid s_i = 1/h.

Second differences are assembled as differences of first differences: for
smooth nodal data the first differences are exact (Sterbenz), which keeps
the rounding floor of the strong residual far below the 1e-8 tolerances
used downstream.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded, solveh_banded

from .errors import ShapeError
from .radial import Field, Params, RadialGrid, unit_ball_volume

__all__ = ["RadialOperator", "cell_stiffness", "singular_weight"]


def cell_stiffness(grid: RadialGrid) -> np.ndarray:
    """Per-cell stiffness coefficients s_i (length n: n-1 cells + ghost tail).

    s_i multiplies |v_{i+1} - v_i|^2 in the Dirichlet form; the last entry
    belongs to the zero ghost cell beyond r_max and multiplies |v_n|^2.
    """
    if grid.grading == "log":
        h = grid.log_step
        return np.full(grid.n, 1.0 / h)
    # uniform grading: int_cell r dr / dr^2 = (r_{i+1}^2 - r_i^2) / (2 dr^2)
    r = grid.nodes
    dr = np.diff(r)
    s = np.empty(grid.n)
    s[:-1] = (r[1:] ** 2 - r[:-1] ** 2) / (2.0 * dr**2)
    tail = dr[-1]
    s[-1] = ((r[-1] + tail) ** 2 - r[-1] ** 2) / (2.0 * tail**2)
    return s


def singular_weight(grid: RadialGrid, params: Params) -> np.ndarray:
    """Nodal samples of the nonlinear weight r^{-(q-2)(N-2)/2} g(r).

    Finite because r_min > 0; locally integrable against r dr for q below
    the critical exponent, so quadratures converge under refinement.
    """
    base = grid.nodes ** (-(params.q - 2.0) * (params.N - 2.0) / 2.0)
    return base * params.weight_values(grid.nodes)


class RadialOperator:
    """Assembled K, M and nonlinear weight for one (grid, params) pair."""

    def __init__(self, grid: RadialGrid, params: Params):
        self.grid = grid
        self.params = params
        self.sphere = params.N * unit_ball_volume(params.N)
        self.mass_diag = grid.weights
        self.s = cell_stiffness(grid)
        self.k_lower = -self.s[:-1]  # off-diagonal of K
        self.k_diag = np.empty(grid.n)
        self.k_diag[0] = self.s[0]
        self.k_diag[1:] = self.s[:-1] + self.s[1:]
        self.w_sing = singular_weight(grid, params)

    # -- basic bilinear/quadratic forms (all carry the N omega_N factor) ----

    def mass(self, v: np.ndarray) -> float:
        return self.sphere * float(np.sum(self.mass_diag * np.abs(v) ** 2))

    def mass_inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        return self.sphere * complex(np.sum(self.mass_diag * a * np.conj(b)))

    def dirichlet(self, v: np.ndarray) -> float:
        dv = np.diff(v)
        return self.sphere * float(
            np.sum(self.s[:-1] * np.abs(dv) ** 2) + self.s[-1] * np.abs(v[-1]) ** 2
        )

    def dirichlet_inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        da, db = np.diff(a), np.diff(b)
        return self.sphere * complex(
            np.sum(self.s[:-1] * da * np.conj(db)) + self.s[-1] * a[-1] * np.conj(b[-1])
        )

    def h_inner(self, a: np.ndarray, b: np.ndarray) -> complex:
        """Energy-space inner product: Dirichlet part + weighted mass part."""
        return self.dirichlet_inner(a, b) + self.mass_inner(a, b)

    def h_norm_sq(self, v: np.ndarray) -> float:
        return self.dirichlet(v) + self.mass(v)

    def nonlinear(self, v: np.ndarray) -> float:
        q = self.params.q
        return self.sphere / q * float(np.sum(self.mass_diag * self.w_sing * np.abs(v) ** q))

    def energy(self, v: np.ndarray) -> float:
        return 0.5 * self.dirichlet(v) - self.nonlinear(v)

    def functional_j(self, v: np.ndarray) -> float:
        return self.energy(v) + 0.5 * self.mass(v)

    # -- operator application ------------------------------------------------

    def stiffness_apply(self, v: np.ndarray) -> np.ndarray:
        """K v, assembled from exact first differences."""
        dv = np.diff(v)
        flux = self.s[:-1] * dv
        out = np.empty_like(v)
        out[0] = -flux[0]
        out[1:-1] = flux[:-1] - flux[1:]
        out[-1] = flux[-1] + self.s[-1] * v[-1]
        return out

    def laplacian_like(self, v: np.ndarray) -> np.ndarray:
        """-(1/r)(r v')' in discrete form: (M^{-1} K) v."""
        return self.stiffness_apply(v) / self.mass_diag

    # -- banded solves ---------------------------------------------------------

    def solve_spd(self, diag_extra: np.ndarray | float, rhs: np.ndarray, dt: float) -> np.ndarray:
        """Solve (M * (1 + dt*diag_extra) + dt K) x = rhs, SPD tridiagonal."""
        n = self.grid.n
        ab = np.zeros((2, n))
        ab[0, 1:] = dt * self.k_lower
        ab[1] = self.mass_diag * (1.0 + dt * np.asarray(diag_extra)) + dt * self.k_diag
        return solveh_banded(ab, rhs)

    def solve_tridiag(self, diag: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solve (K + diag(M * diag)) x = rhs with general (possibly indefinite) diag."""
        n = self.grid.n
        dtype = np.result_type(diag, rhs)
        ab = np.zeros((3, n), dtype=dtype)
        ab[0, 1:] = self.k_lower
        ab[1] = self.k_diag + self.mass_diag * diag
        ab[2, :-1] = self.k_lower
        return solve_banded((1, 1), ab, rhs)

    def solve_cayley(self, potential: np.ndarray, v: np.ndarray, dt: float) -> np.ndarray:
        """One Crank-Nicolson stage: (M + i dt/2 B) v+ = (M - i dt/2 B) v,
        B = K - M diag(potential).

        B is real symmetric, so the stage is exactly unitary in the discrete
        r dr inner product up to the linear-solver roundoff.
        """
        n = self.grid.n
        half = 0.5j * dt
        b_diag = self.k_diag - self.mass_diag * potential
        rhs = (self.mass_diag - half * b_diag) * v
        rhs[:-1] -= half * self.k_lower * v[1:]
        rhs[1:] -= half * self.k_lower * v[:-1]
        ab = np.zeros((3, n), dtype=complex)
        ab[0, 1:] = half * self.k_lower
        ab[1] = self.mass_diag + half * b_diag
        ab[2, :-1] = half * self.k_lower
        return solve_banded((1, 1), ab, rhs)

    # -- helpers ---------------------------------------------------------------

    def check_field(self, v: Field) -> np.ndarray:
        if v.grid is not self.grid and not np.array_equal(v.grid.nodes, self.grid.nodes):
            raise ShapeError("field lives on a different grid than the operator")
        return v.values
