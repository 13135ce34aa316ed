"""Radial grids, weighted quadrature, and the singularity-removing transform.

All radial profiles live on a cell-free nodal grid 0 < r_1 < ... < r_n.  The
working measure is r dr (the two-dimensional radial reduction of
|x|^{-(N-2)} dx); full N-dimensional integrals carry the unit-sphere factor
N * omega_N, with omega_N the volume of the unit N-ball.

The transform ``u = r^{-(N-2)/2} v`` maps the weighted problem onto the plain
2D radial one and back; it is applied pointwise on the nodes, so the round
trip is exact to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError, ShapeError

__all__ = [
    "Params",
    "RadialGrid",
    "Field",
    "unit_ball_volume",
    "build_grid",
    "to_u",
    "to_v",
    "log_time_coordinate",
    "integrate_mu",
]


def unit_ball_volume(N: int) -> float:
    """Volume of the unit ball in R^N (sphere area is then N * omega_N)."""
    return math.pi ** (N / 2.0) / math.gamma(N / 2.0 + 1.0)


def critical_exponent(N: int) -> float:
    """Critical Sobolev exponent 2N/(N-2)."""
    return 2.0 * N / (N - 2.0)


@dataclass(frozen=True)
class Params:
    """Problem parameters: dimension, nonlinearity exponent, prescribed mass.

    The admissible exponent window depends on use: time evolution and
    stability require the subcritical range 2 < q < 2 + 4/N, while the
    inequality checkers accept 2 < q < 2N/(N-2).  Validation here enforces
    the wide window; callers that need the strict one test ``subcritical``.
    """

    N: int
    q: float
    gamma: float = 1.0
    weight: "object | None" = None  # WeightSpec from checks.py, or None for g == 1

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise ParameterError(f"dimension N must be an integer >= 3, got {self.N}")
        object.__setattr__(self, "N", int(self.N))
        qmax = critical_exponent(self.N)
        if not (2.0 < self.q < qmax):
            raise ParameterError(
                f"exponent q={self.q} outside admissible range (2, {qmax}) for N={self.N}"
            )
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ParameterError(f"mass gamma must be positive, got {self.gamma}")

    @property
    def subcritical(self) -> bool:
        """True in the mass-subcritical window 2 < q < 2 + 4/N."""
        return self.q < 2.0 + 4.0 / self.N

    def require_subcritical(self, context: str = "this operation") -> None:
        if not self.subcritical:
            raise ParameterError(
                f"{context} requires 2 < q < 2 + 4/N = {2.0 + 4.0 / self.N:.6g}; got q={self.q}"
            )

    def weight_values(self, r: np.ndarray) -> np.ndarray:
        """Weight g sampled on radii r (ones when no weight is configured)."""
        if self.weight is None:
            return np.ones_like(r)
        return self.weight(r)


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing positive radii with quadrature weights for r dr.

    ``weights`` realise the trapezoid rule in the grid's native coordinate
    (log r or r), applied to the transformed integrand, so that
    ``sum(weights * f(nodes))`` approximates ``int f(r) r dr`` at second
    order, with positive weights.  ``log_nodes`` is kept alongside ``nodes``
    because several operations (stencils, reciprocal grids) are exact in the
    log coordinate.
    """

    nodes: np.ndarray
    weights: np.ndarray
    grading: str
    log_nodes: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or weights.shape != nodes.shape:
            raise ShapeError("nodes and weights must be 1-d arrays of equal length")
        if not np.all(nodes > 0.0) or not np.all(np.diff(nodes) > 0.0):
            raise ParameterError("grid nodes must be positive and strictly increasing")
        if not np.all(weights > 0.0):
            raise ParameterError("quadrature weights must be positive")
        log_nodes = self.log_nodes
        if log_nodes is None:
            log_nodes = np.log(nodes)
        log_nodes = np.asarray(log_nodes, dtype=float)
        for name, arr in (("nodes", nodes), ("weights", weights), ("log_nodes", log_nodes)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def log_step(self) -> float:
        """Uniform spacing in log r (only meaningful for log grading)."""
        return float(self.log_nodes[1] - self.log_nodes[0])

    def quadrature(self, samples: np.ndarray) -> float:
        """Approximate ``int f(r) r dr`` from nodal samples of f."""
        samples = np.asarray(samples)
        if samples.shape != self.nodes.shape:
            raise ShapeError(
                f"samples have length {samples.shape}, grid has {self.nodes.shape}"
            )
        return float(np.real(np.sum(self.weights * samples)))


def build_grid(
    n: int,
    r_min: float,
    r_max: float,
    grading: str = "log",
) -> RadialGrid:
    """Build a radial grid with ``n`` nodes on [r_min, r_max].

    grading "log" places nodes uniformly in log r (the default; it resolves
    the power-law region near the origin), "uniform" places them uniformly
    in r.
    """
    if n < 16:
        raise ParameterError(f"need at least 16 nodes, got {n}")
    if not (0.0 < r_min < r_max) or not math.isfinite(r_max):
        raise ParameterError(f"invalid radial bounds ({r_min}, {r_max})")
    if grading == "log":
        x = np.linspace(math.log(r_min), math.log(r_max), n)
        r = np.exp(x)
        # exact endpoints; exp/log round trips are only ulp-accurate
        r[0], r[-1] = r_min, r_max
        t = np.full(n, x[1] - x[0])
        t[0] *= 0.5
        t[-1] *= 0.5
        weights = t * r**2  # int f r dr = int f(e^x) e^{2x} dx
        return RadialGrid(nodes=r, weights=weights, grading="log", log_nodes=x)
    if grading == "uniform":
        r = np.linspace(r_min, r_max, n)
        t = np.full(n, r[1] - r[0])
        t[0] *= 0.5
        t[-1] *= 0.5
        weights = t * r
        return RadialGrid(nodes=r, weights=weights, grading="uniform", log_nodes=np.log(r))
    raise ParameterError(f"unknown grading {grading!r}; use 'log' or 'uniform'")


@dataclass(frozen=True)
class Field:
    """Nodal samples of a radial profile, tied to its grid."""

    values: np.ndarray
    grid: RadialGrid

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 1 or values.shape[0] != self.grid.n:
            raise ShapeError(
                f"field has {values.shape} values for a grid of {self.grid.n} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ParameterError("field values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values=values, grid=self.grid)


def _transform_factor(grid: RadialGrid, N: int) -> np.ndarray:
    return grid.nodes ** (-(N - 2) / 2.0)


def to_u(v: Field, N: int) -> Field:
    """Apply the transform: u(r) = r^{-(N-2)/2} v(r), pointwise on nodes."""
    return v.with_values(v.values * _transform_factor(v.grid, N))


def to_v(u: Field, N: int) -> Field:
    """Invert the transform: v(r) = r^{(N-2)/2} u(r); to_v(to_u(v)) == v."""
    return u.with_values(u.values / _transform_factor(u.grid, N))


def log_time_coordinate(r, N: int):
    """Origin coordinate t = (-log r)^{-1/(N-2)} for 0 < r < 1.

    Strictly increasing in r, with t -> 0 as r -> 0; it inverts exactly as
    r = exp(-t^{-(N-2)}).
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0.0) or np.any(r_arr >= 1.0):
        raise DomainError("log_time_coordinate requires 0 < r < 1")
    t = (-np.log(r_arr)) ** (-1.0 / (N - 2))
    return float(t) if np.isscalar(r) else t


def integrate_mu(samples, grid: RadialGrid, N: int) -> float:
    """Integral against the weighted measure: N omega_N * int f(r) r dr.

    For f = |v|^2 this is the mu-mass of v, equal to the plain L^2 mass of
    u = to_u(v).
    """
    values = samples.values if isinstance(samples, Field) else np.asarray(samples)
    if values.shape != grid.nodes.shape:
        raise ShapeError("samples are not aligned with the grid")
    return N * unit_ball_volume(N) * grid.quadrature(values)
