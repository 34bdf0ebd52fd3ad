"""Uniform 1-D grid, field containers and discrete calculus.

Everything else in the package works on a uniform mesh over [-L, L].  This
module provides the mesh itself, scalar and sphere-valued field containers,
the Neumann 3-point second difference, trapezoid quadrature and the discrete
L2/H1 norms, plus CSV (de)serialization of fields.

Conventions:
  * quadrature is the trapezoid rule with uniform weight dx,
  * first derivatives are central in the interior and one-sided two-point at
    the boundary nodes (consistent with the Neumann ghost reflection),
  * the mesh keeps x=0 as an exact node whenever the node count is odd.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "ScalarField",
    "MagnetizationField",
    "make_grid",
    "second_derivative_neumann",
    "integrate",
    "norms",
    "write_field_csv",
    "read_field_csv",
]

#: max allowed deviation of |m_i| from 1 for magnetization fields
UNIT_NORM_TOL = 1e-12

#: significant digits used in all CSV output (lossless for float64)
CSV_DIGITS = 17


@dataclass(frozen=True)
class Grid:
    """Uniform mesh x_i = -L + i*dx on [-L, L] with N = 2L/dx + 1 nodes."""

    half_length: float
    dx: float
    node_count: int
    x: np.ndarray = field(repr=False, compare=False)

    @property
    def is_symmetric(self) -> bool:
        """True when x=0 is a node (odd node count)."""
        return self.node_count % 2 == 1

    @property
    def mid_index(self) -> int:
        if not self.is_symmetric:
            raise ValueError("grid has no center node (even node count)")
        return (self.node_count - 1) // 2


def make_grid(half_length: float, dx: float) -> Grid:
    """Build the uniform grid on [-half_length, half_length] with spacing dx.

    2L must be a whole multiple of dx (up to 1e-12 relative); the endpoints
    and, for an odd node count, the center node are pinned exactly.
    """
    if half_length <= 0.0:
        raise ValueError(f"half_length must be positive, got {half_length}")
    if dx <= 0.0:
        raise ValueError(f"dx must be positive, got {dx}")
    cells = int(round(2.0 * half_length / dx))
    if cells < 1 or abs(cells * dx - 2.0 * half_length) > 1e-12 * 2.0 * half_length:
        raise ValueError(
            f"2*half_length = {2 * half_length} is not a whole multiple of dx = {dx}"
        )
    n = cells + 1
    x = -half_length + np.arange(n) * dx
    x[-1] = half_length
    if n % 2 == 1:
        x[(n - 1) // 2] = 0.0
    x.setflags(write=False)
    return Grid(half_length, dx, n, x)


@dataclass
class ScalarField:
    """Real values, one per grid node."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.node_count,):
            raise ValueError(
                f"field has {self.values.shape} values for a grid of "
                f"{self.grid.node_count} nodes"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


@dataclass
class MagnetizationField:
    """Unit-sphere valued field: one vector m_i in R^3 per node, |m_i| = 1."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.node_count, 3):
            raise ValueError(
                f"magnetization needs shape ({self.grid.node_count}, 3), "
                f"got {self.values.shape}"
            )
        err = np.abs(np.sqrt((self.values**2).sum(axis=1)) - 1.0).max()
        if err > UNIT_NORM_TOL:
            raise ValueError(
                f"magnetization is off the unit sphere by {err:.3e} "
                f"(tolerance {UNIT_NORM_TOL:.0e}); use from_unnormalized"
            )

    @classmethod
    def unchecked(cls, grid: Grid, values: np.ndarray) -> "MagnetizationField":
        """Bypass the unit-norm check (diagnostic recording of raw states)."""
        obj = cls.__new__(cls)
        obj.grid = grid
        obj.values = np.asarray(values, dtype=float)
        return obj

    @classmethod
    def from_unnormalized(cls, grid: Grid, values: np.ndarray) -> "MagnetizationField":
        """Project arbitrary nonzero vectors onto the sphere node by node."""
        values = np.asarray(values, dtype=float)
        norms_ = np.sqrt((values**2).sum(axis=1))
        if norms_.min() <= 0.0:
            raise ValueError("cannot normalize a zero vector")
        return cls(grid, values / norms_[:, None])

    @classmethod
    def constant(cls, grid: Grid, direction) -> "MagnetizationField":
        d = np.asarray(direction, dtype=float)
        return cls.from_unnormalized(grid, np.tile(d, (grid.node_count, 1)))

    def component(self, k: int) -> ScalarField:
        return ScalarField(self.grid, self.values[:, k].copy())

    def copy(self) -> "MagnetizationField":
        return MagnetizationField(self.grid, self.values.copy())


# --------------------------------------------------------------------------
# discrete calculus (array level helpers are reused by the other modules)
# --------------------------------------------------------------------------

def laplacian_neumann(values: np.ndarray, dx: float) -> np.ndarray:
    """3-point second difference with zero-slope ghost nodes.

    Works on (N,) scalars and (N, k) stacked components alike.
    """
    if values.shape[0] < 3:
        raise ValueError("need at least 3 nodes for a second difference")
    out = np.empty_like(values)
    inv = 1.0 / (dx * dx)
    out[1:-1] = (values[:-2] - 2.0 * values[1:-1] + values[2:]) * inv
    # ghosts f[-1] = f[1] and f[N] = f[N-2]
    out[0] = 2.0 * (values[1] - values[0]) * inv
    out[-1] = 2.0 * (values[-2] - values[-1]) * inv
    return out


def first_derivative(values: np.ndarray, dx: float) -> np.ndarray:
    """Central first difference, one-sided two-point at the boundaries."""
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dx)
    out[0] = (values[1] - values[0]) / dx
    out[-1] = (values[-1] - values[-2]) / dx
    return out


def trapezoid(values: np.ndarray, dx: float) -> float:
    """Trapezoid rule with uniform spacing; exact for affine integrands."""
    return dx * (values.sum() - 0.5 * (values[0] + values[-1]))


def second_derivative_neumann(f: ScalarField) -> ScalarField:
    """Discrete second derivative of a nodal field with Neumann ghosts."""
    return ScalarField(f.grid, laplacian_neumann(f.values, f.grid.dx))


def integrate(f: ScalarField) -> float:
    """Trapezoid-rule integral of f over [-L, L]."""
    return trapezoid(f.values, f.grid.dx)


def l2_norm(values: np.ndarray, dx: float) -> float:
    """Discrete L2 norm; vector fields contribute all components."""
    sq = values**2
    if sq.ndim > 1:
        sq = sq.sum(axis=1)
    return float(np.sqrt(max(trapezoid(sq, dx), 0.0)))


def h1_norm(values: np.ndarray, dx: float) -> float:
    """Discrete H1 norm: sqrt(L2^2 + ||d/dx||_L2^2)."""
    d = first_derivative(values, dx)
    sq = values**2
    dsq = d**2
    if sq.ndim > 1:
        sq = sq.sum(axis=1)
        dsq = dsq.sum(axis=1)
    total = trapezoid(sq, dx) + trapezoid(dsq, dx)
    return float(np.sqrt(max(total, 0.0)))


def norms(f) -> tuple[float, float]:
    """(L2, H1) norms of a ScalarField or MagnetizationField."""
    values, dx = f.values, f.grid.dx
    return l2_norm(values, dx), h1_norm(values, dx)


# --------------------------------------------------------------------------
# CSV serialization:  "x,v" for scalars, "x,m1,m2,m3" for magnetizations
# --------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.{CSV_DIGITS}g}"


def write_field_csv(path, f) -> None:
    """Write a field as CSV with one row per node, 17 significant digits."""
    x = f.grid.x
    with open(path, "w") as fh:
        if isinstance(f, MagnetizationField):
            fh.write("x,m1,m2,m3\n")
            for i in range(f.grid.node_count):
                m = f.values[i]
                fh.write(f"{_fmt(x[i])},{_fmt(m[0])},{_fmt(m[1])},{_fmt(m[2])}\n")
        else:
            fh.write("x,v\n")
            for i in range(f.grid.node_count):
                fh.write(f"{_fmt(x[i])},{_fmt(f.values[i])}\n")


def grid_from_nodes(x: np.ndarray) -> Grid:
    """Rebuild a Grid from a strictly increasing uniform node array."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least two nodes")
    dx = (x[-1] - x[0]) / (x.size - 1)
    if dx <= 0 or np.abs(np.diff(x) - dx).max() > 1e-9 * max(dx, 1.0):
        raise ValueError("nodes are not uniformly spaced")
    if abs(x[0] + x[-1]) > 1e-9 * max(abs(x[-1]), 1.0):
        raise ValueError("nodes are not symmetric about 0")
    return make_grid(float(x[-1]), float(dx))


def read_field_csv(path):
    """Read a field CSV written by write_field_csv (or a profile CSV).

    Returns a ScalarField for "x,v" data and a MagnetizationField whenever
    m1,m2,m3 columns are present (profile CSVs carry extra columns which are
    ignored here).
    """
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    cols = {name: k for k, name in enumerate(header)}
    if "x" not in cols:
        raise ValueError(f"{path}: no x column")
    grid = grid_from_nodes(data[:, cols["x"]])
    if {"m1", "m2", "m3"} <= cols.keys():
        m = data[:, [cols["m1"], cols["m2"], cols["m3"]]]
        return MagnetizationField(grid, m)
    if "v" in cols:
        return ScalarField(grid, data[:, cols["v"]])
    raise ValueError(f"{path}: expected v or m1,m2,m3 columns, got {header}")
