"""Stationary magnetization profiles for a constant axial field.

For a field strength h0 the time-independent states of the wire equation are
planar, m = (cos theta, sin theta, 0), with an angle profile theta(x) fixed by
an explicit second-order ODE

    theta'' = sin(theta) cos(theta) + h0 sin(theta)

together with branch-dependent data at x = 0:

  * h0 > 0:        theta(0) = pi, theta'(0) = sqrt(4 h0); theta rises from 0
                   at -inf to 2 pi at +inf and theta - pi is odd,
  * h0 in (-1,0):  theta(0) = arccos(-1 - 2 h0), theta'(0) = 0; theta is even
                   and decays to 0 on both sides,
  * h0 = 0:        the single transition theta(x) = 2 arctan(e^x) in closed
                   form,
  * h0 <= -1:      only the constant state survives (rejected here).

All trajectories live on the zero set of the reduced Hamiltonian
    Ham = (theta'^2 - sin^2 theta - 2 h0 (1 - cos theta)) / 2,
which doubles as the solver's accuracy monitor.  Integration is classical
fixed-substep RK4 on the half line x >= 0 with reflection; the substep starts
at dx/16 and is halved until two consecutive refinements agree within
ode_tol, so solutions are deterministic and reproducible bit for bit.

For h0 > 0 the first-order reduction theta' = sqrt(sin^2 + 2 h0 (1 - cos)) is
regular along the whole trajectory and is integrated directly.  For h0 < 0 it
is degenerate at the start (square-root contact at the turning angle), so the
second-order system is used there; once theta has dropped safely below the
turning angle the solver switches to the decreasing first-order branch, which
is contracting and pins the trajectory to the Hamiltonian zero set.  A pure
second-order march would instead amplify roundoff along the unstable tail
direction and lose ~4 digits at the far boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energetics import effective_field
from .grid import Grid, MagnetizationField, ScalarField, trapezoid

__all__ = [
    "StationarySolution",
    "domain_wall",
    "solve_theta",
    "tail_rate",
    "residual_stationarity",
    "plateau_width",
    "write_profile_csv",
]

#: below this distance from the limit angle, tails are clamped to the limit
TAIL_CLAMP = 1e-14

#: tail-fit window in |theta - limit| and required node count per side
TAIL_FIT_WINDOW = (1e-10, 1e-2)
TAIL_FIT_MIN_NODES = 20


@dataclass
class StationarySolution:
    """Angle profile plus derived fields of a stationary state."""

    h0: float
    grid: Grid
    theta: ScalarField
    dtheta: ScalarField
    w: MagnetizationField
    n: MagnetizationField
    lam: ScalarField
    energy_total: float

    @property
    def theta_limits(self) -> tuple[float, float]:
        """Limit angles at -L and +L."""
        if self.h0 > 0.0:
            return 0.0, 2.0 * math.pi
        if self.h0 == 0.0:
            return 0.0, math.pi
        return 0.0, 0.0


def _hamiltonian_residual(theta: np.ndarray, dtheta: np.ndarray, h0: float) -> np.ndarray:
    s = np.sin(theta)
    return 0.5 * (dtheta**2 - s * s - 2.0 * h0 * (1.0 - np.cos(theta)))


def _speed(theta: float, h0: float) -> float:
    # |theta'| on the Hamiltonian zero set; clipped against roundoff
    g = math.sin(theta) ** 2 + 2.0 * h0 * (1.0 - math.cos(theta))
    return math.sqrt(g) if g > 0.0 else 0.0


def _rk4_scalar(theta: float, h: float, sign: float, h0: float) -> float:
    k1 = sign * _speed(theta, h0)
    k2 = sign * _speed(theta + 0.5 * h * k1, h0)
    k3 = sign * _speed(theta + 0.5 * h * k2, h0)
    k4 = sign * _speed(theta + h * k3, h0)
    return theta + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _accel(theta: float, h0: float) -> float:
    return math.sin(theta) * (math.cos(theta) + h0)


def _rk4_system(theta: float, p: float, h: float, h0: float) -> tuple[float, float]:
    k1t, k1p = p, _accel(theta, h0)
    k2t, k2p = p + 0.5 * h * k1p, _accel(theta + 0.5 * h * k1t, h0)
    k3t, k3p = p + 0.5 * h * k2p, _accel(theta + 0.5 * h * k2t, h0)
    k4t, k4p = p + h * k3p, _accel(theta + h * k3t, h0)
    theta += (h / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)
    p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return theta, p


def _integrate_half(h0: float, half_cells: int, dx: float, nsub: int):
    """March the profile over x in [0, L], sampling (theta, theta') at nodes."""
    h = dx / nsub
    theta_nodes = np.empty(half_cells + 1)
    dtheta_nodes = np.empty(half_cells + 1)

    if h0 > 0.0:
        theta = math.pi
        theta_nodes[0] = theta
        dtheta_nodes[0] = _speed(theta, h0)
        for j in range(1, half_cells + 1):
            for _ in range(nsub):
                theta = _rk4_scalar(theta, h, +1.0, h0)
            theta_nodes[j] = theta
            dtheta_nodes[j] = _speed(theta, h0)
        return theta_nodes, dtheta_nodes

    # h0 in (-1, 0): second-order start at the turning angle, then the
    # decreasing first-order branch once it is Lipschitz-safe
    theta_c = math.acos(-1.0 - 2.0 * h0)
    switch_at = theta_c - min(0.2, theta_c / 4.0)
    theta, p = theta_c, 0.0
    switched = False
    theta_nodes[0] = theta
    dtheta_nodes[0] = 0.0
    for j in range(1, half_cells + 1):
        for _ in range(nsub):
            if not switched:
                theta, p = _rk4_system(theta, p, h, h0)
                if theta <= switch_at:
                    switched = True
            else:
                theta = _rk4_scalar(theta, h, -1.0, h0)
                p = -_speed(theta, h0)
        theta_nodes[j] = theta
        dtheta_nodes[j] = p
    return theta_nodes, dtheta_nodes


def _integrate_half_adaptive(h0: float, half_cells: int, dx: float, ode_tol: float,
                             nsub0: int = 16, nsub_max: int = 1024):
    """Halve the RK4 substep until two refinements agree within ode_tol."""
    nsub = nsub0
    theta, dtheta = _integrate_half(h0, half_cells, dx, nsub)
    while nsub < nsub_max:
        nsub *= 2
        theta2, dtheta2 = _integrate_half(h0, half_cells, dx, nsub)
        gap = np.abs(theta2 - theta).max()
        theta, dtheta = theta2, dtheta2
        if gap <= ode_tol:
            break
    return theta, dtheta


def _assemble(h0: float, grid: Grid, theta: np.ndarray, dtheta: np.ndarray) -> StationarySolution:
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    w = np.stack([cos_t, sin_t, np.zeros_like(theta)], axis=1)
    n = np.stack([-sin_t, cos_t, np.zeros_like(theta)], axis=1)
    lam = -2.0 * sin_t**2 + 3.0 * h0 * cos_t - 2.0 * h0
    energy = 0.5 * trapezoid(dtheta**2 + sin_t**2, grid.dx) \
        + h0 * trapezoid(1.0 - cos_t, grid.dx)
    return StationarySolution(
        h0=h0,
        grid=grid,
        theta=ScalarField(grid, theta),
        dtheta=ScalarField(grid, dtheta),
        w=MagnetizationField(grid, w),
        n=MagnetizationField(grid, n),
        lam=ScalarField(grid, lam),
        energy_total=float(energy),
    )


def domain_wall(grid: Grid) -> StationarySolution:
    """Closed-form single transition theta(x) = 2 arctan(e^x) at h0 = 0."""
    x = grid.x
    theta = 2.0 * np.arctan(np.exp(x))
    dtheta = 1.0 / np.cosh(x)
    theta = np.where(theta < TAIL_CLAMP, 0.0, theta)
    hi = np.abs(theta - math.pi) < TAIL_CLAMP
    theta[hi] = math.pi
    dtheta[(theta == 0.0) | hi] = 0.0
    return _assemble(0.0, grid, theta, dtheta)


def solve_theta(h0: float, grid: Grid, ode_tol: float = 1e-10) -> StationarySolution:
    """Compute the stationary profile for field strength h0 on the grid.

    The right half is integrated by fixed-substep RK4 (refined until the
    node values are ode_tol-converged) and reflected: theta(-x) = 2pi -
    theta(x) for h0 > 0, theta(-x) = theta(x) for h0 < 0.  Tails closer than
    1e-14 to the limit angle are clamped to it.
    """
    if ode_tol <= 0.0:
        raise ValueError(f"ode_tol must be positive, got {ode_tol}")
    if h0 <= -1.0:
        raise ValueError(
            f"h0 = {h0}: no non-constant stationary profile exists for h0 <= -1"
        )
    if h0 == 0.0:
        return domain_wall(grid)
    if not grid.is_symmetric:
        raise ValueError("stationary profiles need x=0 as a grid node (odd node count)")

    half_cells = grid.mid_index
    th_half, dth_half = _integrate_half_adaptive(h0, half_cells, grid.dx, ode_tol)

    n = grid.node_count
    mid = grid.mid_index
    theta = np.empty(n)
    dtheta = np.empty(n)
    theta[mid:] = th_half
    dtheta[mid:] = dth_half
    if h0 > 0.0:
        theta[:mid] = 2.0 * math.pi - th_half[:0:-1]
        dtheta[:mid] = dth_half[:0:-1]
        # clamp converged tails to the exact limits
        lo = theta < TAIL_CLAMP
        hi = theta > 2.0 * math.pi - TAIL_CLAMP
        theta[lo] = 0.0
        theta[hi] = 2.0 * math.pi
        dtheta[lo | hi] = 0.0
    else:
        theta[:mid] = th_half[:0:-1]
        dtheta[:mid] = -dth_half[:0:-1]
        lo = np.abs(theta) < TAIL_CLAMP
        theta[lo] = 0.0
        dtheta[lo] = 0.0
    return _assemble(h0, grid, theta, dtheta)


def tail_rate(sol: StationarySolution) -> tuple[float, float]:
    """Fitted exponential decay rates of theta towards its limits.

    Least-squares slope of log|theta - limit| against |x| over the window
    |theta - limit| in [1e-10, 1e-2]; both rates are returned positive.
    """
    x = sol.grid.x
    theta = sol.theta.values
    lim_left, lim_right = sol.theta_limits
    lo, hi = TAIL_FIT_WINDOW
    rates = []
    for side, lim in (("left", lim_left), ("right", lim_right)):
        dev = np.abs(theta - lim)
        if side == "left":
            mask = (x < 0) & (dev >= lo) & (dev <= hi)
        else:
            mask = (x > 0) & (dev >= lo) & (dev <= hi)
        if mask.sum() < TAIL_FIT_MIN_NODES:
            raise ValueError(
                f"insufficient {side} tail window: {int(mask.sum())} nodes with "
                f"|theta - limit| in [{lo:g}, {hi:g}] (need {TAIL_FIT_MIN_NODES})"
            )
        slope = np.polyfit(np.abs(x[mask]), np.log(dev[mask]), 1)[0]
        rates.append(-float(slope))
    return rates[0], rates[1]


def residual_stationarity(sol: StationarySolution) -> float:
    """Max interior defect of H(w) = Lambda w under the discrete field.

    The field uses the 3-point Neumann Laplacian, so the defect is O(dx^2).
    """
    h = effective_field(sol.w, sol.h0)
    res = h - sol.lam.values[:, None] * sol.w.values
    return float(np.sqrt((res[1:-1] ** 2).sum(axis=1)).max())


def plateau_width(sol: StationarySolution, level: float = -0.9) -> float:
    """Length of the region where m1 = cos(theta) sits below `level`.

    Diagnostic for the two-transition shape at small |h0|; no scaling law is
    asserted for it.
    """
    below = np.cos(sol.theta.values) < level
    return float(below.sum() * sol.grid.dx)


def write_profile_csv(sol: StationarySolution, path) -> None:
    """Profile CSV: x,theta,dtheta,m1,m2,m3,lambda at 17 significant digits."""
    x = sol.grid.x
    th, dth = sol.theta.values, sol.dtheta.values
    w, lam = sol.w.values, sol.lam.values
    with open(path, "w") as fh:
        fh.write("x,theta,dtheta,m1,m2,m3,lambda\n")
        for i in range(sol.grid.node_count):
            row = (x[i], th[i], dth[i], w[i, 0], w[i, 1], w[i, 2], lam[i])
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def hamiltonian_residual(sol: StationarySolution) -> np.ndarray:
    """Pointwise residual of the reduced Hamiltonian on the zero set."""
    return _hamiltonian_residual(sol.theta.values, sol.dtheta.values, sol.h0)
