"""Energy-lowering initial data near a stationary profile.

The stationary state is a saddle of the total energy: it admits nearby
sphere-valued states with strictly smaller energy, and such states must
leave a neighbourhood of the orbit under the flow.  The construction here
perturbs along an unstable direction d (normalized in L2) while staying
exactly on the sphere:

    m0 = (1 + eps0 Phi) w + eps0 d b,
    Phi = (-1 + sqrt(1 - eps0^2 d^2)) / eps0,

where b = e3 for h0 > 0 and b = n (the in-plane normal) for h0 in (-1, 0).
Pointwise 2 Phi + eps0 (d^2 + Phi^2) = 0, which makes |m0| = 1 exact.

Two direction choices are supported: "explicit" uses the translation mode
dtheta/dx (h0 > 0) or the rotation mode sin(theta) (h0 < 0) exactly as
computed from the profile, without rescaling, so eps0 = 0.1 reproduces the
reference experiments; "eigen" uses the L2-normalized negative-mode
eigenfunction of the relevant second-variation block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energetics import energy
from .grid import MagnetizationField, l2_norm

__all__ = [
    "PerturbationSpec",
    "build_initial_data",
    "energy_gap",
    "random_tangent_perturbation",
]

DIRECTIONS = ("explicit", "eigen")


@dataclass
class PerturbationSpec:
    """Amplitude and direction of the unstable perturbation."""

    epsilon0: float
    direction: str = "explicit"

    def __post_init__(self):
        if self.epsilon0 == 0.0:
            raise ValueError("epsilon0 must be nonzero")
        if self.direction not in DIRECTIONS:
            raise ValueError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}"
            )


def _direction_field(sol, spec: PerturbationSpec) -> np.ndarray:
    if spec.direction == "explicit":
        return (sol.dtheta.values if sol.h0 > 0.0
                else np.sin(sol.theta.values)).copy()
    from .spectral import build_operator, lowest_eigenpairs

    which = "L2" if sol.h0 > 0.0 else "L1"
    report = lowest_eigenpairs(build_operator(sol, which), 1)
    if report.eigenvalues[0] >= 0.0:
        raise ValueError(
            f"{which} has no negative eigenvalue at h0 = {sol.h0}; "
            "no unstable eigen-direction exists"
        )
    d = report.eigenfunctions[0].values
    nrm = l2_norm(d, sol.grid.dx)
    if nrm == 0.0:
        raise ValueError("degenerate direction field")
    return d / nrm


def build_initial_data(sol, spec: PerturbationSpec) -> MagnetizationField:
    """Unit-norm initial state with strictly smaller total energy than w.

    Raises if the amplitude violates |eps0| ||d||_inf < 1/2 or if the energy
    test fails (amplitude too large for the quadratic regime); the caller
    should then shrink eps0 rather than have it adjusted silently.
    """
    if sol.h0 == 0.0 or sol.h0 <= -1.0:
        raise ValueError(
            f"energy-lowering perturbations need h0 > 0 or h0 in (-1, 0), "
            f"got {sol.h0}"
        )
    eps = spec.epsilon0
    d = _direction_field(sol, spec)
    dinf = float(np.abs(d).max())
    if abs(eps) * dinf >= 0.5:
        raise ValueError(
            f"|eps0| * ||d||_inf = {abs(eps) * dinf:.3f} >= 1/2; the on-sphere "
            "correction would lose positivity"
        )
    phi = (-1.0 + np.sqrt(1.0 - eps**2 * d**2)) / eps
    values = (1.0 + eps * phi)[:, None] * sol.w.values
    if sol.h0 > 0.0:
        values[:, 2] += eps * d
    else:
        values += (eps * d)[:, None] * sol.n.values
    m0 = MagnetizationField(sol.grid, values)
    gap = energy_gap(sol, m0)
    if gap >= 0.0:
        raise ValueError(
            f"energy gap {gap:.3e} is not negative; eps0 = {eps} is too large "
            "for the quadratic regime, shrink it"
        )
    return m0


def energy_gap(sol, m0: MagnetizationField) -> float:
    """E_h0(m0) - E_h0(w), both under the nodal discrete energy."""
    w = MagnetizationField(sol.grid, sol.w.values)
    return energy(m0, sol.h0).total - energy(w, sol.h0).total


def random_tangent_perturbation(sol, amplitude: float, seed: int) -> MagnetizationField:
    """Seeded uniform tangent noise, projected back onto the sphere.

    Utility for robustness spot checks only; no acceptance claims attach to
    random initial data.
    """
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=(sol.grid.node_count, 2))
    values = sol.w.values + amplitude * (
        u[:, :1] * sol.n.values + u[:, 1:] * np.array([[0.0, 0.0, 1.0]])
    )
    return MagnetizationField.from_unnormalized(sol.grid, values)
