import numpy as np
import pytest

import llgwire as lw


@pytest.fixture(scope="session")
def grid151():
    return lw.make_grid(15.0, 0.2)


@pytest.fixture(scope="session")
def wall(grid151):
    return lw.domain_wall(grid151)


@pytest.fixture(scope="session")
def sol_p01(grid151):
    return lw.solve_theta(0.1, grid151)


@pytest.fixture(scope="session")
def sol_n01(grid151):
    return lw.solve_theta(-0.1, grid151)


@pytest.fixture(scope="session")
def sol_n05(grid151):
    return lw.solve_theta(-0.5, grid151)


@pytest.fixture(scope="session")
def sol_10(grid151):
    return lw.solve_theta(10.0, grid151)


def smooth_tangent_perturbation(sol, amplitude: float, seed: int):
    """Band-limited random tangent perturbation (H1-friendly test helper)."""
    rng = np.random.default_rng(seed)
    x = sol.grid.x
    L = sol.grid.half_length
    prof_n = np.zeros_like(x)
    prof_3 = np.zeros_like(x)
    for k in range(1, 6):
        prof_n += rng.normal() / k * np.sin(0.5 * k * np.pi * x / L)
        prof_n += rng.normal() / k * np.cos(0.5 * k * np.pi * x / L)
        prof_3 += rng.normal() / k * np.sin(0.5 * k * np.pi * x / L)
        prof_3 += rng.normal() / k * np.cos(0.5 * k * np.pi * x / L)
    bump = np.exp(-((x / (0.6 * L)) ** 4))
    values = sol.w.values + amplitude * (
        (prof_n * bump)[:, None] * sol.n.values
        + (prof_3 * bump)[:, None] * np.array([[0.0, 0.0, 1.0]])
    )
    return lw.MagnetizationField.from_unnormalized(sol.grid, values)
