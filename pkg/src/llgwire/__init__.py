"""1-D Landau-Lifshitz-Gilbert toolkit.

Stationary profiles of a ferromagnetic nanowire under a constant axial
field, spectra of the associated second-variation operators, explicit
finite-difference evolution with per-step renormalization, energy-lowering
perturbations and the instability experiments built on top of them.
"""

from .dynamics import BlowUpError, RunRecord, SimulationConfig, evolve, rhs, step
from .energetics import (
    EnergyBreakdown,
    dissipation,
    effective_field,
    energy,
    quadratic_energy_expansion_check,
)
from .grid import (
    Grid,
    MagnetizationField,
    ScalarField,
    integrate,
    make_grid,
    norms,
    read_field_csv,
    second_derivative_neumann,
    write_field_csv,
)
from .modulation import (
    FrameDecomposition,
    Gauge,
    apply_gauge,
    decompose,
    fit_gauge,
    orbital_distance,
)
from .perturbation import (
    PerturbationSpec,
    build_initial_data,
    energy_gap,
    random_tangent_perturbation,
)
from .spectral import (
    SpectralReport,
    TridiagonalOperator,
    build_operator,
    kernel_residual,
    linearized_spectrum,
    lowest_eigenpairs,
)
from .stationary import (
    StationarySolution,
    domain_wall,
    plateau_width,
    residual_stationarity,
    solve_theta,
    tail_rate,
    write_profile_csv,
)

__version__ = "0.1.0"
