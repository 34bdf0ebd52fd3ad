"""Second-variation operators and their discrete spectra.

Around a stationary profile the energy Hessian splits into two 1-D
Schroedinger operators acting on the in-plane and out-of-plane perturbation
components:

    A = -d^2/dx^2 + V(x),
    V_L1 = 1 - 2 sin^2(theta) + h0 cos(theta),
    V_L2 = V_L1 - 2 h0 (1 - cos(theta)),

both with potential limit 1 + h0 (the essential-spectrum floor on the line).
They are discretized with the 3-point stencil and Dirichlet ends; the
eigenfunctions of interest decay exponentially, so the truncation bias is
e^(-sqrt(1+h0) L)-small.  The translation mode dtheta/dx lies in the kernel
of L1 and the rotation mode sin(theta) in the kernel of L2.

Eigenvalues are computed by Sturm-sequence bisection and eigenvectors by
shifted inverse iteration with partial pivoting, implemented here directly so
results are deterministic across platforms.  The non-self-adjoint block
operator of the linearized flow,

    B = [[alpha L1, -L2], [L1, alpha L2]],

is handled densely at desk scale: a full dense eigenvalue sweep supplies
shift candidates which are then refined by complex shifted inverse power
iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg

from .grid import Grid, ScalarField

__all__ = [
    "TridiagonalOperator",
    "SpectralReport",
    "build_operator",
    "apply_operator",
    "lowest_eigenpairs",
    "kernel_residual",
    "linearized_spectrum",
]

#: dense block-operator solves are restricted to desk scale
MAX_DENSE_NODES = 301


@dataclass
class TridiagonalOperator:
    """Symmetric tridiagonal Dirichlet discretization of -d^2/dx^2 + V."""

    grid: Grid
    tag: str                      # "L1" | "L2"
    h0: float
    potential: np.ndarray         # V at the interior nodes x_1 .. x_{N-2}
    diagonal: np.ndarray          # 2/dx^2 + V
    offdiag: float                # constant -1/dx^2
    boundary: str = "dirichlet"

    @property
    def size(self) -> int:
        return self.diagonal.size


@dataclass
class SpectralReport:
    """Low-lying spectrum of one operator."""

    operator: str                               # "L1" | "L2" | "linearized"
    eigenvalues: np.ndarray                     # real sorted, or complex
    eigenfunctions: list = dc_field(default_factory=list)
    eigen_residuals: list = dc_field(default_factory=list)
    kernel_residuals: list = dc_field(default_factory=list)
    essential_spectrum_floor: float = float("nan")
    negative_real_count: int | None = None


def build_operator(sol, which: str) -> TridiagonalOperator:
    """Assemble L1 or L2 on the interior nodes of the solution's grid."""
    if which not in ("L1", "L2"):
        raise ValueError(f"unknown operator tag {which!r} (want 'L1' or 'L2')")
    grid: Grid = sol.grid
    theta = sol.theta.values[1:-1]
    h0 = sol.h0
    v = 1.0 - 2.0 * np.sin(theta) ** 2 + h0 * np.cos(theta)
    if which == "L2":
        v = v - 2.0 * h0 * (1.0 - np.cos(theta))
    dx2 = grid.dx * grid.dx
    return TridiagonalOperator(
        grid=grid,
        tag=which,
        h0=h0,
        potential=v,
        diagonal=2.0 / dx2 + v,
        offdiag=-1.0 / dx2,
    )


def apply_operator(op: TridiagonalOperator, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product on an interior-node vector."""
    if v.shape != (op.size,):
        raise ValueError(f"vector length {v.shape} does not match operator size {op.size}")
    out = op.diagonal * v
    out[:-1] += op.offdiag * v[1:]
    out[1:] += op.offdiag * v[:-1]
    return out


def dense_matrix(op: TridiagonalOperator) -> np.ndarray:
    a = np.diag(op.diagonal)
    idx = np.arange(op.size - 1)
    a[idx, idx + 1] = op.offdiag
    a[idx + 1, idx] = op.offdiag
    return a


# --------------------------------------------------------------------------
# Sturm bisection + inverse iteration for the symmetric tridiagonal case
# --------------------------------------------------------------------------

def _sturm_count(diag: np.ndarray, offsq: float, sigma: float) -> int:
    """Number of eigenvalues strictly below sigma (LDL^T sign count)."""
    count = 0
    d = diag[0] - sigma
    if d < 0.0:
        count += 1
    tiny = 1e-300
    for i in range(1, diag.size):
        if d == 0.0:
            d = -tiny
        d = diag[i] - sigma - offsq / d
        if d < 0.0:
            count += 1
    return count


def _bisect_eigenvalue(diag: np.ndarray, offsq: float, k: int,
                       lo: float, hi: float) -> float:
    """k-th smallest eigenvalue (k 1-based) by bisection on the Sturm count."""
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _sturm_count(diag, offsq, mid) >= k:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * max(abs(lo), abs(hi), 1.0):
            break
    return 0.5 * (lo + hi)


def _tridiag_solve_shifted(diag: np.ndarray, off: float, sigma: float,
                           b: np.ndarray) -> np.ndarray:
    """Solve (T - sigma I) x = b with partial pivoting (T symmetric tridiag).

    Safe for nearly singular shifts, which is exactly the inverse-iteration
    use case.
    """
    n = diag.size
    d = diag - sigma
    du = np.full(n - 1, off)
    dl = np.full(n - 1, off)
    du2 = np.zeros(max(n - 2, 0))
    rhs = b.astype(float).copy()
    swap = np.zeros(n - 1, dtype=bool)
    tiny = 1e-300

    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] == 0.0:
                d[i] = tiny
            fact = dl[i] / d[i]
            dl[i] = fact
            d[i + 1] -= fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            tmp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = tmp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            swap[i] = True
    if d[n - 1] == 0.0:
        d[n - 1] = tiny

    for i in range(n - 1):
        if swap[i]:
            rhs[i], rhs[i + 1] = rhs[i + 1], rhs[i]
        rhs[i + 1] -= dl[i] * rhs[i]

    x = rhs
    x[n - 1] /= d[n - 1]
    if n > 1:
        x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i]
    return x


def _inverse_iteration(op: TridiagonalOperator, lam: float,
                       previous: list[np.ndarray], seed: int,
                       max_iter: int = 50) -> tuple[np.ndarray, float, float]:
    """Eigenvector for the isolated eigenvalue lam; returns (v, lam, residual)."""
    rng = np.random.default_rng(0x5EED + seed)
    v = rng.standard_normal(op.size)
    v /= np.linalg.norm(v)
    residual = np.inf
    for _ in range(max_iter):
        v = _tridiag_solve_shifted(op.diagonal, op.offdiag, lam, v)
        # two re-orthogonalization passes against already-computed vectors
        for _ in range(2):
            for u in previous:
                v -= np.dot(u, v) * u
        nv = np.linalg.norm(v)
        if nv == 0.0 or not np.isfinite(nv):
            v = rng.standard_normal(op.size)
            v /= np.linalg.norm(v)
            continue
        v /= nv
        av = apply_operator(op, v)
        lam_r = float(np.dot(v, av))
        residual = float(np.linalg.norm(av - lam_r * v))
        if residual <= 1e-10 * max(1.0, abs(lam_r)):
            return v, lam_r, residual
    raise RuntimeError(
        f"inverse iteration did not converge in {max_iter} iterations near "
        f"lambda = {lam:.6g} (residual {residual:.3e}); eigenvalues may be "
        f"pathologically clustered in [{lam:.6g} +/- bisection width]"
    )


def _embed(grid: Grid, interior: np.ndarray) -> ScalarField:
    full = np.zeros(grid.node_count)
    full[1:-1] = interior
    return ScalarField(grid, full)


def lowest_eigenpairs(op: TridiagonalOperator, k: int) -> SpectralReport:
    """The k smallest eigenvalues with L2-normalized eigenfunctions.

    Deterministic: Sturm bisection fixes each eigenvalue, inverse iteration
    with fixed seeding supplies the vectors.
    """
    if not 1 <= k <= 8:
        raise ValueError(f"k must be in 1..8, got {k}")
    offsq = op.offdiag * op.offdiag
    radius = 2.0 * abs(op.offdiag)
    lo = float(op.diagonal.min() - radius)
    hi = float(op.diagonal.max() + radius)

    eigenvalues = []
    vectors: list[np.ndarray] = []
    residuals = []
    for j in range(1, k + 1):
        lam = _bisect_eigenvalue(op.diagonal, offsq, j, lo, hi)
        v, lam_r, res = _inverse_iteration(op, lam, vectors, seed=j)
        eigenvalues.append(lam_r)
        vectors.append(v)
        residuals.append(res)

    order = np.argsort(eigenvalues)
    dx = op.grid.dx
    fields = []
    for idx in order:
        v = vectors[idx] / (np.linalg.norm(vectors[idx]) * math.sqrt(dx))
        fields.append(_embed(op.grid, v))
    return SpectralReport(
        operator=op.tag,
        eigenvalues=np.array([eigenvalues[i] for i in order]),
        eigenfunctions=fields,
        eigen_residuals=[residuals[i] for i in order],
        essential_spectrum_floor=1.0 + op.h0,
    )


def kernel_residual(op: TridiagonalOperator, candidate: ScalarField) -> float:
    """||A c||_2 / ||c||_2 for a putative kernel element (interior nodes)."""
    v = candidate.values[1:-1]
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("kernel candidate is identically zero")
    return float(np.linalg.norm(apply_operator(op, v)) / nv)


# --------------------------------------------------------------------------
# linearized block operator (non-self-adjoint, dense at desk scale)
# --------------------------------------------------------------------------

def block_matrix(sol, alpha: float) -> np.ndarray:
    """Dense [[alpha L1, -L2], [L1, alpha L2]] on the interior nodes."""
    a1 = dense_matrix(build_operator(sol, "L1"))
    a2 = dense_matrix(build_operator(sol, "L2"))
    return np.block([[alpha * a1, -a2], [a1, alpha * a2]])


def _refine_complex(mat: np.ndarray, shift: complex,
                    max_iter: int = 200) -> tuple[complex, np.ndarray, float]:
    """Shifted inverse power iteration on a dense matrix near `shift`."""
    n = mat.shape[0]
    sigma = shift + 1e-8 * (1.0 + abs(shift)) * (1.0 + 1.0j)
    lu = scipy.linalg.lu_factor(mat - sigma * np.eye(n, dtype=complex))
    rng = np.random.default_rng(0xB10C)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    scale = max(1.0, float(np.abs(mat).sum(axis=1).max()))
    for _ in range(max_iter):
        v = scipy.linalg.lu_solve(lu, v)
        v /= np.linalg.norm(v)
        av = mat @ v
        lam = complex(np.vdot(v, av))
        residual = float(np.linalg.norm(av - lam * v))
        if residual <= 1e-10 * scale:
            return lam, v, residual
    raise RuntimeError(
        f"inverse power iteration did not converge in {max_iter} iterations "
        f"near shift {shift:.6g}"
    )


def linearized_spectrum(sol, alpha: float, k: int) -> SpectralReport:
    """Low-real-part spectrum of the linearized flow's block operator.

    A dense eigenvalue sweep supplies candidates; the k of smallest real part
    are refined by shifted inverse power iteration and returned sorted by
    (Re, Im), so complex values appear in conjugate pairs.  Kernel residuals
    of the two transpose-kernel vectors built from the translation and
    rotation modes are reported alongside.  The number of eigenvalues with
    negative real part is reported, never asserted: whether any exist beyond
    the gauge modes is an open question.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if sol.grid.node_count > MAX_DENSE_NODES:
        raise ValueError(
            f"dense block solve is limited to {MAX_DENSE_NODES} nodes, "
            f"got {sol.grid.node_count}"
        )
    mat = block_matrix(sol, alpha)
    candidates = np.linalg.eigvals(mat)
    order = np.lexsort((candidates.imag, candidates.real))
    picked = candidates[order[:k]]

    refined = []
    residuals = []
    for lam0 in picked:
        lam, _, res = _refine_complex(mat, complex(lam0))
        refined.append(lam)
        residuals.append(res)
    refined = np.array(refined)
    order2 = np.lexsort((refined.imag, refined.real))
    refined = refined[order2]
    residuals = [residuals[i] for i in order2]

    dth = sol.dtheta.values[1:-1]
    sth = np.sin(sol.theta.values[1:-1])
    kernel_res = []
    for u in (np.concatenate([alpha * dth, dth]),
              np.concatenate([-sth, alpha * sth])):
        kernel_res.append(float(np.linalg.norm(mat.T @ u) / np.linalg.norm(u)))

    return SpectralReport(
        operator="linearized",
        eigenvalues=refined,
        eigen_residuals=residuals,
        kernel_residuals=kernel_res,
        essential_spectrum_floor=1.0 + sol.h0,
        negative_real_count=int((candidates.real < 0.0).sum()),
    )
