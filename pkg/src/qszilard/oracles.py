"""Independent brute-force oracles used by the test suite.

Nothing here shares code with the production spectrum path: two-particle
energies come from a real-space finite-difference grid (Dirichlet walls,
contact interaction as an on-diagonal g/h potential, bosonic subspace
built explicitly) and interaction integrals from adaptive quadrature.
Grid results carry an O(h^2) discretization error that a Richardson step
P -> 2P removes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.sparse.linalg import eigsh

from .errors import ConvergenceError, InvalidParameterError


@dataclass(frozen=True)
class GridSpec:
    """Uniform interior grid of a box: P points per side, spacing ell/(P+1)."""

    points_per_side: int
    length: float

    def __post_init__(self):
        if self.points_per_side < 3:
            raise InvalidParameterError("grid needs at least 3 interior points")
        if not self.length > 0:
            raise InvalidParameterError(f"length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / (self.points_per_side + 1)


def _symmetric_projector(p: int) -> sp.csr_matrix:
    """Isometry from the bosonic (swap-symmetric) subspace into the full grid."""
    rows, cols, vals = [], [], []
    col = 0
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i in range(p):
        for j in range(i, p):
            if i == j:
                rows.append(i * p + j)
                cols.append(col)
                vals.append(1.0)
            else:
                rows.extend((i * p + j, j * p + i))
                cols.extend((col, col))
                vals.extend((inv_sqrt2, inv_sqrt2))
            col += 1
    return sp.csr_matrix((vals, (rows, cols)), shape=(p * p, col))


def two_particle_grid_energies(
    length: float, coupling: float, grid: GridSpec, k: int = 5
) -> np.ndarray:
    """Lowest ``k`` bosonic eigenvalues of the discretized two-particle box.

    H = -(d^2/dx1^2 + d^2/dx2^2)/2 + (g/h) delta_{x1,x2} on the interior
    grid with Dirichlet walls, restricted to the swap-symmetric subspace.
    """
    p = grid.points_per_side
    h = grid.spacing
    main = np.full(p, 1.0 / h**2)
    off = np.full(p - 1, -0.5 / h**2)
    t1 = sp.diags([off, main, off], [-1, 0, 1])
    eye = sp.identity(p)
    ham = sp.kron(t1, eye) + sp.kron(eye, t1)
    diag = np.zeros(p * p)
    diag[np.arange(p) * p + np.arange(p)] = coupling / h
    ham = (ham + sp.diags(diag)).tocsr()
    q = _symmetric_projector(p)
    ham_sym = (q.T @ ham @ q).tocsc()
    dim = ham_sym.shape[0]
    if k >= dim:
        raise InvalidParameterError(f"requested {k} eigenvalues from a {dim}-dim grid")
    v0 = np.full(dim, 1.0 / np.sqrt(dim))
    vals = eigsh(ham_sym, k=k, sigma=0.0, which="LM", v0=v0, return_eigenvectors=False)
    return np.sort(vals)


@dataclass
class RichardsonResult:
    extrapolated: np.ndarray
    coarse: np.ndarray
    fine: np.ndarray

    @property
    def step_change(self) -> np.ndarray:
        return np.abs(self.fine - self.coarse) / np.maximum(np.abs(self.fine), 1.0)


def richardson_two_particle(
    length: float,
    coupling: float,
    points_per_side: int,
    k: int = 5,
    guard: float = 0.05,
) -> RichardsonResult:
    """Grid energies with the P -> 2P Richardson step eliminating O(h^2).

    If the two resolutions still differ by more than ``guard`` (relative)
    the discretization has not entered its asymptotic regime; the error
    carries both spectra for inspection.
    """
    coarse = two_particle_grid_energies(length, coupling, GridSpec(points_per_side, length), k)
    fine = two_particle_grid_energies(length, coupling, GridSpec(2 * points_per_side + 1, length), k)
    result = RichardsonResult(
        extrapolated=(4.0 * fine - coarse) / 3.0, coarse=coarse, fine=fine
    )
    worst = float(np.max(result.step_change))
    if worst > guard:
        raise ConvergenceError(
            f"grid oracle not in the h^2 regime: relative step change {worst:.3e}",
            residual=worst,
            payload=result,
        )
    return result


def quadrature_integral(i: int, j: int, k: int, l: int, length: float = 1.0) -> float:
    """Adaptive quadrature of the quartic sine-mode product (test oracle).

    Indices are capped at 50 so the subdivision limit resolves every
    oscillation; the result must be certified to 1e-12 absolute.
    """
    for idx in (i, j, k, l):
        if not 1 <= idx <= 50:
            raise InvalidParameterError("oracle indices must lie in [1, 50]")
    if not length > 0:
        raise InvalidParameterError(f"length must be positive, got {length}")
    norm = (2.0 / length) ** 2
    w = np.pi / length

    def integrand(x: float) -> float:
        return norm * np.sin(i * w * x) * np.sin(j * w * x) * np.sin(k * w * x) * np.sin(l * w * x)

    value, abserr = quad(integrand, 0.0, length, epsabs=1e-13, epsrel=1e-13, limit=800)
    if abserr > 1e-12:
        raise ConvergenceError(
            f"quadrature error estimate {abserr:.2e} exceeds 1e-12", residual=abserr
        )
    return value
