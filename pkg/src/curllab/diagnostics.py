"""Curl-error norms, conserved totals, initial conditions, recording.

All norms are volume-weighted over the interior cells: L1 sums
|curl| dA, L2 is the root of the squared sum times dA, Linf is the
plain maximum.  For collocated states the curl is the full 3-vector by
periodic central differences (in-plane components from J3, out-of-plane
from J1, J2); the staggered field has J3 = 0, so only the trapezoidal
vertex curl contributes.

The energy total is the gas + field energy of the state; the GLM
cleaning fields are transport variables and are not folded in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Formulation,
    Grid2D,
    ModelParams,
    allocate_state,
    fill_ghosts,
    interior,
    total_energy,
)
from .curlfree import StaggeredJ, corner_gradient, discrete_curl, vertex_to_center

__all__ = [
    "DiagnosticsRecord",
    "Recorder",
    "collocated_curl",
    "collocated_curl_error",
    "staggered_curl_error",
    "divpsi_l2",
    "conserved_totals",
    "staggered_totals",
    "time_average",
    "standard_vortex_ic",
    "density_wave_ic",
    "smooth_field_ic",
    "INITIAL_CONDITIONS",
]


def _central(arr: np.ndarray, axis: int, dd: float) -> np.ndarray:
    return (np.roll(arr, -1, axis=axis) - np.roll(arr, 1, axis=axis)) / (2.0 * dd)


def _norms(mag: np.ndarray, grid: Grid2D) -> tuple[float, float, float]:
    dA = grid.cell_area
    return (float(np.sum(mag) * dA),
            float(np.sqrt(np.sum(mag * mag) * dA)),
            float(np.max(mag)))


def collocated_curl(q: np.ndarray, grid: Grid2D) -> np.ndarray:
    """Central-difference curl of the cell-centered J, shape (nx, ny, 3)."""
    J = interior(q, grid)[..., 4:7]
    out = np.empty(J.shape)
    out[..., 0] = _central(J[..., 2], 1, grid.dy)
    out[..., 1] = -_central(J[..., 2], 0, grid.dx)
    out[..., 2] = _central(J[..., 1], 0, grid.dx) - _central(J[..., 0], 1, grid.dy)
    return out


def collocated_curl_error(q: np.ndarray, grid: Grid2D):
    """(L1, L2, Linf) of the pointwise curl magnitude of a collocated state."""
    curl = collocated_curl(q, grid)
    return _norms(np.sqrt(np.sum(curl * curl, axis=-1)), grid)


def staggered_curl_error(J: StaggeredJ, grid: Grid2D):
    """(L1, L2, Linf) of the trapezoidal vertex curl (J3 is identically 0)."""
    return _norms(np.abs(discrete_curl(J, grid)), grid)


def divpsi_l2(q: np.ndarray, grid: Grid2D) -> float:
    """L2 norm of the central-difference divergence of the cleaning field."""
    psi = interior(q, grid)[..., 7:10]
    div = _central(psi[..., 0], 0, grid.dx) + _central(psi[..., 1], 1, grid.dy)
    return float(np.sqrt(np.sum(div * div) * grid.cell_area))


def conserved_totals(q: np.ndarray, grid: Grid2D, params: ModelParams):
    """(mass, momentum[3], energy) integrals of a collocated state."""
    qi = interior(q, grid)
    dA = grid.cell_area
    mass = float(np.sum(qi[..., 0]) * dA)
    mom = np.sum(qi[..., 1:4], axis=(0, 1)) * dA
    if qi.shape[-1] >= 7:
        J = qi[..., 4:7]
    else:
        J = np.zeros(qi.shape[:-1] + (3,))
    energy = float(np.sum(total_energy(qi[..., 0], qi[..., 1:4], J, params)) * dA)
    return mass, mom, energy


def staggered_totals(q4: np.ndarray, J: StaggeredJ, grid: Grid2D, params: ModelParams):
    """Totals for the staggered scheme; J is averaged to centers for energy."""
    qi = interior(q4, grid)
    dA = grid.cell_area
    mass = float(np.sum(qi[..., 0]) * dA)
    mom = np.sum(qi[..., 1:4], axis=(0, 1)) * dA
    Jc = np.zeros(qi.shape[:-1] + (3,))
    Jc[..., :2] = vertex_to_center(J)
    energy = float(np.sum(total_energy(qi[..., 0], qi[..., 1:4], Jc, params)) * dA)
    return mass, mom, energy


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One sampling instant of the error and conservation monitors."""

    t: float
    curl_l1: float
    curl_l2: float
    curl_linf: float
    divpsi_l2: float | None
    mass: float
    momentum: tuple[float, float, float]
    energy: float


@dataclass
class Recorder:
    """Collects records at strictly increasing times for one run."""

    grid: Grid2D
    params: ModelParams
    formulation: Formulation
    records: list[DiagnosticsRecord] = field(default_factory=list)

    def _check_time(self, t: float) -> None:
        if self.records and t <= self.records[-1].t:
            raise ValueError(
                f"record times must increase: got {t} after {self.records[-1].t}")

    def record_collocated(self, t: float, q: np.ndarray) -> None:
        self._check_time(t)
        l1, l2, linf = collocated_curl_error(q, self.grid)
        dpsi = divpsi_l2(q, self.grid) if self.formulation.has_cleaning else None
        mass, mom, energy = conserved_totals(q, self.grid, self.params)
        self.records.append(DiagnosticsRecord(
            t, l1, l2, linf, dpsi, mass, tuple(mom), energy))

    def record_staggered(self, t: float, q4: np.ndarray, J: StaggeredJ) -> None:
        self._check_time(t)
        l1, l2, linf = staggered_curl_error(J, self.grid)
        mass, mom, energy = staggered_totals(q4, J, self.grid, self.params)
        self.records.append(DiagnosticsRecord(
            t, l1, l2, linf, None, mass, tuple(mom), energy))

    def __len__(self) -> int:
        return len(self.records)


def time_average(records, attr: str = "curl_l2") -> float:
    """Trapezoidal time average of one record field over the sampled span."""
    if len(records) < 2:
        raise ValueError("time average needs at least two records")
    t = np.array([r.t for r in records])
    y = np.array([getattr(r, attr) for r in records])
    return float(np.trapezoid(y, t) / (t[-1] - t[0]))


def _gas_vortex(grid: Grid2D):
    X, Y = grid.centers()
    r2 = (X - 0.5) ** 2 + (Y - 0.5) ** 2
    rho = 1.0 + 0.1 * np.exp(-50.0 * r2)
    v1 = -0.1 * (Y - 0.5)
    v2 = 0.1 * (X - 0.5)
    return rho, v1, v2


def _potential(grid: Grid2D):
    X, Y = grid.centers()
    return 0.1 * np.sin(2.0 * np.pi * X) * np.sin(2.0 * np.pi * Y)


def _grad_potential(grid: Grid2D):
    X, Y = grid.centers()
    c = 0.2 * np.pi
    return (c * np.cos(2.0 * np.pi * X) * np.sin(2.0 * np.pi * Y),
            c * np.sin(2.0 * np.pi * X) * np.cos(2.0 * np.pi * Y))


def standard_vortex_ic(grid: Grid2D, params: ModelParams, formulation: Formulation):
    """Gaussian density bump, rigid rotation, and a curl-free J = grad theta.

    Defined on the unit periodic square; the velocity field is sampled
    raw, so it jumps at the periodic seam (deliberately: the seam feeds
    curl errors to the formulations that can produce them).

    Returns the ghost-filled state array, or (q4, StaggeredJ) for the
    staggered formulation where J is the corner gradient of the sampled
    potential (exactly zero discrete curl).
    """
    rho, v1, v2 = _gas_vortex(grid)
    if formulation is Formulation.CURL_FREE:
        q4 = allocate_state(grid, formulation)
        qi = interior(q4, grid)
        qi[..., 0] = rho
        qi[..., 1] = rho * v1
        qi[..., 2] = rho * v2
        fill_ghosts(q4, grid)
        return q4, corner_gradient(_potential(grid), grid)
    q = allocate_state(grid, formulation)
    qi = interior(q, grid)
    qi[..., 0] = rho
    qi[..., 1] = rho * v1
    qi[..., 2] = rho * v2
    j1, j2 = _grad_potential(grid)
    qi[..., 4] = j1
    qi[..., 5] = j2
    fill_ghosts(q, grid)
    return q


def density_wave_ic(grid: Grid2D, params: ModelParams, formulation: Formulation):
    """1D smooth density wave with uniform drift and J = 0.

    rho = 1 + 0.2 sin(2 pi x), v = (0.1, 0, 0); carries nonzero net
    momentum, so relative momentum drift is well defined.
    """
    X, _ = grid.centers()
    rho = 1.0 + 0.2 * np.sin(2.0 * np.pi * X)
    if formulation is Formulation.CURL_FREE:
        q4 = allocate_state(grid, formulation)
        qi = interior(q4, grid)
        qi[..., 0] = rho
        qi[..., 1] = 0.1 * rho
        fill_ghosts(q4, grid)
        return q4, StaggeredJ.zeros(grid)
    q = allocate_state(grid, formulation)
    qi = interior(q, grid)
    qi[..., 0] = rho
    qi[..., 1] = 0.1 * rho
    fill_ghosts(q, grid)
    return q


def smooth_field_ic(grid: Grid2D, params: ModelParams, formulation: Formulation):
    """Fully smooth periodic data: no seam jumps, curl-free J.

    Used where truncation-order statements need smoothness (energy
    drift, the Original-versus-GodunovPowell gap).
    """
    X, Y = grid.centers()
    rho = 1.0 + 0.1 * np.sin(2.0 * np.pi * X) * np.sin(2.0 * np.pi * Y)
    v1 = 0.05 * np.sin(2.0 * np.pi * Y)
    v2 = 0.05 * np.sin(2.0 * np.pi * X)
    if formulation is Formulation.CURL_FREE:
        q4 = allocate_state(grid, formulation)
        qi = interior(q4, grid)
        qi[..., 0] = rho
        qi[..., 1] = rho * v1
        qi[..., 2] = rho * v2
        fill_ghosts(q4, grid)
        return q4, corner_gradient(_potential(grid), grid)
    q = allocate_state(grid, formulation)
    qi = interior(q, grid)
    qi[..., 0] = rho
    qi[..., 1] = rho * v1
    qi[..., 2] = rho * v2
    j1, j2 = _grad_potential(grid)
    qi[..., 4] = j1
    qi[..., 5] = j2
    fill_ghosts(q, grid)
    return q


INITIAL_CONDITIONS = {
    "vortex": standard_vortex_ic,
    "density_wave": density_wave_ic,
    "smooth": smooth_field_ic,
}
