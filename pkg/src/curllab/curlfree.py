"""Exactly curl-free staggered solver.

The gas block [rho, m] lives at cell centers and is advanced by the same
Rusanov sweep as the other formulations (J enters it through a
four-corner average).  J itself lives on cell vertices, carries only the
in-plane components (the out-of-plane one is identically zero), and is
only ever updated by the corner gradient of a scalar potential
phi = v . J.  The trapezoidal discrete curl of a corner gradient
telescopes to zero exactly, so zero initial discrete curl is preserved
to rounding for arbitrarily many steps.

Vertex arrays have shape (nx+1, ny+1) with the periodic closure stored
explicitly: row nx repeats row 0 and column ny repeats column 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    ConstraintError,
    Formulation,
    Grid2D,
    ModelParams,
    PositivityError,
    RHO,
    fill_ghosts,
    interior,
)
from .fv_solver import SolverConfig
from .models import PDESystem, original_system

__all__ = [
    "StaggeredJ",
    "discrete_curl",
    "corner_gradient",
    "vertex_to_center",
    "curlfree_step",
    "run_curlfree",
]


@dataclass
class StaggeredJ:
    """In-plane vertex field (j1, j2), shape (nx+1, ny+1), closed periodically."""

    j1: np.ndarray
    j2: np.ndarray

    def __post_init__(self):
        for arr in (self.j1, self.j2):
            if arr.ndim != 2 or arr.shape != self.j1.shape:
                raise ValueError("staggered components must share a 2D shape")
        if self.j1.shape[0] < 5 or self.j1.shape[1] < 5:
            raise ValueError("staggered field needs at least (nx+1, ny+1) = (5, 5)")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "StaggeredJ":
        shape = (grid.nx + 1, grid.ny + 1)
        return cls(np.zeros(shape), np.zeros(shape))

    def copy(self) -> "StaggeredJ":
        return StaggeredJ(self.j1.copy(), self.j2.copy())

    def closure_error(self) -> float:
        """Largest mismatch between the duplicated periodic rows/columns."""
        return max(
            float(np.max(np.abs(self.j1[0, :] - self.j1[-1, :]))),
            float(np.max(np.abs(self.j1[:, 0] - self.j1[:, -1]))),
            float(np.max(np.abs(self.j2[0, :] - self.j2[-1, :]))),
            float(np.max(np.abs(self.j2[:, 0] - self.j2[:, -1]))),
        )

    def check_closed(self) -> None:
        if self.closure_error() != 0.0:
            raise ValueError("staggered field periodic closure rows differ")

    def magnitude_inf(self) -> float:
        return max(float(np.max(np.abs(self.j1))), float(np.max(np.abs(self.j2))))


def _close(arr: np.ndarray) -> np.ndarray:
    """Append the periodic closure row and column to an (nx, ny) vertex core."""
    full = np.empty((arr.shape[0] + 1, arr.shape[1] + 1))
    full[:-1, :-1] = arr
    full[-1, :-1] = arr[0, :]
    full[:, -1] = full[:, 0]
    return full


def discrete_curl(J: StaggeredJ, grid: Grid2D) -> np.ndarray:
    """Trapezoidal vertex-to-cell curl, shape (nx, ny).

    Averages each difference of the transverse component over the two
    parallel cell edges; this is the unique pairing for which the curl
    of :func:`corner_gradient` cancels identically.
    """
    j1, j2 = J.j1, J.j2
    d2 = (j2[1:, 1:] + j2[1:, :-1] - j2[:-1, 1:] - j2[:-1, :-1]) / (2.0 * grid.dx)
    d1 = (j1[1:, 1:] + j1[:-1, 1:] - j1[1:, :-1] - j1[:-1, :-1]) / (2.0 * grid.dy)
    return d2 - d1


def corner_gradient(phi: np.ndarray, grid: Grid2D) -> StaggeredJ:
    """Cell-to-vertex gradient adjoint to the trapezoidal curl.

    phi holds interior cell values, shape (nx, ny); each vertex averages
    the two cell differences straddling it.  The result is returned with
    its periodic closure row/column filled.
    """
    if phi.shape != (grid.nx, grid.ny):
        raise ValueError(f"potential must have shape {(grid.nx, grid.ny)}, "
                         f"got {phi.shape}")
    phi_m0 = np.roll(phi, 1, axis=0)
    phi_0m = np.roll(phi, 1, axis=1)
    phi_mm = np.roll(phi_m0, 1, axis=1)
    g1 = (phi + phi_0m - phi_m0 - phi_mm) / (2.0 * grid.dx)
    g2 = (phi + phi_m0 - phi_0m - phi_mm) / (2.0 * grid.dy)
    return StaggeredJ(_close(g1), _close(g2))


def vertex_to_center(J: StaggeredJ) -> np.ndarray:
    """Four-corner average onto cell centers, shape (nx, ny, 2)."""
    out = np.empty((J.j1.shape[0] - 1, J.j1.shape[1] - 1, 2))
    for k, comp in enumerate((J.j1, J.j2)):
        out[..., k] = 0.25 * (comp[:-1, :-1] + comp[1:, :-1]
                              + comp[:-1, 1:] + comp[1:, 1:])
    return out


def _assemble_collocated(q4: np.ndarray, J: StaggeredJ, grid: Grid2D) -> np.ndarray:
    """Embed [rho, m] and center-averaged J into a 7-component state."""
    q7 = np.zeros(q4.shape[:2] + (7,))
    q7[..., :4] = q4
    interior(q7, grid)[..., 4:6] = vertex_to_center(J)
    fill_ghosts(q7, grid)
    return q7


def _stage(q4, J, system, grid, dt, muscl, backend):
    q7 = _assemble_collocated(q4, J, grid)
    rhs = backend.collocated_rhs(system, q7, grid, muscl)
    out4 = q4.copy()
    interior(out4, grid)[:] += dt * rhs[..., :4]
    if np.any(interior(out4, grid)[..., RHO] <= 0.0):
        raise PositivityError("non-positive density after update stage")
    fill_ghosts(out4, grid)
    # potential from the updated velocity and the stage-input center J
    qi = interior(out4, grid)
    Jc = interior(q7, grid)[..., 4:6]
    phi = (qi[..., 1] * Jc[..., 0] + qi[..., 2] * Jc[..., 1]) / qi[..., 0]
    grad = corner_gradient(phi, grid)
    outJ = StaggeredJ(J.j1 - dt * grad.j1, J.j2 - dt * grad.j2)
    return out4, outJ


def compute_dt_curlfree(q4, J, system: PDESystem, grid: Grid2D, cfl: float) -> float:
    """CFL step from the assembled collocated state."""
    q7 = _assemble_collocated(q4, J, grid)
    smax = float(np.max(system.max_signal_speed(interior(q7, grid))))
    return cfl * min(grid.dx, grid.dy) / smax


def curlfree_step(q4: np.ndarray, J: StaggeredJ, grid: Grid2D,
                  params: ModelParams, config: SolverConfig,
                  dt: float | None = None):
    """One SSP-RK2 step of the staggered scheme.

    Returns (q4_new, J_new, dt); inputs are not modified.  Both stages
    move J by a corner gradient only, and the final convex combination
    preserves the kernel of the discrete curl, so zero discrete curl is
    invariant to rounding.
    """
    system = original_system(params)
    return _step_impl(q4, J, system, grid, config, dt)


def _step_impl(q4, J, system, grid, config, dt=None):
    backend = _kernels.get_backend()
    muscl = config.reconstruction == "muscl"
    if dt is None:
        dt = compute_dt_curlfree(q4, J, system, grid, config.cfl)
    if not np.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"invalid time step {dt}")
    a4, aJ = _stage(q4, J, system, grid, dt, muscl, backend)
    b4, bJ = _stage(a4, aJ, system, grid, dt, muscl, backend)
    out4 = q4.copy()
    interior(out4, grid)[:] = 0.5 * (interior(q4, grid) + interior(b4, grid))
    fill_ghosts(out4, grid)
    outJ = StaggeredJ(0.5 * (J.j1 + bJ.j1), 0.5 * (J.j2 + bJ.j2))
    return out4, outJ, dt


def run_curlfree(q4, J: StaggeredJ, grid: Grid2D, params: ModelParams,
                 config: SolverConfig, on_record=None, stop_times=(), on_stop=None):
    """Advance the staggered scheme to t_end; same driver contract as run().

    Raises
    ------
    ConstraintError
        If the initial discrete curl is not zero at rounding level.
    """
    J.check_closed()
    scale = max(1.0, J.magnitude_inf() / min(grid.dx, grid.dy))
    curl0 = float(np.max(np.abs(discrete_curl(J, grid))))
    if curl0 > 1e-10 * scale:
        raise ConstraintError(
            f"initial discrete curl {curl0:.3e} is not zero at rounding level; "
            "initialize J from corner_gradient of a potential")
    system = original_system(params)
    q = q4.copy()
    fill_ghosts(q, grid)
    Jw = J.copy()
    t = 0.0
    if on_record is not None:
        on_record(t, q, Jw)
    if config.t_end == 0.0:
        return q, Jw, t, 0
    targets = sorted({float(s) for s in stop_times if 0.0 < s < config.t_end})
    targets.append(config.t_end)
    nsteps = 0
    last_recorded = 0
    for target in targets:
        while t < target:
            dt_full = compute_dt_curlfree(q, Jw, system, grid, config.cfl)
            if dt_full < 1e-14 * config.t_end:
                raise ValueError(f"time step underflow: dt = {dt_full}")
            remaining = target - t
            if dt_full >= remaining:
                dt_use, t_next = remaining, target
            elif dt_full >= 0.5 * remaining:
                dt_use, t_next = 0.5 * remaining, t + 0.5 * remaining
            else:
                dt_use, t_next = dt_full, t + dt_full
            q, Jw, _ = _step_impl(q, Jw, system, grid, config, dt_use)
            t = t_next
            nsteps += 1
            if on_record is not None and nsteps % config.record_every == 0:
                on_record(t, q, Jw)
                last_recorded = nsteps
        if on_stop is not None and target != config.t_end:
            on_stop(t, q, Jw)
    if on_record is not None and last_recorded != nsteps:
        on_record(t, q, Jw)
    return q, Jw, t, nsteps
