"""Pure numpy implementation of the finite-volume sweeps.

This is the semantic definition of the discretization; the compiled
backend must reproduce it to rounding.  One sweep per direction:
Rusanov face fluxes on (optionally MUSCL-reconstructed) states, the
path-conservative face fluctuation split half to each neighbour, and
for reconstructed data the cell-internal fluctuation that keeps the
nonconservative product consistent.
"""

import numpy as np


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Componentwise minmod limiter."""
    return np.where(a * b > 0.0, np.where(np.abs(a) < np.abs(b), a, b), 0.0)


def collocated_rhs(system, q: np.ndarray, grid, muscl: bool) -> np.ndarray:
    """Spatial RHS -div F - B dq on the interior cells.

    Parameters
    ----------
    system : PDESystem
        Supplies flux, bprod, and the face signal-speed bound.
    q : ndarray, shape (nx+2g, ny+2g, ncomp)
        Ghost-filled state.
    muscl : bool
        Minmod-limited linear reconstruction (needs ghost >= 2).

    Returns
    -------
    ndarray, shape (nx, ny, ncomp)
    """
    g = grid.ghost
    if muscl and g < 2:
        raise ValueError("MUSCL reconstruction needs ghost >= 2")
    rhs = np.zeros((grid.nx, grid.ny, q.shape[-1]))
    for axis in (0, 1):
        n = grid.nx if axis == 0 else grid.ny
        n_t = grid.ny if axis == 0 else grid.nx
        dd = grid.dx if axis == 0 else grid.dy
        qs = np.moveaxis(q, axis, 0)[:, g:g + n_t, :]
        # cells g-1 .. g+n feed the n+1 faces of this direction
        ext = qs[g - 1:g + n + 1]
        if muscl:
            wide = qs[g - 2:g + n + 2]
            slope = minmod(wide[2:] - wide[1:-1], wide[1:-1] - wide[:-2])
            qL = ext[:-1] + 0.5 * slope[:-1]
            qR = ext[1:] - 0.5 * slope[1:]
        else:
            qL = ext[:-1]
            qR = ext[1:]
        FL = system.flux(qL, axis)
        FR = system.flux(qR, axis)
        smax = np.maximum(system.max_signal_speed(qL),
                          system.max_signal_speed(qR))
        jump = qR - qL
        fhat = 0.5 * (FL + FR) - 0.5 * smax[..., None] * jump
        fluct = system.bprod(0.5 * (qL + qR), jump, axis)
        contrib = (fhat[1:] - fhat[:-1] + 0.5 * (fluct[1:] + fluct[:-1])) / dd
        if muscl:
            # consistency of the nonconservative product for reconstructed
            # data: B at the cell value times the in-cell variation
            contrib = contrib + system.bprod(qs[g:g + n], slope[1:-1], axis) / dd
        rhs -= np.moveaxis(contrib, 0, axis)
    return rhs
