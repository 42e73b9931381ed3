"""Shared sampling and finite-difference utilities for the test suite."""

import numpy as np

from curllab.core import ModelParams


def sample_admissible(n, rng, params: ModelParams, rho_range=(0.5, 2.0),
                      vmax=2.0, margin_frac=0.9, jcap=2.0):
    """Random conserved states inside the strict-convexity region.

    rho is uniform in rho_range, |v| <= vmax, and |J| is capped at
    margin_frac times the convexity bound sqrt(gamma k0 rho^(gamma-1))/c0
    (and at jcap), so every sample has a positive convexity margin.

    Returns
    -------
    rho : (n,), m : (n, 3), J : (n, 3)
    """
    rho = rng.uniform(*rho_range, size=n)
    v = rng.uniform(-vmax / np.sqrt(3.0), vmax / np.sqrt(3.0), size=(n, 3))
    jbound = margin_frac * np.sqrt(params.gamma * params.k0
                                   * rho ** (params.gamma - 1.0)) / params.c0
    jbound = np.minimum(jbound, jcap)
    jdir = rng.normal(size=(n, 3))
    jdir /= np.linalg.norm(jdir, axis=1, keepdims=True)
    J = jdir * (rng.uniform(0.0, 1.0, size=n) * jbound)[:, None]
    m = rho[:, None] * v
    return rho, m, J


def fd_gradient(f, x, h=1e-6):
    """Central-difference gradient of scalar f at 1D point x."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        grad[i] = (f(xp) - f(xm)) / (2.0 * step)
    return grad


def fd_hessian(f, x, h=1e-4):
    """Central-difference Hessian of scalar f at 1D point x."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    for i in range(n):
        hi = h * max(1.0, abs(x[i]))
        for j in range(i, n):
            hj = h * max(1.0, abs(x[j]))
            xpp, xpm, xmp, xmm = (x.copy() for _ in range(4))
            xpp[i] += hi; xpp[j] += hj
            xpm[i] += hi; xpm[j] -= hj
            xmp[i] -= hi; xmp[j] += hj
            xmm[i] -= hi; xmm[j] -= hj
            H[i, j] = H[j, i] = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * hi * hj)
    return H


def smooth_state(grid, rng, formulation, rho_amp=0.15, v_amp=0.2, j_amp=0.3,
                 cleaning_amp=0.0):
    """Ghost-filled smooth periodic state, safely inside the admissible set."""
    from curllab.core import allocate_state, fill_ghosts, interior

    q = allocate_state(grid, formulation)
    qi = interior(q, grid)
    qi[..., 0] = 1.0 + rho_amp * random_smooth_field(grid, rng)
    for k in range(1, 4):
        qi[..., k] = qi[..., 0] * v_amp * random_smooth_field(grid, rng)
    if formulation.ncomp >= 7:
        for k in range(4, 7):
            qi[..., k] = j_amp * random_smooth_field(grid, rng)
    if formulation.ncomp == 11 and cleaning_amp:
        for k in range(7, 11):
            qi[..., k] = cleaning_amp * random_smooth_field(grid, rng)
    fill_ghosts(q, grid)
    return q


def random_smooth_field(grid, rng, nmodes=4, amplitude=1.0):
    """Smooth periodic scalar field from a few random Fourier modes, (nx, ny)."""
    X, Y = grid.centers()
    lx = grid.nx * grid.dx
    ly = grid.ny * grid.dy
    field = np.zeros_like(X)
    for _ in range(nmodes):
        kx, ky = rng.integers(1, 4, size=2)
        phix, phiy = rng.uniform(0.0, 2.0 * np.pi, size=2)
        field += rng.normal() * np.sin(2.0 * np.pi * kx * (X - grid.x0) / lx + phix) \
            * np.sin(2.0 * np.pi * ky * (Y - grid.y0) / ly + phiy)
    peak = np.max(np.abs(field))
    if peak > 0:
        field *= amplitude / peak
    return field
