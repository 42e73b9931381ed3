"""Conserved-state layout, parameters, grid, and the energy potential.

The model transports a gas density rho, a momentum density m, and a
vector field J whose curl the exact dynamics preserve.  Four discrete
formulations share this layout:

    Original        [rho, m1, m2, m3, J1, J2, J3]
    GodunovPowell   same 7 components, extra momentum production
    GLM             + [psi1, psi2, psi3, phi] cleaning fields (11 total)
    CurlFree        [rho, m1, m2, m3] collocated, J held on cell vertices

Total energy density in conserved variables,

    calE(rho, m, J) = |m|^2/(2 rho) + k0 rho^gamma/(gamma - 1)
                      + rho c0^2 |J|^2 / 2,

generates the pressure p = k0 rho^gamma and the dual variables
(r, v, eta) = (calE_rho, calE_m, calE_J).  calE is strictly convex, and
the dual map is invertible, exactly where convexity_margin() is
positive; the solvers and samplers treat that margin as the
admissibility predicate.

Fields are stored cell-centered as (nx + 2g, ny + 2g, ncomp) float64
arrays with g rings of periodic ghost cells; the trailing axis is the
component index (RHO, MX, ... constants below).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "PositivityError",
    "ConstraintError",
    "Formulation",
    "ModelParams",
    "Grid2D",
    "RHO", "MX", "MY", "MZ", "JX", "JY", "JZ", "PSIX", "PSIY", "PSIZ", "PHI",
    "allocate_state", "interior", "fill_ghosts", "split_state", "StateView",
    "velocity", "pressure", "sound_speed", "total_energy",
    "dual_variables", "legendre_transform", "legendre_from_dual",
    "invert_dual", "convexity_margin",
]

# component indices into the trailing state axis
RHO = 0
MX, MY, MZ = 1, 2, 3
JX, JY, JZ = 4, 5, 6
PSIX, PSIY, PSIZ = 7, 8, 9
PHI = 10


class PositivityError(ValueError):
    """Density left the positive domain (state evaluation or solver stage)."""


class ConstraintError(ValueError):
    """A structural precondition failed (nonzero initial discrete curl)."""


class Formulation(enum.Enum):
    """The four ways of discretizing the same model."""

    ORIGINAL = "Original"
    GODUNOV_POWELL = "GodunovPowell"
    GLM = "GLM"
    CURL_FREE = "CurlFree"

    @property
    def ncomp(self) -> int:
        """Number of collocated (cell-centered) components."""
        return _NCOMP[self]

    @property
    def has_cleaning(self) -> bool:
        return self is Formulation.GLM


_NCOMP = {
    Formulation.ORIGINAL: 7,
    Formulation.GODUNOV_POWELL: 7,
    Formulation.GLM: 11,
    Formulation.CURL_FREE: 4,
}


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical parameters shared by all formulations.

    Parameters
    ----------
    c0 : float
        Coupling speed scale of the J field in the energy.
    k0, gamma : float
        Polytropic equation of state p = k0 rho**gamma, gamma > 1.
    a_c, a_d : float
        Cleaning wave speeds (GLM only; ignored by the dynamics of the
        other formulations).  a_d defaults to a_c.
    eps_c, eps_d : float
        Cleaning damping rates; both default to 0.1 * a_c.
    cfl : float
        Courant number for the time-step bound.
    """

    c0: float = 1.0
    k0: float = 1.0
    gamma: float = 2.0
    a_c: float = 5.0
    a_d: float | None = None
    eps_c: float | None = None
    eps_d: float | None = None
    cfl: float = 0.45

    def __post_init__(self):
        if self.a_d is None:
            object.__setattr__(self, "a_d", float(self.a_c))
        if self.eps_c is None:
            object.__setattr__(self, "eps_c", 0.1 * float(self.a_c))
        if self.eps_d is None:
            object.__setattr__(self, "eps_d", 0.1 * float(self.a_c))
        for key in ("c0", "k0", "a_c", "a_d"):
            if not getattr(self, key) > 0.0:
                raise ValueError(f"{key} must be strictly positive, got {getattr(self, key)}")
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        for key in ("eps_c", "eps_d"):
            if getattr(self, key) < 0.0:
                raise ValueError(f"{key} must be nonnegative, got {getattr(self, key)}")
        if not 0.0 < self.cfl < 1.0:
            raise ValueError(f"cfl must lie in (0, 1), got {self.cfl}")


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid on [x0, x0 + nx dx) x [y0, y0 + ny dy).

    Cell (p, q) is centered at (x0 + (p + 1/2) dx, y0 + (q + 1/2) dy);
    vertex (a, b) of the staggered layout sits at (x0 + a dx, y0 + b dy)
    with a = 0..nx, b = 0..ny, and the a = 0 / a = nx rows identified by
    periodicity (likewise in y).
    """

    nx: int
    ny: int
    dx: float
    dy: float
    x0: float = 0.0
    y0: float = 0.0
    ghost: int = 2

    def __post_init__(self):
        for key in ("nx", "ny"):
            n = getattr(self, key)
            if not isinstance(n, (int, np.integer)) or n < 4:
                raise ValueError(f"{key} must be an integer >= 4, got {n!r}")
        for key in ("dx", "dy"):
            if not getattr(self, key) > 0.0:
                raise ValueError(f"{key} must be strictly positive")
        if not isinstance(self.ghost, (int, np.integer)) or self.ghost < 1:
            raise ValueError(f"ghost must be an integer >= 1, got {self.ghost!r}")

    @classmethod
    def unit_square(cls, nx: int, ny: int, ghost: int = 2) -> "Grid2D":
        return cls(nx, ny, 1.0 / nx, 1.0 / ny, ghost=ghost)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def xc(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def yc(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of interior cell centers, index order (x, y)."""
        return np.meshgrid(self.xc(), self.yc(), indexing="ij")

    def xv(self) -> np.ndarray:
        return self.x0 + np.arange(self.nx + 1) * self.dx

    def yv(self) -> np.ndarray:
        return self.y0 + np.arange(self.ny + 1) * self.dy

    def vertices(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid of vertex positions including the periodic closure row."""
        return np.meshgrid(self.xv(), self.yv(), indexing="ij")


def allocate_state(grid: Grid2D, formulation: Formulation) -> np.ndarray:
    """Zero-filled cell state array with ghost rings, (nx+2g, ny+2g, ncomp)."""
    g = grid.ghost
    return np.zeros((grid.nx + 2 * g, grid.ny + 2 * g, formulation.ncomp))


def interior(q: np.ndarray, grid: Grid2D) -> np.ndarray:
    """View of the interior cells (ghost rings stripped)."""
    g = grid.ghost
    return q[g:g + grid.nx, g:g + grid.ny, ...]


def fill_ghosts(q: np.ndarray, grid: Grid2D) -> None:
    """Fill ghost rings in place by periodic wrap (corners included)."""
    g, nx, ny = grid.ghost, grid.nx, grid.ny
    q[:g] = q[nx:nx + g]
    q[nx + g:] = q[g:2 * g]
    q[:, :g] = q[:, ny:ny + g]
    q[:, ny + g:] = q[:, g:2 * g]


class StateView(NamedTuple):
    """Unpacked component views of a collocated state array."""

    rho: np.ndarray
    m: np.ndarray
    J: np.ndarray | None
    psi: np.ndarray | None
    phi: np.ndarray | None


def split_state(q: np.ndarray, formulation: Formulation) -> StateView:
    """Views (no copies) of the component blocks of ``q``."""
    if q.shape[-1] != formulation.ncomp:
        raise ValueError(
            f"state has {q.shape[-1]} components, "
            f"{formulation.value} expects {formulation.ncomp}")
    rho = q[..., RHO]
    m = q[..., MX:MZ + 1]
    J = q[..., JX:JZ + 1] if formulation.ncomp >= 7 else None
    psi = q[..., PSIX:PSIZ + 1] if formulation.ncomp == 11 else None
    phi = q[..., PHI] if formulation.ncomp == 11 else None
    return StateView(rho, m, J, psi, phi)


def _sq(vec: np.ndarray) -> np.ndarray:
    """Squared Euclidean norm along the trailing (component) axis."""
    return np.sum(vec * vec, axis=-1)


def _check_rho(rho) -> None:
    if np.any(np.asarray(rho) <= 0.0):
        raise PositivityError("non-positive density")


def velocity(rho: np.ndarray, m: np.ndarray) -> np.ndarray:
    return m / np.asarray(rho)[..., None]


def pressure(rho, params: ModelParams):
    """Polytropic pressure p = k0 rho**gamma (equals rho**2 calE_rho at fixed v, J)."""
    _check_rho(rho)
    return params.k0 * np.asarray(rho) ** params.gamma


def sound_speed(rho, params: ModelParams):
    """Acoustic speed sqrt(dp/drho) = sqrt(gamma k0 rho**(gamma-1))."""
    _check_rho(rho)
    return np.sqrt(params.gamma * params.k0 * np.asarray(rho) ** (params.gamma - 1.0))


def total_energy(rho, m, J, params: ModelParams):
    """Total energy density calE in conserved variables.

    Parameters
    ----------
    rho : array_like
        Density, strictly positive.
    m, J : array_like, shape (..., 3)
        Momentum density and constrained vector field.

    Returns
    -------
    ndarray
        |m|^2/(2 rho) + k0 rho^gamma/(gamma-1) + rho c0^2 |J|^2 / 2.
    """
    _check_rho(rho)
    rho = np.asarray(rho)
    internal = params.k0 * rho ** params.gamma / (params.gamma - 1.0)
    return 0.5 * _sq(np.asarray(m)) / rho + internal + 0.5 * params.c0 ** 2 * rho * _sq(np.asarray(J))


def dual_variables(rho, m, J, params: ModelParams):
    """Gradient of calE with respect to (rho, m, J).

    Returns
    -------
    r : ndarray
        calE_rho = -|v|^2/2 + gamma k0 rho^(gamma-1)/(gamma-1) + c0^2 |J|^2/2.
    v : ndarray, shape (..., 3)
        calE_m = m / rho.
    eta : ndarray, shape (..., 3)
        calE_J = rho c0^2 J.
    """
    _check_rho(rho)
    rho = np.asarray(rho)
    m = np.asarray(m)
    J = np.asarray(J)
    v = velocity(rho, m)
    r = (-0.5 * _sq(v)
         + params.gamma * params.k0 * rho ** (params.gamma - 1.0) / (params.gamma - 1.0)
         + 0.5 * params.c0 ** 2 * _sq(J))
    eta = params.c0 ** 2 * rho[..., None] * J
    return r, v, eta


def legendre_transform(rho, m, J, params: ModelParams):
    """Legendre transform L = rho r + m.v + J.eta - calE.

    Evaluated literally from the dual variables; algebraically this
    collapses to k0 rho^gamma + rho c0^2 |J|^2, and to the pressure when
    J vanishes.
    """
    rho = np.asarray(rho)
    m = np.asarray(m)
    J = np.asarray(J)
    r, v, eta = dual_variables(rho, m, J, params)
    return (rho * r + np.sum(m * v, axis=-1) + np.sum(J * eta, axis=-1)
            - total_energy(rho, m, J, params))


def convexity_margin(rho, J, params: ModelParams):
    """Convexity / admissibility margin of calE at (rho, J).

    The Hessian of calE in (rho, m, J) is positive definite iff this is
    strictly positive; it equals rho times the Schur complement of the
    (m, J) block:

        margin = gamma k0 rho^(gamma-1) - c0^2 |J|^2.
    """
    _check_rho(rho)
    rho = np.asarray(rho)
    return (params.gamma * params.k0 * rho ** (params.gamma - 1.0)
            - params.c0 ** 2 * _sq(np.asarray(J)))


def _rho_from_dual(rv: float, e2: float, params: ModelParams) -> float:
    """Solve A rho^(gamma-1) + e2 / rho^2 = rv on the convex branch.

    rv = r + |v|^2/2 and e2 = |eta|^2 / (2 c0^2); the left side is the
    rho-gradient relation of the dual map.  Its derivative equals the
    convexity margin over rho, so restricting to the increasing branch
    picks the unique admissible root.
    """
    A = params.gamma * params.k0 / (params.gamma - 1.0)

    def g(rho):
        return A * rho ** (params.gamma - 1.0) + e2 / rho ** 2 - rv

    if e2 == 0.0:
        if rv <= 0.0:
            raise ValueError("dual state has no positive-density preimage")
        return (rv / A) ** (1.0 / (params.gamma - 1.0))
    # g attains its minimum where the margin vanishes; a root on the
    # increasing branch exists only if the minimum dips below zero
    rho_lo = (2.0 * e2 / (params.gamma * params.k0)) ** (1.0 / (params.gamma + 1.0))
    if g(rho_lo) > 0.0:
        raise ValueError("dual state has no admissible preimage")
    rho_hi = 2.0 * rho_lo
    while g(rho_hi) <= 0.0:
        rho_hi *= 2.0
        if rho_hi > 1e12 * rho_lo:
            raise ValueError("dual inversion bracket failed to close")
    return brentq(g, rho_lo, rho_hi, xtol=1e-30, rtol=1e-14, maxiter=200)


def invert_dual(r, v, eta, params: ModelParams):
    """Invert the dual map: recover (rho, m, J) from (r, v, eta).

    Inputs broadcast; the density root is solved per sample on the
    convex branch (brentq), so only admissible duals are representable.

    Raises
    ------
    ValueError
        If some sample has no admissible preimage.
    """
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    eta = np.asarray(eta, dtype=float)
    rv = r + 0.5 * _sq(v)
    e2 = _sq(eta) / (2.0 * params.c0 ** 2)
    rv_flat = np.atleast_1d(rv).ravel()
    e2_flat = np.atleast_1d(e2).ravel()
    rho_flat = np.empty_like(rv_flat)
    for i in range(rv_flat.size):
        rho_flat[i] = _rho_from_dual(rv_flat[i], e2_flat[i], params)
    rho = rho_flat.reshape(np.shape(rv)) if np.ndim(rv) else rho_flat[0]
    m = np.asarray(rho)[..., None] * v
    J = eta / (params.c0 ** 2 * np.asarray(rho)[..., None])
    return rho, m, J


def legendre_from_dual(r, v, eta, params: ModelParams):
    """L as a function of the dual variables (its gradient is (rho, m, J))."""
    rho, _, J = invert_dual(r, v, eta, params)
    return params.k0 * np.asarray(rho) ** params.gamma \
        + np.asarray(rho) * params.c0 ** 2 * _sq(np.asarray(J))
