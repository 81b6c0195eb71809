"""Exterior sound-soft / sound-hard Helmholtz problems by combined-field BIEs.

Public quantities use the incident wave ``exp(-i*lam*omega.x)``. Internally
that is a standard plane wave ``exp(i*lam*d.x)`` with ``d = -omega``, so the
amplitude returned for observation ``theta`` and incidence ``omega`` is the
standard far-field pattern ``u_inf(theta; d=-omega)`` normalized such that
``u_s(x) = A * exp(i lam |x|) / |x| + O(|x|**-2)``.

Dirichlet uses the Brakhage-Werner ansatz

    u_s = (D - i eta S) phi,   (1/2 + D - i eta S) phi = -u_inc,

with ``eta = lam``. Neumann uses the direct Burton-Miller equation for the
total field ``u`` on the boundary,

    (1/2 - D + beta T) u = u_inc - beta d_n u_inc,   beta = i / lam,

where the hypersingular operator ``T`` is applied through the Maue identity

    T phi = Div (n x S[grad phi x n]) + lam**2 n . S[n phi].
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

from ..errors import InvalidArgument, SolverFailure
from ..geometry import RadialShape, surface_frames
from ..mathcore import FOUR_PI, SphereGrid
from .nystrom import Discretization, _cmatmul, _rcmatmul

log = logging.getLogger(__name__)

RCOND_MIN = 1e-11


class BoundaryCondition(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @classmethod
    def parse(cls, value) -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgument(f"unknown boundary condition {value!r}") from None


def _unit(v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != 3 or not np.all(np.isfinite(v)):
        raise InvalidArgument(f"{what} must be a finite 3-vector")
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise InvalidArgument(f"{what} {v} is not a unit vector")
    return v


def _check_wavenumber(lam) -> float:
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0.0):
        raise InvalidArgument(f"wavenumber must be positive, got {lam}")
    return lam


def recommended_order(shape: RadialShape, wavenumber: float) -> int:
    """Grid order below which a warning is logged: ``2 ceil(lam max r) + 8``."""
    from ..mathcore import cached_grid

    rmax = float(shape.radius(cached_grid(shape.validation_order).nodes).max())
    return 2 * math.ceil(wavenumber * rmax) + 8


@dataclass(frozen=True, eq=False)
class ScatterProblem:
    shape: RadialShape
    wavenumber: float
    boundary_condition: BoundaryCondition
    incident_direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "wavenumber", _check_wavenumber(self.wavenumber))
        object.__setattr__(self, "boundary_condition", BoundaryCondition.parse(self.boundary_condition))
        object.__setattr__(self, "incident_direction", _unit(self.incident_direction, "incident direction"))


@dataclass(frozen=True, eq=False)
class BoundaryDensity:
    """Boundary unknown at the grid nodes.

    For Dirichlet problems ``values`` is the combined-layer density ``phi``;
    for Neumann problems it is the total field on the boundary.
    """

    values: np.ndarray
    grid: SphereGrid
    wavenumber: float
    boundary_condition: BoundaryCondition
    incident_direction: np.ndarray
    coupling: float = field(default=0.0)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(-1)
        if v.size != self.grid.size:
            raise InvalidArgument(f"density has {v.size} values for a grid of {self.grid.size} nodes")
        if not np.all(np.isfinite(v)):
            raise SolverFailure("non-finite boundary density")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


class ExteriorSolver:
    """Factorized discrete system for one shape, wavenumber and condition.

    Parameters
    ----------
    shape : RadialShape
    wavenumber : float
        ``lam > 0``.
    boundary_condition : BoundaryCondition or str
    grid : SphereGrid
        Nodes carrying the unknowns.
    quad_order : int, optional
        Order of the local singular rule (default: grid order).
    """

    def __init__(self, shape: RadialShape, wavenumber: float, boundary_condition, grid: SphereGrid,
                 quad_order: int | None = None):
        self.shape = shape
        self.wavenumber = kappa = _check_wavenumber(wavenumber)
        self.bc = BoundaryCondition.parse(boundary_condition)
        self.grid = grid
        need = recommended_order(shape, kappa)
        if grid.order < need:
            log.warning("grid order %d below recommended %d for lam=%g", grid.order, need, kappa)
        self.disc = disc = Discretization(shape, grid, quad_order)
        self.frames = disc.frames
        n = disc.size
        if self.bc is BoundaryCondition.DIRICHLET:
            self.coupling = kappa
            rows = disc.layer_rows(kappa, grid.nodes, {"K": (-1j * self.coupling, 1.0)})
            M = rows["K"]
            M[np.diag_indices(n)] += 0.5
        else:
            self.coupling = 1.0 / kappa  # beta = i * coupling
            rows = disc.layer_rows(kappa, grid.nodes, {"S": (1.0, 0.0), "D": (0.0, 1.0)})
            grad = disc.gradient_rows(grid.nodes)
            self._U = self._maue_inner(rows["S"], grad)
            T = self._maue_rows(rows["S"], grad, self.frames.normals)
            del grad
            M = -rows["D"] + 1j * self.coupling * T
            M[np.diag_indices(n)] += 0.5
        self._factorize(M)

    # -- assembly helpers ----------------------------------------------------
    def _maue_inner(self, S: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """``n x S[grad phi x n]`` at the nodes, stacked by component as (3, N, N)."""
        nrm = self.frames.normals
        W = np.cross(grad, nrm[:, :, None], axisa=1, axisb=1, axisc=1)
        V = [_cmatmul(S, np.ascontiguousarray(W[:, e, :])) for e in range(3)]
        return np.stack([nrm[:, (d + 1) % 3, None] * V[(d + 2) % 3]
                         - nrm[:, (d + 2) % 3, None] * V[(d + 1) % 3] for d in range(3)])

    def _maue_rows(self, S_rows: np.ndarray, grad_rows: np.ndarray, normals: np.ndarray) -> np.ndarray:
        kappa = self.wavenumber
        nn = self.frames.normals
        T = np.zeros(S_rows.shape, dtype=complex)
        for d in range(3):
            T += _rcmatmul(np.ascontiguousarray(grad_rows[:, d, :]), self._U[d])
            T += kappa * kappa * normals[:, d, None] * S_rows * nn[None, :, d]
        return T

    def _factorize(self, M: np.ndarray):
        anorm = np.linalg.norm(M, 1)
        try:
            self._lu = sla.lu_factor(M, check_finite=True)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SolverFailure(f"factorization failed: {exc}") from exc
        gecon = sla.get_lapack_funcs("gecon", (self._lu[0],))
        rcond, info = gecon(self._lu[0], anorm, norm="1")
        self.rcond = float(rcond)
        if info != 0 or not self.rcond > RCOND_MIN:
            raise SolverFailure(
                f"discrete system ill-conditioned at lam={self.wavenumber:g} (rcond={self.rcond:.3e})",
                rcond=self.rcond,
            )
        log.debug("lam=%g bc=%s N=%d rcond=%.3e", self.wavenumber, self.bc.value, M.shape[0], self.rcond)

    # -- incident field --------------------------------------------------------
    def incident(self, omegas, points=None, normals=None):
        """Incident field ``exp(-i lam omega.x)`` and its normal derivative.

        Returns arrays of shape (P, D) for ``D`` incidence directions.
        """
        om = np.asarray(omegas, dtype=float).reshape(-1, 3)
        if points is None:
            points, normals = self.frames.points, self.frames.normals
        phase = np.exp(-1j * self.wavenumber * (points @ om.T))
        dn = -1j * self.wavenumber * (normals @ om.T) * phase
        return phase, dn

    # -- solving ---------------------------------------------------------------
    def solve(self, omegas) -> np.ndarray:
        """Boundary unknowns for each incidence direction, shape (N, D)."""
        u, dn = self.incident(omegas)
        if self.bc is BoundaryCondition.DIRICHLET:
            rhs = -u
        else:
            rhs = u - 1j * self.coupling * dn
        return sla.lu_solve(self._lu, rhs)

    def density(self, omega) -> BoundaryDensity:
        om = _unit(omega, "incident direction")
        return BoundaryDensity(self.solve(om)[:, 0], self.grid, self.wavenumber, self.bc, om, self.coupling)

    # -- evaluation ------------------------------------------------------------
    def far_field_rows(self, thetas) -> np.ndarray:
        return far_field_rows(self.shape, self.grid, self.wavenumber, self.bc, self.coupling, thetas)

    def far_field(self, values, thetas) -> np.ndarray:
        """Amplitudes, shape (T, D), for unknowns ``values`` of shape (N, D)."""
        return self.far_field_rows(thetas) @ np.asarray(values).reshape(self.grid.size, -1)

    def scattered_field(self, values, points) -> np.ndarray:
        """Scattered field at exterior points away from the boundary, shape (P, D)."""
        kappa = self.wavenumber
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        diff = self.frames.points[None, :, :] - pts[:, None, :]
        R = np.linalg.norm(diff, axis=-1)
        G = np.exp(1j * kappa * R) / (FOUR_PI * R)
        dG = G * (1j * kappa - 1.0 / R) * np.einsum("psc,sc->ps", diff, self.frames.normals) / R
        K = dG if self.bc is BoundaryCondition.NEUMANN else dG - 1j * self.coupling * G
        K = K * self.disc.quad_weights[None, :]
        return K @ np.asarray(values).reshape(self.grid.size, -1)

    def boundary_residual(self, values, omegas, check_dirs) -> np.ndarray:
        """Relative boundary-condition defect at off-node boundary points.

        Dirichlet: ``|u_inc + u_s|`` with ``u_s`` from the layer jump
        relations. Neumann: ``|d_n u_inc + T u| / lam``. Both incident
        quantities have unit scale, so the defect is already relative.
        Returns shape (C, D).
        """
        dirs = np.asarray(check_dirs, dtype=float).reshape(-1, 3)
        values = np.asarray(values).reshape(self.grid.size, -1)
        f = surface_frames(self.shape, dirs)
        u, dn = self.incident(omegas, f.points, f.normals)
        kappa = self.wavenumber
        if self.bc is BoundaryCondition.DIRICHLET:
            rows = self.disc.layer_rows(kappa, dirs, {"K": (-1j * self.coupling, 1.0)})["K"]
            rows = rows + 0.5 * self.disc.interpolation_rows(dirs)
            return np.abs(u + rows @ values)
        S_rows = self.disc.layer_rows(kappa, dirs, {"S": (1.0, 0.0)})["S"]
        T = self._maue_rows(S_rows, self.disc.gradient_rows(dirs), f.normals)
        return np.abs(dn + T @ values) / kappa


def far_field_rows(shape, grid, wavenumber, bc, coupling, thetas) -> np.ndarray:
    """Rows mapping boundary unknowns to amplitudes in directions ``thetas``."""
    th = np.asarray(thetas, dtype=float).reshape(-1, 3)
    f = surface_frames(shape, grid.nodes)
    qw = grid.weights * f.area_element
    phase = np.exp(-1j * wavenumber * (th @ f.points.T))
    tn = th @ f.normals.T
    if BoundaryCondition.parse(bc) is BoundaryCondition.DIRICHLET:
        fac = -1j * wavenumber * tn - 1j * coupling
    else:
        fac = -1j * wavenumber * tn
    return fac * phase * qw[None, :] / FOUR_PI


def solve_exterior(problem: ScatterProblem, grid: SphereGrid, quad_order: int | None = None) -> BoundaryDensity:
    solver = ExteriorSolver(problem.shape, problem.wavenumber, problem.boundary_condition, grid, quad_order)
    return solver.density(problem.incident_direction)


def far_field_amplitude(density: BoundaryDensity, shape: RadialShape, theta) -> complex:
    """Amplitude ``A(lam, theta, omega)`` of the incidence stored with ``density``."""
    th = _unit(theta, "observation direction")
    row = far_field_rows(shape, density.grid, density.wavenumber, density.boundary_condition,
                         density.coupling, th)
    return complex(row[0] @ density.values)
