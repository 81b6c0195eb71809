"""Far-field amplitude tables ``A[lam][theta_i][omega_j]`` on product grids."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import IncompleteData, InvalidArgument, ParseError
from ..geometry import RadialShape
from ..mathcore import SphereGrid, cached_grid
from ..textio import format_table, parse_table, require
from .solver import BoundaryCondition, ExteriorSolver

log = logging.getLogger(__name__)

# incident wave exp(-i*lambda*omega.x); scattered wave ~ A exp(i*lambda*r)/r
CONVENTION = "incoming-exp(-i*lambda*omega.x)"


@dataclass(frozen=True, eq=False)
class FarFieldTable:
    """Amplitudes for every (observation, incidence) pair of two grids.

    Attributes
    ----------
    lambdas : ndarray, shape (L,)
    obs_grid, inc_grid : SphereGrid
    amplitudes : complex ndarray, shape (L, N_obs, N_inc)
        ``amplitudes[k, i, j] = A(lambdas[k], obs_node_i, inc_node_j)``.
    bc : BoundaryCondition
    """

    lambdas: np.ndarray
    obs_grid: SphereGrid
    inc_grid: SphereGrid
    amplitudes: np.ndarray
    bc: BoundaryCondition = BoundaryCondition.DIRICHLET

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        amp = np.array(self.amplitudes, dtype=complex)
        expect = (lam.size, self.obs_grid.size, self.inc_grid.size)
        if amp.shape != expect:
            raise InvalidArgument(f"amplitude array has shape {amp.shape}, expected {expect}")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise InvalidArgument("table wavenumbers must be positive")
        lam.flags.writeable = False
        amp.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))

    @classmethod
    def zeros(cls, lambdas, order: int, bc="dirichlet") -> "FarFieldTable":
        g = cached_grid(order)
        lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
        return cls(lam, g, g, np.zeros((lam.size, g.size, g.size), dtype=complex), bc)

    def slice(self, k: int) -> np.ndarray:
        """Amplitude matrix at ``lambdas[k]``; raises if absent or non-finite."""
        if not 0 <= k < self.lambdas.size:
            raise IncompleteData(f"no wavenumber index {k} in table of {self.lambdas.size}")
        A = self.amplitudes[k]
        if not np.all(np.isfinite(A)):
            raise IncompleteData(f"table has missing samples at lambda={self.lambdas[k]:g}")
        return A

    # -- text format ---------------------------------------------------------
    def to_text(self) -> str:
        L, No, Ni = self.amplitudes.shape
        k, i, j = np.meshgrid(np.arange(L), np.arange(No), np.arange(Ni), indexing="ij")
        a = self.amplitudes.reshape(-1)
        rows = np.column_stack([k.reshape(-1), i.reshape(-1), j.reshape(-1), a.real, a.imag])
        meta = {
            "bc": self.bc.value,
            "convention": CONVENTION,
            "inc_order": self.inc_grid.order,
            "lambdas": [float(v) for v in self.lambdas],
            "obs_order": self.obs_grid.order,
        }
        return format_table("farfield", meta, ["lambda_index", "theta_index", "omega_index", "re_A", "im_A"], rows)

    @classmethod
    def from_text(cls, text: str) -> "FarFieldTable":
        _, meta, rows = parse_table(text, "farfield")
        if require(meta, "convention") != CONVENTION:
            raise ParseError(f"unsupported amplitude convention {meta['convention']!r}")
        lam = np.asarray(require(meta, "lambdas"), dtype=float)
        go, gi = cached_grid(int(require(meta, "obs_order"))), cached_grid(int(require(meta, "inc_order")))
        amp = np.full((lam.size, go.size, gi.size), np.nan + 0j)
        idx = rows[:, :3].astype(int)
        shape = amp.shape
        if np.any(idx < 0) or np.any(idx >= np.array(shape)):
            raise ParseError("table index out of range")
        amp[idx[:, 0], idx[:, 1], idx[:, 2]] = rows[:, 3] + 1j * rows[:, 4]
        if np.isnan(amp).any():
            raise IncompleteData("far-field table does not cover every grid pair")
        return cls(lam, go, gi, amp, meta.get("bc", "dirichlet"))


def compute_far_field_table(shape: RadialShape, lambdas, order: int, bc="dirichlet",
                            obs_order: int | None = None, quad_order: int | None = None) -> FarFieldTable:
    """Solve for every incidence node of the order-``order`` grid.

    The observation grid defaults to the incidence grid.
    """
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    gi = cached_grid(order)
    go = gi if obs_order is None else cached_grid(obs_order)
    amps = np.empty((lam.size, go.size, gi.size), dtype=complex)
    for k, lk in enumerate(lam):
        solver = ExteriorSolver(shape, lk, bc, gi, quad_order)
        dens = solver.solve(gi.nodes)
        amps[k] = solver.far_field(dens, go.nodes)
        log.info("far field lam=%g order=%d rcond=%.2e", lk, order, solver.rcond)
    return FarFieldTable(lam, go, gi, amps, bc)


def sphere_far_field_table(radius: float, lambdas, order: int, bc="dirichlet") -> FarFieldTable:
    """Same table filled from the partial-wave series (test oracle)."""
    from .series import sphere_series_amplitude

    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    g: SphereGrid = cached_grid(order)
    cosg = np.clip(-(g.nodes @ g.nodes.T), -1.0, 1.0)
    amps = np.stack([sphere_series_amplitude(radius, lk, cosg, bc) for lk in lam])
    return FarFieldTable(lam, g, g, amps, bc)
