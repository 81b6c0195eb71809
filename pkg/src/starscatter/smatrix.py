"""Scattering matrix, cross sections and amplitude identity checks (n = 3).

The scattering operator acts on functions on the sphere as

    (S f)(theta) = f(theta) + C3 * lam * int conj(A(lam, -theta, omega)) f(omega) d omega,

``C3 = -i / (2 pi)``. On a product grid with weights ``w`` it is stored in the
symmetrized form ``I + C3 lam W^1/2 conj(A(-theta_i, omega_j)) W^1/2``, which
is similar to the weighted discretization and unitary exactly when the
operator is unitary on L2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import IncompleteData, InvalidGrid
from .forward.table import FarFieldTable
from .mathcore import FOUR_PI, SphereGrid
from .textio import format_table

C3 = -1j / (2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class SMatrixDisc:
    wavenumber: float
    grid: SphereGrid
    matrix: np.ndarray

    def unitarity_defect(self) -> float:
        S = self.matrix
        return float(np.linalg.norm(S @ S.conj().T - np.eye(S.shape[0])))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


@dataclass(frozen=True, eq=False)
class CrossSectionData:
    """Cross sections ``values[k, i] = C(lambdas[k], grid node i)``."""

    lambdas: np.ndarray
    grid: SphereGrid
    values: np.ndarray
    provenance: dict

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        v = np.array(self.values, dtype=float)
        if v.shape != (lam.size, self.grid.size):
            raise IncompleteData(f"cross-section array has shape {v.shape}, expected {(lam.size, self.grid.size)}")
        if not np.all(np.isfinite(v)):
            raise IncompleteData("cross-section data contain non-finite values")
        lam.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", dict(self.provenance))

    def to_text(self) -> str:
        k, i = np.meshgrid(np.arange(self.lambdas.size), np.arange(self.grid.size), indexing="ij")
        rows = np.column_stack([k.reshape(-1), i.reshape(-1), self.values.reshape(-1)])
        meta = {"lambdas": [float(v) for v in self.lambdas], "order": self.grid.order,
                "provenance": self.provenance}
        return format_table("cross-section", meta, ["lambda_index", "theta_index", "C"], rows)

    @classmethod
    def from_text(cls, text: str) -> "CrossSectionData":
        from .mathcore import cached_grid
        from .textio import parse_table, require

        _, meta, rows = parse_table(text, "cross-section")
        lam = np.asarray(require(meta, "lambdas"), dtype=float).reshape(-1)
        grid = cached_grid(int(require(meta, "order")))
        vals = np.full((lam.size, grid.size), np.nan)
        idx = rows[:, :2].astype(int)
        if np.any(idx < 0) or np.any(idx >= np.array(vals.shape)):
            raise IncompleteData("cross-section index out of range")
        vals[idx[:, 0], idx[:, 1]] = rows[:, 2]
        if np.isnan(vals).any():
            raise IncompleteData("cross-section table does not cover every (lambda, theta) pair")
        return cls(lam, grid, vals, meta.get("provenance", {}))


def cross_section(table: FarFieldTable, lam_index: int, theta_index: int) -> float:
    """``C = int |A(lam, theta, omega)|^2 d omega`` by the incidence-grid rule."""
    A = table.slice(lam_index)
    if not 0 <= theta_index < A.shape[0]:
        raise IncompleteData(f"no observation index {theta_index}")
    return float(table.inc_grid.weights @ np.abs(A[theta_index]) ** 2)


def cross_sections(table: FarFieldTable) -> np.ndarray:
    """All cross sections, shape (L, N_obs)."""
    return np.stack([np.abs(table.slice(k)) ** 2 @ table.inc_grid.weights for k in range(table.lambdas.size)])


def _square_grid(table: FarFieldTable) -> SphereGrid:
    if table.obs_grid.order != table.inc_grid.order:
        raise InvalidGrid("observation and incidence grids differ")
    g = table.obs_grid
    if g.n_azimuth % 2:
        raise InvalidGrid("grid is not closed under theta -> -theta")
    anti = g.antipodes()
    if not np.allclose(g.nodes[anti], -g.nodes, atol=1e-13):
        raise InvalidGrid("grid is not closed under theta -> -theta")
    return g


def _smatrix(A: np.ndarray, lam: float, grid: SphereGrid, sign: float = 1.0) -> np.ndarray:
    """Symmetrized ``S`` from the amplitude matrix (``sign=-1`` gives ``S(-lam)``)."""
    anti = grid.antipodes()
    sw = np.sqrt(grid.weights)
    # S(-lam) uses conj(A(-lam)) = A(lam)
    K = np.conj(A[anti]) if sign > 0 else A[anti]
    S = (sign * C3 * lam) * (sw[:, None] * K * sw[None, :])
    S[np.diag_indices_from(S)] += 1.0
    return S


def build_smatrix(table: FarFieldTable, lam_index: int) -> SMatrixDisc:
    g = _square_grid(table)
    A = table.slice(lam_index)
    lam = float(table.lambdas[lam_index])
    return SMatrixDisc(lam, g, _smatrix(A, lam, g))


@dataclass(frozen=True)
class ResidualReport:
    """Residuals of the amplitude identities at one wavenumber.

    ``conjugate_symmetry`` is zero by construction because negative-frequency
    amplitudes are defined by conjugation; ``conjugate_symmetry_tautological``
    records that.
    """

    wavenumber: float
    reciprocity: float
    conjugate_symmetry: float
    conjugate_symmetry_tautological: bool
    lax_phillips: float
    lax_phillips_alt_sign: float
    unitarity: float
    inverse: float
    optical_theorem: float

    def as_lines(self) -> list[str]:
        out = []
        for key, val in asdict(self).items():
            if isinstance(val, bool):
                out.append(f"{key} {str(val).lower()}")
            else:
                out.append(f"{key} {val:.17g}")
        return out

    def primary(self) -> dict:
        """The five residuals that acceptance thresholds apply to."""
        return {
            "reciprocity": self.reciprocity,
            "conjugate_symmetry": self.conjugate_symmetry,
            "lax_phillips": self.lax_phillips,
            "unitarity": self.unitarity,
            "inverse": self.inverse,
        }


def identity_residuals(table: FarFieldTable, lam_index: int = 0) -> ResidualReport:
    g = _square_grid(table)
    A = table.slice(lam_index)
    lam = float(table.lambdas[lam_index])
    anti = g.antipodes()
    w = g.weights
    n = g.size

    recip = float(np.abs(A - A.T).max()) if n else 0.0
    A_neg = np.conj(A)
    conj_sym = float(np.abs(A_neg - np.conj(A)).max())

    # entry (i, j): theta = node i, omega = node j
    first = A[anti].T                      # A(lam, -omega_j, theta_i) -> [i, j]
    conj_term = np.conj(A[anti])           # conj A(lam, -theta_i, omega_j)
    quad = (conj_term * w[None, :]) @ A[anti].T  # int A(-omega, t') conj A(-theta, t') dt'
    quad_term = lam / (2j * math.pi) * quad
    lax = float(np.abs(first - conj_term + quad_term).max())
    lax_alt = float(np.abs(first + conj_term + quad_term).max())

    S = _smatrix(A, lam, g)
    S_neg = _smatrix(A, lam, g, sign=-1.0)
    eye = np.eye(n)
    unit = float(np.linalg.norm(S @ S.conj().T - eye))
    inv = float(np.linalg.norm(S @ S_neg - eye))

    # forward amplitude A(lam, -theta, theta) against the cross section C(lam, -theta)
    C = np.abs(A) ** 2 @ w
    fwd = A[anti, np.arange(n)]
    optical = float(np.abs(fwd.imag - lam / FOUR_PI * C[anti]).max())
    return ResidualReport(lam, recip, conj_sym, True, lax, lax_alt, unit, inv, optical)


def format_residuals(reports) -> str:
    rows = []
    for r in reports:
        rows.extend(r.as_lines())
    return "".join(line + "\n" for line in rows)
