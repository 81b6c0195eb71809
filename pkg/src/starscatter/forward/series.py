"""Partial-wave solution for a sound-soft or sound-hard ball centred at the origin.

With ``cos_gamma = theta . d`` for the standard propagation direction
``d = -omega``, the amplitude is

    A = (i / lam) * sum_l (2l + 1) t_l P_l(cos_gamma),

``t_l = j_l(lam a) / h_l(lam a)`` (Dirichlet) or ``j_l'/h_l'`` (Neumann).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidArgument
from ..mathcore import FOUR_PI, legendre_table, spherical_jy_derivs
from .solver import BoundaryCondition


def truncation_degree(ka: float) -> int:
    return math.ceil(ka + 8.0 * ka ** (1.0 / 3.0)) + 12


def _check(a: float, lam: float):
    if not (a > 0 and math.isfinite(a)):
        raise InvalidArgument(f"radius must be positive, got {a}")
    if not (lam > 0 and math.isfinite(lam)):
        raise InvalidArgument(f"wavenumber must be positive, got {lam}")


def sphere_t_matrix(a: float, lam: float, bc, lmax: int | None = None) -> np.ndarray:
    """Ratios ``t_l`` for l = 0..lmax (default: the truncation degree)."""
    _check(a, lam)
    x = lam * a
    L = truncation_degree(x) if lmax is None else int(lmax)
    j, y, dj, dy = spherical_jy_derivs(L, x)
    if BoundaryCondition.parse(bc) is BoundaryCondition.DIRICHLET:
        num, den = j, j + 1j * y
    else:
        num, den = dj, dj + 1j * dy
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        t = num / den
    # y_l overflows far beyond the truncation degree, where t_l underflows anyway
    return np.where(np.isfinite(t), t, 0.0)


def sphere_series_amplitude(a: float, lam: float, cos_gamma, bc="dirichlet"):
    """Amplitude ``A(lam, theta, omega)`` of a ball of radius ``a``.

    ``cos_gamma`` is ``-theta . omega`` (1 is forward scattering). Accepts
    scalars or arrays; returns complex of matching shape.
    """
    c = np.asarray(cos_gamma, dtype=float)
    if np.any(np.abs(c) > 1.0 + 1e-12):
        raise InvalidArgument("cos_gamma must lie in [-1, 1]")
    t = sphere_t_matrix(a, lam, bc)
    L = t.size - 1
    P = legendre_table(L, np.clip(c, -1.0, 1.0))
    coef = (2 * np.arange(L + 1) + 1) * t
    A = (1j / lam) * np.tensordot(coef, P, axes=(0, 0))
    return complex(A) if A.ndim == 0 else A


def sphere_series_field(a: float, lam: float, points, d, bc="dirichlet") -> np.ndarray:
    """Scattered field at exterior points for standard propagation direction ``d``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    d = np.asarray(d, dtype=float).reshape(3)
    r = np.linalg.norm(pts, axis=1)
    if np.any(r <= a):
        raise InvalidArgument("field points must lie outside the ball")
    t = sphere_t_matrix(a, lam, bc)
    L = t.size - 1
    j, y, _, _ = spherical_jy_derivs(L, lam * r)
    h = j + 1j * y
    P = legendre_table(L, np.clip(pts @ d / r, -1.0, 1.0))
    ls = np.arange(L + 1)
    coef = (1j**ls) * (2 * ls + 1) * t
    return -np.einsum("l,lp,lp->p", coef, h, P)


def sphere_series_cross_section(a: float, lam: float, bc="dirichlet") -> float:
    """``C = (4 pi / lam**2) sum (2l + 1) |t_l|**2``; independent of direction."""
    t = sphere_t_matrix(a, lam, bc)
    ls = np.arange(t.size)
    return float(FOUR_PI / lam**2 * np.sum((2 * ls + 1) * np.abs(t) ** 2))
