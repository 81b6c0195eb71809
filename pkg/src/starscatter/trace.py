"""Scattering phase, its derivative, and the heat-smoothed trace.

Sign convention: sound-soft phase shifts decrease (``delta_0 = -lam a``), and
``sigma = (1/pi) sum (2l+1) delta_l``. The discretized scattering matrix has
eigenvalues ``exp(-2 i delta_l)``, so

    sigma'(lam) = -(1 / (2 pi i)) d/dlam log det S(lam).

The heat trace ``H(t) = int_0^inf exp(-t lam^2) sigma'(lam) d lam`` behaves as
``-(4 pi t)^(-3/2) Vol + O(t^-1)`` for sound-soft obstacles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import erfc

from .errors import InsufficientBandwidth, InvalidArgument, StepTooLarge, UnreliableSMatrix
from .forward.series import truncation_degree
from .forward.solver import BoundaryCondition
from .mathcore import spherical_jy_derivs
from .smatrix import SMatrixDisc
from .textio import format_table

TAIL_MIN = 30.0


@dataclass(frozen=True, eq=False)
class PhaseSamples:
    lambdas: np.ndarray
    values: np.ndarray
    method: str

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).reshape(-1)
        val = np.array(self.values, dtype=float).reshape(-1)
        if lam.size != val.size or lam.size < 3:
            raise InvalidArgument("phase samples need matching arrays of length >= 3")
        if not np.all(np.diff(lam) > 0) or lam[0] <= 0:
            raise InvalidArgument("phase wavenumbers must be positive and strictly increasing")
        if not np.all(np.isfinite(val)):
            raise InvalidArgument("non-finite phase derivative sample")
        if self.method not in ("det-S", "partial-wave"):
            raise InvalidArgument(f"unknown phase method {self.method!r}")
        lam.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "values", val)

    def to_text(self) -> str:
        return format_table("phase", {"method": self.method}, ["lambda", "dsigma"],
                            np.column_stack([self.lambdas, self.values]))


@dataclass(frozen=True, eq=False)
class HeatTraceFit:
    """Heat trace samples and the small-t fit.

    ``a0`` is the intercept of ``H(t) (4 pi t)^(3/2)`` fitted by
    ``a0 + a1 sqrt(t) + a2 t``; ``subleading`` is the ``t^-1`` coefficient of
    ``H``, ``a1 / (4 pi)^(3/2)`` (diagnostic only).
    """

    t: np.ndarray
    heat: np.ndarray
    a0: float
    residual: float
    subleading: float

    @property
    def volume_estimate(self) -> float:
        return abs(self.a0)

    def to_text(self) -> str:
        meta = {"a0": self.a0, "residual": self.residual, "subleading": self.subleading,
                "volume_estimate": self.volume_estimate}
        return format_table("heat", meta, ["t", "H"], np.column_stack([self.t, self.heat]))


# ---------------------------------------------------------------------------
# Sphere phase shifts
# ---------------------------------------------------------------------------
def _check(a, lam):
    if not (a > 0 and math.isfinite(a)):
        raise InvalidArgument(f"radius must be positive, got {a}")
    lam = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise InvalidArgument("wavenumbers must be positive")
    return lam


def _shift_derivatives(lmax: int, x: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """``d delta_l / dx`` for l = 0..lmax, shape (lmax+1, x.size)."""
    j, y, dj, dy = spherical_jy_derivs(lmax, x)
    ls = np.arange(lmax + 1)[:, None]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if bc is BoundaryCondition.DIRICHLET:
            d = -1.0 / (x * x * (j * j + y * y))
        else:
            d = -(1.0 - ls * (ls + 1) / (x * x)) / (x * x * (dj * dj + dy * dy))
    # y_l overflows where the shift is negligible
    return np.where(np.isfinite(d), d, 0.0)


def sphere_phase_shifts(a: float, lam: float, bc="dirichlet", lmax: int | None = None) -> np.ndarray:
    """Continuous-branch phase shifts ``delta_l(lam)`` with ``delta_l(0+) = 0``.

    The principal value of ``atan(j/y)`` (derivatives for Neumann) fixes
    ``delta_l`` modulo pi; the multiple of pi comes from a Gauss-Legendre
    integral of the closed-form derivative from 0.
    """
    lam = float(_check(a, lam))
    bc = BoundaryCondition.parse(bc)
    x = lam * a
    L = truncation_degree(x) if lmax is None else int(lmax)
    j, y, dj, dy = spherical_jy_derivs(L, np.array([x]))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        ratio = (j / y) if bc is BoundaryCondition.DIRICHLET else (dj / dy)
    principal = np.where(np.isfinite(ratio), np.arctan(ratio), 0.0)[:, 0]
    n = 48 + int(4 * x)
    t, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * x * (t + 1.0)
    integral = _shift_derivatives(L, nodes, bc) @ (0.5 * x * w)
    k = np.round((integral - principal) / math.pi)
    return principal + k * math.pi


def sphere_scattering_phase(a: float, lam: float, bc="dirichlet") -> float:
    """``sigma = (1/pi) sum (2l+1) delta_l``."""
    d = sphere_phase_shifts(a, lam, bc)
    return float(np.sum((2 * np.arange(d.size) + 1) * d) / math.pi)


def sphere_phase_derivative(a: float, lambdas, bc="dirichlet") -> np.ndarray:
    """Closed-form ``sigma'(lam)`` for a ball, vectorized over wavenumbers."""
    lam = np.atleast_1d(_check(a, lambdas)).astype(float)
    bc = BoundaryCondition.parse(bc)
    x = lam * a
    L = truncation_degree(float(x.max()))
    d = _shift_derivatives(L, x, bc)
    ls = np.arange(L + 1)[:, None]
    return a * np.sum((2 * ls + 1) * d, axis=0) / math.pi


def sphere_phase_samples(a: float, lambdas, bc="dirichlet") -> PhaseSamples:
    lam = np.asarray(lambdas, dtype=float)
    return PhaseSamples(lam, sphere_phase_derivative(a, lam, bc), "partial-wave")


# ---------------------------------------------------------------------------
# Determinant route
# ---------------------------------------------------------------------------
def phase_derivative_det(s_minus: SMatrixDisc, s_mid: SMatrixDisc, s_plus: SMatrixDisc) -> float:
    """Central difference of ``-(1/(2 pi i)) log det S`` over a symmetric stencil."""
    lams = [s_minus.wavenumber, s_mid.wavenumber, s_plus.wavenumber]
    h = 0.5 * (lams[2] - lams[0])
    if not (h > 0 and abs((lams[1] - lams[0]) - (lams[2] - lams[1])) <= 1e-9 * h):
        raise InvalidArgument("S-matrices must sit at lam - h, lam, lam + h")
    if not (s_minus.grid.order == s_mid.grid.order == s_plus.grid.order):
        raise InvalidArgument("S-matrices must share a grid")
    dets = []
    for S in (s_minus, s_mid, s_plus):
        sign, logabs = np.linalg.slogdet(S.matrix)
        mod = math.exp(logabs)
        if abs(mod - 1.0) > 0.1:
            raise UnreliableSMatrix(f"|det S| = {mod:.4f} at lam={S.wavenumber:g}")
        dets.append(sign)
    step1 = float(np.angle(dets[1] / dets[0]))
    step2 = float(np.angle(dets[2] / dets[1]))
    # each half step must stay well inside the pi ambiguity of the phase
    if max(abs(step1), abs(step2)) > 0.5 * math.pi:
        raise StepTooLarge(f"log det S changes by {max(abs(step1), abs(step2)):.3f} rad per step; reduce h")
    return -(step1 + step2) / (2.0 * math.pi * 2.0 * h)


def det_phase_derivative(shape, lam: float, order: int, bc="dirichlet", rel_step: float = 1e-3) -> float:
    """``sigma'(lam)`` from BIE tables at ``lam (1 + {-1, 0, 1} rel_step)``."""
    from .forward.table import compute_far_field_table
    from .smatrix import build_smatrix

    h = lam * rel_step
    table = compute_far_field_table(shape, [lam - h, lam, lam + h], order, bc)
    return phase_derivative_det(*(build_smatrix(table, k) for k in range(3)))


# ---------------------------------------------------------------------------
# Heat trace
# ---------------------------------------------------------------------------
def _gauss_tail(t: float, lam_max: float, p) -> float:
    """``int_Lam^inf exp(-t x^2) (p0 + p1 x + p2 x^2) dx`` in closed form."""
    e = math.exp(-t * lam_max**2)
    i0 = 0.5 * math.sqrt(math.pi / t) * erfc(lam_max * math.sqrt(t))
    i1 = e / (2.0 * t)
    i2 = lam_max * e / (2.0 * t) + i0 / (2.0 * t)
    return p[0] * i0 + p[1] * i1 + p[2] * i2


def heat_trace(phase: PhaseSamples, t) -> np.ndarray:
    """``H(t)`` by Simpson quadrature plus a closed-form tail."""
    lam, dsig = phase.lambdas, phase.values
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lam_max = lam[-1]
    bad = t[lam_max**2 * t < TAIL_MIN]
    if bad.size:
        raise InsufficientBandwidth(
            f"lam_max^2 t = {lam_max**2 * bad.min():.3g} < {TAIL_MIN:g}; extend the wavenumber range"
        )
    # value at 0 by linear extrapolation of the first two samples
    d0 = dsig[0] - lam[0] * (dsig[1] - dsig[0]) / (lam[1] - lam[0])
    x = np.concatenate([[0.0], lam])
    f = np.concatenate([[d0], dsig])
    m = max(5, lam.size // 10)
    p = np.polynomial.polynomial.polyfit(lam[-m:], dsig[-m:], 2)
    out = np.empty(t.size)
    for k, tk in enumerate(t):
        out[k] = simpson(np.exp(-tk * x * x) * f, x=x) + _gauss_tail(tk, lam_max, p)
    return out


def heat_trace_and_a0(phase: PhaseSamples, t_window, n_t: int = 16) -> HeatTraceFit:
    """Fit ``H(t) (4 pi t)^(3/2) ~ a0 + a1 sqrt(t) + a2 t`` over ``t_window``.

    ``t_window`` is ``(t_min, t_max)`` or an explicit list of times.
    """
    tw = np.asarray(t_window, dtype=float).reshape(-1)
    if tw.size < 2 or np.any(tw <= 0) or not np.all(np.isfinite(tw)):
        raise InvalidArgument("t window needs positive values")
    if tw.size == 2:
        if not tw[0] < tw[1]:
            raise InvalidArgument("t window must satisfy t_min < t_max")
        t = np.geomspace(tw[1], tw[0], n_t)
    else:
        t = np.sort(tw)[::-1]
    H = heat_trace(phase, t)
    yv = H * (4.0 * math.pi * t) ** 1.5
    V = np.column_stack([np.ones_like(t), np.sqrt(t), t])
    coef, *_ = np.linalg.lstsq(V, yv, rcond=None)
    resid = float(np.sqrt(np.mean((V @ coef - yv) ** 2)))
    return HeatTraceFit(t, H, float(coef[0]), resid, float(coef[1] / (4.0 * math.pi) ** 1.5))
