"""Special functions and spherical quadrature.

Conventions
-----------
Real spherical harmonics are orthonormal on the unit sphere and carry no
Condon-Shortley phase::

    Y_{l,0}  = N_l0 P_l(cos t)
    Y_{l,m}  = sqrt(2) N_lm P_l^m(cos t) cos(m phi)      (m > 0)
    Y_{l,-m} = sqrt(2) N_lm P_l^m(cos t) sin(m phi)      (m > 0)

They are evaluated from Cartesian components as ``q_l^m(z) * Re/Im (x+iy)^m``
where ``q_l^m`` is a normalized polynomial in ``z``; the construction has no
pole singularity and differentiates analytically.

Columns of harmonic tables are ordered by ``sh_index(l, m) = l*l + l + m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, InvalidArgument

FOUR_PI = 4.0 * math.pi


def sh_index(l: int, m: int) -> int:
    return l * l + l + m


def sh_count(lmax: int) -> int:
    return (lmax + 1) ** 2


def sh_degrees(lmax: int) -> np.ndarray:
    """Degree ``l`` of every column of a harmonic table up to ``lmax``."""
    return np.concatenate([np.full(2 * l + 1, l) for l in range(lmax + 1)])


def sh_orders(lmax: int) -> np.ndarray:
    return np.concatenate([np.arange(-l, l + 1) for l in range(lmax + 1)])


# ---------------------------------------------------------------------------
# Sphere quadrature
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SphereGrid:
    """Gauss-Legendre (in cos t) x uniform-azimuth product grid.

    Nodes are stored ring by ring: node ``i * n_azimuth + k`` sits at polar
    node ``cos_theta[i]`` and azimuth ``phi[k]``.

    Attributes
    ----------
    order : int
        Declared exactness degree (polar count minus one). The rule is in
        fact exact up to degree ``2 * order + 1``.
    nodes : ndarray, shape (N, 3)
    weights : ndarray, shape (N,)
        Positive weights in steradians, summing to 4 pi.
    """

    order: int
    cos_theta: np.ndarray
    polar_weights: np.ndarray
    phi: np.ndarray
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_polar(self) -> int:
        return len(self.cos_theta)

    @property
    def n_azimuth(self) -> int:
        return len(self.phi)

    @property
    def size(self) -> int:
        return len(self.weights)

    def antipodes(self) -> np.ndarray:
        """Index of ``-node`` for every node (the grid is closed under it)."""
        i, k = np.divmod(np.arange(self.size), self.n_azimuth)
        i_anti = self.n_polar - 1 - i
        k_anti = (k + self.n_azimuth // 2) % self.n_azimuth
        return i_anti * self.n_azimuth + k_anti


def build_sphere_grid(order: int) -> SphereGrid:
    """Product grid with ``order + 1`` polar and ``2 * (order + 1)`` azimuth nodes."""
    if isinstance(order, bool) or int(order) != order or order < 1:
        raise InvalidArgument(f"grid order must be an integer >= 1, got {order!r}")
    order = int(order)
    n_pol = order + 1
    n_az = 2 * n_pol
    t, wt = np.polynomial.legendre.leggauss(n_pol)
    # Descending cos(theta): rings run north to south.
    t = t[::-1].copy()
    wt = wt[::-1].copy()
    phi = 2.0 * math.pi * np.arange(n_az) / n_az
    sin_t = np.sqrt(1.0 - t * t)
    nodes = np.empty((n_pol, n_az, 3))
    nodes[..., 0] = sin_t[:, None] * np.cos(phi)[None, :]
    nodes[..., 1] = sin_t[:, None] * np.sin(phi)[None, :]
    nodes[..., 2] = t[:, None]
    nodes = nodes.reshape(-1, 3)
    nodes /= np.linalg.norm(nodes, axis=1, keepdims=True)
    weights = np.repeat(wt * (2.0 * math.pi / n_az), n_az)
    for arr in (t, wt, phi, nodes, weights):
        arr.flags.writeable = False
    return SphereGrid(order, t, wt, phi, nodes, weights)


@lru_cache(maxsize=32)
def cached_grid(order: int) -> SphereGrid:
    """Shared immutable grid instance for ``order``."""
    return build_sphere_grid(order)


# ---------------------------------------------------------------------------
# Legendre polynomials and real spherical harmonics
# ---------------------------------------------------------------------------
def legendre_table(lmax: int, t) -> np.ndarray:
    """P_0..P_lmax at ``t``; returns shape (lmax + 1, *t.shape)."""
    t = np.asarray(t, dtype=float)
    out = np.empty((lmax + 1,) + t.shape)
    out[0] = 1.0
    if lmax >= 1:
        out[1] = t
    for l in range(1, lmax):
        out[l + 1] = ((2 * l + 1) * t * out[l] - l * out[l - 1]) / (l + 1)
    return out


def legendre_p(l: int, t: float) -> float:
    if l < 0:
        raise InvalidArgument(f"degree must be >= 0, got {l}")
    if not -1.0 <= t <= 1.0:
        raise DomainError(f"Legendre argument {t} outside [-1, 1]")
    return float(legendre_table(l, t)[l])


def _harmonics(lmax: int, x, y, z, grad: bool):
    """Yield ``(index, Y, dY)`` for each real harmonic of degree <= lmax.

    ``dY`` is the Cartesian gradient of the homogeneous polynomial extension
    (a tuple of three arrays, not yet projected on the tangent plane) or
    ``None`` when ``grad`` is false.
    """
    npts = x.shape[0]
    c_prev, s_prev = np.ones(npts), np.zeros(npts)
    c_cur, s_cur = c_prev, s_prev
    zero = np.zeros(npts)
    qmm = 1.0 / math.sqrt(FOUR_PI)
    for m in range(lmax + 1):
        if m > 0:
            # (x + i y)^m split into cosine part c and sine part s
            c_prev, s_prev = c_cur, s_cur
            c_cur = x * c_prev - y * s_prev
            s_cur = x * s_prev + y * c_prev
            qmm *= math.sqrt((2 * m + 1) / (2.0 * m))
            if m == 1:
                qmm *= math.sqrt(2.0)
        # q_l^m(z) and dq/dz for l = m..lmax by three-term recurrence
        q_lm1 = dq_lm1 = q_lm2 = dq_lm2 = None
        for l in range(m, lmax + 1):
            if l == m:
                q, dq = np.full(npts, qmm), zero
            elif l == m + 1:
                a = math.sqrt(2 * m + 3.0)
                q, dq = a * z * q_lm1, a * q_lm1
            else:
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                q = a * (z * q_lm1 - b * q_lm2)
                dq = a * (q_lm1 + z * dq_lm1 - b * dq_lm2)
            q_lm2, dq_lm2, q_lm1, dq_lm1 = q_lm1, dq_lm1, q, dq
            if m == 0:
                yield sh_index(l, 0), q, ((zero, zero, dq) if grad else None)
                continue
            if grad:
                # d/dx (x+iy)^m = m (x+iy)^(m-1), d/dy = i m (x+iy)^(m-1)
                qm = q * m
                gc = (qm * c_prev, -qm * s_prev, dq * c_cur)
                gs = (qm * s_prev, qm * c_prev, dq * s_cur)
            else:
                gc = gs = None
            yield sh_index(l, m), q * c_cur, gc
            yield sh_index(l, -m), q * s_cur, gs


def real_sph_harm_table(lmax: int, dirs, grad: bool = False):
    """Real orthonormal harmonics of degree <= lmax at unit vectors ``dirs``.

    Parameters
    ----------
    lmax : int
    dirs : array_like, shape (..., 3)
        Unit vectors.
    grad : bool
        Also return the tangential (surface) gradient.

    Returns
    -------
    Y : ndarray, shape (..., (lmax+1)**2)
    dY : ndarray, shape (..., (lmax+1)**2, 3)
        Only when ``grad`` is true.
    """
    dirs = np.asarray(dirs, dtype=float)
    lead = dirs.shape[:-1]
    p = dirs.reshape(-1, 3)
    x, y, z = (np.ascontiguousarray(p[:, c]) for c in range(3))
    M = sh_count(lmax)
    # harmonic-major storage keeps the per-(l, m) writes contiguous
    Y = np.empty((M, p.shape[0]))
    G = np.empty((M, 3, p.shape[0])) if grad else None
    for k, val, g in _harmonics(lmax, x, y, z, grad):
        Y[k] = val
        if grad:
            G[k, 0], G[k, 1], G[k, 2] = g
    Y = np.ascontiguousarray(Y.T).reshape(lead + (M,))
    if not grad:
        return Y
    # project onto the tangent plane
    radial = G[:, 0] * x + G[:, 1] * y + G[:, 2] * z
    G -= radial[:, None, :] * np.stack([x, y, z])[None, :, :]
    return Y, np.ascontiguousarray(G.transpose(2, 0, 1)).reshape(lead + (M, 3))


def sph_harm_expansion(lmax: int, coeffs, dirs, grad: bool = False):
    """Evaluate ``f = sum c_k Y_k`` (and its tangential gradient) at ``dirs``.

    Accumulates term by term, so no per-harmonic table is stored.

    Returns
    -------
    f : ndarray, shape (...)
    df : ndarray, shape (..., 3), only when ``grad`` is true
    """
    dirs = np.asarray(dirs, dtype=float)
    lead = dirs.shape[:-1]
    p = dirs.reshape(-1, 3)
    x, y, z = (np.ascontiguousarray(p[:, c]) for c in range(3))
    c = np.asarray(coeffs, dtype=float)
    f = np.zeros(p.shape[0])
    g = np.zeros((3, p.shape[0])) if grad else None
    for k, val, dv in _harmonics(lmax, x, y, z, grad):
        ck = c[k]
        if ck == 0.0:
            continue
        f += ck * val
        if grad:
            g[0] += ck * dv[0]
            g[1] += ck * dv[1]
            g[2] += ck * dv[2]
    f = f.reshape(lead)
    if not grad:
        return f
    g -= (g[0] * x + g[1] * y + g[2] * z)[None, :] * np.stack([x, y, z])
    return f, np.ascontiguousarray(g.T).reshape(lead + (3,))


def _check_unit(direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float).reshape(3)
    if abs(np.linalg.norm(d) - 1.0) > 1e-10:
        raise InvalidArgument(f"direction {d} is not a unit vector")
    return d


def real_sph_harm(l: int, m: int, direction) -> float:
    """Real orthonormal spherical harmonic Y_{l,m} at a unit vector."""
    if l < 0 or abs(m) > l:
        raise InvalidArgument(f"invalid harmonic index (l={l}, m={m})")
    d = _check_unit(direction)
    return float(real_sph_harm_table(l, d[None, :])[0, sh_index(l, m)])


# ---------------------------------------------------------------------------
# Spherical Bessel functions
# ---------------------------------------------------------------------------
_RESCALE = 1e200


def spherical_jy(lmax: int, x):
    """Spherical Bessel functions j_l and y_l for l = 0..lmax.

    j_l comes from Miller's downward recurrence normalized against the
    closed forms of j_0 or j_1 (whichever is larger in magnitude, so that
    zeros of sin x do not spoil the scale); y_l from upward recurrence.

    Returns
    -------
    j, y : ndarray, shape (lmax + 1, *x.shape)
        ``y`` may overflow to ``-inf`` for l >> x.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("spherical Bessel functions need x > 0")
    shape = x.shape
    xs = x.reshape(-1)
    lmax = int(lmax)
    lhi = max(lmax, 1)
    big = max(lhi, float(xs.max(initial=0.0)))
    n_start = int(big + 6.0 * big ** (1.0 / 3.0) + 30)

    sin_x, cos_x = np.sin(xs), np.cos(xs)
    j = np.zeros((lhi + 1, xs.size))
    with np.errstate(over="ignore", invalid="ignore"):
        f_next = np.zeros_like(xs)
        f_cur = np.full_like(xs, 1e-30)
        for l in range(n_start, 0, -1):
            f_prev = (2 * l + 1) / xs * f_cur - f_next
            f_next, f_cur = f_cur, f_prev
            if l - 1 <= lhi:
                j[l - 1] = f_cur
            big_mask = np.abs(f_cur) > _RESCALE
            if big_mask.any():
                f_cur = np.where(big_mask, f_cur / _RESCALE, f_cur)
                f_next = np.where(big_mask, f_next / _RESCALE, f_next)
                if l - 1 <= lhi:
                    j[l - 1 :, big_mask] /= _RESCALE
        j0 = sin_x / xs
        j1 = sin_x / xs**2 - cos_x / xs
        use0 = np.abs(j0) >= np.abs(j1)
        scale = np.where(use0, j0 / j[0], j1 / j[1])
        j *= scale
        # closed forms are exact where the recurrence cancels near zeros of sin x
        j[0] = j0
        j[1] = np.where(use0, j[1], j1)

        y = np.empty_like(j)
        y[0] = -cos_x / xs
        y[1] = -cos_x / xs**2 - sin_x / xs
        for l in range(1, lhi):
            y[l + 1] = (2 * l + 1) / xs * y[l] - y[l - 1]
    j = j[: lmax + 1].reshape((lmax + 1,) + shape)
    y = y[: lmax + 1].reshape((lmax + 1,) + shape)
    return j, y


def spherical_jy_derivs(lmax: int, x):
    """j_l, y_l and their x-derivatives for l = 0..lmax."""
    x = np.asarray(x, dtype=float)
    j, y = spherical_jy(lmax + 1, x)
    ls = np.arange(lmax + 1).reshape((-1,) + (1,) * x.ndim)
    with np.errstate(over="ignore", invalid="ignore"):
        dj = np.empty((lmax + 1,) + x.shape)
        dy = np.empty_like(dj)
        dj[0] = -j[1]
        dy[0] = -y[1]
        if lmax >= 1:
            dj[1:] = j[:lmax] - (ls[1:] + 1) / x * j[1 : lmax + 1]
            dy[1:] = y[:lmax] - (ls[1:] + 1) / x * y[1 : lmax + 1]
    return j[: lmax + 1], y[: lmax + 1], dj, dy


def sph_bessel(kind: str, l: int, x: float, derivative: bool = False) -> complex:
    """Scalar spherical Bessel / Hankel function.

    ``kind`` is ``"j"`` (regular), ``"y"`` (irregular) or ``"h1"``
    (outgoing, ``j + i y``).
    """
    if kind not in ("j", "y", "h1"):
        raise InvalidArgument(f"unknown Bessel kind {kind!r}")
    if int(l) != l or l < 0:
        raise InvalidArgument(f"order must be an integer >= 0, got {l}")
    if not x > 0:
        raise DomainError(f"argument must be positive, got {x}")
    l = int(l)
    if derivative:
        j, y, dj, dy = spherical_jy_derivs(l, x)
        jv, yv = float(dj[l]), float(dy[l])
    else:
        j, y = spherical_jy(l, x)
        jv, yv = float(j[l]), float(y[l])
    if kind == "j":
        return complex(jv)
    if kind == "y":
        return complex(yv)
    return complex(jv, yv)
