"""Spectral Nystrom discretization of layer potentials on starlike surfaces.

Surface integrals are pulled back to the unit sphere. For a target at
parameter direction ``p`` the sphere is rotated so that ``p`` becomes the
north pole; in the rotated polar coordinates the kernel factors as
``|p - q|**-1`` times a function that is smooth in ``cos`` of the rotated
polar angle once averaged over azimuth. The singular factor is integrated
exactly by modified Gauss-Legendre weights

    alpha_j = w_j * sum_{l<=n} P_l(t_j),

which reproduce ``int P_l(t) / sqrt(2 (1 - t)) dt = 2 / (2l + 1)``. The
density is carried to the rotated nodes through its spherical-harmonic
interpolant of degree ``grid.order``.

Targets sharing a polar angle (a grid ring) differ only by a rotation about
the z axis, which acts on harmonic coefficients as a 2x2 mixing of the
``(l, m)`` / ``(l, -m)`` pair; harmonics at rotated nodes are therefore
evaluated once per ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import RadialShape, SurfaceFrames, surface_frames
from ..mathcore import (
    FOUR_PI,
    SphereGrid,
    cached_grid,
    legendre_table,
    real_sph_harm_table,
    sh_index,
)

RING_CACHE_BYTES = 192 * 2**20


@dataclass(frozen=True, eq=False)
class LocalRule:
    """Product rules in pole-centred coordinates.

    ``weights * pole_distance`` integrates ``1/|p - q|`` times a smooth
    function; ``smooth_weights`` is the plain product rule for smooth
    integrands.
    """

    nodes: np.ndarray
    weights: np.ndarray
    pole_distance: np.ndarray
    smooth_weights: np.ndarray


def local_rule(order: int) -> LocalRule:
    g = cached_grid(order)
    t = np.asarray(g.cos_theta)
    alpha = g.polar_weights * legendre_table(order, t).sum(axis=0)
    weights = np.repeat(alpha * (2.0 * math.pi / g.n_azimuth), g.n_azimuth)
    dist = np.repeat(np.sqrt(2.0 * (1.0 - t)), g.n_azimuth)
    return LocalRule(np.asarray(g.nodes), weights, dist, np.asarray(g.weights))


def _cmatmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Complex ``A`` times real ``B`` using contiguous real GEMMs."""
    n = A.shape[0]
    P = np.concatenate([A.real, A.imag], axis=0) @ B
    return P[:n] + 1j * P[n:]


def _rcmatmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Real ``A`` times complex ``B`` using contiguous real GEMMs."""
    n = B.shape[1]
    P = A @ np.concatenate([B.real, B.imag], axis=1)
    return P[:, :n] + 1j * P[:, n:]


def _rot_y(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _zrot_pairs(lmax: int):
    pos, neg, ms = [], [], []
    for l in range(1, lmax + 1):
        for m in range(1, l + 1):
            pos.append(sh_index(l, m))
            neg.append(sh_index(l, -m))
            ms.append(m)
    return np.array(pos, dtype=int), np.array(neg, dtype=int), np.array(ms, dtype=float)


def _polar_groups(theta: np.ndarray):
    """Group target indices by (numerically) equal polar angle."""
    key = np.round(theta, 12)
    uniq, inverse = np.unique(key, return_inverse=True)
    return [(float(theta[inverse == i][0]), np.flatnonzero(inverse == i)) for i in range(len(uniq))]


class Discretization:
    """Boundary of ``shape`` sampled at the nodes of ``grid``.

    Densities are vectors of values at the grid nodes. ``quad_order`` sets the
    local singular rule (defaults to the grid order).
    """

    def __init__(self, shape: RadialShape, grid: SphereGrid, quad_order: int | None = None):
        self.shape = shape
        self.grid = grid
        self.lmax = grid.order
        self.quad_order = int(quad_order or grid.order)
        self.frames: SurfaceFrames = surface_frames(shape, grid.nodes)
        Y = real_sph_harm_table(self.lmax, grid.nodes)
        # harmonic coefficients of a density = proj @ values
        self.proj = (Y * grid.weights[:, None]).T
        self.rule = local_rule(self.quad_order)
        self._pairs = _zrot_pairs(self.lmax)
        self._ring_cache: dict[float, tuple] = {}
        self._ring_bytes = 0

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def quad_weights(self) -> np.ndarray:
        """Surface quadrature weights ``w * J`` for smooth integrands."""
        return self.grid.weights * self.frames.area_element

    # -- interpolation ------------------------------------------------------
    def interpolation_rows(self, dirs) -> np.ndarray:
        return real_sph_harm_table(self.lmax, dirs) @ self.proj

    def gradient_rows(self, dirs) -> np.ndarray:
        """Surface gradient on the boundary, shape (T, 3, N).

        With ``s`` the gradient on the parameter sphere, ``g`` that of ``r``,
        the boundary gradient is ``(r I + p g^T)(I - g g^T / (r^2 + |g|^2)) s / r^2``.
        """
        dirs = np.asarray(dirs, dtype=float)
        _, dY = real_sph_harm_table(self.lmax, dirs, grad=True)
        T, M = dY.shape[0], dY.shape[1]
        s = (np.ascontiguousarray(dY.transpose(0, 2, 1)).reshape(3 * T, M) @ self.proj).reshape(T, 3, -1)
        f = surface_frames(self.shape, dirs)
        r, g = f.radius, f.radius_gradient
        eye = np.eye(3)[None]
        den = (r * r + np.einsum("tc,tc->t", g, g))[:, None, None]
        left = r[:, None, None] * eye + dirs[:, :, None] * g[:, None, :]
        right = eye - g[:, :, None] * g[:, None, :] / den
        Mt = np.einsum("tab,tbc->tac", left, right) / (r * r)[:, None, None]
        out = np.empty_like(s)
        for a in range(3):
            out[:, a, :] = sum(Mt[:, a, b, None] * s[:, b, :] for b in range(3))
        return out

    # -- singular layer operators --------------------------------------------
    def _ring_harmonics(self, theta: float):
        Yr = self._ring_cache.get(theta)
        if Yr is None:
            U = self.rule.nodes @ _rot_y(theta).T
            Yr = (U, real_sph_harm_table(self.lmax, U))
            if self._ring_bytes + Yr[1].nbytes <= RING_CACHE_BYTES:
                self._ring_cache[theta] = Yr
                self._ring_bytes += Yr[1].nbytes
        return Yr

    def layer_rows(self, kappa: float, dirs, combos: dict) -> dict:
        """Rows of single/double-layer combinations at boundary targets.

        Parameters
        ----------
        kappa : float
            Wavenumber.
        dirs : array_like, shape (T, 3)
            Parameter directions of the targets (need not be grid nodes).
        combos : dict
            ``name -> (a_single, b_double)``; each output row discretizes
            ``a * S + b * D`` with ``S`` the single layer ``int G phi`` and
            ``D`` the direct value of the double layer ``int dG/dn_y phi``.

        Returns
        -------
        dict of name -> complex ndarray, shape (T, N)
        """
        dirs = np.asarray(dirs, dtype=float).reshape(-1, 3)
        tframes = surface_frames(self.shape, dirs)
        theta = np.arccos(np.clip(dirs[:, 2], -1.0, 1.0))
        phi = np.arctan2(dirs[:, 1], dirs[:, 0])
        names = list(combos)
        out = {name: np.empty((len(dirs), self.size), dtype=complex) for name in names}
        pos, neg, ms = self._pairs
        w_sing = self.rule.weights * self.rule.pole_distance
        w_smooth = self.rule.smooth_weights
        for th, idx in _polar_groups(theta):
            U, Yr = self._ring_harmonics(th)
            ph = phi[idx]
            cph, sph = np.cos(ph), np.sin(ph)
            # rotated source directions for each target, shape (G, N', 3)
            V = np.empty((len(idx),) + U.shape)
            V[..., 0] = cph[:, None] * U[None, :, 0] - sph[:, None] * U[None, :, 1]
            V[..., 1] = sph[:, None] * U[None, :, 0] + cph[:, None] * U[None, :, 1]
            V[..., 2] = U[None, :, 2]
            src = surface_frames(self.shape, V)
            diff = src.points - tframes.points[idx][:, None, :]
            R = np.sqrt(np.einsum("gsc,gsc->gs", diff, diff))
            kR = kappa * R
            c, s = np.cos(kR), np.sin(kR)
            inv = 1.0 / (FOUR_PI * R)
            # cos(kR)/R carries the weak singularity; sin(kR)/R is smooth
            G_sing, G_smooth = c * inv, 1j * s * inv
            dn = np.einsum("gsc,gsc->gs", diff, src.normals) * inv / (R * R)
            dG_sing = -(c + kR * s) * dn
            dG_smooth = 1j * (kR * c - s) * dn
            Js = src.area_element * w_sing[None, :]
            Jr = src.area_element * w_smooth[None, :]
            cm = np.cos(ph[:, None] * ms[None, :])
            sm = np.sin(ph[:, None] * ms[None, :])
            for name in names:
                a, b = combos[name]
                H = (a * G_sing + b * dG_sing) * Js + (a * G_smooth + b * dG_smooth) * Jr
                C = _cmatmul(H, Yr)
                # z-rotation of harmonic coefficients by the target azimuth
                Cp, Cn = C[:, pos], C[:, neg]
                C[:, pos] = cm * Cp - sm * Cn
                C[:, neg] = cm * Cn + sm * Cp
                out[name][idx] = _cmatmul(C, self.proj)
        return out
