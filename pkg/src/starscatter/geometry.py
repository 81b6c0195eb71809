"""Starlike obstacles described by a finite real-harmonic radial function.

The boundary is ``x(p) = r(p) p`` for unit vectors ``p`` with
``r(p) = sum_{l<=L} c_{l,m} Y_{l,m}(p)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DuplicateCoefficient, InvalidArgument, InvalidShape, ParseError
from .mathcore import (
    FOUR_PI,
    SphereGrid,
    cached_grid,
    real_sph_harm_table,
    sh_count,
    sh_index,
    sph_harm_expansion,
)

SQRT_4PI = math.sqrt(FOUR_PI)


def default_validation_order(lmax: int) -> int:
    return 2 * lmax + 8


@dataclass(frozen=True, eq=False)
class RadialShape:
    """Immutable starlike shape.

    Attributes
    ----------
    lmax : int
        Maximum harmonic degree L.
    coeffs : ndarray, shape ((L+1)**2,)
        Real coefficients in ``sh_index`` order (length units).
    validation_order : int, optional
        Order of the grid on which positivity of ``r`` is enforced;
        defaults to ``2 L + 8``.
    """

    lmax: int
    coeffs: np.ndarray
    validation_order: int | None = field(default=None, repr=False)

    def __post_init__(self):
        if int(self.lmax) != self.lmax or self.lmax < 0:
            raise InvalidArgument(f"max degree must be an integer >= 0, got {self.lmax}")
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.size != sh_count(self.lmax):
            raise InvalidArgument(
                f"expected {sh_count(self.lmax)} coefficients for L={self.lmax}, got {c.size}"
            )
        if not np.all(np.isfinite(c)):
            raise InvalidShape("non-finite shape coefficient")
        c.flags.writeable = False
        object.__setattr__(self, "lmax", int(self.lmax))
        object.__setattr__(self, "coeffs", c)
        order = self.validation_order
        if order is None:
            order = default_validation_order(self.lmax)
        object.__setattr__(self, "validation_order", int(order))
        rmin = float(self.radius(cached_grid(self.validation_order).nodes).min())
        if not rmin > 0.0:
            raise InvalidShape(f"radial function not positive (min {rmin:.3e} on validation grid)")

    # -- construction -------------------------------------------------------
    @classmethod
    def sphere(cls, radius: float = 1.0) -> "RadialShape":
        return cls(0, [radius * SQRT_4PI])

    @classmethod
    def from_terms(cls, terms: dict, lmax: int | None = None) -> "RadialShape":
        """Build from ``{(l, m): c}``."""
        if lmax is None:
            lmax = max(l for l, _ in terms)
        c = np.zeros(sh_count(lmax))
        for (l, m), v in terms.items():
            if l > lmax or abs(m) > l:
                raise InvalidArgument(f"invalid harmonic index ({l}, {m})")
            c[sh_index(l, m)] = v
        return cls(lmax, c)

    def with_coeffs(self, coeffs) -> "RadialShape":
        return RadialShape(self.lmax, coeffs, self.validation_order)

    def scaled(self, s: float) -> "RadialShape":
        return self.with_coeffs(s * self.coeffs)

    def coeff(self, l: int, m: int) -> float:
        if l > self.lmax:
            return 0.0
        return float(self.coeffs[sh_index(l, m)])

    def padded(self, lmax: int) -> "RadialShape":
        """Same radial function expressed with max degree ``lmax`` (truncating if smaller)."""
        c = np.zeros(sh_count(lmax))
        n = min(c.size, self.coeffs.size)
        c[:n] = self.coeffs[:n]
        return RadialShape(lmax, c)

    # -- evaluation ---------------------------------------------------------
    def radius(self, dirs) -> np.ndarray:
        return sph_harm_expansion(self.lmax, self.coeffs, dirs)

    def radius_and_gradient(self, dirs):
        """``r`` and its tangential gradient on the unit sphere."""
        return sph_harm_expansion(self.lmax, self.coeffs, dirs, grad=True)

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        records = []
        for l in range(self.lmax + 1):
            for m in range(-l, l + 1):
                records.append({"l": l, "m": m, "c": float(self.coeffs[sh_index(l, m)])})
        return {"L": self.lmax, "coeffs": records}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def from_dict(cls, data: dict, validation_order: int | None = None) -> "RadialShape":
        if not isinstance(data, dict) or "L" not in data or "coeffs" not in data:
            raise ParseError('shape record needs fields "L" and "coeffs"')
        L = data["L"]
        if isinstance(L, bool) or not isinstance(L, int) or L < 0:
            raise ParseError(f'"L" must be a nonnegative integer, got {L!r}')
        if not isinstance(data["coeffs"], list):
            raise ParseError('"coeffs" must be a list of {l, m, c} records')
        c = np.zeros(sh_count(L))
        seen = set()
        for rec in data["coeffs"]:
            try:
                l, m, v = rec["l"], rec["m"], rec["c"]
            except (TypeError, KeyError) as exc:
                raise ParseError(f"malformed coefficient record {rec!r}") from exc
            if not (isinstance(l, int) and isinstance(m, int)) or isinstance(v, bool):
                raise ParseError(f"malformed coefficient record {rec!r}")
            if not isinstance(v, (int, float)):
                raise ParseError(f"coefficient value must be a number: {rec!r}")
            if l < 0 or l > L or abs(m) > l:
                raise ParseError(f"coefficient index out of range for L={L}: {rec!r}")
            if (l, m) in seen:
                raise DuplicateCoefficient(f"duplicate coefficient (l={l}, m={m})")
            seen.add((l, m))
            c[sh_index(l, m)] = float(v)
        return cls(L, c, validation_order)

    @classmethod
    def from_json(cls, text: str, validation_order: int | None = None) -> "RadialShape":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"shape file is not valid JSON: {exc}") from exc
        return cls.from_dict(data, validation_order)


@dataclass(frozen=True)
class SurfaceFrame:
    point: np.ndarray
    outward_normal: np.ndarray
    area_element: float


@dataclass(frozen=True, eq=False)
class SurfaceFrames:
    """Vectorized boundary geometry at a batch of parameter directions.

    ``area_element`` is the surface area per unit solid angle,
    ``r * sqrt(r**2 + |grad r|**2)``.
    """

    directions: np.ndarray
    radius: np.ndarray
    radius_gradient: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    area_element: np.ndarray


def surface_frames(shape: RadialShape, dirs) -> SurfaceFrames:
    dirs = np.asarray(dirs, dtype=float)
    r, g = shape.radius_and_gradient(dirs)
    if np.any(r <= 0):
        raise InvalidShape("radial function not positive at a requested direction")
    s = np.sqrt(r * r + np.einsum("...c,...c->...", g, g))
    normals = (r[..., None] * dirs - g) / s[..., None]
    return SurfaceFrames(dirs, r, g, r[..., None] * dirs, normals, r * s)


def eval_radius(shape: RadialShape, direction) -> float:
    d = np.asarray(direction, dtype=float).reshape(3)
    if abs(np.linalg.norm(d) - 1.0) > 1e-10:
        raise InvalidArgument(f"direction {d} is not a unit vector")
    r = float(shape.radius(d[None, :])[0])
    if not r > 0:
        raise InvalidShape(f"radial function {r:.3e} <= 0 in direction {d}")
    return r


def surface_frame(shape: RadialShape, direction) -> SurfaceFrame:
    d = np.asarray(direction, dtype=float).reshape(1, 3)
    if abs(np.linalg.norm(d) - 1.0) > 1e-10:
        raise InvalidArgument(f"direction {d[0]} is not a unit vector")
    f = surface_frames(shape, d)
    return SurfaceFrame(f.points[0], f.normals[0], float(f.area_element[0]))


def volume(shape: RadialShape, grid: SphereGrid | None = None) -> float:
    """Enclosed volume ``(1/3) * integral of r**3`` over the unit sphere."""
    need = 3 * shape.lmax + 2
    if grid is None:
        grid = cached_grid(max(need, 2))
    elif grid.order < need:
        raise InvalidArgument(f"volume needs grid order >= {need}, got {grid.order}")
    r = shape.radius(grid.nodes)
    return float(grid.weights @ r**3) / 3.0


def project_starlike(lmax: int, coeffs, floor: float, order: int | None = None) -> np.ndarray:
    """Raise the constant coefficient so that ``min r >= floor`` on the validation grid."""
    c = np.array(coeffs, dtype=float)
    if order is None:
        order = default_validation_order(lmax)
    rmin = float((real_sph_harm_table(lmax, cached_grid(order).nodes) @ c).min())
    if rmin < floor:
        c[0] += (floor - rmin) * SQRT_4PI
    return c


def rotate_shape(shape: RadialShape, rotation) -> RadialShape:
    """Shape whose radial function is ``r(R^T p)``, i.e. the body rotated by R.

    Degree is preserved by rotations, so resampling on a grid exact to degree
    ``2 L`` and projecting is exact up to rounding.
    """
    R = np.asarray(rotation, dtype=float)
    grid = cached_grid(max(shape.lmax, 1))
    r_rot = shape.radius(grid.nodes @ R)
    Y = real_sph_harm_table(shape.lmax, grid.nodes)
    return shape.with_coeffs((Y * grid.weights[:, None]).T @ r_rot)


def rescale_to_volume(shape: RadialShape, target: float) -> RadialShape:
    """Uniformly scaled copy of ``shape`` enclosing volume ``target``."""
    if not target > 0:
        raise InvalidArgument(f"target volume must be positive, got {target}")
    return shape.scaled((target / volume(shape)) ** (1.0 / 3.0))
