from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from starscatter.errors import DuplicateCoefficient, InvalidArgument, InvalidShape, ParseError
from starscatter.geometry import (
    RadialShape,
    eval_radius,
    project_starlike,
    rescale_to_volume,
    rotate_shape,
    surface_frame,
    surface_frames,
    volume,
)
from starscatter.mathcore import build_sphere_grid, real_sph_harm, sh_count

from .conftest import SQRT_4PI, random_dirs


def random_shape(seed: int, lmax: int = 3, amp: float = 0.08) -> RadialShape:
    rng = np.random.default_rng(seed)
    c = amp * rng.standard_normal(sh_count(lmax))
    c[0] = SQRT_4PI * (1.0 + rng.uniform(0, 0.5))
    return RadialShape(lmax, c)


def test_eval_radius_examples():
    assert eval_radius(RadialShape.sphere(), [0, 0, 1]) == pytest.approx(1.0, abs=1e-15)
    s = RadialShape.from_terms({(0, 0): SQRT_4PI, (1, 0): 0.2})
    assert eval_radius(s, [0, 0, 1]) == pytest.approx(1 + 0.2 * math.sqrt(3 / (4 * math.pi)), abs=1e-15)


def test_eval_radius_matches_naive_sum(rng):
    s = random_shape(1)
    for d in random_dirs(rng, 10):
        naive = sum(
            s.coeff(l, m) * real_sph_harm(l, m, d) for l in range(s.lmax + 1) for m in range(-l, l + 1)
        )
        assert abs(eval_radius(s, d) - naive) <= 1e-13


def test_invalid_shapes():
    with pytest.raises(InvalidShape):
        RadialShape(0, [0.0])
    with pytest.raises(InvalidShape):
        RadialShape.from_terms({(0, 0): 1.0, (1, 0): 3.0})
    with pytest.raises(InvalidArgument):
        RadialShape(1, [1.0, 2.0])
    with pytest.raises(InvalidArgument):
        eval_radius(RadialShape.sphere(), [1, 1, 0])


def test_sphere_frames():
    f = surface_frame(RadialShape.sphere(), [1, 0, 0])
    assert np.allclose(f.point, [1, 0, 0], atol=1e-15)
    assert np.allclose(f.outward_normal, [1, 0, 0], atol=1e-15)
    assert f.area_element == pytest.approx(1.0, abs=1e-14)
    d = np.array([0.36, 0.48, 0.8])
    assert surface_frame(RadialShape.sphere(2.0), d).area_element == pytest.approx(4.0, abs=1e-13)


def test_normal_matches_finite_difference_tangents(rng):
    s = RadialShape.from_terms({(0, 0): SQRT_4PI, (1, 0): 0.1 * math.sqrt(4 * math.pi / 3), (2, 1): 0.07})

    def point(theta, phi):
        d = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
        return eval_radius(s, d) * d, d

    h = 1e-6
    for theta, phi in [(0.7, 0.3), (1.9, -2.0), (2.6, 1.1)]:
        _, d = point(theta, phi)
        t_theta = (point(theta + h, phi)[0] - point(theta - h, phi)[0]) / (2 * h)
        t_phi = (point(theta, phi + h)[0] - point(theta, phi - h)[0]) / (2 * h)
        n_fd = np.cross(t_theta, t_phi)
        n_fd /= np.linalg.norm(n_fd)
        f = surface_frame(s, d)
        assert np.abs(f.outward_normal - n_fd).max() <= 1e-8
        # surface area per solid angle: |t_theta x t_phi| / sin(theta)
        area_fd = np.linalg.norm(np.cross(t_theta, t_phi)) / math.sin(theta)
        assert abs(f.area_element - area_fd) <= 1e-7


@given(st.integers(0, 10_000))
def test_frame_invariants(seed):
    s = random_shape(seed)
    d = random_dirs(np.random.default_rng(seed), 20)
    f = surface_frames(s, d)
    assert np.abs(np.linalg.norm(f.normals, axis=1) - 1).max() <= 1e-12
    assert np.all(f.area_element >= f.radius**2 * (1 - 1e-14))
    assert np.all(np.einsum("nc,nc->n", f.normals, d) > 0)


def test_volume_examples():
    assert volume(RadialShape.sphere()) == pytest.approx(4 * math.pi / 3, abs=1e-10)
    assert volume(RadialShape.sphere(2.0)) == pytest.approx(32 * math.pi / 3, abs=1e-10)
    s = RadialShape.from_terms({(0, 0): SQRT_4PI, (2, 0): 0.3})
    g = build_sphere_grid(64)
    brute = float(g.weights @ s.radius(g.nodes) ** 3) / 3
    assert abs(volume(s) - brute) <= 1e-8
    with pytest.raises(InvalidArgument):
        volume(s, build_sphere_grid(3))


@pytest.mark.parametrize("scale", [0.5, 2.0, 3.0])
def test_volume_scaling(scale):
    s = random_shape(7)
    v, vs = volume(s), volume(s.scaled(scale))
    assert abs(vs - scale**3 * v) <= 1e-12 * abs(vs)


def test_volume_rotation_invariance():
    s = random_shape(11)
    R = Rotation.from_euler("zyz", [0.4, 1.1, -0.7]).as_matrix()
    r = rotate_shape(s, R)
    assert abs(volume(r) - volume(s)) <= 1e-9 * volume(s)
    d = np.array([0.2, -0.3, 0.9327379053088815])
    assert r.radius((R @ d)[None])[0] == pytest.approx(s.radius(d[None])[0], abs=1e-12)


def test_rescale_to_volume():
    s = random_shape(5)
    assert volume(rescale_to_volume(s, 2.5)) == pytest.approx(2.5, rel=1e-12)


def test_project_starlike_raises_constant_term():
    c = np.zeros(sh_count(1))
    c[0], c[2] = 0.1, 1.0
    out = project_starlike(1, c, 0.05)
    assert RadialShape(1, out).radius(build_sphere_grid(10).nodes).min() >= 0.05 - 1e-12
    assert out[2] == c[2]


# -- serialization -------------------------------------------------------------------
def test_unit_sphere_file():
    s = RadialShape.from_json('{"L":0, "coeffs":[{"l":0,"m":0,"c":3.5449077018}]}')
    assert abs(s.radius(build_sphere_grid(4).nodes) - 1).max() <= 1e-9


@given(st.integers(0, 10_000), st.integers(0, 4))
def test_round_trip_bit_identical(seed, lmax):
    s = random_shape(seed, lmax)
    back = RadialShape.from_json(s.to_json())
    assert back.lmax == s.lmax
    assert back.coeffs.tobytes() == s.coeffs.tobytes()


def test_parse_errors():
    with pytest.raises(ParseError):
        RadialShape.from_json("{not json")
    with pytest.raises(ParseError):
        RadialShape.from_json('{"L": 0}')
    with pytest.raises(ParseError):
        RadialShape.from_json('{"L": 0, "coeffs": [{"l": 0, "m": 0}]}')
    with pytest.raises(ParseError):
        RadialShape.from_json('{"L": 0, "coeffs": [{"l": 1, "m": 0, "c": 1.0}]}')
    dup = {"L": 0, "coeffs": [{"l": 0, "m": 0, "c": 3.0}, {"l": 0, "m": 0, "c": 3.0}]}
    with pytest.raises(DuplicateCoefficient):
        RadialShape.from_json(json.dumps(dup))
    with pytest.raises(InvalidShape):
        RadialShape.from_json('{"L": 0, "coeffs": [{"l": 0, "m": 0, "c": 0}]}')


def test_shape_is_immutable():
    s = RadialShape.sphere()
    with pytest.raises(ValueError):
        s.coeffs[0] = 2.0
