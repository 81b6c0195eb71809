from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import lpmv

from starscatter.errors import DomainError, InvalidArgument
from starscatter.mathcore import (
    build_sphere_grid,
    legendre_p,
    legendre_table,
    real_sph_harm,
    real_sph_harm_table,
    sh_index,
    sph_bessel,
    sph_harm_expansion,
    spherical_jy,
    spherical_jy_derivs,
)

from .conftest import random_dirs

unit_vectors = st.tuples(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
).filter(lambda v: np.linalg.norm(v) > 0.1).map(lambda v: np.asarray(v) / np.linalg.norm(v))


# -- grids ---------------------------------------------------------------------
@pytest.mark.parametrize("order", [1, 2, 5, 12, 31])
def test_grid_invariants(order):
    g = build_sphere_grid(order)
    assert np.abs(np.linalg.norm(g.nodes, axis=1) - 1).max() <= 1e-14
    assert np.all(g.weights > 0)
    assert abs(g.weights.sum() - 4 * math.pi) <= 1e-12
    assert g.n_polar == order + 1 and g.n_azimuth == 2 * (order + 1)
    Y = real_sph_harm_table(order, g.nodes)
    assert np.abs(g.weights @ Y[:, 1:]).max() <= 1e-10


def test_grid_rejects_order_zero():
    with pytest.raises(InvalidArgument):
        build_sphere_grid(0)


def test_grid_examples():
    assert abs(build_sphere_grid(1).weights.sum() - 4 * math.pi) <= 1e-12
    g8 = build_sphere_grid(8)
    assert abs(g8.weights @ real_sph_harm_table(4, g8.nodes)[:, sh_index(4, 2)]) <= 1e-10
    g12 = build_sphere_grid(12)
    assert abs(g12.weights @ g12.nodes[:, 2] ** 2 - 4 * math.pi / 3) <= 1e-10


def test_grid_is_deterministic_and_antipodal():
    a, b = build_sphere_grid(9), build_sphere_grid(9)
    assert np.array_equal(a.nodes, b.nodes) and np.array_equal(a.weights, b.weights)
    anti = a.antipodes()
    assert np.abs(a.nodes[anti] + a.nodes).max() <= 1e-15
    assert np.array_equal(a.weights[anti], a.weights)


def test_grid_convergence_exp_z():
    # int exp(z) over the sphere = 2 pi (e - 1/e); also checked by adaptive 1D quadrature
    ref, _ = quad(lambda t: 2 * math.pi * math.exp(t), -1, 1, epsabs=0.0, epsrel=1e-13)
    assert abs(ref - 2 * math.pi * (math.e - 1 / math.e)) <= 1e-12
    errs = []
    for q in (2, 4, 8, 16):
        g = build_sphere_grid(q)
        errs.append(abs(g.weights @ np.exp(g.nodes[:, 2]) - ref))
    assert all(e2 < e1 for e1, e2 in zip(errs[:2], errs[1:3]))
    assert errs[-1] <= 1e-10


def test_product_exactness_degree():
    g = build_sphere_grid(10)
    Y = real_sph_harm_table(10, g.nodes)
    gram = (Y * g.weights[:, None]).T @ Y
    assert np.abs(gram - np.eye(gram.shape[0])).max() <= 1e-13


# -- Legendre --------------------------------------------------------------------
def test_legendre_examples():
    assert legendre_p(0, 0.3) == 1.0
    assert legendre_p(2, 1.0) == pytest.approx(1.0, abs=1e-15)
    # P_7 from its expanded coefficients
    t = -0.5
    p7 = (429 * t**7 - 693 * t**5 + 315 * t**3 - 35 * t) / 16
    assert abs(legendre_p(7, t) - p7) <= 1e-13


def test_legendre_domain():
    with pytest.raises(DomainError):
        legendre_p(3, 1.2)


@given(st.integers(0, 60), st.floats(-1, 1))
def test_legendre_bounded(l, t):
    assert abs(legendre_p(l, t)) <= 1 + 1e-12


# -- spherical harmonics ---------------------------------------------------------
def test_real_sph_harm_examples():
    assert real_sph_harm(0, 0, [0, 1, 0]) == pytest.approx(1 / math.sqrt(4 * math.pi), abs=1e-15)
    assert real_sph_harm(1, 0, [0, 0, 1]) == pytest.approx(math.sqrt(3 / (4 * math.pi)), abs=1e-15)
    with pytest.raises(InvalidArgument):
        real_sph_harm(2, 3, [0, 0, 1])


def _assoc_legendre_oracle(l, m, d):
    # scipy's lpmv carries the Condon-Shortley phase; the real basis here does not
    theta = math.acos(d[2])
    phi = math.atan2(d[1], d[0])
    am = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - am) / math.factorial(l + am))
    p = (-1) ** am * lpmv(am, l, math.cos(theta))
    if m == 0:
        return norm * p
    trig = math.cos(am * phi) if m > 0 else math.sin(am * phi)
    return math.sqrt(2) * norm * p * trig


def test_real_sph_harm_matches_associated_legendre():
    d = np.array([0.6, 0.0, 0.8])
    assert abs(real_sph_harm(3, 2, d) - _assoc_legendre_oracle(3, 2, d)) <= 1e-12
    rng = np.random.default_rng(3)
    for d in random_dirs(rng, 5):
        for l in range(9):
            for m in range(-l, l + 1):
                assert abs(real_sph_harm(l, m, d) - _assoc_legendre_oracle(l, m, d)) <= 1e-12


@given(unit_vectors, unit_vectors, st.integers(0, 10))
def test_addition_theorem(a, b, l):
    Y = real_sph_harm_table(l, np.stack([a, b]))
    lo, hi = l * l, (l + 1) ** 2
    lhs = Y[0, lo:hi] @ Y[1, lo:hi]
    rhs = (2 * l + 1) / (4 * math.pi) * legendre_p(l, float(np.clip(a @ b, -1, 1)))
    assert abs(lhs - rhs) <= 1e-10


def test_tangential_gradient_matches_finite_differences(rng):
    lmax = 6
    for p in random_dirs(rng, 4):
        _, G = real_sph_harm_table(lmax, p[None], grad=True)
        t1 = np.cross(p, [0.3, -0.2, 0.9])
        t1 /= np.linalg.norm(t1)
        t2 = np.cross(p, t1)
        h = 1e-5
        for t in (t1, t2):
            plus = (p + h * t) / np.linalg.norm(p + h * t)
            minus = (p - h * t) / np.linalg.norm(p - h * t)
            fd = (real_sph_harm_table(lmax, plus[None]) - real_sph_harm_table(lmax, minus[None]))[0] / (2 * h)
            assert np.abs(G[0] @ t - fd).max() <= 1e-8
        assert np.abs(G[0] @ p).max() <= 1e-13


def test_expansion_matches_table(rng):
    c = rng.standard_normal(25)
    d = random_dirs(rng, 30)
    Y, G = real_sph_harm_table(4, d, grad=True)
    f, g = sph_harm_expansion(4, c, d, grad=True)
    assert np.abs(f - Y @ c).max() <= 1e-13
    assert np.abs(g - np.einsum("nmc,m->nc", G, c)).max() <= 1e-13


# -- Bessel ----------------------------------------------------------------------
def test_bessel_examples():
    assert abs(sph_bessel("j", 0, math.pi)) <= 1e-14
    assert abs(sph_bessel("h1", 0, 1.0) - (-1j * np.exp(1j))) <= 1e-14
    # downward recurrence oracle for j_5(2.5), computed independently here
    x, top = 2.5, 60
    f = [0.0] * (top + 2)
    f[top] = 1e-30
    for n in range(top, 0, -1):
        f[n - 1] = (2 * n + 1) / x * f[n] - f[n + 1]
    ref = f[5] * (math.sin(x) / x) / f[0]
    assert abs(sph_bessel("j", 5, 2.5).real - ref) <= 1e-12 * abs(ref)


def test_bessel_errors():
    with pytest.raises(DomainError):
        sph_bessel("j", 1, 0.0)
    with pytest.raises(InvalidArgument):
        sph_bessel("j", -1, 1.0)
    with pytest.raises(InvalidArgument):
        sph_bessel("k", 1, 1.0)


def test_bessel_against_mpmath():
    xs = np.array([1e-3, 0.05, 0.7, 3.14159, 9.9, 31.0, 77.7, 99.9])
    j, y = spherical_jy(80, xs)
    worst = 0.0
    for li in range(0, 81, 7):
        for xi, x in enumerate(xs):
            jr = float(mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.besselj(li + 0.5, x))
            yr = float(mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.bessely(li + 0.5, x))
            if jr != 0.0 and abs(jr) > 1e-300:
                worst = max(worst, abs(j[li, xi] - jr) / abs(jr))
            if np.isfinite(y[li, xi]) and abs(yr) < 1e300:
                worst = max(worst, abs(y[li, xi] - yr) / abs(yr))
    assert worst <= 1e-12


@given(st.integers(0, 40), st.floats(0.1, 50))
def test_wronskian(l, x):
    j, y, dj, dy = spherical_jy_derivs(l, np.array([x]))
    w = j[l, 0] * dy[l, 0] - dj[l, 0] * y[l, 0]
    assert abs(w * x * x - 1.0) <= 1e-10


def test_legendre_table_shape():
    assert legendre_table(4, np.zeros((2, 3))).shape == (5, 2, 3)
