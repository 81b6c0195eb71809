from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from starscatter.errors import IncompleteData, InvalidArgument, ParseError
from starscatter.forward import (
    BoundaryCondition,
    ExteriorSolver,
    FarFieldTable,
    ScatterProblem,
    compute_far_field_table,
    far_field_amplitude,
    solve_exterior,
    sphere_far_field_table,
    sphere_series_amplitude,
    sphere_series_cross_section,
    sphere_series_field,
    sphere_t_matrix,
)
from starscatter.geometry import RadialShape
from starscatter.mathcore import build_sphere_grid, cached_grid, legendre_p, sph_bessel

from .conftest import random_dirs

UNIT = RadialShape.sphere()


# -- partial-wave oracle ---------------------------------------------------------
def test_series_low_frequency_limit():
    for cg in (-1.0, 0.0, 0.7, 1.0):
        assert abs(sphere_series_amplitude(1.0, 1e-4, cg) - (-1.0)) <= 1e-3


def test_series_depends_only_on_cos_gamma(rng):
    th, om = random_dirs(rng, 2)
    a = sphere_series_amplitude(1.0, 2.0, -th @ om)
    b = sphere_series_amplitude(1.0, 2.0, -om @ th)
    assert a == b


def test_series_matches_direct_sum():
    # independent evaluation from scalar Bessel/Hankel calls
    x, cg = 2.0, 0.3
    ref = 0j
    for l in range(40):
        ref += (2 * l + 1) * sph_bessel("j", l, x) / sph_bessel("h1", l, x) * legendre_p(l, cg)
    ref *= 1j / x
    assert abs(sphere_series_amplitude(1.0, x, cg) - ref) <= 1e-13 * abs(ref)


def test_series_truncation_tail_negligible():
    t = sphere_t_matrix(1.0, 2.0, "dirichlet")
    t_long = sphere_t_matrix(1.0, 2.0, "dirichlet", lmax=t.size + 20)
    assert np.abs(t_long[t.size:]).max() <= 1e-12 * np.abs(t).max()


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_series_cross_section_is_angular_integral(bc):
    # C = int |A|^2 dOmega = 2 pi int_{-1}^{1} |A(c)|^2 dc for the ball
    ref, _ = quad(lambda c: abs(sphere_series_amplitude(1.0, 2.0, c, bc)) ** 2, -1, 1,
                  epsabs=0.0, epsrel=1e-12, limit=200)
    assert abs(sphere_series_cross_section(1.0, 2.0, bc) - 2 * math.pi * ref) <= 1e-10 * 2 * math.pi * ref


def test_series_optical_theorem():
    for bc in ("dirichlet", "neumann"):
        fwd = sphere_series_amplitude(1.0, 2.0, 1.0, bc)
        assert abs(fwd.imag - 2.0 / (4 * math.pi) * sphere_series_cross_section(1.0, 2.0, bc)) <= 1e-12


def test_series_field_far_zone_matches_amplitude():
    d = np.array([0.0, 0.0, 1.0])  # propagation direction; incidence omega = -d
    r = 4000.0
    th = np.array([0.6, 0.0, 0.8])
    u = sphere_series_field(1.0, 2.0, (r * th)[None], d)[0]
    A = sphere_series_amplitude(1.0, 2.0, th @ d)
    assert abs(u * r / np.exp(2j * r) - A) <= 5e-3


def test_series_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        sphere_series_amplitude(1.0, 0.0, 0.5)
    with pytest.raises(InvalidArgument):
        sphere_series_amplitude(-1.0, 1.0, 0.5)
    with pytest.raises(InvalidArgument):
        sphere_series_amplitude(1.0, 1.0, 1.5)


# -- boundary integral solver ------------------------------------------------------
@pytest.fixture(scope="module")
def sphere_solver():
    return ExteriorSolver(UNIT, 2.0, "dirichlet", cached_grid(24))


def test_boundary_residual_random_points(sphere_solver, rng):
    om = np.array([[0.0, 0.0, 1.0]])
    vals = sphere_solver.solve(om)
    res = sphere_solver.boundary_residual(vals, om, random_dirs(rng, 50))
    assert res.max() <= 1e-3


def test_scattered_field_matches_series(sphere_solver):
    om = np.array([0.0, 0.6, 0.8])
    vals = sphere_solver.solve(om[None])
    x = np.array([[3.0, 0.0, 0.0]])
    u = sphere_solver.scattered_field(vals, x)[0, 0]
    ref = sphere_series_field(1.0, 2.0, x, -om)[0]
    assert abs(u - ref) <= 1e-3 * abs(ref)


def test_amplitude_depends_only_on_angle(sphere_solver, rng):
    gamma = 1.1
    vals = []
    for _ in range(10):
        om = random_dirs(rng, 1)[0]
        perp = np.cross(om, random_dirs(rng, 1)[0])
        perp /= np.linalg.norm(perp)
        th = -math.cos(gamma) * om + math.sin(gamma) * perp
        dens = sphere_solver.density(om)
        vals.append(far_field_amplitude(dens, UNIT, th))
    vals = np.array(vals)
    assert np.abs(vals - vals[0]).max() <= 1e-6


def test_forward_and_backscatter_match_series(sphere_solver):
    om = np.array([0.0, 0.0, 1.0])
    dens = sphere_solver.density(om)
    for th, cg in ((-om, 1.0), (om, -1.0)):
        ref = sphere_series_amplitude(1.0, 2.0, cg)
        assert abs(far_field_amplitude(dens, UNIT, th) - ref) <= 1e-3 * abs(ref)


def test_low_frequency_modulus():
    dens = solve_exterior(ScatterProblem(UNIT, 0.1, "dirichlet", [1, 0, 0]), build_sphere_grid(8))
    for th in ([1, 0, 0], [0, 1, 0], [-1, 0, 0]):
        assert abs(abs(far_field_amplitude(dens, UNIT, th)) - 1.0) <= 0.02


def test_scaling_symmetry():
    s = 1.5
    shape = RadialShape.from_terms({(0, 0): math.sqrt(4 * math.pi), (2, 1): 0.1})
    om, th = np.array([0.0, 0.0, 1.0]), np.array([0.6, 0.0, 0.8])
    g = cached_grid(16)
    a1 = far_field_amplitude(solve_exterior(ScatterProblem(shape, 2.0, "dirichlet", om), g), shape, th)
    big = shape.scaled(s)
    a2 = far_field_amplitude(solve_exterior(ScatterProblem(big, 2.0 / s, "dirichlet", om), g), big, th)
    assert abs(a2 - s * a1) <= 1e-3 * abs(s * a1)


@pytest.mark.parametrize("lam", [math.pi, 4.493409])
@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_no_spurious_resonance(lam, bc):
    solver = ExteriorSolver(UNIT, lam, bc, cached_grid(16))
    assert solver.rcond > 1e-3
    om = np.array([0.0, 0.0, 1.0])
    A = solver.far_field(solver.solve(om[None]), -om[None])[0, 0]
    ref = sphere_series_amplitude(1.0, lam, 1.0, bc)
    assert abs(A - ref) <= 1e-3 * abs(ref)


def test_neumann_sphere_matches_series(rng):
    solver = ExteriorSolver(UNIT, 2.0, "neumann", cached_grid(20))
    om = random_dirs(rng, 3)
    th = random_dirs(rng, 4)
    A = solver.far_field(solver.solve(om), th)
    ref = sphere_series_amplitude(1.0, 2.0, -(th @ om.T), "neumann")
    assert np.abs(A - ref).max() <= 1e-3 * np.abs(ref).max()
    assert solver.boundary_residual(solver.solve(om), om, random_dirs(rng, 20)).max() <= 1e-3


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
def test_bumpy_shape_reciprocity_and_residual(bumpy_shape, bc, rng):
    table = compute_far_field_table(bumpy_shape, [2.0], 16, bc)
    A = table.amplitudes[0]
    assert np.abs(A - A.T).max() <= 1e-6 * np.abs(A).max()
    solver = ExteriorSolver(bumpy_shape, 2.0, bc, cached_grid(16))
    om = random_dirs(rng, 2)
    assert solver.boundary_residual(solver.solve(om), om, random_dirs(rng, 30)).max() <= 1e-3


def test_problem_validation():
    with pytest.raises(InvalidArgument):
        ScatterProblem(UNIT, 0.0, "dirichlet", [0, 0, 1])
    with pytest.raises(InvalidArgument):
        ScatterProblem(UNIT, -2.0, "dirichlet", [0, 0, 1])
    with pytest.raises(InvalidArgument):
        ScatterProblem(UNIT, 2.0, "robin", [0, 0, 1])
    assert BoundaryCondition.parse("Neumann") is BoundaryCondition.NEUMANN


# -- tables ----------------------------------------------------------------------------
def test_table_text_round_trip():
    t = sphere_far_field_table(1.0, [1.5, 2.0], 4)
    back = FarFieldTable.from_text(t.to_text())
    assert back.amplitudes.tobytes() == t.amplitudes.tobytes()
    assert back.lambdas.tolist() == [1.5, 2.0] and back.bc is t.bc


def test_table_missing_rows():
    text = sphere_far_field_table(1.0, [2.0], 3).to_text()
    lines = text.splitlines(keepends=True)
    with pytest.raises(IncompleteData):
        FarFieldTable.from_text("".join(lines[:-1]))


def test_table_convention_checked():
    text = sphere_far_field_table(1.0, [2.0], 2).to_text()
    bad = text.replace("incoming-exp(-i*lambda*omega.x)", "standard")
    with pytest.raises(ParseError):
        FarFieldTable.from_text(bad)


def test_table_slice_errors():
    t = FarFieldTable.zeros([2.0], 3)
    with pytest.raises(IncompleteData):
        t.slice(1)
    amp = np.array(t.amplitudes)
    amp[0, 0, 0] = np.nan
    with pytest.raises(IncompleteData):
        FarFieldTable(t.lambdas, t.obs_grid, t.inc_grid, amp).slice(0)


def test_table_solves_are_deterministic():
    a = compute_far_field_table(UNIT, [1.0], 8)
    b = compute_far_field_table(UNIT, [1.0], 8)
    assert a.amplitudes.tobytes() == b.amplitudes.tobytes()
