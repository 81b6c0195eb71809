"""Recovering a starlike radial function from cross-section data.

The unknowns are the real harmonic coefficients ``c_{l,m}`` (``l <= L_inv``)
of the radial function. The objective is

    F(c) = 1/2 sum_{lam, theta} w_theta (C_model - C_data)^2
           + alpha/2 sum l (l+1) c_{l,m}^2,

minimized by Levenberg-Marquardt with a central finite-difference Jacobian.
Cross sections are unchanged by translating the obstacle, so the degree-1
coefficients (to first order a translation) are held fixed by default.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, InvalidIterate, InvalidShape
from .forward.solver import BoundaryCondition
from .forward.table import compute_far_field_table
from .geometry import RadialShape, project_starlike, volume
from .mathcore import cached_grid, sh_count, sh_degrees
from .smatrix import CrossSectionData, cross_sections

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReconstructionConfig:
    """Settings for :func:`reconstruct_shape`.

    ``order`` is the forward solver grid order; ``None`` takes it from the
    data provenance. ``mu0`` is the initial damping relative to the mean
    diagonal of the Gauss-Newton matrix.
    """

    linv: int = 2
    alpha: float = 0.0
    max_iter: int = 30
    grad_tol: float = 1e-9
    step_tol: float = 1e-10
    fd_step: float = 1e-4
    mu0: float = 1e-3
    mu_increase: float = 10.0
    mu_decrease: float = 0.3
    mu_max: float = 1e10
    backtrack_steps: int = 3
    radius_floor: float = 1e-2
    fix_translation: bool = True
    order: int | None = None
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.linv < 0:
            raise InvalidArgument("L_inv must be >= 0")
        if self.alpha < 0:
            raise InvalidArgument("regularization weight must be >= 0")
        for name in ("grad_tol", "step_tol", "fd_step", "mu0", "radius_floor"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if self.max_iter < 0 or self.backtrack_steps < 0:
            raise InvalidArgument("iteration limits must be >= 0")
        BoundaryCondition.parse(self.bc)


@dataclass(frozen=True, eq=False)
class MisfitReport:
    misfit: float
    gradient: np.ndarray
    residuals: np.ndarray
    regularization: float
    jacobian: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    shape: RadialShape
    log: list
    converged: bool
    status: str
    report: MisfitReport

    def log_text(self) -> str:
        lines = ["# iteration misfit grad_norm damping"]
        for it, f, g, mu in self.log:
            lines.append(f"{it} {f:.17g} {g:.17g} {mu:.17g}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Forward model
# ---------------------------------------------------------------------------
def model_cross_sections(shape: RadialShape, lambdas, order: int, obs_order: int, bc="dirichlet") -> np.ndarray:
    """``C(lam_k, theta_i)`` on the order-``obs_order`` grid, shape (L, N)."""
    table = compute_far_field_table(shape, lambdas, order, bc, obs_order=obs_order)
    return cross_sections(table)


def synthesize_cross_section_data(shape: RadialShape, lambdas, order: int, bc="dirichlet",
                                  obs_order: int = 6, noise_sigma: float = 0.0,
                                  seed: int | None = None) -> CrossSectionData:
    """Forward-simulated data with optional additive Gaussian noise."""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(lam <= 0):
        raise InvalidArgument("wavenumbers must be positive")
    if noise_sigma < 0:
        raise InvalidArgument("noise level must be >= 0")
    values = model_cross_sections(shape, lam, order, obs_order, bc)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + noise_sigma * rng.standard_normal(values.shape)
    prov = {
        "source": "synthetic",
        "shape": shape.to_dict(),
        "order": int(order),
        "bc": BoundaryCondition.parse(bc).value,
        "noise_sigma": float(noise_sigma),
        "seed": seed,
    }
    return CrossSectionData(lam, cached_grid(obs_order), values, prov)


def frequency_window(lam0: float, count: int = 3, rel: float = 0.05) -> np.ndarray:
    """``count`` wavenumbers spanning ``lam0 (1 +- rel)``."""
    if not lam0 > 0:
        raise InvalidArgument("center wavenumber must be positive")
    if count == 1:
        return np.array([float(lam0)])
    return lam0 * (1.0 + rel * np.linspace(-1.0, 1.0, count))


# ---------------------------------------------------------------------------
# Objective
# ---------------------------------------------------------------------------
class _Objective:
    def __init__(self, data: CrossSectionData, config: ReconstructionConfig):
        self.data = data
        self.config = config
        self.order = config.order if config.order is not None else data.provenance.get("order")
        if self.order is None:
            raise InvalidArgument("forward grid order not given and not recorded in the data")
        self.order = int(self.order)
        # data generated under a known condition override the configured one
        self.bc = BoundaryCondition.parse(data.provenance.get("bc", config.bc))
        self.linv = config.linv
        self.penalty = config.alpha * (sh_degrees(self.linv) * (sh_degrees(self.linv) + 1.0))
        free = np.ones(sh_count(self.linv), dtype=bool)
        if config.fix_translation and self.linv >= 1:
            free[1:4] = False
        self.free = np.flatnonzero(free)
        self.w = data.grid.weights
        self.evaluations = 0

    def shape(self, c) -> RadialShape:
        try:
            return RadialShape(self.linv, c)
        except InvalidShape as exc:
            raise InvalidIterate(str(exc)) from exc

    def model(self, c) -> np.ndarray:
        self.evaluations += 1
        return model_cross_sections(self.shape(c), self.data.lambdas, self.order, self.data.grid.order, self.bc)

    def value(self, c, C=None):
        if C is None:
            C = self.model(c)
        r = C - self.data.values
        data_term = 0.5 * float(np.sum(r * r * self.w[None, :]))
        reg = 0.5 * float(np.sum(self.penalty * c * c))
        return data_term + reg, r, reg

    def jacobian(self, c, step: float) -> np.ndarray:
        """Central differences of the model, shape (L*N, n_free)."""
        cols = []
        for k in self.free:
            e = np.zeros_like(c)
            e[k] = step
            cols.append(((self.model(c + e) - self.model(c - e)) / (2.0 * step)).reshape(-1))
        return np.column_stack(cols) if cols else np.zeros((self.data.values.size, 0))

    def report(self, c, step: float | None = None) -> MisfitReport:
        C = self.model(c)
        f, r, reg = self.value(c, C)
        J = self.jacobian(c, self.config.fd_step if step is None else step)
        wflat = np.tile(self.w, self.data.lambdas.size)
        g = np.zeros_like(c)
        g[self.free] = J.T @ (wflat * r.reshape(-1))
        g += self.penalty * c
        return MisfitReport(f, g, r, reg, J)


def _prepare(coeffs, config: ReconstructionConfig) -> np.ndarray:
    c = np.zeros(sh_count(config.linv))
    src = np.asarray(coeffs, dtype=float).reshape(-1)
    n = min(c.size, src.size)
    c[:n] = src[:n]
    return project_starlike(config.linv, c, config.radius_floor)


def misfit_and_gradient(coeffs, data: CrossSectionData, config: ReconstructionConfig,
                        fd_step: float | None = None) -> MisfitReport:
    """Objective, residuals and finite-difference gradient at ``coeffs``.

    Coefficients beyond ``L_inv`` are dropped; the positivity projection is
    applied before evaluation.
    """
    obj = _Objective(data, config)
    return obj.report(_prepare(coeffs, config), fd_step)


# ---------------------------------------------------------------------------
# Levenberg-Marquardt
# ---------------------------------------------------------------------------
def reconstruct_shape(data: CrossSectionData, init: RadialShape, config: ReconstructionConfig) -> ReconstructionResult:
    obj = _Objective(data, config)
    c = _prepare(init.padded(config.linv).coeffs, config)
    rep = obj.report(c)
    free = obj.free
    wflat = np.tile(obj.w, data.lambdas.size)
    mu = config.mu0
    history = [(0, rep.misfit, float(np.linalg.norm(rep.gradient)), mu)]
    status, converged = "max-iterations", False
    for it in range(1, config.max_iter + 1):
        gnorm = float(np.linalg.norm(rep.gradient))
        if gnorm <= config.grad_tol:
            status, converged = "gradient-tolerance", True
            break
        J = rep.jacobian
        H = J.T @ (wflat[:, None] * J) + np.diag(obj.penalty[free])
        scale = max(float(np.mean(np.diag(H))), 1e-300)
        accepted = False
        while mu <= config.mu_max:
            try:
                delta = np.linalg.solve(H + mu * scale * np.eye(free.size), -rep.gradient[free])
            except np.linalg.LinAlgError:
                mu *= config.mu_increase
                continue
            t = 1.0
            for _ in range(config.backtrack_steps + 1):
                trial = c.copy()
                trial[free] += t * delta
                try:
                    f_trial, _, _ = obj.value(trial)
                except InvalidIterate:
                    f_trial = math.inf
                if f_trial < rep.misfit:
                    accepted = True
                    break
                t *= 0.5
            if accepted:
                break
            mu *= config.mu_increase
        if not accepted:
            status = "no-progress"
            converged = gnorm <= 10 * config.grad_tol
            break
        step_norm = float(np.linalg.norm(t * delta))
        c = trial
        rep = obj.report(c)
        mu = max(mu * config.mu_decrease, 1e-12)
        history.append((it, rep.misfit, float(np.linalg.norm(rep.gradient)), mu))
        log.info("iteration %d misfit %.6e |g| %.3e mu %.1e", it, rep.misfit, history[-1][2], mu)
        if step_norm <= config.step_tol * max(1.0, float(np.linalg.norm(c))):
            status, converged = "step-tolerance", True
            break
    if history[-1][2] <= config.grad_tol:
        status, converged = "gradient-tolerance", True
    return ReconstructionResult(obj.shape(c), history, converged, status, rep)


def initial_sphere_from_data(data: CrossSectionData) -> RadialShape:
    """Sphere whose low-frequency cross section ``4 pi a^2`` matches the data mean."""
    mean_c = float(np.mean(data.values @ data.grid.weights) / (4.0 * math.pi))
    return RadialShape.sphere(math.sqrt(max(mean_c, 1e-12) / (4.0 * math.pi)))


# ---------------------------------------------------------------------------
# Distinguishability
# ---------------------------------------------------------------------------
def distinguishability(shape1: RadialShape, shape2: RadialShape, lam0: float, order: int,
                       bc="dirichlet", obs_order: int = 6, rel: float = 0.05) -> float:
    """``max |C1 - C2|`` over the observation grid and a 3-point window."""
    lams = frequency_window(lam0, 3, rel)
    C1 = model_cross_sections(shape1, lams, order, obs_order, bc)
    C2 = model_cross_sections(shape2, lams, order, obs_order, bc)
    return float(np.abs(C1 - C2).max())


def noise_floor(shape: RadialShape, lam0: float, order: int, bc="dirichlet", obs_order: int = 6,
                rel: float = 0.05, order_increment: int = 8) -> float:
    """Discretization noise of the cross sections: orders ``q`` and ``q + 8`` compared."""
    lams = frequency_window(lam0, 3, rel)
    lo = model_cross_sections(shape, lams, order, obs_order, bc)
    hi = model_cross_sections(shape, lams, order + order_increment, obs_order, bc)
    return float(np.abs(lo - hi).max())


def equal_volume_pair(amplitude: float = 0.15) -> tuple[RadialShape, RadialShape]:
    """Unit ball and ``1 + amplitude * Y_20`` rescaled to the same volume."""
    from .geometry import rescale_to_volume

    ball = RadialShape.sphere(1.0)
    bump = RadialShape.from_terms({(0, 0): math.sqrt(4.0 * math.pi), (2, 0): amplitude})
    return ball, rescale_to_volume(bump, volume(ball))


__all__ = [
    "MisfitReport",
    "ReconstructionConfig",
    "ReconstructionResult",
    "distinguishability",
    "equal_volume_pair",
    "frequency_window",
    "initial_sphere_from_data",
    "misfit_and_gradient",
    "model_cross_sections",
    "noise_floor",
    "reconstruct_shape",
    "synthesize_cross_section_data",
]
