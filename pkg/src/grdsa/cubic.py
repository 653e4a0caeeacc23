"""Cubic-regularized Newton on batched zeroth-order derivative estimates.

Each outer step forms a batch-averaged gradient and Hessian from random-ray
measurements, minimizes the cubic model ``g.s + s.H.s/2 + alpha |s|^3 / 6``
exactly, and applies the minimizer as the step.  The reported point is a
uniformly random iterate, which is what the second-order guarantee speaks
about.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .estimators import (
    GradientEstimate,
    HessianEstimate,
    batch_gradient,
    batch_hessian,
)
from .newton import _initial_theta
from .oracle import (
    BudgetedOracle,
    BudgetTooSmall,
    LinearGaussianNoise,
    Objective,
)
from .perturb import (
    PerturbationSpec,
    gaussian,
    gradient_unbias_factor,
    scaling_matrices,
)
from .stencils import grad_stencil, hess_stencil

#: regularizer floor used when the objective has a vanishing third derivative
ALPHA_FLOOR = 1e-3


@dataclass
class CubicConfig:
    """One cubic-regularized run: batch sizes, radius, regularizer, seed."""

    objective: Objective
    k: int = 1
    n_steps: int = 30
    m: int = 200
    b: int = 400
    delta: float = 0.1
    alpha: float | None = None  # None: 3 * objective.lipschitz_hessian, floored
    epsilon: float | None = None
    noise: LinearGaussianNoise | None = None
    perturbation: PerturbationSpec = field(default_factory=gaussian)
    seed: int = 0
    theta0: np.ndarray | None = None
    budget: int | None = None
    reuse: bool = False
    paper_literal_scaling: bool = False

    def alpha_value(self) -> float:
        if self.alpha is not None:
            if not self.alpha > 0:
                raise ValueError(f"alpha must be > 0, got {self.alpha}")
            return self.alpha
        l_h = self.objective.lipschitz_hessian
        if l_h is None:
            raise ValueError(
                "alpha not set and the objective carries no third-derivative bound"
            )
        return max(3.0 * l_h, ALPHA_FLOOR)

    def step_cost(self) -> int:
        """Measurements one outer step consumes."""
        grad_points = self.k + 1
        hess_points = 2 * self.k + 1
        if self.reuse:
            return self.b * hess_points + max(0, self.m - self.b) * grad_points
        return self.m * grad_points + self.b * hess_points


def from_epsilon(
    objective: Objective,
    epsilon: float,
    k: int = 1,
    n_prefactor: float = 1.0,
    m_prefactor: float = 1.0,
    b_prefactor: float = 1.0,
    delta_prefactor: float = 1.0,
    **kwargs,
) -> CubicConfig:
    """Size a run from a target stationarity level ``epsilon``.

    The counts follow the guarantee's scalings with tunable prefactors
    (the analysis constants are problem-dependent and not reproducible):

    - steps   ``N ~ epsilon**-3/2``
    - gradient batch ``m ~ epsilon**-(2 + 2/k)``
    - Hessian batch ``b ~ epsilon**-(1 + 4/k)``
    - probing radius ``delta ~ epsilon**(1/k)``
    """
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return CubicConfig(
        objective=objective,
        k=k,
        n_steps=math.ceil(n_prefactor * epsilon ** -1.5),
        m=math.ceil(m_prefactor * epsilon ** -(2.0 + 2.0 / k)),
        b=math.ceil(b_prefactor * epsilon ** -(1.0 + 4.0 / k)),
        delta=delta_prefactor * epsilon ** (1.0 / k),
        epsilon=epsilon,
        **kwargs,
    )


def cubic_model_value(g: np.ndarray, h: np.ndarray, alpha: float, s: np.ndarray) -> float:
    """Value of the cubic model at step ``s``."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    s = np.asarray(s, dtype=float)
    return float(g @ s + 0.5 * s @ h @ s + (alpha / 6.0) * np.linalg.norm(s) ** 3)


@dataclass(frozen=True)
class CubicSolution:
    """Global minimizer of the cubic model plus solve diagnostics."""

    step: np.ndarray
    radius: float
    model_value: float
    stationarity: float
    hard_case: bool
    iterations: int


def solve_cubic_subproblem(
    g: np.ndarray,
    h: np.ndarray,
    alpha: float,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> CubicSolution:
    """Globally minimize ``g.s + s.H.s/2 + alpha |s|^3 / 6``.

    Works through the eigendecomposition of ``H``: the minimizer satisfies
    ``(H + (alpha/2) r I) s = -g`` with ``r = |s|`` and ``H + (alpha/2) r I``
    positive semidefinite, so ``r`` solves the scalar secular equation
    ``|(H + (alpha/2) r I)^{-1} g| = r`` on ``r >= max(0, -2 lambda_min /
    alpha)``.  A safeguarded Newton iteration (bisection fallback) finds the
    root; when ``g`` has no component on the bottom eigenspace the hard case
    applies and the step gains an explicit bottom-eigenvector component.

    The returned ``stationarity`` is ``|g + H s + (alpha/2) |s| s|``, and the
    solve stops once it falls below ``tol * max(1, |g|)``.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    if g.ndim != 1 or h.shape != (g.size, g.size):
        raise ValueError(f"shape mismatch: g {g.shape}, H {h.shape}")
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
        raise ValueError("g and H must be finite")

    sym = 0.5 * (h + h.T)
    eigval, eigvec = np.linalg.eigh(sym)
    ghat = eigvec.T @ g
    gnorm = float(np.linalg.norm(g))
    half = 0.5 * alpha
    lam_min = float(eigval[0])
    r_floor = max(0.0, -lam_min / half)
    scale = max(1.0, float(np.max(np.abs(eigval))), half * r_floor)

    def phi_and_slope(r: float) -> tuple[float, float]:
        den = eigval + half * r
        ratios = ghat / den
        phi = float(np.linalg.norm(ratios))
        if phi == 0.0:
            return 0.0, 0.0
        slope = -half * float(np.sum(ratios**2 / den)) / phi
        return phi, slope

    def finish(r: float, s_hat: np.ndarray, hard: bool, iters: int) -> CubicSolution:
        s = eigvec @ s_hat
        radius = float(np.linalg.norm(s))
        resid = float(np.linalg.norm(g + sym @ s + half * radius * s))
        return CubicSolution(
            step=s,
            radius=radius,
            model_value=cubic_model_value(g, sym, alpha, s),
            stationarity=resid,
            hard_case=hard,
            iterations=iters,
        )

    # all-zero and convex-with-zero-gradient cases
    if gnorm == 0.0 and lam_min >= 0.0:
        return finish(0.0, np.zeros_like(g), False, 0)

    def hard_case_solution(iters: int) -> CubicSolution:
        den = eigval + half * r_floor
        keep = den > 1e-12 * scale
        p_hat = np.zeros_like(ghat)
        p_hat[keep] = -ghat[keep] / den[keep]
        tau = math.sqrt(max(r_floor**2 - float(p_hat @ p_hat), 0.0))
        bottom = int(np.argmin(den))
        s_hat = p_hat.copy()
        s_hat[bottom] += tau
        return finish(r_floor, s_hat, True, iters)

    if gnorm == 0.0:
        return hard_case_solution(0)

    # strictly above r_floor the shifted matrix is positive definite
    r_lo = r_floor + 1e-13 * scale / half
    phi_lo, _ = phi_and_slope(r_lo)
    if phi_lo <= r_lo and r_floor > 0.0:
        return hard_case_solution(0)

    r_hi = max(2.0 * r_lo, r_floor + math.sqrt(2.0 * gnorm / alpha), 1e-8)
    for _ in range(200):
        phi_hi, _ = phi_and_slope(r_hi)
        if phi_hi < r_hi:
            break
        r_hi *= 2.0
    else:
        raise RuntimeError("failed to bracket the secular-equation root")

    r = min(max(math.sqrt(2.0 * gnorm / alpha), r_lo), r_hi)
    iters = 0
    for iters in range(1, max_iter + 1):
        phi, slope = phi_and_slope(r)
        residual = half * abs(phi - r) * phi
        if residual <= tol * max(1.0, gnorm):
            break
        if phi > r:
            r_lo = r
        else:
            r_hi = r
        newton = r - (phi - r) / (slope - 1.0)
        r = newton if r_lo < newton < r_hi else 0.5 * (r_lo + r_hi)
    s_hat = -ghat / (eigval + half * r)
    return finish(r, s_hat, False, iters)


def crzon_step(
    theta: np.ndarray,
    oracle: BudgetedOracle,
    cfg: CubicConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, CubicSolution]:
    """One outer step: batch estimates, exact model minimization, move."""
    theta = np.asarray(theta, dtype=float)
    hess, grad = _batched_estimates(theta, oracle, cfg, rng)
    sol = solve_cubic_subproblem(grad.value, hess.value, cfg.alpha_value())
    return theta + sol.step, sol


def _batched_estimates(theta, oracle, cfg, rng):
    """Hessian batch, then gradient batch (shared draws when reusing)."""
    if not cfg.reuse:
        hess = batch_hessian(
            oracle, theta, cfg.delta, cfg.k, cfg.b, cfg.perturbation, rng,
            cfg.paper_literal_scaling,
        )
        grad = batch_gradient(
            oracle, theta, cfg.delta, cfg.k, cfg.m, cfg.perturbation, rng
        )
        return hess, grad

    # Reuse: the first min(m, b) gradient draws read the Hessian batch's
    # shift-0..k measurements instead of buying their own.
    weights = grad_stencil(cfg.k).to_float()
    shared = min(cfg.m, cfg.b)
    directions = cfg.perturbation.sample(rng, (cfg.b, theta.size))
    shifts = np.arange(2 * cfg.k + 1, dtype=float)
    points = theta[None, None, :] + cfg.delta * shifts[None, :, None] * directions[:, None, :]
    values = oracle.evaluate_many(points.reshape(-1, theta.size)).reshape(cfg.b, -1)

    hess_weights = hess_stencil(cfg.k, cfg.k).to_float()
    quads = values @ hess_weights / cfg.delta**2
    scalers = scaling_matrices(cfg.perturbation, directions, cfg.paper_literal_scaling)
    hess = HessianEstimate(
        value=(scalers * quads[:, None, None]).mean(axis=0),
        measurements_used=cfg.b * (2 * cfg.k + 1),
        k1=cfg.k,
        k2=cfg.k,
        delta=cfg.delta,
    )

    factor = gradient_unbias_factor(cfg.perturbation)
    slopes = values[:shared, : cfg.k + 1] @ weights / cfg.delta
    samples = [factor * directions[:shared] * slopes[:, None]]
    extra = cfg.m - shared
    fresh_used = 0
    if extra > 0:
        fresh = batch_gradient(
            oracle, theta, cfg.delta, cfg.k, extra, cfg.perturbation, rng,
            return_samples=True,
        )
        samples.append(fresh[1])
        fresh_used = fresh[0].measurements_used
    stacked = np.concatenate(samples, axis=0)
    grad = GradientEstimate(
        value=stacked.mean(axis=0),
        measurements_used=fresh_used,
        k=cfg.k,
        delta=cfg.delta,
    )
    return hess, grad


@dataclass
class SospReport:
    """Outcome of one run, evaluated at a uniformly random iterate."""

    seed: int
    k: int
    epsilon: float | None
    n_steps: int
    iterations: int
    m: int
    b: int
    delta: float
    alpha: float
    r_index: int
    theta_init: np.ndarray
    theta_r: np.ndarray
    theta_final: np.ndarray
    grad_norm_at_r: float
    lambda_min_at_r: float
    evals_used: int
    trajectory: np.ndarray
    wall_time_s: float


def run_crzon(cfg: CubicConfig) -> SospReport:
    """Run ``n_steps`` outer steps (or to budget) and report a random iterate.

    The report index ``R`` is drawn once from the run's seed, uniform over
    the completed iterates; a budget too small for a single step raises
    before consuming anything.
    """
    start = time.perf_counter()
    if cfg.k < 1:
        raise ValueError(f"k must be >= 1, got {cfg.k}")
    if cfg.n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {cfg.n_steps}")
    cost = cfg.step_cost()
    if cfg.budget is not None and cfg.budget < cost:
        raise BudgetTooSmall(
            f"budget {cfg.budget} cannot afford one step ({cost} evaluations)"
        )
    alpha = cfg.alpha_value()

    init_ss, perturb_ss, noise_ss, select_ss = np.random.SeedSequence(cfg.seed).spawn(4)
    init_rng = np.random.default_rng(init_ss)
    perturb_rng = np.random.default_rng(perturb_ss)
    noise_rng = np.random.default_rng(noise_ss)
    select_rng = np.random.default_rng(select_ss)

    dim = cfg.objective.dim
    theta0 = _initial_theta(cfg.theta0, dim, init_rng)
    oracle = BudgetedOracle(cfg.objective, cfg.noise, cfg.budget, noise_rng)

    theta = theta0.copy()
    iterates: list[np.ndarray] = []
    for _ in range(cfg.n_steps):
        if oracle.remaining is not None and oracle.remaining < cost:
            break
        theta, _ = crzon_step(theta, oracle, cfg, perturb_rng)
        iterates.append(theta.copy())

    n_done = len(iterates)
    r_index = int(select_rng.integers(1, n_done + 1))
    theta_r = iterates[r_index - 1]

    grad_norm = float("nan")
    lam_min = float("nan")
    if cfg.objective.gradient is not None:
        grad_norm = float(np.linalg.norm(cfg.objective.gradient(theta_r)))
    if cfg.objective.hessian is not None:
        lam_min = float(np.linalg.eigvalsh(cfg.objective.hessian(theta_r))[0])

    return SospReport(
        seed=cfg.seed,
        k=cfg.k,
        epsilon=cfg.epsilon,
        n_steps=cfg.n_steps,
        iterations=n_done,
        m=cfg.m,
        b=cfg.b,
        delta=cfg.delta,
        alpha=alpha,
        r_index=r_index,
        theta_init=theta0,
        theta_r=theta_r.copy(),
        theta_final=theta.copy(),
        grad_norm_at_r=grad_norm,
        lambda_min_at_r=lam_min,
        evals_used=oracle.evals_used,
        trajectory=np.asarray(iterates) if iterates else np.empty((0, dim)),
        wall_time_s=time.perf_counter() - start,
    )
