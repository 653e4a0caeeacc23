"""Gradient and Hessian estimators from measurements along one random ray.

A single draw of the direction ``Delta`` yields a gradient estimate from
``k+1`` function values at ``theta + l*delta*Delta`` (shifts ``l = 0..k``)
and a Hessian estimate from ``2k+1`` values (shifts ``0..2k``); the gradient
shifts are a prefix of the Hessian's, which is what measurement reuse
exploits.  Batch variants average independent single-draw estimates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracle import BudgetedOracle, Objective
from .perturb import (
    PerturbationSpec,
    gradient_unbias_factor,
    scaling_matrices,
    scaling_matrix,
)
from .stencils import grad_stencil, hess_stencil


class NonFiniteEvaluation(RuntimeError):
    """Raised when the oracle returns NaN or infinity."""


@dataclass(frozen=True)
class GradientEstimate:
    value: np.ndarray
    measurements_used: int
    k: int
    delta: float


@dataclass(frozen=True)
class HessianEstimate:
    value: np.ndarray
    measurements_used: int
    k1: int
    k2: int
    delta: float
    #: function value per stencil shift, for reuse by the gradient estimator
    shift_values: dict[int, float] | None = None


def _check_inputs(theta: np.ndarray, direction: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if theta.ndim != 1:
        raise ValueError(f"theta must be 1-D, got shape {theta.shape}")
    if direction.shape != theta.shape:
        raise ValueError(
            f"direction shape {direction.shape} does not match theta shape {theta.shape}"
        )
    if not delta > 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    return theta, direction


def _require_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFiniteEvaluation("oracle returned a non-finite value")


def estimate_gradient(
    oracle: BudgetedOracle,
    theta: np.ndarray,
    direction: np.ndarray,
    delta: float,
    k: int,
    spec: PerturbationSpec,
    shared_evals: dict[int, float] | None = None,
) -> GradientEstimate:
    """One-draw gradient estimate of order ``k`` along ``direction``.

    ``shared_evals`` maps stencil shifts to already-measured function values
    (from a Hessian estimate with the same ``direction`` and ``delta``);
    only the missing shifts are charged against the budget.
    """
    theta, direction = _check_inputs(theta, direction, delta)
    stencil = grad_stencil(k)
    weights = stencil.to_float()
    shared_evals = shared_evals or {}

    values = np.empty(k + 1)
    missing = [s for s in range(k + 1) if s not in shared_evals]
    for s in range(k + 1):
        if s in shared_evals:
            values[s] = shared_evals[s]
    if missing:
        points = theta[None, :] + delta * np.asarray(missing, dtype=float)[:, None] * direction[None, :]
        fresh = oracle.evaluate_many(points)
        values[missing] = fresh
    _require_finite(values)

    slope = float(weights @ values) / delta
    value = gradient_unbias_factor(spec) * direction * slope
    return GradientEstimate(value=value, measurements_used=len(missing), k=k, delta=delta)


def estimate_hessian(
    oracle: BudgetedOracle,
    theta: np.ndarray,
    direction: np.ndarray,
    delta: float,
    k1: int,
    k2: int | None = None,
    spec: PerturbationSpec | None = None,
    paper_literal_scaling: bool = False,
) -> HessianEstimate:
    """One-draw Hessian estimate of orders ``(k1, k2)`` along ``direction``.

    Consumes ``k1 + k2 + 1`` measurements.  The returned matrix is symmetric
    by construction (quadratic-form scalar times the symmetric scaling
    matrix).
    """
    theta, direction = _check_inputs(theta, direction, delta)
    if spec is None:
        raise ValueError("a PerturbationSpec is required to unbias the estimate")
    stencil = hess_stencil(k1, k2)
    weights = stencil.to_float()
    shifts = np.arange(weights.size, dtype=float)

    points = theta[None, :] + delta * shifts[:, None] * direction[None, :]
    values = oracle.evaluate_many(points)
    _require_finite(values)

    quad = float(weights @ values) / delta**2
    value = scaling_matrix(spec, direction, paper_literal_scaling) * quad
    return HessianEstimate(
        value=value,
        measurements_used=weights.size,
        k1=stencil.k1,
        k2=stencil.k2,
        delta=delta,
        shift_values={s: float(v) for s, v in zip(range(weights.size), values)},
    )


def _batch_values(
    oracle: BudgetedOracle,
    theta: np.ndarray,
    directions: np.ndarray,
    delta: float,
    n_shifts: int,
) -> np.ndarray:
    """Evaluate all ``(draw, shift)`` points in draw-major order."""
    n = directions.shape[0]
    shifts = np.arange(n_shifts, dtype=float)
    points = theta[None, None, :] + delta * shifts[None, :, None] * directions[:, None, :]
    flat = oracle.evaluate_many(points.reshape(n * n_shifts, -1))
    _require_finite(flat)
    return flat.reshape(n, n_shifts)


def batch_gradient(
    oracle: BudgetedOracle,
    theta: np.ndarray,
    delta: float,
    k: int,
    m: int,
    spec: PerturbationSpec,
    rng: np.random.Generator,
    return_samples: bool = False,
) -> GradientEstimate | tuple[GradientEstimate, np.ndarray]:
    """Average of ``m`` independent one-draw gradient estimates.

    Draws all directions first, then evaluates the ``m * (k+1)`` points;
    with the same generator state this reproduces the sequential
    single-estimate loop exactly.
    """
    theta = np.asarray(theta, dtype=float)
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    weights = grad_stencil(k).to_float()
    directions = spec.sample(rng, (m, theta.size))
    values = _batch_values(oracle, theta, directions, delta, k + 1)
    slopes = values @ weights / delta
    samples = gradient_unbias_factor(spec) * directions * slopes[:, None]
    estimate = GradientEstimate(
        value=samples.mean(axis=0),
        measurements_used=m * (k + 1),
        k=k,
        delta=delta,
    )
    if return_samples:
        return estimate, samples
    return estimate


def batch_hessian(
    oracle: BudgetedOracle,
    theta: np.ndarray,
    delta: float,
    k: int,
    b: int,
    spec: PerturbationSpec,
    rng: np.random.Generator,
    paper_literal_scaling: bool = False,
    return_samples: bool = False,
) -> HessianEstimate | tuple[HessianEstimate, np.ndarray]:
    """Average of ``b`` independent one-draw Hessian estimates (order ``k``)."""
    theta = np.asarray(theta, dtype=float)
    if b < 1:
        raise ValueError(f"b must be >= 1, got {b}")
    weights = hess_stencil(k, k).to_float()
    directions = spec.sample(rng, (b, theta.size))
    values = _batch_values(oracle, theta, directions, delta, 2 * k + 1)
    quads = values @ weights / delta**2

    d = theta.size
    if return_samples:
        samples = scaling_matrices(spec, directions, paper_literal_scaling) * quads[:, None, None]
        mean = samples.mean(axis=0)
    else:
        samples = None
        outer_mean = directions.T @ (directions * quads[:, None]) / b
        quad_mean = quads.mean()
        if paper_literal_scaling:
            mean = outer_mean - quad_mean * np.eye(d)
        else:
            mu2, mu4 = spec.mu2, spec.mu4
            mean = outer_mean / (2.0 * mu2**2)
            idx = np.arange(d)
            mean[idx, idx] = (np.diagonal(outer_mean) - mu2 * quad_mean) / (mu4 - mu2**2)

    estimate = HessianEstimate(
        value=mean,
        measurements_used=b * (2 * k + 1),
        k1=k,
        k2=k,
        delta=delta,
    )
    if return_samples:
        return estimate, samples
    return estimate


def gradient_deviation(
    objective: Objective,
    theta: np.ndarray,
    delta: float,
    k: int,
    spec: PerturbationSpec,
    directions: np.ndarray,
    mode: str = "residual",
) -> float:
    """Truncation-error summary of the noiseless gradient estimator.

    With ``mode="residual"`` this averages, over the supplied directions,
    the norm of the difference between each one-draw estimate and its
    direction-conditional leading term ``factor * Delta (Delta . grad F)``;
    the average scales like ``delta**k``.  With ``mode="mean_bias"`` it
    returns the norm of (mean estimate - true gradient), which for symmetric
    direction laws decays at least one order faster because odd moments
    vanish.  Common random numbers across ``delta`` come from passing the
    same ``directions`` array.
    """
    if objective.gradient is None:
        raise ValueError("objective must provide an analytic gradient")
    theta = np.asarray(theta, dtype=float)
    directions = np.asarray(directions, dtype=float)
    weights = grad_stencil(k).to_float()
    shifts = np.arange(k + 1, dtype=float)
    points = theta[None, None, :] + delta * shifts[None, :, None] * directions[:, None, :]
    values = np.asarray(objective.value(points), dtype=float)
    slopes = values @ weights / delta
    factor = gradient_unbias_factor(spec)
    estimates = factor * directions * slopes[:, None]

    grad = np.asarray(objective.gradient(theta), dtype=float)
    if mode == "residual":
        leading = factor * directions * (directions @ grad)[:, None]
        return float(np.linalg.norm(estimates - leading, axis=1).mean())
    if mode == "mean_bias":
        return float(np.linalg.norm(estimates.mean(axis=0) - grad))
    raise ValueError(f"unknown mode {mode!r}")


def hessian_deviation(
    objective: Objective,
    theta: np.ndarray,
    delta: float,
    k1: int,
    k2: int | None,
    spec: PerturbationSpec,
    directions: np.ndarray,
    mode: str = "residual",
    paper_literal_scaling: bool = False,
) -> float:
    """Truncation-error summary of the noiseless Hessian estimator.

    Same protocol as :func:`gradient_deviation`; the leading term per draw
    is ``M(Delta) (Delta^T hess F Delta)`` and the residual average scales
    like ``delta**min(k1, k2)``.
    """
    if objective.hessian is None:
        raise ValueError("objective must provide an analytic Hessian")
    theta = np.asarray(theta, dtype=float)
    directions = np.asarray(directions, dtype=float)
    weights = hess_stencil(k1, k2).to_float()
    shifts = np.arange(weights.size, dtype=float)
    points = theta[None, None, :] + delta * shifts[None, :, None] * directions[:, None, :]
    values = np.asarray(objective.value(points), dtype=float)
    quads = values @ weights / delta**2
    scalers = scaling_matrices(spec, directions, paper_literal_scaling)
    estimates = scalers * quads[:, None, None]

    hess = np.asarray(objective.hessian(theta), dtype=float)
    if mode == "residual":
        lead_quads = np.einsum("ni,ij,nj->n", directions, hess, directions)
        leading = scalers * lead_quads[:, None, None]
        return float(np.linalg.norm((estimates - leading).reshape(len(directions), -1), axis=1).mean())
    if mode == "mean_bias":
        return float(np.linalg.norm(estimates.mean(axis=0) - hess))
    raise ValueError(f"unknown mode {mode!r}")


def fit_loglog_slope(deltas: np.ndarray, deviations: np.ndarray) -> float:
    """Least-squares slope of log(deviation) against log(delta)."""
    deltas = np.asarray(deltas, dtype=float)
    deviations = np.asarray(deviations, dtype=float)
    if deltas.size != deviations.size or deltas.size < 2:
        raise ValueError("need at least two (delta, deviation) pairs")
    if np.any(deviations <= 0):
        raise ValueError("deviations must be positive to fit a log-log slope")
    return float(np.polyfit(np.log(deltas), np.log(deviations), 1)[0])
