"""Test objectives, measurement noise, and budgeted function evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation would exceed the measurement budget."""


class BudgetTooSmall(ValueError):
    """Budget cannot cover even one iteration of the requested run."""


@dataclass(frozen=True)
class Objective:
    """A deterministic objective with optional analytic derivatives.

    ``value`` must accept arrays of shape ``(d,)`` or ``(n, d)`` and return
    a scalar or ``(n,)`` respectively.  ``optimum`` is the minimizer used by
    the parameter-error metric; ``lipschitz_hessian`` bounds the third
    derivative on the standard box and feeds the cubic regularizer weight.
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray] | None = None
    hessian: Callable[[np.ndarray], np.ndarray] | None = None
    optimum: np.ndarray | None = None
    lipschitz_hessian: float | None = None


def rastrigin(dim: int) -> Objective:
    """Classic multimodal benchmark, global minimum 0 at the origin."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")

    def value(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 10.0 * dim + np.sum(x**2 - 10.0 * np.cos(2.0 * np.pi * x), axis=-1)

    def gradient(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 2.0 * x + 20.0 * np.pi * np.sin(2.0 * np.pi * x)

    def hessian(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.diag(2.0 + 40.0 * np.pi**2 * np.cos(2.0 * np.pi * x))

    return Objective(
        name="rastrigin",
        dim=dim,
        value=value,
        gradient=gradient,
        hessian=hessian,
        optimum=np.zeros(dim),
        lipschitz_hessian=80.0 * np.pi**3,
    )


def quadratic(a: np.ndarray, b: np.ndarray | None = None) -> Objective:
    """``0.5 x^T A x + b^T x`` for symmetric ``A``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"A must be square, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12):
        raise ValueError("A must be symmetric")
    dim = a.shape[0]
    if b is None:
        b = np.zeros(dim)
    b = np.asarray(b, dtype=float)
    if b.shape != (dim,):
        raise ValueError(f"b must have shape ({dim},), got {b.shape}")

    def value(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, a, x) + x @ b

    def gradient(x: np.ndarray) -> np.ndarray:
        return a @ np.asarray(x, dtype=float) + b

    def hessian(x: np.ndarray) -> np.ndarray:
        return a.copy()

    if np.any(b):
        try:
            optimum = np.linalg.solve(a, -b)
        except np.linalg.LinAlgError:
            optimum = None  # singular A: no unique minimizer
    else:
        optimum = np.zeros(dim)

    return Objective(
        name="quadratic",
        dim=dim,
        value=value,
        gradient=gradient,
        hessian=hessian,
        optimum=optimum,
        lipschitz_hessian=0.0,
    )


def quartic(dim: int) -> Objective:
    """Separable quartic ``sum x_i^4``; minimal at the origin.

    Its fifth and higher derivatives vanish, so stencils of order >= 3
    reproduce it exactly; order sweeps above k=2 need :func:`exp_sin`.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")

    def value(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.sum(x**4, axis=-1)

    def gradient(x: np.ndarray) -> np.ndarray:
        return 4.0 * np.asarray(x, dtype=float) ** 3

    def hessian(x: np.ndarray) -> np.ndarray:
        return np.diag(12.0 * np.asarray(x, dtype=float) ** 2)

    return Objective(
        name="quartic",
        dim=dim,
        value=value,
        gradient=gradient,
        hessian=hessian,
        optimum=np.zeros(dim),
    )


def saddle_quartic() -> Objective:
    """2-D strict-saddle fixture ``x1^2 - x2^2 + x2^4 / 4``.

    The origin is a stationary point with bottom curvature -2; the global
    minima sit at ``(0, +-sqrt(2))``.
    """

    def value(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x[..., 0] ** 2 - x[..., 1] ** 2 + 0.25 * x[..., 1] ** 4

    def gradient(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([2.0 * x[0], -2.0 * x[1] + x[1] ** 3])

    def hessian(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.diag([2.0, -2.0 + 3.0 * x[1] ** 2])

    return Objective(
        name="saddle_quartic",
        dim=2,
        value=value,
        gradient=gradient,
        hessian=hessian,
        optimum=np.array([0.0, np.sqrt(2.0)]),
        lipschitz_hessian=6.0,
    )


def exp_sin() -> Objective:
    """Smooth 2-D fixture ``exp(x1) + sin(x2)`` with derivatives of all orders.

    Used by the truncation-order sweeps, where a polynomial would be
    reproduced exactly by high-order stencils and leave nothing to measure.
    """

    def value(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(x[..., 0]) + np.sin(x[..., 1])

    def gradient(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([np.exp(x[0]), np.cos(x[1])])

    def hessian(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.diag([np.exp(x[0]), -np.sin(x[1])])

    return Objective(name="exp_sin", dim=2, value=value, gradient=gradient, hessian=hessian)


@dataclass(frozen=True)
class LinearGaussianNoise:
    """Additive noise ``[theta^T, 1] . z`` with ``z ~ N(0, sigma^2 I_{d+1})``.

    A fresh ``z`` is drawn per evaluation, so the noise is i.i.d. across
    measurements but its scale grows with ``|theta|``.
    """

    sigma: float

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    def sample(self, rng: np.random.Generator, thetas: np.ndarray) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        n, d = thetas.shape
        z = rng.normal(0.0, self.sigma, size=(n, d + 1))
        return np.einsum("ij,ij->i", thetas, z[:, :d]) + z[:, d]


class BudgetedOracle:
    """Noisy function evaluations with an exact measurement counter.

    Every scalar evaluation increments the counter by one.  A call that
    would push the counter past ``budget`` raises :class:`BudgetExhausted`
    without consuming anything, so callers can treat a multi-point request
    as all-or-nothing.
    """

    def __init__(
        self,
        objective: Objective,
        noise: LinearGaussianNoise | None = None,
        budget: int | None = None,
        rng: np.random.Generator | None = None,
    ) -> None:
        if budget is not None and budget < 0:
            raise ValueError(f"budget must be >= 0, got {budget}")
        if noise is not None and noise.sigma > 0 and rng is None:
            raise ValueError("a noise rng is required when sigma > 0")
        self.objective = objective
        self.noise = noise
        self.budget = budget
        self.rng = rng
        self._used = 0

    @property
    def evals_used(self) -> int:
        return self._used

    @property
    def remaining(self) -> int | None:
        if self.budget is None:
            return None
        return self.budget - self._used

    def evaluate_many(self, thetas: np.ndarray) -> np.ndarray:
        """Evaluate a batch of points, one budget unit per row."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim != 2 or thetas.shape[1] != self.objective.dim:
            raise ValueError(
                f"expected shape (n, {self.objective.dim}), got {thetas.shape}"
            )
        n = thetas.shape[0]
        if self.budget is not None and self._used + n > self.budget:
            raise BudgetExhausted(
                f"{n} evaluations requested with {self.budget - self._used} "
                f"of {self.budget} remaining"
            )
        values = np.asarray(self.objective.value(thetas), dtype=float)
        if self.noise is not None and self.noise.sigma > 0:
            values = values + self.noise.sample(self.rng, thetas)
        self._used += n
        return values

    def evaluate(self, theta: np.ndarray) -> float:
        return float(self.evaluate_many(np.asarray(theta, dtype=float)[None, :])[0])


def parameter_error(theta_final: np.ndarray, theta_init: np.ndarray, optimum: np.ndarray) -> float:
    """Squared distance to the optimum, normalized by the starting distance."""
    theta_final = np.asarray(theta_final, dtype=float)
    theta_init = np.asarray(theta_init, dtype=float)
    optimum = np.asarray(optimum, dtype=float)
    denom = float(np.sum((theta_init - optimum) ** 2))
    if denom == 0.0:
        raise ValueError("theta_init coincides with the optimum; error undefined")
    return float(np.sum((theta_final - optimum) ** 2)) / denom
