"""Perturbation-direction families and their moment-matched scaling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GAUSSIAN = "gaussian"
UNIFORM = "uniform"


@dataclass(frozen=True)
class PerturbationSpec:
    """Distribution of one coordinate of the direction vector.

    Components are drawn i.i.d., zero-mean and symmetric: standard normal, or
    uniform on ``[-eta, eta]``.  ``mu2`` and ``mu4`` are the second and
    fourth moments used to unbias the gradient and Hessian estimators; the
    strict inequality ``mu4 > mu2**2`` (true for both families) keeps the
    diagonal scaling well defined.
    """

    family: str
    eta: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in (GAUSSIAN, UNIFORM):
            raise ValueError(f"unknown perturbation family {self.family!r}")
        if self.family == UNIFORM and not self.eta > 0:
            raise ValueError(f"uniform half-width eta must be > 0, got {self.eta}")

    @property
    def mu2(self) -> float:
        if self.family == GAUSSIAN:
            return 1.0
        return self.eta**2 / 3.0

    @property
    def mu4(self) -> float:
        if self.family == GAUSSIAN:
            return 3.0
        return self.eta**4 / 5.0

    def sample(self, rng: np.random.Generator, shape: int | tuple[int, ...]) -> np.ndarray:
        """Draw direction components of the given shape from ``rng``."""
        if self.family == GAUSSIAN:
            return rng.standard_normal(shape)
        return rng.uniform(-self.eta, self.eta, shape)


def gaussian() -> PerturbationSpec:
    return PerturbationSpec(GAUSSIAN)


def uniform(eta: float = 1.0) -> PerturbationSpec:
    return PerturbationSpec(UNIFORM, eta)


def gradient_unbias_factor(spec: PerturbationSpec) -> float:
    """Factor ``1/mu2`` that makes ``E[Delta Delta^T] * factor = I``."""
    return 1.0 / spec.mu2


def scaling_matrix(
    spec: PerturbationSpec,
    direction: np.ndarray,
    paper_literal_scaling: bool = False,
) -> np.ndarray:
    """Matrix ``M(Delta)`` multiplying the second-difference quadratic form.

    The moment-matched form satisfies ``E[M(Delta) (Delta^T H Delta)] = H``
    for any symmetric ``H``:

    - off-diagonal: ``Delta_i Delta_j / (2 mu2**2)``
    - diagonal:     ``(Delta_i**2 - mu2) / (mu4 - mu2**2)``

    For the standard Gaussian this reduces to ``(Delta Delta^T - I) / 2``.
    With ``paper_literal_scaling`` the unhalved ``Delta Delta^T - I`` is
    returned instead; on a quadratic its expectation is twice the true
    Hessian, which the switch exists to demonstrate.
    """
    direction = np.asarray(direction, dtype=float)
    if direction.ndim != 1:
        raise ValueError(f"direction must be 1-D, got shape {direction.shape}")
    outer = np.outer(direction, direction)
    if paper_literal_scaling:
        return outer - np.eye(direction.size)
    mu2, mu4 = spec.mu2, spec.mu4
    m = outer / (2.0 * mu2**2)
    idx = np.arange(direction.size)
    m[idx, idx] = (direction**2 - mu2) / (mu4 - mu2**2)
    return m


def scaling_matrices(
    spec: PerturbationSpec,
    directions: np.ndarray,
    paper_literal_scaling: bool = False,
) -> np.ndarray:
    """Vectorized ``scaling_matrix`` over a batch of directions ``(n, d)``."""
    directions = np.asarray(directions, dtype=float)
    if directions.ndim != 2:
        raise ValueError(f"directions must be 2-D, got shape {directions.shape}")
    n, d = directions.shape
    outer = directions[:, :, None] * directions[:, None, :]
    if paper_literal_scaling:
        return outer - np.eye(d)[None, :, :]
    mu2, mu4 = spec.mu2, spec.mu4
    m = outer / (2.0 * mu2**2)
    idx = np.arange(d)
    m[:, idx, idx] = (directions**2 - mu2) / (mu4 - mu2**2)
    return m
