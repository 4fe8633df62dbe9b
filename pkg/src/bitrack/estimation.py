"""Recursive projection estimation of neighbor states from single bits.

Every follower keeps one estimate per neighbor and nudges it by
``step * (F(B - xhat) - bit)``, then clips it to ``[-W, W]``. The step is
``beta / k`` for the decaying variant and ``beta`` for the constant one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GaussianNoise
from .errors import ConfigurationError

__all__ = [
    "project",
    "rpa_step",
    "EstimatorBank",
    "estimate_error_vector",
    "DECAYING",
    "CONSTANT",
]

DECAYING = "decaying"
CONSTANT = "constant"


def project(x, W):
    """Clip to ``[-W, W]`` (the nearest point of the interval)."""
    if not W > 0:
        raise ConfigurationError("projection bound W must be positive")
    out = np.clip(x, -W, W)
    return float(out) if np.ndim(out) == 0 else out


def rpa_step(x_prev, bit, threshold, noise: GaussianNoise, step, W):
    """One projected update; works elementwise on arrays.

    The cdf is evaluated at ``threshold - x_prev`` (the previous, already
    projected estimate).
    """
    innovation = noise.cdf(np.subtract(threshold, x_prev)) - bit
    return project(np.add(x_prev, step * innovation), W)


@dataclass
class EstimatorBank:
    """Estimates of every observed link, in edge-index order."""

    estimates: np.ndarray
    W: float
    beta: float
    policy: str = DECAYING

    def __post_init__(self):
        self.estimates = np.array(self.estimates, dtype=float)
        if not self.W > 0:
            raise ConfigurationError("projection bound W must be positive")
        if not self.beta > 0:
            raise ConfigurationError("beta must be positive")
        if self.policy not in (DECAYING, CONSTANT):
            raise ConfigurationError(f"unknown step policy {self.policy!r}")
        if np.any(np.abs(self.estimates) > self.W):
            raise ConfigurationError("initial estimates must satisfy |xhat| <= W")

    def step_size(self, k: int) -> float:
        if k < 1:
            raise ValueError("estimation steps start at k = 1")
        return self.beta / k if self.policy == DECAYING else self.beta

    def update(self, bits, thresholds, noise: GaussianNoise, k: int) -> np.ndarray:
        self.estimates = rpa_step(
            self.estimates, bits, thresholds, noise, self.step_size(k), self.W
        )
        return self.estimates


def estimate_error_vector(estimates, x, idx) -> np.ndarray:
    """``theta_ij = xhat_ij - x_j`` stacked in edge order.

    ``estimates`` may be an :class:`EstimatorBank` or an array whose last
    axis runs over edges; ``x`` has the agents on its last axis.
    """
    if isinstance(estimates, EstimatorBank):
        estimates = estimates.estimates
    return np.asarray(estimates, dtype=float) - np.asarray(x, dtype=float)[..., idx.sources]
