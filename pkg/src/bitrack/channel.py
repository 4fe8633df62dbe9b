"""Binary-valued sensing: additive Gaussian noise followed by a threshold."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ConfigurationError

__all__ = [
    "GaussianNoise",
    "SensorBank",
    "observe_bit",
    "observe_bits",
    "excitation_gain",
    "UnexcitableChannelWarning",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class UnexcitableChannelWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class GaussianNoise:
    """Zero-mean Gaussian noise with standard deviation ``sigma``.

    ``sigma == 0`` is the noiseless limit: the bit becomes a deterministic
    threshold test and the cdf a unit step.
    """

    sigma: float

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ConfigurationError(f"noise sigma must be finite and >= 0, got {self.sigma}")
        object.__setattr__(self, "sigma", float(self.sigma))

    @classmethod
    def from_variance(cls, variance):
        return cls(math.sqrt(variance))

    @property
    def variance(self) -> float:
        return self.sigma**2

    @property
    def degenerate(self) -> bool:
        return self.sigma == 0.0

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            out = np.where(x >= 0, 1.0, 0.0)
        else:
            # ndtr goes through erfc in the lower tail, so it keeps relative accuracy there
            out = ndtr(x / self.sigma)
        return out[()] if out.ndim == 0 else out

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.degenerate:
            out = np.where(x == 0, np.inf, 0.0)
        else:
            z = x / self.sigma
            out = np.exp(-0.5 * z * z) / (self.sigma * _SQRT_2PI)
        return out[()] if out.ndim == 0 else out

    def sample(self, rng, size=None):
        return self.sigma * rng.standard_normal(size)


@dataclass(frozen=True, eq=False)
class SensorBank:
    """Per-edge thresholds, ordered like the edge index."""

    thresholds: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.thresholds, dtype=float))
        if b.ndim != 1 or not np.all(np.isfinite(b)):
            raise ConfigurationError("thresholds must be a finite 1-d array")
        b.setflags(write=False)
        object.__setattr__(self, "thresholds", b)

    @classmethod
    def uniform(cls, value, n_edges):
        return cls(np.full(n_edges, float(value)))

    @property
    def B(self) -> float:
        """Largest absolute threshold."""
        return float(np.abs(self.thresholds).max(initial=0.0))

    def __len__(self):
        return len(self.thresholds)


def observe_bit(x_j, threshold, noise: GaussianNoise, rng) -> int:
    """One binary observation: 1 iff ``x_j + noise <= threshold``."""
    y = x_j + (0.0 if noise.degenerate else noise.sigma * rng.standard_normal())
    return int(y <= threshold)


def observe_bits(x_sources, thresholds, noise: GaussianNoise, z):
    """Vectorized :func:`observe_bit` given pre-drawn standard normals ``z``."""
    return (x_sources + noise.sigma * z <= thresholds).astype(np.float64)


def excitation_gain(noise: GaussianNoise, B: float, W: float) -> float:
    """Noise density at ``B + W``: the smallest slope of the bit probability
    over every estimate and state the projection allows."""
    if W < 0:
        raise ConfigurationError("projection bound W must be nonnegative")
    f_b = float(noise.pdf(abs(B) + W))
    if not f_b > 0:
        warnings.warn(
            f"channel unexcitable at W={W}: noise density at B+W underflows to 0",
            UnexcitableChannelWarning,
            stacklevel=2,
        )
    return f_b
