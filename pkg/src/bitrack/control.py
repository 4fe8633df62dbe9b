"""Tracking controllers and leader reference generators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigurationError
from .topology import Topology

__all__ = [
    "CRS",
    "BRS",
    "GainPolicy",
    "crs_control",
    "brs_control",
    "ConstantReference",
    "SummableReference",
    "PowerLawReference",
    "SinusoidReference",
    "TableReference",
    "leader_step",
]

CRS = "crs"
BRS = "brs"


@dataclass(frozen=True)
class GainPolicy:
    """Controller variant: gain ``1/(k+1)`` (crs) or constant ``1/N`` (brs)."""

    variant: str = CRS
    N: float | None = None

    def __post_init__(self):
        if self.variant not in (CRS, BRS):
            raise ConfigurationError(f"unknown controller {self.variant!r}")
        if self.variant == BRS and not (self.N is not None and self.N > 0):
            raise ConfigurationError("brs controller needs a positive constant N")

    def gain(self, k: int) -> float:
        return 1.0 / (k + 1) if self.variant == CRS else 1.0 / self.N

    def validate(self, lambda_H: float, lambda_L: float):
        """Check ``N > 2 lambda_H lambda_L`` required by the constant-gain analysis."""
        if self.variant == BRS and not self.N > 2 * lambda_H * lambda_L:
            raise ConfigurationError(
                f"N = {self.N} must exceed 2*lambda_H*lambda_L = {2 * lambda_H * lambda_L:.6g}"
            )


def _disagreement(i, x_i, estimates: Mapping[int, float], t: Topology) -> float:
    nbrs = t.neighbors(i)
    if i >= t.n_followers:
        raise ValueError("the leader has no feedback control")
    if set(estimates) != set(nbrs):
        raise ConfigurationError(
            f"agent {i} needs estimates for neighbors {nbrs}, got {sorted(estimates)}"
        )
    return sum(x_i - estimates[j] for j in nbrs)


def crs_control(i: int, x_i: float, estimates: Mapping[int, float], k: int, t: Topology) -> float:
    """``u_i(k) = -(1/(k+1)) * sum_j a_ij (x_i - xhat_ij)``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    return -_disagreement(i, x_i, estimates, t) / (k + 1)


def brs_control(i: int, x_i: float, estimates: Mapping[int, float], N: float, t: Topology) -> float:
    """``u_i(k) = -(1/N) * sum_j a_ij (x_i - xhat_ij)``."""
    return -_disagreement(i, x_i, estimates, t) / N


# --- leader references ------------------------------------------------------
#
# Every reference exposes ``increment(k)`` = f(k), the amount the leader moves
# from step k to k+1, plus an optional bound ``epsilon`` on |f(k)|.


@dataclass(frozen=True)
class ConstantReference:
    kind = "constant"

    def increment(self, k: int) -> float:
        return 0.0

    @property
    def epsilon(self) -> float:
        return 0.0


@dataclass(frozen=True)
class PowerLawReference:
    """``f(k) = 1/k^(1+epsilon)`` for ``k >= 1`` with ``0 < epsilon < 1``; ``f(0) = 0``."""

    epsilon_rate: float
    kind = "power_law"

    def __post_init__(self):
        if not 0 < self.epsilon_rate < 1:
            raise ConfigurationError("power-law reference needs 0 < epsilon < 1")

    def increment(self, k: int) -> float:
        return 0.0 if k < 1 else k ** -(1.0 + self.epsilon_rate)

    @property
    def epsilon(self) -> float:
        return 1.0


@dataclass(frozen=True)
class SummableReference:
    """``f(k) = 1/k^2`` for ``k >= 1``; ``f(0) = 0``."""

    kind = "summable"

    def increment(self, k: int) -> float:
        return 0.0 if k < 1 else 1.0 / (k * k)

    @property
    def epsilon(self) -> float:
        return 1.0


@dataclass(frozen=True)
class SinusoidReference:
    """Leader at ``x(0) + A sin(omega k)``; increments are exact differences."""

    amplitude: float
    frequency: float
    kind = "sinusoid"

    def increment(self, k: int) -> float:
        a, w = self.amplitude, self.frequency
        return a * math.sin(w * (k + 1)) - a * math.sin(w * k)

    @property
    def epsilon(self) -> float:
        return abs(self.amplitude * self.frequency)

    @property
    def varsigma(self) -> float:
        return abs(self.amplitude)


@dataclass(frozen=True)
class TableReference:
    """Replay recorded leader positions; the leader holds after the table ends."""

    values: tuple
    kind = "table"

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        if len(v) < 1 or not all(math.isfinite(x) for x in v):
            raise ConfigurationError("reference table needs finite values")
        object.__setattr__(self, "values", v)

    def increment(self, k: int) -> float:
        if k + 1 >= len(self.values):
            return 0.0
        return self.values[k + 1] - self.values[k]

    @property
    def epsilon(self) -> float:
        return float(np.abs(np.diff(self.values)).max(initial=0.0))


def leader_step(gen, k: int, x_k: float) -> tuple[float, float]:
    """Advance the leader: returns ``(x(k+1), f(k))``."""
    f = gen.increment(k)
    return x_k + f, f
