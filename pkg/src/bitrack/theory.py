"""Constants, convergence conditions and bound recursions for the two algorithms.

Symbols follow the usual notation of the analysis:

* ``lambda_H``  largest eigenvalue of the Lyapunov matrix ``H``; ``h = 1/lambda_min(H)``
* ``lambda_phi`` largest eigenvalue of ``(I-J)^T phi^T H phi (I-J)``
* ``lambda_W``  largest eigenvalue of ``W W^T``; ``lambda_L`` of ``L L^T``
* ``lambda_M``  largest eigenvalue of ``(I - W M / N)^T (I - W M / N)``
* ``d_star``    maximum follower in-degree; ``f_B`` noise density at ``B + W``
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import GaussianNoise, excitation_gain
from .errors import ConfigurationError
from .spectral import LyapunovSolution, SpectralReduction
from .topology import Topology, build_M, build_W, laplacian, max_degree

__all__ = [
    "TheoryConstants",
    "RateReport",
    "BrsBound",
    "compute_constants",
    "l1_theorem",
    "l1_alt",
    "l2_alt",
    "crs_condition",
    "crs_rate",
    "brs_bound",
    "crs_envelope",
    "brs_envelope",
    "bound_envelope",
    "TIE_TOL",
]

TIE_TOL = 1e-12


def _lmax(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.linalg.eigvalsh(0.5 * (a + a.T))[-1])


@dataclass(frozen=True)
class TheoryConstants:
    lambda_H: float
    h: float
    lambda_phi: float
    lambda_W: float
    lambda_L: float
    d_star: int
    f_B: float
    n_followers: int
    kappa: float = 1.0
    lambda_M: float | None = None
    N: float | None = None
    epsilon_bound: float | None = None
    f_B_overridden: bool = False
    # report-only values with no formula behind them
    c1: float | None = None
    lambda_theta: float | None = None

    @property
    def vacuous(self) -> bool:
        """True when ``f_B == 0`` and the decaying-gain condition can never hold."""
        return not self.f_B > 0

    @property
    def l1(self) -> float:
        return l1_theorem(self.h, self.lambda_W, self.lambda_L, self.lambda_H, self.lambda_phi, self.d_star)

    def to_dict(self) -> dict:
        return asdict(self)


def compute_constants(
    t: Topology,
    sr: SpectralReduction,
    lyap: LyapunovSolution,
    W: float,
    noise: GaussianNoise,
    B: float = 0.0,
    N: float | None = None,
    epsilon_bound: float | None = None,
    f_B_override: float | None = None,
    c1: float | None = None,
) -> TheoryConstants:
    """Evaluate every constant used by the convergence conditions.

    ``B`` is the largest absolute sensor threshold and ``W`` the projection
    bound. ``lambda_M`` needs the constant gain ``N``.
    """
    lap = laplacian(t)
    idx = t.edges
    Wm = build_W(t, idx)
    P = sr.disagreement
    A = P.T @ sr.phi.T @ lyap.H @ sr.phi @ P
    lam_M = None
    if N is not None:
        G = np.eye(len(idx)) - Wm @ build_M(t, idx) / N
        lam_M = _lmax(G.T @ G)
    if f_B_override is not None:
        f_B = float(f_B_override)
    else:
        f_B = excitation_gain(noise, B, W)
    return TheoryConstants(
        lambda_H=lyap.lambda_max,
        h=lyap.h,
        lambda_phi=_lmax(A),
        lambda_W=_lmax(Wm @ Wm.T) if len(idx) else 0.0,
        lambda_L=_lmax(lap @ lap.T),
        d_star=max_degree(t),
        f_B=f_B,
        n_followers=t.n_followers,
        kappa=lyap.kappa,
        lambda_M=lam_M,
        N=None if N is None else float(N),
        epsilon_bound=epsilon_bound,
        f_B_overridden=f_B_override is not None,
        c1=c1,
        lambda_theta=_lmax(sr.theta.T @ sr.theta),
    )


def l1_theorem(h, lambda_W, lambda_L, lambda_H, lambda_phi, d_star) -> float:
    """``h lW lL / (4 lH lphi d*) + 4 lphi^2 lH^3 d*^2 + d*`` (drives :func:`crs_condition`)."""
    return (
        h * lambda_W * lambda_L / (4 * lambda_H * lambda_phi * d_star)
        + 4 * lambda_phi**2 * lambda_H**3 * d_star**2
        + d_star
    )


def l1_alt(h, lambda_W, lambda_L, lambda_phi, d_star, c1) -> float:
    """Alternative threshold ``h^2 lW lL / (4 lphi) + 4 c1^2 d*^2 / lphi^3 + d*``.

    Reported next to :func:`l1_theorem` for comparison; not used by any condition.
    """
    return h**2 * lambda_W * lambda_L / (4 * lambda_phi) + 4 * c1**2 * d_star**2 / lambda_phi**3 + d_star


def l2_alt(h, lambda_W, lambda_L, lambda_phi, d_star, c1) -> float:
    """``8 lphi^2 d*^2 / (c1^3 - 2 lphi^2) + c1 h lW lL / (2 lphi) + 2 d* + 1`` (report only)."""
    return (
        8 * lambda_phi**2 * d_star**2 / (c1**3 - 2 * lambda_phi**2)
        + c1 * h * lambda_W * lambda_L / (2 * lambda_phi)
        + 2 * d_star
        + 1
    )


def crs_condition(tc: TheoryConstants, beta: float) -> dict:
    """Decaying-gain convergence test ``beta > l1 / f_B``."""
    threshold = math.inf if tc.vacuous else tc.l1 / tc.f_B
    return {
        "l1": tc.l1,
        "threshold": threshold,
        "beta": float(beta),
        "satisfied": bool(beta > threshold),
        "vacuous": tc.vacuous,
    }


@dataclass(frozen=True)
class RateReport:
    Q: np.ndarray
    lambda_min_Q: float
    epsilon: float
    rate_class: str
    exponent: float
    beta_threshold: float

    def to_dict(self) -> dict:
        return {
            "Q": self.Q.tolist(),
            "lambda_min_Q": self.lambda_min_Q,
            "epsilon": self.epsilon,
            "rate_class": self.rate_class,
            "exponent": self.exponent,
            "beta_threshold": self.beta_threshold,
        }


def crs_q_matrix(tc: TheoryConstants, beta: float) -> np.ndarray:
    """Symmetric 2x2 contraction matrix of the coupled (tracking, estimation) recursion."""
    a = tc.kappa / (2 * tc.lambda_H)
    b = -2 * tc.lambda_H * tc.lambda_phi * tc.d_star
    c = (
        2 * beta * tc.f_B
        - tc.h * tc.lambda_W * tc.lambda_L / (2 * tc.lambda_H * tc.lambda_phi * tc.d_star)
        - 2 * tc.d_star
    )
    return np.array([[a, b], [b, c]])


def lambda_min_2x2(a, b, c) -> float:
    """Smaller eigenvalue of ``[[a, b], [b, c]]``.

    Written as ``(a+c)/2 - hypot((a-c)/2, b)``; the textbook discriminant
    ``(a+c)^2 - 4(ac-b^2)`` cancels badly when ``a ~ c``.
    """
    return (a + c) / 2 - math.hypot((a - c) / 2, b)


def crs_rate(tc: TheoryConstants, beta: float, epsilon: float) -> RateReport:
    """Classify the predicted mean-square rate for ``f(k) = 1/k^(1+epsilon)``.

    ``poly_lambda`` means ``O(k^-lambda_min(Q))``, ``log_boundary`` means
    ``O(log k / k^epsilon)`` and ``poly_epsilon`` means ``O(k^-epsilon)``.
    """
    if not 0 < epsilon < 1:
        raise ConfigurationError("epsilon must lie in (0, 1)")
    Q = crs_q_matrix(tc, beta)
    lam = lambda_min_2x2(Q[0, 0], Q[0, 1], Q[1, 1])
    if abs(epsilon - lam) <= TIE_TOL:
        cls, expo = "log_boundary", epsilon
    elif epsilon > lam:
        cls, expo = "poly_lambda", lam
    else:
        cls, expo = "poly_epsilon", epsilon
    threshold = math.inf if tc.vacuous else tc.l1 / tc.f_B
    return RateReport(Q=Q, lambda_min_Q=lam, epsilon=epsilon, rate_class=cls, exponent=expo, beta_threshold=threshold)


@dataclass(frozen=True)
class BrsBound:
    a: float
    b: float
    c: float
    d: float
    Q: np.ndarray
    D: np.ndarray
    norm_Q: float
    feasible: bool
    condition_lhs: float
    condition_rhs: float | None
    reason: str | None
    steady_bound: float | None

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d": self.d,
            "Q": self.Q.tolist(),
            "D": self.D.tolist(),
            "norm_Q": self.norm_Q,
            "feasible": self.feasible,
            "condition_lhs": self.condition_lhs,
            "condition_rhs": self.condition_rhs,
            "reason": self.reason,
            "steady_bound": self.steady_bound,
        }


def brs_bound(tc: TheoryConstants, beta: float, N: float | None = None) -> BrsBound:
    """Steady-state bound ``|D| / (1 - |Q|)`` for the constant-gain algorithm.

    Feasibility is decided by ``(1 - beta f_B/2)^2 (c^2 + d^2 - (ad - bc)^2) < 1 - a^2 - b^2``
    with ``1 - a^2 - b^2 > 0``, which is equivalent to ``|Q| < 1``.
    """
    N = tc.N if N is None else float(N)
    if N is None:
        raise ConfigurationError("constant gain N is required")
    if not N > 2 * tc.lambda_H * tc.lambda_L:
        raise ConfigurationError(
            f"N = {N} must exceed 2*lambda_H*lambda_L = {2 * tc.lambda_H * tc.lambda_L:.6g}"
        )
    if tc.lambda_M is None or tc.N != N:
        raise ConfigurationError("constants were computed for a different N; recompute with this N")
    eps = tc.epsilon_bound if tc.epsilon_bound is not None else 0.0
    a = 3 * (1 - 1 / (N * tc.lambda_H))
    b = 3 * tc.lambda_phi * tc.d_star / N**2
    c = 3 * tc.lambda_W * tc.lambda_L * tc.h / N**2
    d = 3 * tc.lambda_M
    s = 1 - beta * tc.f_B / 2
    Q = np.array([[a, b], [s * c, s * d]])
    D = np.array(
        [
            3 * tc.lambda_phi * eps**2,
            3 * s * tc.lambda_W * eps**2 + tc.n_followers * tc.d_star * beta**2 / 4,
        ]
    )
    norm_Q = float(np.linalg.norm(Q, 2))
    num = 1 - a * a - b * b
    den = c * c + d * d - (a * d - b * c) ** 2
    lhs = s * s
    rhs = num / den if den > 0 else None
    if num <= 0:
        feasible = False
        reason = f"unsatisfiable: 1 - a^2 - b^2 = {num:.6g} <= 0 (a = {a:.6g})"
    elif s * s * den < num:
        feasible, reason = True, None
    else:
        feasible = False
        reason = f"beta violates the bound: (1 - beta f_B/2)^2 = {lhs:.6g} >= {rhs:.6g}"
    steady = float(np.linalg.norm(D) / (1 - norm_Q)) if norm_Q < 1 else None
    return BrsBound(
        a=a, b=b, c=c, d=d, Q=Q, D=D, norm_Q=norm_Q, feasible=feasible,
        condition_lhs=lhs, condition_rhs=rhs, reason=reason, steady_bound=steady,
    )


def crs_envelope(tc: TheoryConstants, beta, increment, K, L1_0=0.0, L2_0=0.0, c_f=1.0, c_k2=1.0, k_start=None):
    """Iterate the coupled upper-bound recursions of the decaying-gain algorithm.

    ``increment(k)`` is the leader step ``f(k)``; ``c_f`` and ``c_k2`` scale
    the ``O(f(k-1))`` and ``O(1/k^2)`` remainder terms. Iteration starts at
    the first ``k`` where both contraction factors lie in ``[0, 1]`` unless
    ``k_start`` is given. Returns ``(k, L1, L2)`` arrays. Shape diagnostic only.
    """
    alpha = 2 * tc.lambda_H * tc.lambda_phi * tc.d_star / tc.h
    r1 = tc.kappa / (2 * tc.lambda_H)
    r2 = 2 * beta * tc.f_B - tc.lambda_W * tc.lambda_L / alpha - 2 * tc.d_star
    g12 = 2 * tc.lambda_H * tc.lambda_phi * tc.d_star
    g21 = alpha * tc.h
    if k_start is None:
        k_start = max(1, math.ceil(max(r1, r2, 0.0))) + 1
    ks = np.arange(k_start, K + 1)
    L1 = np.empty(len(ks))
    L2 = np.empty(len(ks))
    l1, l2 = float(L1_0), float(L2_0)
    for n, k in enumerate(ks):
        fk = c_f * abs(increment(k - 1)) + c_k2 / (k * k)
        l1, l2 = (1 - r1 / k) * l1 + g12 / k * l2 + fk, (1 - r2 / k) * l2 + g21 / k * l1 + fk
        L1[n], L2[n] = l1, l2
    return ks, L1, L2


def brs_envelope(tc: TheoryConstants, beta, K, L1_0=0.0, L2_0=0.0, N=None):
    """Iterate the constant-gain bound recursion ``Z(k) = Q Z(k-1) + D``."""
    bb = brs_bound(tc, beta, N)
    z = np.array([L1_0, L2_0], dtype=float)
    out = np.empty((K, 2))
    for k in range(K):
        z = bb.Q @ z + bb.D
        out[k] = z
    return np.arange(1, K + 1), out[:, 0], out[:, 1]


def bound_envelope(tc: TheoryConstants, beta, K, variant="crs", **kw):
    """Dispatch to :func:`crs_envelope` or :func:`brs_envelope`."""
    if variant == "crs":
        return crs_envelope(tc, beta, K=K, **kw)
    if variant == "brs":
        return brs_envelope(tc, beta, K=K, **kw)
    raise ConfigurationError(f"unknown variant {variant!r}")
