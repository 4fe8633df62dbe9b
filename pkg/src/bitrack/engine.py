"""Simulation loop, Monte Carlo replication and metrics.

Loop convention, shared by both algorithms. At step ``k`` the state is
``x(k)`` and the estimates are ``xhat(k-1)``:

1. for ``k >= 1`` every follower draws one bit per neighbor from ``x_j(k)``
   and updates its estimate to ``xhat(k)`` with step ``beta/k`` (or ``beta``);
   at ``k = 0`` the initial estimates are used as ``xhat(0)``;
2. followers apply ``u_i(k)`` with gain ``1/(k+1)`` (or ``1/N``) using
   ``xhat(k)``; the leader moves by ``f(k)``.

All replicas advance together as rows of ``(R, ...)`` arrays. Every
(replica, edge) pair owns an independent random stream derived from the
master seed, so results do not depend on how many replicas run alongside.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .channel import GaussianNoise, observe_bits
from .control import BRS, CRS, GainPolicy, brs_control, crs_control, leader_step
from .errors import ConfigurationError, NumericalError, RunDiverged
from .estimation import CONSTANT, DECAYING, rpa_step
from .spectral import error_coordinates, reduce, solve_lyapunov
from .topology import Topology, build_M, has_spanning_tree_rooted_at_leader, laplacian, max_degree

__all__ = [
    "RunConfig",
    "TrajectoryLog",
    "MetricSeries",
    "RunResult",
    "RateFit",
    "NoiseStreams",
    "Simulation",
    "log_steps",
    "run",
    "fit_rate",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a batch of replicas.

    ``initial_estimates`` is either ``None`` (all zeros), a per-edge tuple in
    edge-index order, or ``("by_source", values)`` meaning every observer of
    agent ``j`` starts from ``values[j]``.
    """

    topology: Topology
    noise: GaussianNoise
    W: float
    beta: float
    controller: GainPolicy
    reference: object
    initial_state: tuple
    thresholds: float | tuple = 0.0
    estimator_policy: str | None = None
    initial_estimates: tuple | None = None
    horizon: int = 1000
    replicas: int = 1
    seed: int = 0
    log_stride: int | str = "geometric"
    kappa: float = 1.0
    f_B_override: float | None = None
    c1: float | None = None

    def __post_init__(self):
        t = self.topology
        if self.estimator_policy is None:
            policy = DECAYING if self.controller.variant == CRS else CONSTANT
            object.__setattr__(self, "estimator_policy", policy)
        if self.estimator_policy not in (DECAYING, CONSTANT):
            raise ConfigurationError(f"unknown estimator policy {self.estimator_policy!r}", "estimator.policy")
        if not self.W > 0:
            raise ConfigurationError("must be positive", "estimator.W")
        if not self.beta > 0:
            raise ConfigurationError("must be positive", "estimator.beta")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ConfigurationError("must be an integer >= 1", "horizon")
        if int(self.replicas) != self.replicas or self.replicas < 1:
            raise ConfigurationError("must be an integer >= 1", "replicas")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise ConfigurationError("must be an unsigned 64-bit integer", "seed")
        x0 = tuple(float(v) for v in self.initial_state)
        if len(x0) != t.n_agents:
            raise ConfigurationError(f"needs {t.n_agents} values", "initial_state")
        if any(abs(v) > self.W for v in x0[:-1]):
            raise ConfigurationError("follower initial states must satisfy |x_i(0)| <= W", "initial_state")
        object.__setattr__(self, "initial_state", x0)
        if isinstance(self.thresholds, (list, tuple)):
            th = tuple(float(v) for v in self.thresholds)
            if len(th) != len(t.edges):
                raise ConfigurationError(f"needs one threshold per edge ({len(t.edges)})", "noise.thresholds")
            object.__setattr__(self, "thresholds", th)
        else:
            object.__setattr__(self, "thresholds", float(self.thresholds))
        est = self.initial_estimates
        if est is not None:
            if len(est) == 2 and est[0] == "by_source":
                vals = tuple(float(v) for v in est[1])
                if len(vals) != t.n_agents:
                    raise ConfigurationError(f"by_source needs {t.n_agents} values", "estimator.initial_estimates")
                est = ("by_source", vals)
            else:
                est = tuple(float(v) for v in est)
                if len(est) != len(t.edges):
                    raise ConfigurationError(f"needs one value per edge ({len(t.edges)})", "estimator.initial_estimates")
            object.__setattr__(self, "initial_estimates", est)
        if np.any(np.abs(self.initial_estimate_vector()) > self.W):
            raise ConfigurationError("initial estimates must satisfy |xhat| <= W", "estimator.initial_estimates")
        if self.kappa <= 0:
            raise ConfigurationError("must be positive", "kappa")
        log_steps(1, self.log_stride)  # validates the stride string

    def threshold_vector(self) -> np.ndarray:
        if isinstance(self.thresholds, tuple):
            return np.array(self.thresholds)
        return np.full(len(self.topology.edges), self.thresholds)

    def initial_estimate_vector(self) -> np.ndarray:
        idx = self.topology.edges
        est = self.initial_estimates
        if est is None:
            return np.zeros(len(idx))
        if est[0] == "by_source":
            return np.asarray(est[1])[idx.sources]
        return np.asarray(est, dtype=float)

    def with_overrides(self, **changes) -> "RunConfig":
        from dataclasses import replace

        return replace(self, **{k: v for k, v in changes.items() if v is not None})


def log_steps(K: int, stride) -> np.ndarray:
    """Logged step indices in ``[0, K]``.

    ``stride`` is a positive int (every ``stride`` steps), ``"geometric"``
    (0 and powers of two) or ``"geometric:m"`` (``m`` points per octave).
    The endpoints 0 and ``K`` are always included.
    """
    if isinstance(stride, (int, np.integer)) and not isinstance(stride, bool):
        if stride < 1:
            raise ConfigurationError("must be >= 1", "log_stride")
        ks = np.arange(0, K + 1, int(stride))
    elif isinstance(stride, str) and stride.startswith("geometric"):
        per_octave = 1
        if ":" in stride:
            try:
                per_octave = int(stride.split(":", 1)[1])
            except ValueError:
                raise ConfigurationError(f"bad geometric density in {stride!r}", "log_stride") from None
            if per_octave < 1:
                raise ConfigurationError("geometric density must be >= 1", "log_stride")
        top = math.log2(K) if K >= 1 else 0.0
        m = np.arange(0, math.floor(top * per_octave) + 1) / per_octave
        ks = np.unique(np.round(2.0**m).astype(np.int64))
    else:
        raise ConfigurationError(f"unsupported stride {stride!r}", "log_stride")
    return np.unique(np.concatenate([[0], ks[ks <= K], [K]]))


class NoiseStreams:
    """Standard normal draws, one independent stream per (replica, edge).

    Stream ``(r, e)`` is seeded by ``SeedSequence(seed, spawn_key=(r, e))``
    and read in blocks; the sequence it yields does not depend on the block
    size or on the number of replicas.
    """

    def __init__(self, seed: int, replicas: int, n_edges: int, block: int = 1024, first_replica: int = 0):
        self.block = int(block)
        self.shape = (replicas, n_edges)
        self._gens = [
            [
                np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(r, e))))
                for e in range(n_edges)
            ]
            for r in range(first_replica, first_replica + replicas)
        ]
        self._buf = np.empty((self.block, replicas, n_edges))
        self._pos = self.block

    def _refill(self):
        for r, row in enumerate(self._gens):
            for e, g in enumerate(row):
                self._buf[:, r, e] = g.standard_normal(self.block)
        self._pos = 0

    def next(self) -> np.ndarray:
        if self._pos >= self.block:
            self._refill()
        out = self._buf[self._pos].copy()  # the buffer is reused on refill
        self._pos += 1
        return out


@dataclass
class TrajectoryLog:
    """Snapshots at logged steps. Arrays are ``(T, R, ...)``."""

    k: np.ndarray
    x: np.ndarray
    xhat: np.ndarray
    theta: np.ndarray
    eta: np.ndarray
    u: np.ndarray
    f: np.ndarray


@dataclass
class MetricSeries:
    """Replica averages at the logged steps.

    ``L1`` is the mean of ``eta^T H eta``, ``L2`` the mean of ``theta^T theta``
    and ``mse[:, i]`` the mean of ``(x_i - x_leader)^2``.
    """

    k: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    mse: np.ndarray
    leader: np.ndarray

    @property
    def tracking_max(self) -> np.ndarray:
        return self.mse.max(axis=1)

    @property
    def tracking_mean(self) -> np.ndarray:
        return self.mse.mean(axis=1)

    def at(self, k: int) -> int:
        pos = np.searchsorted(self.k, k)
        if pos >= len(self.k) or self.k[pos] != k:
            raise KeyError(f"step {k} was not logged")
        return int(pos)


@dataclass
class RunResult:
    config: RunConfig
    log: TrajectoryLog
    metrics: MetricSeries
    diagnostics: dict = field(default_factory=dict)


class Simulation:
    """Vectorized state of ``R`` replicas of one configuration."""

    def __init__(self, config: RunConfig, replicas: int | None = None, block: int = 1024):
        self.config = c = config
        t = c.topology
        self.R = c.replicas if replicas is None else replicas
        self.idx = t.edges
        self.n = t.n_followers
        self.L = laplacian(t)
        self.M = build_M(t, self.idx)
        self.d_star = max_degree(t)
        self.thresholds = c.threshold_vector()
        self.x = np.tile(np.asarray(c.initial_state, dtype=float), (self.R, 1))
        self.xhat = np.tile(c.initial_estimate_vector(), (self.R, 1))
        self.k = 0
        self.streams = NoiseStreams(c.seed, self.R, len(self.idx), block=block)
        self._recv = self.idx.receivers
        self._src = self.idx.sources
        self.max_vector_residual = 0.0
        self.max_scalar_residual = 0.0
        self.max_follower_abs = 0.0

    def step_size(self, k):
        return self.config.beta / k if self.config.estimator_policy == DECAYING else self.config.beta

    def gain(self, k):
        return self.config.controller.gain(k)

    def observe_and_estimate(self, bits=None):
        """Draw bits from ``x(k)`` and move the estimates to ``xhat(k)`` (no-op at k = 0)."""
        if self.k == 0:
            return None
        c = self.config
        z = self.streams.next()
        if bits is None:
            bits = observe_bits(self.x[:, self._src], self.thresholds, c.noise, z)
        else:
            bits = np.broadcast_to(np.asarray(bits, dtype=float), self.xhat.shape)
        self.xhat = rpa_step(self.xhat, bits, self.thresholds, c.noise, self.step_size(self.k), c.W)
        return bits

    def theta(self) -> np.ndarray:
        return self.xhat - self.x[:, self._src]

    def apply_control(self, verify=False, scalar_check=False):
        """Advance ``x(k) -> x(k+1)`` with the matrix form of the update; returns ``u(k)``."""
        k = self.k
        g = self.gain(k)
        f = self.config.reference.increment(k)
        theta = self.theta()
        x_next = self.x - g * (self.x @ self.L.T) + g * (theta @ self.M.T)
        x_next[:, -1] += f
        if verify:
            # per-edge form: u_i = -g * sum_j (x_i - xhat_ij)
            u = np.zeros_like(self.x)
            np.add.at(u.T, self._recv, -(self.x[:, self._recv] - self.xhat).T)
            u *= g
            u[:, -1] = f
            self.max_vector_residual = max(self.max_vector_residual, float(np.abs(self.x + u - x_next).max()))
        if scalar_check:
            self.max_scalar_residual = max(self.max_scalar_residual, self._scalar_residual(x_next))
        if not np.all(np.isfinite(x_next)):
            raise RunDiverged("non-finite state", k)
        u = x_next - self.x
        self.x = x_next
        self.k += 1
        return u, f

    def _scalar_residual(self, x_next):
        c, t, k = self.config, self.config.topology, self.k
        worst = 0.0
        for r in range(self.R):
            for i in range(self.n):
                est = {j: self.xhat[r, self.idx.encode(i, j)] for j in t.neighbors(i)}
                if c.controller.variant == CRS:
                    u_i = crs_control(i, self.x[r, i], est, k, t)
                else:
                    u_i = brs_control(i, self.x[r, i], est, c.controller.N, t)
                worst = max(worst, abs(self.x[r, i] + u_i - x_next[r, i]))
            lead, _ = leader_step(c.reference, k, self.x[r, -1])
            worst = max(worst, abs(lead - x_next[r, -1]))
        return worst

    def check_state_bound(self):
        """Followers stay in ``[-W, W]`` once ``k >= d*`` (decaying gain)."""
        if self.k >= self.d_star:
            m = float(np.abs(self.x[:, : self.n]).max()) if self.n else 0.0
            self.max_follower_abs = max(self.max_follower_abs, m)
            if self.config.controller.variant == CRS and m > self.config.W * (1 + 1e-12):
                raise RunDiverged(f"follower state {m:.6g} left [-W, W]", self.k)

    def step(self, bits=None, verify=False, scalar_check=False):
        """One full iteration at the current ``k``; returns ``(x(k), xhat(k), u(k), f(k))``."""
        self.observe_and_estimate(bits)
        x_k, xhat_k = self.x.copy(), self.xhat.copy()
        self.check_state_bound()
        u, f = self.apply_control(verify=verify, scalar_check=scalar_check)
        return x_k, xhat_k, u, f


def _reduction(config):
    try:
        sr = reduce(laplacian(config.topology))
        lyap = solve_lyapunov(sr.L_tilde, config.kappa)
    except (NumericalError, ConfigurationError) as exc:
        log.warning("no spectral reduction, L1 will be NaN: %s", exc)
        return None, None
    return sr, lyap


def run(config: RunConfig, verify=False, scalar_check=False, block: int = 1024) -> RunResult:
    """Simulate ``config.replicas`` replicas for ``config.horizon`` steps.

    ``verify`` compares the matrix update with the per-edge sum at every step;
    ``scalar_check`` also replays each follower through the scalar control
    functions (slow, meant for small replica counts).
    """
    started = time.perf_counter()
    t = config.topology
    if config.controller.variant == CRS and not has_spanning_tree_rooted_at_leader(t):
        raise ConfigurationError("no spanning tree rooted at the leader", "topology")
    sr, lyap = _reduction(config)
    sim = Simulation(config, block=block)
    K = config.horizon
    grid = log_steps(K, config.log_stride)
    T = len(grid)
    R, n1, E = sim.R, t.n_agents, len(sim.idx)
    xs = np.empty((T, R, n1))
    xh = np.empty((T, R, E))
    us = np.zeros((T, R, n1))
    fs = np.zeros(T)
    slot = 0
    for k in range(K + 1):
        sim.observe_and_estimate()
        sim.check_state_bound()
        logged = slot < T and grid[slot] == k
        if logged:
            xs[slot] = sim.x
            xh[slot] = sim.xhat
        if k < K:
            u, f = sim.apply_control(verify=verify, scalar_check=scalar_check)
            if logged:
                us[slot], fs[slot] = u, f
        if logged:
            slot += 1
    theta = xh - xs[:, :, sim._src]
    if sr is not None:
        _, eta = error_coordinates(xs, sr)
        L1 = np.einsum("tri,ij,trj->tr", eta, lyap.H, eta).mean(axis=1)
    else:
        eta = np.full((T, R, t.n_followers), np.nan)
        L1 = np.full(T, np.nan)
    L2 = np.einsum("tre,tre->tr", theta, theta).mean(axis=1)
    dev = xs[:, :, :-1] - xs[:, :, -1:]
    mse = (dev**2).mean(axis=1)
    series = MetricSeries(k=grid, L1=L1, L2=L2, mse=mse, leader=xs[:, :, -1].mean(axis=1))
    traj = TrajectoryLog(k=grid, x=xs, xhat=xh, theta=theta, eta=eta, u=us, f=fs)
    diag = {
        "seconds": time.perf_counter() - started,
        "max_follower_abs_after_dstar": sim.max_follower_abs,
    }
    if verify:
        diag["max_vector_residual"] = sim.max_vector_residual
    if scalar_check:
        diag["max_scalar_residual"] = sim.max_scalar_residual
    return RunResult(config=config, log=traj, metrics=series, diagnostics=diag)


@dataclass(frozen=True)
class RateFit:
    slope: float
    stderr: float
    intercept: float
    n_points: int

    def interval(self, z: float = 1.96) -> tuple[float, float]:
        return self.slope - z * self.stderr, self.slope + z * self.stderr


def fit_rate(series, k_min, k_max, metric="tracking_mean") -> RateFit:
    """Least-squares slope of ``log(metric)`` against ``log(k)`` on ``[k_min, k_max]``.

    ``series`` is a :class:`MetricSeries` (``metric`` names one of its
    series) or a ``(k, values)`` pair.
    """
    if not (k_min > 0 and k_max / k_min >= 10):
        raise ValueError("need k_min > 0 and k_max / k_min >= 10")
    if isinstance(series, MetricSeries):
        k, y = series.k, np.asarray(getattr(series, metric))
    else:
        k, y = (np.asarray(a, dtype=float) for a in series)
    sel = (k >= k_min) & (k <= k_max)
    if np.count_nonzero(sel) < 3:
        raise ValueError("fewer than 3 points in the fitting window")
    if np.any(y[sel] <= 0):
        raise ValueError("metric must be positive to fit on a log scale")
    res = stats.linregress(np.log(k[sel]), np.log(y[sel]))
    return RateFit(slope=float(res.slope), stderr=float(res.stderr), intercept=float(res.intercept), n_points=int(np.count_nonzero(sel)))
