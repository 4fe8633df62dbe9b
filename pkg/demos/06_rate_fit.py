"""Measure a decay rate from simulation.

A star graph where each follower hears only the leader, which moves by
1/k^1.5. We fit the log-log slope of the mean tracking error and compare it
with the predicted rate class.
"""

from bitrack import GainPolicy, GaussianNoise, PowerLawReference, RunConfig, Topology, fit_rate, run
from bitrack import compute_constants, crs_rate, laplacian, reduce, solve_lyapunov

t = Topology.from_neighbor_sets(4, {i: [4] for i in range(4)})
noise, W = GaussianNoise(20.0), 20.0
sr = reduce(laplacian(t))
tc = compute_constants(t, sr, solve_lyapunov(sr.L_tilde), W=W, noise=noise)
beta = 2 * tc.l1 / tc.f_B
rr = crs_rate(tc, beta, 0.5)
print(f"beta = {beta:.1f}; predicted class {rr.rate_class}, exponent {rr.exponent}")

c = RunConfig(topology=t, noise=noise, W=W, beta=beta, controller=GainPolicy("crs"),
              reference=PowerLawReference(0.5), initial_state=(-10, -5, 5, 10, 0),
              horizon=20_000, replicas=50, seed=1, log_stride="geometric:8")
fit = fit_rate(run(c).metrics, 200, 20_000)
print(f"measured slope {fit.slope:.3f}, 95% interval {tuple(round(v, 3) for v in fit.interval())}")
