"""Track a leader that settles, using the decaying gains.

The leader moves by 1/k^2 and stops; followers use step beta/k for their
estimates and gain 1/(k+1) for control. Outputs go to ``out/decaying``.
"""

from bitrack import GaussianNoise, export, preset, run

# the reproduction preset, shortened and with a wider noise so the estimator
# is not starved of information at the projection boundary
c = preset("paper-crs").with_overrides(horizon=20_000, replicas=20, noise=GaussianNoise(10.0), beta=30.0)
res = run(c)
m = res.metrics
for k in (10, 100, 1000, 10_000, 20_000):
    i = m.at(k) if k in m.k else int(abs(m.k - k).argmin())
    print(f"k={m.k[i]:6d}  worst follower MSE {m.tracking_max[i]:10.4f}  estimate error L2 {m.L2[i]:10.4f}")
print(export(res, "out/decaying"))
