"""Track a sinusoidal leader with the constant gains.

Gain 1/N and step beta stay fixed, so errors do not vanish, but they stay
bounded while the leader keeps moving.
"""

import numpy as np

from bitrack import export, preset, run

c = preset("paper-brs").with_overrides(horizon=20_000, replicas=10)
res = run(c)
m = res.metrics
late = m.k >= 5_000
print(f"worst follower MSE after k=5000: max {m.tracking_max[late].max():.3f}, mean {m.tracking_max[late].mean():.3f}")
print(f"largest |x_i| after the first steps: {res.diagnostics['max_follower_abs_after_dstar']:.2f} (W = {c.W})")
print(f"leader range: [{m.leader.min():.2f}, {m.leader.max():.2f}]")
print(export(res, "out/constant"))
