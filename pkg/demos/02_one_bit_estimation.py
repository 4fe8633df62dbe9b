"""Estimate a fixed value from one noisy bit per step.

The sensor only reports whether ``x + noise`` fell below a threshold. The
projected recursion nudges its estimate by ``step * (F(B - xhat) - bit)``.
With a decaying step the estimate settles on the true value; with a constant
step it keeps fluctuating around it.
"""

import numpy as np

from bitrack import GaussianNoise, rpa_step

rng = np.random.default_rng(0)
noise = GaussianNoise(2.0)
x_true, B, W = 1.5, 0.0, 10.0
paths = 500

for label, step in [("decaying 8/k", lambda k: 8.0 / k), ("constant 0.5", lambda k: 0.5)]:
    xhat = np.zeros(paths)
    print(label)
    for k in range(1, 5001):
        bits = (x_true + noise.sample(rng, paths) <= B).astype(float)
        xhat = rpa_step(xhat, bits, B, noise, step(k), W)
        if k in (10, 100, 1000, 5000):
            print(f"  k={k:5d}  mean {xhat.mean():+.4f}  mean sq. error {((xhat - x_true) ** 2).mean():.5f}")
