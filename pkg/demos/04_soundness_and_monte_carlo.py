"""A short soundness sweep and a Monte Carlo check of the one-bit statistic.

The full acceptance sweep is 500 instances (``fanobound verify``); this demo
runs 25 to stay quick.
"""

import json

from fanobound import FuzzConfig, McSettings, TransformSpec, fuzz_soundness, mc_transform_estimate
from fanobound.verify import exact_transform_mean, random_instance
import numpy as np

summary = fuzz_soundness(FuzzConfig(iterations=25))
print(f"{summary['checks']} checks over {summary['instances']} random instances, {summary['violations']} violations")
print(json.dumps(summary["per_check"], indent=1))

# %% Y = 1{U <= phi(L)} has mean E[phi(L)]
inst = random_instance(np.random.default_rng(0))
phi = TransformSpec.clipped(5.0)
for n in (1_000, 10_000, 100_000):
    est, se = mc_transform_estimate(inst, phi, McSettings(samples=n))
    print(f"n={n:>7}: estimate {est:.4f} +/- {se:.4f}   exact {exact_transform_mean(inst, phi):.4f}")
