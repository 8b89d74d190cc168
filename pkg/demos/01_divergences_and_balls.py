"""Divergences between Bernoulli laws and the balls they define.

Run with ``python demos/01_divergences_and_balls.py``.
"""

import math

import numpy as np

from fanobound import CHI2, HELLINGER, KL, TV, bernoulli_divergence, invert_ball
from fanobound.inversion import pinsker_lower

# %% The four named divergences between Bern(0.75) and Bern(0.25)
for spec in (KL, TV, CHI2, HELLINGER):
    print(f"{str(spec):>10}: D(Bern(.75) || Bern(.25)) = {bernoulli_divergence(spec, 0.75, 0.25):.12f}")
print(f"{'':>10}  (KL should be ln(3)/2 = {0.5 * math.log(3):.12f})")

# %% Inverting the KL ball: which means a are within budget B of b = 0.25?
# KL(0 || 0.25) = ln(4/3) < ln(3)/2, so the lower end is clamped to 0.
ball = invert_ball(KL, 0.25, 0.5 * math.log(3))
print(f"\nKL ball around b=0.25 at B=ln(3)/2: [{ball.lower}, {ball.upper:.10f}]")

# %% How the ball grows with the budget, for each divergence
print("\nball [a-, a+] around b = 0.3")
print(f"{'B':>6} " + " ".join(f"{str(s):>22}" for s in (KL, TV, CHI2, HELLINGER)))
for B in (0.0, 0.01, 0.05, 0.2, 1.0):
    cells = []
    for spec in (KL, TV, CHI2, HELLINGER):
        b = invert_ball(spec, 0.3, B)
        cells.append(f"[{b.lower:.4f}, {b.upper:.4f}]")
    print(f"{B:>6} " + " ".join(f"{c:>22}" for c in cells))

# %% Exact inversion versus the Pinsker envelope b - sqrt(B/2)
print("\nKL lower end vs Pinsker envelope (b = 0.6)")
for B in np.linspace(0.0, 0.4, 5):
    exact = invert_ball(KL, 0.6, B).lower
    print(f"  B={B:.2f}: exact {exact:.6f} >= Pinsker {float(pinsker_lower(0.6, B)):.6f}")
