"""Searching for eigenvectors nobody can write down.

The flagged vector is an eigenvector in a Haar-random basis.  Starting from
sum_x |x>|x>/sqrt(N) puts weight d/N on the flagged pairs whatever the basis,
so ordinary amplitude amplification applies.
"""
import math

from fracpow import FlagOracle, entangled_search, estimate_subspace_dim, fixtures

f = fixtures.dyadic(16, 4, seed=8)
oracle = FlagOracle.from_fixture(f, [3])
for k in range(5):
    run = entangled_search(f, oracle, k)
    print(f"k={k}  success={run.success_prob:.6f}  sin^2((2k+1)theta)={run.predicted:.6f}")

print("theta =", run.theta, "= arcsin(1/4):", math.asin(0.25))

for n, d in ((4, 1), (8, 2), (4, 4)):
    g = fixtures.dyadic(n, 2, seed=n)
    est = estimate_subspace_dim(g, FlagOracle.from_fixture(g, range(d)), n.bit_length() + 1)
    print(f"N={n} d={d}: estimate {est.estimate}, P(|est - d| <= 1) = {est.prob_within_one:.3f}")
