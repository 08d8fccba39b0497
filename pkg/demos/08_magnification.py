"""Why small errors do not stay small.

Take U with every 32nd root of unity as an eigenvalue and rotate it so one
eigenphase sits just below 1.  Our square root sends that eigenvector to the
wrong branch, so U^-1/2 . (our U^1/2) has an eigenvalue -1 there.  A search
for -1 eigenvectors then finds it with probability sin^2((2k+1) theta),
which grows like k^2/2^m; with the exact square root there is nothing to find.
"""
from fracpow import magnification_experiment

res = magnification_experiment(5, range(6))
print(f"flagged: {res.flagged}, weight lost to ancillas: {res.discarded_weight:.2e}")
for row in res.rows:
    print(f"k={row.k}  error_prob={row.error_prob:.6f}  predicted={row.predicted:.6f}")

null = magnification_experiment(5, range(6), exact=True)
print("exact square root:", [row.error_prob for row in null.rows])
