"""Square root of a hidden unitary, one query-counted step at a time.

The black box below hides a 4x4 unitary whose eigenphases are multiples of
1/4.  Two estimation bits are then exact, so the three-stage algorithm
returns U^(1/2)|psi> to machine precision.
"""
import numpy as np

from fracpow import AncillaConfig, BlackBox, fixtures, haar_state, power_apply, rng_from_seed
from fracpow.qcore import spectral_power

f = fixtures.dyadic(4, m=2, seed=1)      # lam = 0, 1/4, 1/2, 3/4 in a random basis
print("eigenphases:", f.eigphases)

bb = BlackBox(f)
psi = haar_state(4, rng_from_seed(7))

res = power_apply(bb, psi, 0.5, AncillaConfig(m=2, r=1))
print("route:", res.backend)
print("queries:", res.ledger.as_dict())        # 3 controlled U, 3 controlled U^-1
print("trace distance to U^0.5|psi>:", res.err_vs_oracle)

# the same thing checked by hand against the spectral oracle
want = spectral_power(f, 0.5) @ psi
print("overlap:", abs(np.vdot(want, res.out_state.amps)))

# t > 1 is floor(t) direct calls plus the fractional remainder
res = power_apply(BlackBox(f), psi, 2.75, AncillaConfig(2, 1))
print("t = 2.75 queries:", res.ledger.as_dict(), "err:", res.err_vs_oracle)
