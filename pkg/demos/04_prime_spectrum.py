"""Huge powers for the price of one estimate.

Eigenphases l/p with p among the first b primes are pinned down by a 7-bit
estimate (2^7 > 2*7*5).  Continued fractions recover l/p, and U^t only needs
t*l mod p, so t = 10^30 costs the same as t = 3.
"""
from fractions import Fraction

from fracpow import AncillaConfig, exact_power_apply, fixtures, haar_state, primorial, rng_from_seed
from fracpow.ratspec import convergents, recover_eigenphase

print("convergents of 43/128:", convergents(43, 128))
print("43/128 recovers", recover_eigenphase(43, 7, 7, [2, 3, 5, 7]))   # 1/3

pf = fixtures.prime_fixture(4, 4, seed=2)
print("phases:", [str(x) for x in pf.assignment], " order:", pf.order, "=", primorial(4))

psi = haar_state(4, rng_from_seed(0))
# one estimate lands on a neighbouring fraction with fair probability ...
res = exact_power_apply(pf, psi, 105, AncillaConfig(7, 1))
print("r=1:  err", f"{res.err_vs_oracle:.2e}")

# ... so take the majority of r = 2m + 1 estimates (the default).  What is
# left is the vote's failure probability, which falls exponentially in r;
# t = 105 hides it because 105 l / p is an integer for p = 3, 5, 7.
cfg = AncillaConfig(7)
for t in (3, 105, 10 ** 30):
    res = exact_power_apply(pf, psi, t, cfg)
    print(f"t={t:<32d} queries={res.ledger.as_dict()}  err={res.err_vs_oracle:.2e}")

# the exact phase applied to the 1/7 eigenvector at t = 10^30
print("10^30 * 1/7 mod 1 =", Fraction((10 ** 30) % 7, 7))
