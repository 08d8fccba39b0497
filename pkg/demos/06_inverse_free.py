"""Large powers without ever calling U^-1.

Undoing an estimation with forward calls only leaves an extra U^(2^m) per
estimation block.  When every eigenphase is a multiple of 2^-m that factor is
the identity; otherwise it costs an O(2^(-m/2)) error from the zero Fourier
component, which the run reports.
"""
import warnings

from fracpow import AncillaConfig, BlackBox, fixtures, haar_state, inverse_free_apply, rng_from_seed

psi2 = haar_state(2, rng_from_seed(0))
psi4 = haar_state(4, rng_from_seed(0))

f = fixtures.dyadic(4, 2, seed=4)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")     # t < r 2^m is harmless on a dyadic spectrum
    res = inverse_free_apply(BlackBox(f, inverse=False), psi4, 4, AncillaConfig(2))
print("dyadic, t = 4:", res.ledger.as_dict(), "err", res.err_vs_oracle)

g = fixtures.third(2, seed=4)
for m in range(2, 8):
    t = (1 << m) + 0.5
    res = inverse_free_apply(BlackBox(g, inverse=False), psi2, t, AncillaConfig(m, 1))
    print(f"lam = 1/3, m={m}, t={t}: err {res.err_vs_oracle:.3f}, inverse calls "
          f"{res.ledger.calls_uinv + res.ledger.calls_cuinv}")
