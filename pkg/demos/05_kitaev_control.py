"""Controlled-U from plain U calls and a reference eigenvector.

CSWAP(c; target, ref) . U_ref . CSWAP equals e^{2 pi i lam_ref} c-(e^{-2 pi i lam_ref} U):
the relative phase is shifted by the reference eigenphase, consistently for
every use as long as the same reference register is kept.
"""
import numpy as np

from fracpow import AncillaConfig, BlackBox, fixtures, function_apply, haar_state, kitaev_controlled, rng_from_seed

f = fixtures.dyadic(4, 2, seed=3)
bb = BlackBox(f, controlled=False)            # no controlled access at all
kc = kitaev_controlled(bb, None, seed=5)      # reference sampled from the mixed state
lam = f.eigphases[kc.ref_index]
print("reference eigenphase:", lam)

m = kc.matrix()
want = np.eye(8, dtype=complex)
want[4:, 4:] = np.exp(-2j * np.pi * lam) * f.matrix()
print("max |sandwich - phase * c-U'|:", np.max(np.abs(np.exp(-2j * np.pi * lam) * m - want)))

# a square root through the sandwich: phases are relative to the reference
bb.reset()
res = function_apply(kc, haar_state(4, rng_from_seed(1)), lambda x: 0.5 * x, AncillaConfig(2, 1))
print("queries:", res.ledger.as_dict(), "err vs (e^{-2 pi i lam_ref} U)^0.5:", res.err_vs_oracle)
