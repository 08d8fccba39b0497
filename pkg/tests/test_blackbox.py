import numpy as np
import pytest

from fracpow import fixtures
from fracpow.blackbox import (
    BlackBox,
    CapabilityError,
    QueryLedger,
    cswap,
    hidden_fixture,
    kitaev_controlled,
)
from fracpow.qcore import Register, StateVector, haar_state, rng_from_seed, spectral_power


@pytest.fixture
def fx():
    return fixtures.dyadic(4, 2, seed=11)


def test_ledger_counts_each_kind(fx):
    bb = BlackBox(fx)
    s = StateVector.single(haar_state(4, rng_from_seed(0)))
    s = bb.apply(s)
    s = bb.apply_inverse(s)
    layout = (Register("c", 2),) + s.layout
    s2 = StateVector(np.kron(np.ones(4) / 2, s.amps), layout)
    bb.controlled_power(4, s2, ("c", 1))
    bb.controlled_power(2, s2, ("c", 0), inverse=True)
    assert bb.ledger == QueryLedger(calls_u=1, calls_cu=4, calls_uinv=1, calls_cuinv=2)
    assert bb.ledger.total() == 8
    bb.reset()
    assert bb.ledger.total() == 0


def test_apply_matches_fixture(fx):
    bb = BlackBox(fx)
    v = haar_state(4, rng_from_seed(1))
    out = bb.apply(StateVector.single(v))
    assert np.allclose(out.amps, fx.matrix() @ v)
    back = bb.apply_inverse(out)
    assert np.allclose(back.amps, v)


def test_controlled_power_acts_only_when_set(fx):
    bb = BlackBox(fx)
    v = haar_state(4, rng_from_seed(2))
    layout = (Register("c", 1), Register("target", 2))
    s = StateVector(np.kron([1, 1], v) / np.sqrt(2), layout)
    out = bb.controlled_power(3, s, "c").tensor()
    assert np.allclose(out[0] * np.sqrt(2), v)
    assert np.allclose(out[1] * np.sqrt(2), spectral_power(fx, 3) @ v)


def test_capabilities_enforced(fx):
    bb = BlackBox(fx, inverse=False)
    s = StateVector.single(haar_state(4, rng_from_seed(0)))
    with pytest.raises(CapabilityError):
        bb.apply_inverse(s)
    bb = BlackBox(fx, plain=False)
    with pytest.raises(CapabilityError):
        bb.apply(s)
    assert bb.ledger.total() == 0


def test_dimension_mismatch(fx):
    bb = BlackBox(fx)
    with pytest.raises(ValueError):
        bb.apply(StateVector.single([1, 0]))


def test_sector_kickback_charged_like_dense(fx):
    bb = BlackBox(fx)
    ph = bb.sector_kickback(3)
    assert np.allclose(ph, np.exp(2j * np.pi * 3 * fx.eigphases))
    bb.sector_kickback(2, inverse=True)
    assert bb.ledger == QueryLedger(calls_cu=3, calls_cuinv=2)
    assert hidden_fixture(bb) is fx


def test_cswap_swaps_only_on_control():
    layout = (Register("c", 1), Register("a", 1), Register("b", 1))
    s = StateVector.basis(layout, {"c": 1, "a": 1})
    assert cswap(s, "c", "a", "b").tensor()[1, 0, 1] == 1
    s = StateVector.basis(layout, {"a": 1})
    assert cswap(s, "c", "a", "b").tensor()[0, 1, 0] == 1


@pytest.mark.parametrize("spec,dim", [("dyadic", 2), ("dyadic", 8), ("third", 4), ("qft", 8)])
def test_kitaev_sandwich_is_phase_shifted_controlled_u(spec, dim):
    f = fixtures.from_spec(spec, dim=dim, m=3, seed=4)
    u = f.matrix()
    for k in range(dim):
        bb = BlackBox(f, controlled=False)
        kc = kitaev_controlled(bb, k)
        lam = f.eigphases[k]
        want = np.eye(2 * dim, dtype=complex)
        want[dim:, dim:] = np.exp(-2j * np.pi * lam) * u
        got = np.exp(-2j * np.pi * lam) * kc.matrix()
        assert np.max(np.abs(got - want)) <= 1e-12
        assert bb.ledger.calls_u == 2 * dim and bb.ledger.calls_cu == 0


def test_kitaev_mixed_reference_is_consistent_across_uses(fx):
    bb = BlackBox(fx, controlled=False)
    kc = kitaev_controlled(bb, None, seed=3)
    assert kc.ref_index is not None
    lam = fx.eigphases[kc.ref_index]
    v = haar_state(4, rng_from_seed(5))
    layout = (Register("c", 1), Register("target", 2))
    s = kc.attach(StateVector(np.kron([1, 1], v) / np.sqrt(2), layout))
    s = kc.controlled_power(2, s, "c")
    t = s.tensor().reshape(2, 4, 4) @ kc.reference.conj()
    # both uses carry the same offset, so the branches differ by (e^{-2 pi i lam} U)^2
    shifted = np.exp(-2j * np.pi * lam) * fx.matrix()
    assert np.allclose(t[1], np.exp(4j * np.pi * lam) * shifted @ shifted @ v / np.sqrt(2))
    assert np.allclose(t[0], np.exp(4j * np.pi * lam) * v / np.sqrt(2))
    # the same seed picks the same reference
    assert kitaev_controlled(BlackBox(fx), None, seed=3).ref_index == kc.ref_index


def test_kitaev_needs_reference_register(fx):
    kc = kitaev_controlled(BlackBox(fx), 0)
    s = StateVector(np.ones(8) / np.sqrt(8), (Register("c", 1), Register("target", 2)))
    with pytest.raises(ValueError):
        kc.controlled_power(1, s, "c")


def test_kitaev_explicit_reference(fx):
    bb = BlackBox(fx)
    kc = kitaev_controlled(bb, fx.eigvecs[:, 2] * 1j)
    assert kc.ref_index == 2
    kc = kitaev_controlled(bb, np.ones(4))
    assert kc.ref_index is None
