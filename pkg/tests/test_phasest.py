import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracpow import fixtures
from fracpow.blackbox import BlackBox, CapabilityError
from fracpow.phasest import (
    AncillaConfig,
    ancilla_names,
    estimate_majority,
    estimate_standard,
    mode_of_tuple,
    mode_table,
    mode_weights,
    negate_mod,
    qft,
    sector_block_amplitudes,
    sector_estimate,
    uncompute_estimation,
)
from fracpow.qcore import ResourceLimitError, SpectralFixture, StateVector

# P(l) for one 3-bit estimation of lam = 1/3, from the closed form
# |sum_x e^{2 pi i x (lam - l/8)}|^2 / 64 evaluated in 30-digit arithmetic
THIRD_M3 = [0.015625, 0.031621832489262888, 0.17493988160479112, 0.68783766258962153,
            0.046875, 0.01861864109157262, 0.012560118395208877, 0.01192186382954296]


def test_config_defaults_and_validation():
    assert AncillaConfig(3).r == 7
    assert AncillaConfig(2, 1).dense_width(3) == 7
    with pytest.raises(ValueError):
        AncillaConfig(2, 2)
    with pytest.raises(ValueError):
        AncillaConfig(0)
    with pytest.raises(ResourceLimitError):
        AncillaConfig(4).check_width(2)


def test_qft_is_unitary_and_squares_to_negation():
    for m in range(1, 5):
        f = qft(m)
        n = 1 << m
        assert np.allclose(f @ f.conj().T, np.eye(n))
        perm = np.eye(n)[negate_mod(m)]
        assert np.allclose(f @ f, perm.T)


def test_mode_ties_go_to_smallest():
    assert mode_of_tuple([3, 1, 3, 1, 2]) == 1
    assert mode_of_tuple([5]) == 5
    tab = mode_table(2, 3)
    for idx, y in enumerate(itertools.product(range(4), repeat=3)):
        assert tab[idx] == mode_of_tuple(y)


def test_mode_weights_brute_force_z8_5():
    rng = np.random.default_rng(0)
    q = rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
    want = np.zeros((2, 8), dtype=complex)
    for y in itertools.product(range(8), repeat=5):
        want[:, mode_of_tuple(y)] += np.prod(q[:, list(y)], axis=1)
    assert np.allclose(mode_weights(q, 5), want, rtol=1e-10, atol=1e-10)


@given(st.integers(1, 3), st.sampled_from([1, 3, 5]), st.integers(0, 10 ** 6))
def test_mode_weights_of_distribution_sum_to_one(m, r, seed):
    p = np.random.default_rng(seed).random(1 << m)
    p /= p.sum()
    w = mode_weights(p, r).real
    assert w.sum() == pytest.approx(1.0)
    assert np.all(w >= -1e-15)


def test_single_estimation_matches_closed_form():
    f = SpectralFixture.diagonal([1 / 3, 0.0])
    c = sector_block_amplitudes(BlackBox(f), 3)
    assert np.allclose(np.abs(c[0]) ** 2, THIRD_M3, atol=1e-14)
    assert np.allclose(np.abs(c[1]), np.eye(8)[0])


def test_dense_estimation_matches_closed_form():
    f = SpectralFixture.diagonal([1 / 3, 0.0])
    s = StateVector.single([1, 0])
    out = estimate_standard(BlackBox(f), s, 3)
    probs = np.sum(np.abs(out.tensor()) ** 2, axis=1)
    assert np.allclose(probs, THIRD_M3, atol=1e-14)


def test_dyadic_estimation_is_exact():
    f = fixtures.dyadic(4, 2)
    for k in range(4):
        s = StateVector.single(np.eye(4)[k])
        out = estimate_standard(BlackBox(f), s, 2)
        assert abs(out.tensor()[k, k]) == pytest.approx(1.0)


def test_majority_layout_and_ledger():
    f = fixtures.dyadic(2, 1, seed=1)
    bb = BlackBox(f)
    cfg = AncillaConfig(1, 3)
    st_ = estimate_majority(bb, StateVector.single([1, 0]), cfg)
    assert st_.names == tuple(ancilla_names(3)) + ("target",)
    assert bb.ledger.calls_cu == 3
    back = uncompute_estimation(bb, st_, cfg)
    assert back.weight_where(ancilla_names(3)) == pytest.approx(1.0)
    assert bb.ledger.calls_cuinv == 3


def test_uncompute_needs_inverse():
    f = fixtures.dyadic(2, 1)
    bb = BlackBox(f, inverse=False)
    cfg = AncillaConfig(1, 1)
    st_ = estimate_majority(bb, StateVector.single([1, 0]), cfg)
    with pytest.raises(CapabilityError):
        uncompute_estimation(bb, st_, cfg)
    uncompute_estimation(bb, st_, cfg, inverse_free=True)
    assert bb.ledger.calls_uinv == bb.ledger.calls_cuinv == 0


@pytest.mark.parametrize("lam", [[0.0, 1 / 3], [0.2, 0.55], [0.125, 0.7]])
@pytest.mark.parametrize("m,r", [(1, 3), (2, 1), (2, 3)])
def test_sector_mode_probs_match_dense(lam, m, r):
    f = SpectralFixture.diagonal(lam, gap=0.25)
    cfg = AncillaConfig(m, r)
    est = sector_estimate(BlackBox(f), cfg)
    for k in range(2):
        dense = estimate_majority(BlackBox(f), StateVector.single(np.eye(2)[k]), cfg)
        t = dense.tensor()
        probs = np.sum(np.abs(t) ** 2, axis=tuple(range(r)) + (r + 1,))
        assert np.allclose(probs, est.mode_probs[k], atol=1e-13)


def test_sector_estimate_charges_like_dense():
    f = fixtures.third(2)
    cfg = AncillaConfig(2, 3)
    bb = BlackBox(f)
    sector_estimate(bb, cfg)
    assert bb.ledger.calls_cu == 9 and bb.ledger.calls_cuinv == 9
    bb = BlackBox(f, inverse=False)
    sector_estimate(bb, cfg, inverse_free=True)
    assert bb.ledger.calls_cu == 18 and bb.ledger.calls_cuinv == 0
