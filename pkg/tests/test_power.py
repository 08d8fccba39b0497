import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracpow import fixtures
from fracpow.blackbox import BlackBox, CapabilityError, kitaev_controlled
from fracpow.phasest import AncillaConfig
from fracpow.power import (
    PowerRequest,
    fractional_apply,
    function_apply,
    gap_check,
    inverse_free_apply,
    m_for_gap,
    measure_error,
    power_apply,
)
from fracpow.qcore import SpectralFixture, haar_state, rng_from_seed, spectral_function, spectral_power


def state(dim, seed=0):
    return haar_state(dim, rng_from_seed(seed))


@pytest.mark.parametrize("backend", ["dense", "sector"])
@pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
def test_dyadic_exact(backend, t):
    f = fixtures.dyadic(4, 2, seed=3)
    res = fractional_apply(BlackBox(f), state(4), t, AncillaConfig(2, 1), backend=backend)
    assert res.err_vs_oracle < 1e-10
    assert res.residual_ancilla_weight < 1e-12
    assert np.allclose(res.out_state.amps, spectral_power(f, t) @ state(4))


@pytest.mark.parametrize("inverse_free", [False, True])
@pytest.mark.parametrize("lam", [[0.0, 1 / 3], [0.1, 0.6], [0.3, 0.45]])
@pytest.mark.parametrize("m,r", [(1, 3), (2, 1), (2, 3)])
def test_sector_route_matches_dense(lam, m, r, inverse_free):
    f = SpectralFixture(fixtures._basis(2, 7), lam, 0.25)
    s = state(2, 1)
    runs = {}
    for backend in ("dense", "sector"):
        bb = BlackBox(f)
        runs[backend] = function_apply(bb, s, lambda x: 0.37 * x, AncillaConfig(m, r),
                                       backend=backend, inverse_free=inverse_free)
    d, sct = runs["dense"], runs["sector"]
    assert d.err_vs_oracle == pytest.approx(sct.err_vs_oracle, abs=1e-9)
    assert d.residual_ancilla_weight == pytest.approx(sct.residual_ancilla_weight, abs=1e-12)
    assert d.failure_weight == pytest.approx(sct.failure_weight, abs=1e-12)
    assert d.ledger == sct.ledger
    assert np.allclose(d.out_state.amps, sct.out_state.amps, atol=1e-9)


@pytest.mark.parametrize("backend", ["dense", "sector"])
def test_kitaev_route(backend):
    f = fixtures.third(2, seed=2)
    s = state(2, 4)
    bb = BlackBox(f, controlled=False)
    kc = kitaev_controlled(bb, 1)
    res = function_apply(kc, s, lambda x: 0.5 * x, AncillaConfig(2, 3), backend=backend)
    assert res.ledger.calls_cu == 0 and res.ledger.calls_u == 9 and res.ledger.calls_uinv == 9
    if backend == "dense":
        sec = function_apply(kitaev_controlled(BlackBox(f, controlled=False), 1), s,
                             lambda x: 0.5 * x, AncillaConfig(2, 3), backend="sector")
        assert res.err_vs_oracle == pytest.approx(sec.err_vs_oracle, abs=1e-9)


def test_kitaev_oracle_is_relative_to_reference():
    # relative to the reference the phases are lam - lam_ref (mod 1)
    f = fixtures.dyadic(4, 2, seed=8)
    kc = kitaev_controlled(BlackBox(f, controlled=False), 3)
    res = function_apply(kc, state(4), lambda x: 0.5 * x, AncillaConfig(2, 1))
    assert res.err_vs_oracle < 1e-10


def test_function_apply_reduces_to_fractional_apply():
    f = fixtures.third(2, seed=1)
    cfg = AncillaConfig(2, 3)
    a = fractional_apply(BlackBox(f), state(2), 0.3, cfg)
    b = function_apply(BlackBox(f), state(2), lambda x: 0.3 * x, cfg)
    assert np.array_equal(a.out_state.amps, b.out_state.amps)
    assert a.err_vs_oracle == b.err_vs_oracle


def test_zero_and_doubled_phase_functions():
    f = fixtures.dyadic(4, 2, seed=2)
    cfg = AncillaConfig(2, 1)
    res = function_apply(BlackBox(f), state(4), lambda x: 0 * x, cfg)
    assert np.allclose(res.out_state.amps, state(4))
    res = function_apply(BlackBox(f), state(4), lambda x: 2 * x, cfg)
    doubled = spectral_function(f, lambda lam: 2 * lam)
    assert np.allclose(res.out_state.amps, doubled @ state(4))


def test_scalar_only_phase_function():
    f = fixtures.dyadic(2, 1)
    res = function_apply(BlackBox(f), state(2), lambda x: math.sin(x), AncillaConfig(1, 1))
    assert res.err_vs_oracle < 1e-10


def test_power_zero_and_integers():
    f = fixtures.third(2, seed=3)
    res = power_apply(BlackBox(f), state(2), 0, AncillaConfig(2))
    assert res.ledger.total() == 0 and res.err_vs_oracle < 1e-12
    res = power_apply(BlackBox(f), state(2), 5, AncillaConfig(2))
    assert res.ledger.calls_u == 5 and res.ledger.controlled_units() == 0
    assert res.err_vs_oracle < 1e-12


def test_power_splits_whole_and_fraction():
    f = fixtures.dyadic(4, 2, seed=5)
    res = power_apply(BlackBox(f), state(4), 3.5, AncillaConfig(2, 1))
    assert res.ledger.calls_u == 3 and res.ledger.calls_cu == 3 and res.ledger.calls_cuinv == 3
    assert res.err_vs_oracle < 1e-10


def test_power_rejects_bad_t():
    f = fixtures.dyadic(2, 1)
    with pytest.raises(ValueError):
        power_apply(BlackBox(f), state(2), -0.5, AncillaConfig(1))
    with pytest.raises(ValueError):
        fractional_apply(BlackBox(f), state(2), 1.5, AncillaConfig(1))


def test_standard_mode_needs_inverse():
    f = fixtures.dyadic(2, 1)
    with pytest.raises(CapabilityError):
        fractional_apply(BlackBox(f, inverse=False), state(2), 0.5, AncillaConfig(1))


@pytest.mark.filterwarnings("ignore:t < r 2")
@pytest.mark.parametrize("m", [1, 2, 3])
def test_inverse_free_dyadic_exact(m):
    f = fixtures.dyadic(4, m, seed=6)
    res = inverse_free_apply(BlackBox(f, inverse=False), state(4), 2 ** m, AncillaConfig(m))
    assert res.err_vs_oracle < 1e-10
    assert res.ledger.calls_uinv == 0 and res.ledger.calls_cuinv == 0


def test_inverse_free_premise():
    f = fixtures.dyadic(2, 2)
    with pytest.raises(ValueError):
        inverse_free_apply(BlackBox(f, inverse=False), state(2), 3.5, AncillaConfig(2))
    with pytest.warns(UserWarning):
        inverse_free_apply(BlackBox(f, inverse=False), state(2), 4.5, AncillaConfig(2, 3))


def test_inverse_free_direct_calls_cover_every_block():
    f = fixtures.dyadic(2, 1)
    res = inverse_free_apply(BlackBox(f, inverse=False), state(2), 10, AncillaConfig(1, 3))
    # r blocks each contribute U^{2^m}; the remaining 10 - 3 * 2 calls are direct
    assert res.ledger.calls_u == 4


def test_inverse_free_generic_error_within_budget():
    # one block: its uncomputation differs from the exact inverse only on the
    # zero Fourier component, which carries weight at most 4/2^m per block
    f = fixtures.third(2, seed=9)
    m, r = 3, 1
    cfg = AncillaConfig(m, r)
    std = measure_error(f, PowerRequest(0.5, cfg), 16, 1)
    inf = measure_error(f, PowerRequest(2 ** m + 0.5, cfg, "inverse_free"), 16, 1)
    assert inf.calls_uinv == inf.calls_cuinv == 0
    assert inf.max_err <= std.max_err + 2 * math.sqrt(4 * r / 2 ** m)


def test_gap_check():
    f = SpectralFixture.diagonal([0.0, 0.8], gap=0.2)
    assert gap_check(f, 0.2, 3).ok
    rep = gap_check(f, 0.25, 3)
    assert not rep.ok and rep.violations == [(1, 0.8)]
    rep = gap_check(f, 0.2, 2)
    assert not rep.ok and rep.required_m == 3
    assert m_for_gap(0.25) == 2 and m_for_gap(0.2) == 3 and m_for_gap(1.0) == 1


def test_error_shrinks_with_m():
    f = fixtures.third(2)
    errs = [measure_error(f, PowerRequest(0.5, AncillaConfig(m)), 8, 0).max_err for m in (3, 5, 7)]
    assert errs[0] > errs[1] > errs[2]


@given(st.integers(0, 10 ** 6))
def test_measure_error_deterministic(seed):
    f = fixtures.third(2, seed=1)
    req = PowerRequest(0.5, AncillaConfig(2, 3))
    a = measure_error(f, req, 3, seed)
    b = measure_error(f, req, 3, seed)
    a.wall_ms = b.wall_ms = 0
    assert a == b


def test_measure_error_record_fields():
    f = fixtures.dyadic(4, 2, seed=7)
    rec = measure_error(f, PowerRequest(0.5, AncillaConfig(2, 1)), 4, 7, run_id="x")
    assert rec.max_err < 1e-10 and rec.calls_cu == 3 and rec.calls_cuinv == 3
    assert rec.t == "0.5" and rec.dim == 4 and rec.gap == 0.25
