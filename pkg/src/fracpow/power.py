"""Real powers and phase functions of a black-box unitary.

The three-stage algorithm: estimate the eigenphase of every eigenvector
component coherently (Stage I), multiply by a phase that depends on the
estimate (Stage II), then undo the estimation (Stage III).  Powers above one
are split into ``floor(t)`` direct calls plus a fractional part.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .blackbox import BlackBox, CapabilityError, KitaevControlled, QueryLedger, hidden_fixture
from .phasest import (
    AncillaConfig,
    ancilla_names,
    estimate_majority,
    sector_estimate,
    sector_failure_weight,
    uncompute_estimation,
)
from .qcore import (
    MAX_STATE_QUBITS,
    SpectralFixture,
    StateVector,
    apply_on,
    haar_state,
    rng_from_seed,
    spectral_power,
)

Backend = Literal["auto", "dense", "sector"]

#: Widths up to this many qubits run on the dense route under ``backend="auto"``.
AUTO_DENSE_QUBITS = 16


@dataclass
class RunResult:
    """Outcome of one application.

    ``out_state`` is the target register conditioned on all-zero ancillas and
    renormalized (``None`` if that branch vanishes).  ``err_vs_oracle`` is
    the pure trace distance between the full output (ancillas included) and
    ``|0...0> (x) oracle |s>``.  ``full_state`` is only kept by the dense route.
    """

    out_state: StateVector | None
    ledger: QueryLedger
    residual_ancilla_weight: float
    err_vs_oracle: float
    failure_weight: float = 0.0
    backend: str = "none"
    full_state: StateVector | None = None


@dataclass
class PowerRequest:
    t: float
    cfg: AncillaConfig
    mode: Literal["standard", "inverse_free", "exact_rational"] = "standard"
    phase_fn: Callable | None = None
    backend: Backend = "auto"


# --------------------------------------------------------------------------
# helpers


def _as_target(s, dim: int) -> StateVector:
    if isinstance(s, StateVector):
        if len(s.layout) == 1 and s.names[0] == "target":
            amps = s.amps
        elif len(s.layout) == 1:
            amps = s.amps
        else:
            raise ValueError("input state must consist of a single target register")
    else:
        amps = np.asarray(s, dtype=complex)
    if amps.size != dim:
        raise ValueError(f"input state has dimension {amps.size}, black box acts on {dim}")
    return StateVector.single(amps, "target")


def _effective_phases(ctrl) -> np.ndarray:
    lam = hidden_fixture(ctrl.bb if isinstance(ctrl, KitaevControlled) else ctrl).eigphases
    if isinstance(ctrl, KitaevControlled):
        if ctrl.ref_index is None:
            raise ValueError("oracle comparison needs an eigenvector reference")
        lam = np.mod(lam - lam[ctrl.ref_index], 1.0)
    return lam


def _ledger_of(ctrl) -> QueryLedger:
    return ctrl.ledger


def _compare(out: np.ndarray, residual: float, ideal: np.ndarray) -> float:
    """Trace distance of ``out (+) junk`` to ``|0>ideal`` where ``||junk||^2 = residual``."""
    ideal = ideal / np.linalg.norm(ideal)
    perp = out - np.vdot(ideal, out) * ideal
    return float(min(2.0, 2.0 * math.sqrt(float(np.vdot(perp, perp).real) + max(residual, 0.0))))


def stage2_phases(phase_fn: Callable, m: int) -> np.ndarray:
    """``exp(2 pi i f(l / 2^m))`` for every grid value ``l``."""
    grid = np.arange(1 << m) / (1 << m)
    return np.exp(2j * np.pi * _evaluate(phase_fn, grid))


def _evaluate(fn: Callable, x: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(fn(x), dtype=float)
    except (TypeError, ValueError):
        vals = None
    if vals is None or vals.shape != x.shape:
        vals = np.array([float(fn(v)) for v in x])
    return vals


def choose_backend(backend: Backend, cfg: AncillaConfig, target_qubits: int) -> str:
    if backend == "auto":
        return "dense" if cfg.dense_width(target_qubits) <= AUTO_DENSE_QUBITS else "sector"
    if backend not in ("dense", "sector"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


# --------------------------------------------------------------------------
# the three stages


def three_stage(ctrl, s: StateVector, cfg: AncillaConfig, phases: np.ndarray, *,
                inverse_free: bool = False, backend: Backend = "auto",
                max_qubits: int = MAX_STATE_QUBITS):
    """Stage I, a diagonal phase on the mode register, Stage III.

    Returns ``(out, residual, failure, full_state, backend)`` where ``out``
    holds the unnormalized target amplitudes on the all-zero ancilla branch.
    """
    phases = np.asarray(phases, dtype=complex)
    if phases.shape != (cfg.grid,):
        raise ValueError(f"need {cfg.grid} Stage II phases, got {phases.shape}")
    if not inverse_free and "inverse" not in getattr(ctrl, "capabilities", ()):
        raise CapabilityError("standard uncomputation needs inverse access; use inverse_free")
    n_qubits = s.qubits + (s.qubits if isinstance(ctrl, KitaevControlled) else 0)
    route = choose_backend(backend, cfg, n_qubits)
    lam = _effective_phases(ctrl)
    if route == "dense":
        return (*_three_stage_dense(ctrl, s, cfg, phases, inverse_free, lam, max_qubits), route)
    return (*_three_stage_sector(ctrl, s, cfg, phases, inverse_free, lam), route)


def _three_stage_dense(ctrl, s, cfg, phases, inverse_free, lam, max_qubits):
    kitaev = isinstance(ctrl, KitaevControlled)
    work = ctrl.attach(s) if kitaev else s
    st = estimate_majority(ctrl, work, cfg, max_qubits=max_qubits)
    basis = ctrl.sector_basis()
    failure = _dense_failure(st, cfg, basis, lam)
    st = apply_on(st, np.diag(phases), "mode")
    st = uncompute_estimation(ctrl, st, cfg, inverse_free=inverse_free)
    anc = cfg.m * (cfg.r + 1)
    t = st.amps.reshape(1 << anc, -1)
    residual = float(np.sum(np.abs(t[1:]) ** 2))
    rest = t[0]
    if kitaev:
        block = rest.reshape(s.dim, s.dim)
        out = block @ ctrl.reference.conj()
        # components of the reference register orthogonal to the reference
        leak = block - np.outer(out, ctrl.reference)
        residual += float(np.sum(np.abs(leak) ** 2))
    else:
        out = rest
    return out, residual, failure, st


def _dense_failure(st: StateVector, cfg: AncillaConfig, basis: np.ndarray, lam) -> float:
    from .phasest import failure_mask

    n = cfg.grid
    t = st.tensor()
    r = cfg.r
    # marginal over the mode register and the target's eigen-components
    t = t.reshape(n ** r, n, -1)
    dim = basis.shape[0]
    t = t.reshape(n ** r, n, dim, -1)
    comp = np.einsum("ymdx,dk->ymkx", t, basis.conj())
    probs = np.sum(np.abs(comp) ** 2, axis=(0, 3))     # (mode, k)
    fail = 0.0
    for k, l in enumerate(lam):
        fail += probs[failure_mask(l, cfg.m), k].sum()
    return float(fail)


def _three_stage_sector(ctrl, s, cfg, phases, inverse_free, lam):
    basis = ctrl.sector_basis()
    alpha = basis.conj().T @ s.amps
    est = sector_estimate(ctrl, cfg, inverse_free=inverse_free)
    amp = est.pair_weights @ phases
    if est.exact_inverse:
        junk = np.sum(est.mode_probs * np.abs(phases[None, :] - amp[:, None]) ** 2, axis=1)
    else:
        junk = _inexact_junk(est, phases, amp)
    w = np.abs(alpha) ** 2
    out = basis @ (alpha * amp)
    residual = float(np.dot(w, junk))
    failure = float(np.dot(w, sector_failure_weight(est, lam, cfg.m)))
    return out, residual, failure, None


#: Below this inverse defect the cancellation-free junk estimate is used.
DEFECT_SWITCH = 1e-9


def _inexact_junk(est, phases: np.ndarray, amp: np.ndarray) -> np.ndarray:
    """Ancilla weight ``1 - |amp|^2`` when Stage III is not the exact inverse.

    ``1 - |amp|^2`` loses everything below ~1e-16, i.e. ~1e-8 in the trace
    distance.  With ``a0`` the amplitude an exact inverse would give,
    ``sum_v P_v |phi_v - a0|^2 + |a0 - amp|^2`` has no cancellation and its
    square root is within ``r ||c - w||`` of the true value, so it is used
    whenever that defect is tiny (for instance on dyadic spectra).
    """
    loose = np.clip(1.0 - np.abs(amp) ** 2, 0.0, None)
    a0 = est.mode_probs @ phases
    stable = (np.sum(est.mode_probs * np.abs(phases[None, :] - a0[:, None]) ** 2, axis=1)
              + np.abs(a0 - amp) ** 2)
    return np.where(est.inverse_defect < DEFECT_SWITCH, stable, loose)


def _finish(ctrl, out, residual, failure, full, route, ideal) -> RunResult:
    err = _compare(out, residual, ideal)
    nrm = np.linalg.norm(out)
    out_state = StateVector.single(out / nrm, "target") if nrm > 1e-300 else None
    return RunResult(out_state, _ledger_of(ctrl).copy(), float(residual), err, failure,
                     route, full)


def _direct(bb: BlackBox, s: StateVector, k: int) -> StateVector:
    for _ in range(k):
        s = bb.apply(s, "target")
    return s


# --------------------------------------------------------------------------
# public operations


def function_apply(bb, s, phase_fn: Callable, cfg: AncillaConfig, *,
                   backend: Backend = "auto", inverse_free: bool = False) -> RunResult:
    """Apply ``sum_k e^{2 pi i f(lam_k)} |psi_k><psi_k|`` approximately.

    Stage II multiplies the branch whose mode register holds ``l`` by
    ``exp(2 pi i f(l / 2^m))``.  ``bb`` may be a black box or a
    Kitaev-constructed controlled operation.
    """
    s = _as_target(s, bb.dim)
    out, residual, failure, full, route = three_stage(
        bb, s, cfg, stage2_phases(phase_fn, cfg.m), inverse_free=inverse_free, backend=backend)
    basis = bb.sector_basis()
    ph = np.exp(2j * np.pi * _evaluate(phase_fn, _effective_phases(bb)))
    ideal = basis @ (ph * (basis.conj().T @ s.amps))
    return _finish(bb, out, residual, failure, full, route, ideal)


def fractional_apply(bb, s, t: float, cfg: AncillaConfig, *, backend: Backend = "auto") -> RunResult:
    """Approximate ``U^t |s>`` for ``0 <= t < 1``."""
    if not 0 <= t < 1:
        raise ValueError(f"fractional_apply needs 0 <= t < 1, got {t}")
    return function_apply(bb, s, _linear(t), cfg, backend=backend)


def _linear(t: float) -> Callable:
    def f(lam):
        return t * lam
    return f


def power_apply(bb: BlackBox, s, t: float, cfg: AncillaConfig, *,
                backend: Backend = "auto") -> RunResult:
    """``U^t |s>``: ``floor(t)`` direct calls, then the fractional remainder."""
    if not (np.isfinite(t) and t >= 0):
        raise ValueError(f"t must be finite and non-negative, got {t}")
    s = _as_target(s, bb.dim)
    whole = int(math.floor(t))
    frac = t - whole
    s_in = s
    s = _direct(bb, s, whole)
    if frac == 0:
        ideal = spectral_power(hidden_fixture(bb), whole) @ s_in.amps
        return _finish(bb, s.amps, 0.0, 0.0, None, "direct", ideal)
    # the oracle of the remainder acts on U^whole |s>, so the comparison is against U^t |s>
    return function_apply(bb, s, _linear(frac), cfg, backend=backend)


def inverse_free_apply(bb: BlackBox, s, t: float, cfg: AncillaConfig, *,
                       backend: Backend = "auto") -> RunResult:
    """``U^t`` for ``t >= 2^m`` without any inverse calls.

    Stage III uses the negation trick: each of the ``r`` blocks is undone by
    forward powers only, which leaves an extra ``U^{2^m}`` per block (exact
    except on the zero Fourier component).  ``floor(t) - r 2^m`` direct calls
    make up the rest.  For ``2^m <= t < r 2^m`` no direct calls are made and
    the result differs from ``U^t`` by a power of ``U^{2^m}``, which is
    harmless only when that power acts trivially (dyadic spectra); the
    reported error shows it either way.
    """
    n = 1 << cfg.m
    if t < n:
        raise ValueError(f"inverse-free mode needs t >= 2^m = {n}, got {t}")
    s = _as_target(s, bb.dim)
    fixture = hidden_fixture(bb)
    whole = int(math.floor(t))
    frac = t - whole
    s_in = s
    extra = whole - cfg.r * n
    if extra < 0:
        warnings.warn(f"t < r 2^m = {cfg.r * n}: the net power is off by a multiple of 2^m",
                      stacklevel=2)
    s = _direct(bb, s, max(extra, 0))
    out, residual, failure, full, route = three_stage(
        bb, s, cfg, stage2_phases(_linear(frac), cfg.m), inverse_free=True, backend=backend)
    ideal = spectral_power(fixture, t if frac else whole) @ s_in.amps
    res = _finish(bb, out, residual, failure, full, route, ideal)
    assert res.ledger.calls_uinv == 0 and res.ledger.calls_cuinv == 0
    return res


# --------------------------------------------------------------------------
# gap handling


@dataclass
class GapReport:
    ok: bool
    violations: list[tuple[int, float]] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)
    required_m: int | None = None


def m_for_gap(g: float) -> int:
    """Smallest ``m`` with ``2^m >= 1/g``."""
    if not 0 < g <= 1:
        raise ValueError("gap must lie in (0, 1]")
    return max(1, math.ceil(math.log2(1.0 / g) - 1e-12))


def m_for_gap_lower_bound(g_min: float) -> int:
    """Known lower bound on the gap: run as if the gap equalled the bound."""
    return m_for_gap(g_min)


def gap_check(f: SpectralFixture, g_claimed: float, m: int) -> GapReport:
    """Check ``lam_k <= 1 - g`` for all ``k`` and ``g >= 1/2^m``."""
    lam = f.eigphases
    rep = GapReport(ok=True)
    bad = [(int(k), float(lam[k])) for k in np.flatnonzero(lam > 1 - g_claimed + 1e-15)]
    if bad:
        rep.ok = False
        rep.violations = bad
        supported = 1.0 - max(l for _, l in bad)
        rep.messages.append(
            f"{len(bad)} eigenphase(s) exceed 1 - g = {1 - g_claimed:g}; "
            f"the spectrum supports a gap of at most {supported:g}")
        if supported > 0:
            rep.required_m = m_for_gap(supported)
    if g_claimed < 1.0 / (1 << m):
        rep.ok = False
        need = m_for_gap(g_claimed)
        rep.required_m = max(rep.required_m or 0, need)
        rep.messages.append(
            f"gap {g_claimed:g} is below 1/2^m = {1 / (1 << m):g}; use m >= {need}")
    return rep


# --------------------------------------------------------------------------
# error measurement


def run_request(bb: BlackBox, s, req: PowerRequest, fixture=None) -> RunResult:
    if req.mode == "standard":
        if req.phase_fn is not None:
            return function_apply(bb, s, req.phase_fn, req.cfg, backend=req.backend)
        return power_apply(bb, s, req.t, req.cfg, backend=req.backend)
    if req.mode == "inverse_free":
        return inverse_free_apply(bb, s, req.t, req.cfg, backend=req.backend)
    if req.mode == "exact_rational":
        from .ratspec import exact_power_apply

        return exact_power_apply(fixture, s, req.t, req.cfg, bb=bb, backend=req.backend)
    raise ValueError(f"unknown mode {req.mode!r}")


def measure_error(fixture, req: PowerRequest, n_samples: int, seed: int, *,
                  run_id: str = "", subcommand: str = "library"):
    """Run ``req`` on ``n_samples`` Haar-random inputs and summarize the errors.

    Every sample gets a fresh black box, so the recorded ledger is the
    per-run query count.  ``fixture`` is a :class:`SpectralFixture`, or a
    prime-spectrum fixture for ``exact_rational`` mode.
    """
    from .records import ExperimentRecord

    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    spectral = getattr(fixture, "underlying", fixture)
    rng = rng_from_seed(seed)
    start = time.perf_counter()
    errs, resid = [], []
    ledger = None
    for _ in range(n_samples):
        bb = BlackBox(spectral, inverse=req.mode != "inverse_free")
        res = run_request(bb, haar_state(spectral.dim, rng), req, fixture)
        errs.append(res.err_vs_oracle)
        resid.append(res.residual_ancilla_weight)
        if ledger is None:
            ledger = res.ledger
        elif ledger != res.ledger:
            raise RuntimeError("query count varied between samples")
    wall_ms = int(round((time.perf_counter() - start) * 1000))
    return ExperimentRecord(
        run_id=run_id, subcommand=subcommand, m=req.cfg.m, r=req.cfg.r, t=_fmt_t(req.t),
        dim=spectral.dim, gap=float(spectral.gap), mode=req.mode,
        max_err=float(max(errs)), mean_err=float(np.mean(errs)),
        residual_ancilla=float(max(resid)), **ledger.as_dict(), seed=seed, wall_ms=wall_ms)


def _fmt_t(t) -> str:
    if isinstance(t, int):
        return str(t)
    return repr(float(t))
