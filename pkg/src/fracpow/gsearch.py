"""Amplitude amplification over an unknown eigenbasis.

A flag oracle marks a subspace spanned by eigenvectors of a fixture.  Since
no basis state is known to overlap the marked subspace, the search starts
from the maximally entangled state ``sum_x |x>|x> / sqrt(N)``, which has
weight ``d/N`` on ``sum_j |phi_j>|phi_j*> / sqrt(d)`` for any orthonormal
basis ``{phi_j}``.

:func:`magnification_experiment` uses the same search to expose how errors
in an approximate square root grow quadratically with the number of uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .blackbox import BlackBox
from .phasest import AncillaConfig, qft
from .power import three_stage, stage2_phases, _linear
from .qcore import (
    ResourceLimitError,
    SpectralFixture,
    StateVector,
    check_unitary,
    spectral_power,
)


@dataclass(frozen=True, eq=False)
class FlagOracle:
    """Phase flip ``I - 2 Pi`` on the span of orthonormal columns ``flagged``."""

    flagged: np.ndarray

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.flagged, dtype=complex))
        if f.shape[0] < f.shape[1]:
            raise ValueError("flagged must have shape (N, d) with d <= N")
        if f.shape[1] and np.max(np.abs(f.conj().T @ f - np.eye(f.shape[1]))) > 1e-10:
            raise ValueError("flagged columns are not orthonormal")
        object.__setattr__(self, "flagged", f)

    @classmethod
    def from_fixture(cls, fixture: SpectralFixture, indices: Sequence[int]) -> "FlagOracle":
        return cls(fixture.eigvecs[:, list(indices)])

    @property
    def N(self) -> int:
        return self.flagged.shape[0]

    @property
    def d(self) -> int:
        return self.flagged.shape[1]

    def projector(self) -> np.ndarray:
        return self.flagged @ self.flagged.conj().T

    def matrix(self) -> np.ndarray:
        return np.eye(self.N) - 2 * self.projector()


@dataclass
class SearchRun:
    k: int
    theta: float
    success_prob: float
    predicted: float
    out_state: StateVector


def maximally_entangled(N: int) -> np.ndarray:
    """``sum_x |x>|x> / sqrt(N)`` on ``N^2`` dimensions."""
    v = np.zeros(N * N, dtype=complex)
    v[np.arange(N) * (N + 1)] = 1 / math.sqrt(N)
    return v


def entangling_prep(N: int) -> np.ndarray:
    """Unitary ``A`` with ``A|0>|0> = sum_x |x>|x> / sqrt(N)``: QFT then copy."""
    m = N.bit_length() - 1
    if 1 << m != N:
        raise ValueError("N must be a power of two")
    f = np.kron(qft(m), np.eye(N))
    x, y = np.divmod(np.arange(N * N), N)
    copy = np.zeros((N * N, N * N))
    copy[x * N + (x ^ y), np.arange(N * N)] = 1.0
    return copy @ f


def search_iterate(A, oracle: FlagOracle) -> np.ndarray:
    """``Q = -A U_0 A^dag O`` with ``U_0 = I - 2|0><0|``.

    If ``A`` acts on ``N^2`` dimensions the oracle is extended as ``O (x) I``.
    """
    A = check_unitary(A)
    D = A.shape[0]
    if D == oracle.N:
        o = oracle.matrix()
    elif D == oracle.N ** 2:
        o = np.kron(oracle.matrix(), np.eye(oracle.N))
    else:
        raise ValueError(f"A has dimension {D}; oracle acts on {oracle.N}")
    u0 = np.eye(D, dtype=complex)
    u0[0, 0] = -1
    return -A @ u0 @ A.conj().T @ o


def flagged_target(oracle: FlagOracle) -> np.ndarray:
    """``sum_j |phi_j>|phi_j*> / sqrt(d)`` over the flagged columns."""
    f = oracle.flagged
    return sum(np.kron(f[:, j], f[:, j].conj()) for j in range(oracle.d)) / math.sqrt(oracle.d)


def entangled_search(fixture: SpectralFixture, oracle: FlagOracle, k: int) -> SearchRun:
    """``k`` iterates from the maximally entangled start; success = overlap^2 with the flagged target."""
    N = fixture.dim
    if oracle.N != N:
        raise ValueError(f"oracle acts on {oracle.N} dimensions, fixture on {N}")
    if k < 0:
        raise ValueError("k must be non-negative")
    if N * N > 1 << 14:
        raise ResourceLimitError(f"N^2 = {N * N} exceeds the dense operator limit")
    A = entangling_prep(N)
    Q = search_iterate(A, oracle)
    psi = A[:, 0]
    for _ in range(k):
        psi = Q @ psi
    theta = math.asin(math.sqrt(oracle.d / N))
    success = float(abs(np.vdot(flagged_target(oracle), psi)) ** 2)
    return SearchRun(k, theta, success, math.sin((2 * k + 1) * theta) ** 2,
                     StateVector(psi, normalize=True))


def flagged_weight(oracle: FlagOracle, psi: np.ndarray) -> float:
    """Weight of ``psi`` (on ``N^2`` dims) inside ``flagged (x) C^N``."""
    N = oracle.N
    t = psi.reshape(N, N)
    return float(np.sum(np.abs(oracle.flagged.conj().T @ t) ** 2))


@dataclass
class DimensionEstimate:
    estimate: int
    distribution: dict[int, float]
    prob_within_one: float


def estimate_subspace_dim(fixture: SpectralFixture, oracle: FlagOracle, bits: int,
                          d_true: int | None = None) -> DimensionEstimate:
    """Phase-estimate the rotation angle of the search iterate and convert to ``d``.

    ``Q`` rotates by ``2 theta`` in the plane of the start state, so its
    eigenphases are ``+-theta/pi``; an outcome ``y`` yields
    ``d = N sin^2(pi y / 2^bits)``.  The returned estimate is the most likely
    rounded value.
    """
    N = fixture.dim
    A = entangling_prep(N)
    Q = search_iterate(A, oracle)
    D = N * N
    if (1 << bits) * D > 1 << 22:
        raise ResourceLimitError("phase register too wide for dense simulation")
    n = 1 << bits
    f = qft(bits)
    # state: control (x) system; control starts uniform
    state = np.zeros((n, D), dtype=complex)
    state[:, :] = (f[:, 0][:, None]) * A[:, 0][None, :]
    power = Q.copy()
    for i in range(bits):
        sel = ((np.arange(n) >> i) & 1).astype(bool)
        state[sel] = state[sel] @ power.T
        power = power @ power
    state = f.conj().T @ state
    probs = np.sum(np.abs(state) ** 2, axis=1)
    dist: dict[int, float] = {}
    for y, p in enumerate(probs):
        est = int(round(N * math.sin(math.pi * y / n) ** 2))
        dist[est] = dist.get(est, 0.0) + float(p)
    best = max(sorted(dist), key=lambda e: dist[e])
    ref = oracle.d if d_true is None else d_true
    within = sum(p for e, p in dist.items() if abs(e - ref) <= 1)
    return DimensionEstimate(best, dist, within)


# --------------------------------------------------------------------------
# error magnification


def roots_of_unity_fixture(m: int, multiplicity: int = 1, seed: int | None = None) -> SpectralFixture:
    """Every ``2^m``-th root of unity with equal multiplicity."""
    from .qcore import haar_unitary, rng_from_seed

    n = (1 << m) * multiplicity
    if n & (n - 1):
        raise ValueError("multiplicity must be a power of two")
    lam = np.tile(np.arange(1 << m) / (1 << m), multiplicity)
    vecs = np.eye(n, dtype=complex) if seed is None else haar_unitary(n, rng_from_seed(seed))
    return SpectralFixture(vecs, lam, 1.0 / (1 << m))


@dataclass
class MagnificationRow:
    k: int
    error_prob: float
    predicted: float


@dataclass
class MagnificationResult:
    rows: list[MagnificationRow]
    flagged: int
    theta: float
    discarded_weight: float
    window: float


def approximate_sqrt(fixture: SpectralFixture, cfg: AncillaConfig) -> tuple[np.ndarray, float]:
    """Unitary idealization of the algorithm's square root of ``fixture``.

    Each eigenvector keeps the phase of its all-zero-ancilla amplitude; the
    largest weight lost to the ancillas is returned alongside.
    """
    bb = BlackBox(fixture)
    basis = fixture.eigvecs
    amps = np.empty(fixture.dim, dtype=complex)
    lost = 0.0
    for k in range(fixture.dim):
        s = StateVector.single(basis[:, k], "target")
        out, residual, _, _, _ = three_stage(bb, s, cfg, stage2_phases(_linear(0.5), cfg.m),
                                             backend="sector")
        amps[k] = np.vdot(basis[:, k], out)
        lost = max(lost, residual)
    return (basis * (amps / np.abs(amps))) @ basis.conj().T, lost


def magnification_experiment(m: int, k_list: Sequence[int], *, shift: float | None = None,
                             cfg: AncillaConfig | None = None, exact: bool = False,
                             window: float | None = None) -> MagnificationResult:
    """Search for ``-1`` eigenvectors of ``U1 U2`` where ideally ``U1 U2 = I``.

    ``U`` has every ``2^m``-th root of unity as an eigenvalue.  The shifted
    operator ``e^{i theta} U`` with ``theta = -shift`` puts one eigenphase just
    below 1, where estimation wraps around.  ``U1`` is the exact inverse
    square root, ``U2`` the approximate square root (or the exact one with
    ``exact=True``).  Eigenvectors of ``U1 U2`` whose phase lies within
    ``window`` of ``pi`` are flagged and searched for from the maximally
    entangled start; the flagged weight after ``k`` iterates is the error.
    """
    n = 1 << m
    shift = 1.0 / n if shift is None else shift
    if not 0 <= shift <= 1.0 / n:
        raise ValueError("shift must lie in [0, 1/2^m]")
    window = math.pi / (1 << (m - 1)) if window is None else window
    cfg = cfg or AncillaConfig(m)
    base = roots_of_unity_fixture(m)
    # e^{i theta} U with theta = -shift: every phase moves down by shift / (2 pi)
    lam = np.mod(base.eigphases - shift / (2 * math.pi), 1.0)
    # the shifted spectrum deliberately has no gap below 1
    shifted = SpectralFixture(base.eigvecs, lam, max(1e-12, 1.0 - float(lam.max())))
    u1 = _inverse_sqrt(shifted)
    if exact:
        u2, lost = spectral_power(shifted, 0.5), 0.0
    else:
        u2, lost = approximate_sqrt(shifted, cfg)
    v = u1 @ u2
    # v is diagonal in the fixture basis
    basis = shifted.eigvecs
    ev = np.diagonal(basis.conj().T @ v @ basis)
    ang = np.angle(ev)
    flag_idx = [k for k, a in enumerate(ang) if abs(abs(a) - math.pi) <= window]
    oracle = FlagOracle(basis[:, flag_idx]) if flag_idx else FlagOracle(np.zeros((n, 0)))
    A = entangling_prep(n)
    if oracle.d:
        Q = search_iterate(A, oracle)
    else:
        Q = -A @ _u0(n * n) @ A.conj().T
    theta = math.asin(math.sqrt(oracle.d / n))
    rows = []
    for k in k_list:
        psi = A[:, 0]
        for _ in range(k):
            psi = Q @ psi
        err = flagged_weight(oracle, psi) if oracle.d else 0.0
        rows.append(MagnificationRow(k, err, math.sin((2 * k + 1) * theta) ** 2))
    return MagnificationResult(rows, oracle.d, theta, lost, window)


def _inverse_sqrt(f: SpectralFixture) -> np.ndarray:
    return spectral_power(f, 0.5).conj().T


def _u0(D: int) -> np.ndarray:
    u = np.eye(D, dtype=complex)
    u[0, 0] = -1
    return u
