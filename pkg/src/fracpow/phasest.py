"""Eigenvalue estimation: the QFT, standard estimation, and the majority vote.

Stage I of the power algorithm runs ``r`` independent ``m``-bit estimations
into registers ``est0 .. est{r-1}`` and writes the mode of the resulting
tuple into a fresh ``mode`` register.  Stage III undoes all of it.

Two simulation routes are provided.  The dense route (``estimate_standard``,
``estimate_majority``, ``uncompute_estimation``) keeps the full register
state and is limited to :data:`~fracpow.qcore.MAX_STATE_QUBITS`.  The sector
route (``sector_*``) exploits that every controlled power is diagonal in the
hidden eigenbasis, so each eigenvector evolves independently and the ``r``
blocks stay in a product state; the mode distribution over ``Z_{2^m}^r`` is
then summed with a generating-function recursion instead of enumeration.
Both routes charge the black box identically.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial

import numpy as np

from .qcore import (
    MAX_STATE_QUBITS,
    Register,
    ResourceLimitError,
    StateVector,
    apply_on,
    bit_mask,
)


@dataclass(frozen=True)
class AncillaConfig:
    """Precision ``m`` (bits) and number of repeated estimations ``r``.

    ``r`` defaults to ``2m + 1``.
    """

    m: int
    r: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")
        if self.r is None:
            object.__setattr__(self, "r", 2 * self.m + 1)
        if self.r < 1 or self.r % 2 == 0:
            raise ValueError(f"r must be a positive odd integer, got {self.r}")

    @property
    def grid(self) -> int:
        return 1 << self.m

    def dense_width(self, target_qubits: int) -> int:
        """Qubits used by the dense route: ``r`` blocks, the mode register, the target."""
        return self.m * (self.r + 1) + target_qubits

    def check_width(self, target_qubits: int, max_qubits: int = MAX_STATE_QUBITS) -> None:
        w = self.dense_width(target_qubits)
        if w > max_qubits:
            raise ResourceLimitError(
                f"m={self.m}, r={self.r} on {target_qubits} target qubits needs {w} qubits; "
                f"limit is {max_qubits}")


def block_names(r: int) -> list[str]:
    return [f"est{i}" for i in range(r)]


# --------------------------------------------------------------------------
# QFT and the mode


@lru_cache(maxsize=32)
def _qft(m: int) -> np.ndarray:
    n = 1 << m
    j = np.arange(n)
    out = np.exp(2j * np.pi * np.outer(j, j) / n) / np.sqrt(n)
    out.flags.writeable = False
    return out


def qft(m: int, max_qubits: int = 14) -> np.ndarray:
    """Dense ``2^m``-point QFT with entries ``exp(2 pi i jk / 2^m) / sqrt(2^m)``."""
    if m < 0:
        raise ValueError("m must be non-negative")
    if m > max_qubits:
        raise ResourceLimitError(f"QFT on {m} qubits exceeds the {max_qubits}-qubit limit")
    return _qft(m)


def mode_of_tuple(y) -> int:
    """Most frequent entry of ``y``; ties go to the smallest value."""
    y = list(y)
    if not y:
        raise ValueError("empty tuple has no mode")
    counts: dict[int, int] = {}
    for v in y:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


@lru_cache(maxsize=16)
def mode_table(m: int, r: int) -> np.ndarray:
    """Mode of every tuple in ``Z_{2^m}^r``, indexed big-endian (first entry most significant)."""
    n = 1 << m
    if m * r > 24:
        raise ResourceLimitError(f"mode table over {m * r} bits is too large")
    idx = np.arange(n ** r, dtype=np.int64)
    counts = np.zeros((idx.size, n), dtype=np.int16)
    rows = np.arange(idx.size)
    for i in range(r):
        digit = (idx >> (m * (r - 1 - i))) & (n - 1)
        np.add.at(counts, (rows, digit), 1)
    # argmax returns the first maximum, i.e. the smallest tied value
    table = np.argmax(counts, axis=1).astype(np.int64)
    table.flags.writeable = False
    return table


def negate_mod(m: int) -> np.ndarray:
    """Permutation ``x -> -x mod 2^m`` (the square of the inverse QFT)."""
    n = 1 << m
    return (-np.arange(n)) % n


def failure_mask(lam: float, m: int) -> np.ndarray:
    """Grid values ``l`` whose estimate ``e^{2 pi i l/2^m}`` misses ``e^{2 pi i lam}`` by more than ``1/2^m``."""
    n = 1 << m
    est = np.exp(2j * np.pi * np.arange(n) / n)
    return np.abs(est - np.exp(2j * np.pi * lam)) > 1.0 / n


# --------------------------------------------------------------------------
# dense route


def _estimate_block(ctrl, s: StateVector, block: str, m: int, target: str) -> StateVector:
    f = qft(m)
    s = apply_on(s, f, block)
    for i in range(m):
        s = ctrl.controlled_power(1 << i, s, (block, i), target)
    return apply_on(s, f.conj().T, block)


def _unestimate_block(ctrl, s: StateVector, block: str, m: int, target: str,
                      inverse_free: bool) -> StateVector:
    f = qft(m)
    s = apply_on(s, f, block)
    if inverse_free:
        # M c-U^x M = c-U^{(2^m - x) mod 2^m}, built from forward calls only
        neg = negate_mod(m)
        s = _permute(s, block, neg)
        for i in range(m):
            s = ctrl.controlled_power(1 << i, s, (block, i), target)
        s = _permute(s, block, neg)
    else:
        for i in range(m):
            s = ctrl.controlled_power(1 << i, s, (block, i), target, inverse=True)
    return apply_on(s, f.conj().T, block)


def _permute(s: StateVector, name: str, perm: np.ndarray) -> StateVector:
    t = np.take(s.tensor(), np.argsort(perm), axis=s.index(name))
    return s._replace(t)


def estimate_standard(bb, s: StateVector, m: int, *, target: str = "target",
                      control: str = "est", max_qubits: int = MAX_STATE_QUBITS) -> StateVector:
    """One ``m``-bit phase estimation into a new front register ``control``.

    ``bb`` is a :class:`~fracpow.blackbox.BlackBox` or a Kitaev-constructed
    controlled operation.  Charges ``2^m - 1`` controlled calls.
    """
    if s.qubits + m > max_qubits:
        raise ResourceLimitError(f"estimation needs {s.qubits + m} qubits; limit is {max_qubits}")
    s = s.with_register(Register(control, m), max_qubits=max_qubits)
    return _estimate_block(bb, s, control, m, target)


def _xor_mode(s: StateVector, m: int, r: int) -> StateVector:
    names = block_names(r) + ["mode"]
    if list(s.names[: r + 1]) != names:
        raise ValueError(f"expected leading registers {names}, got {s.names}")
    n = 1 << m
    table = mode_table(m, r)
    t = s.amps.reshape(n ** r, n, -1)
    z = np.arange(n)
    src = z[None, :] ^ table[:, None]
    out = np.take_along_axis(t, src[:, :, None], axis=1)
    return StateVector(out.reshape(-1), s.layout, max_qubits=s.qubits)


def estimate_majority(bb, s: StateVector, cfg: AncillaConfig, *, target: str = "target",
                      max_qubits: int = MAX_STATE_QUBITS) -> StateVector:
    """``r`` coherent estimations followed by a reversible mode computation.

    Layout of the result: ``est0 .. est{r-1}, mode, <input registers>``.
    Charges ``r (2^m - 1)`` controlled calls.
    """
    cfg.check_width(s.qubits, max_qubits)
    m, r = cfg.m, cfg.r
    s = s.with_register(Register("mode", m), max_qubits=max_qubits)
    for name in reversed(block_names(r)):
        s = s.with_register(Register(name, m), max_qubits=max_qubits)
    for name in block_names(r):
        s = _estimate_block(bb, s, name, m, target)
    return _xor_mode(s, m, r)


def uncompute_estimation(bb, state: StateVector, cfg: AncillaConfig, *, target: str = "target",
                         inverse_free: bool = False) -> StateVector:
    """Undo :func:`estimate_majority`; the ancilla registers stay in the layout.

    With ``inverse_free`` each block is undone with the negation trick
    ``M c-U^x M``, which uses forward controlled calls only and equals
    ``U^{2^m} c-U^{-x}`` on every ``x != 0``.  Otherwise controlled inverse
    calls are used and Stage III is the exact inverse of Stage I.
    """
    caps = getattr(bb, "capabilities", frozenset())
    if not inverse_free and "inverse" not in caps:
        from .blackbox import CapabilityError
        raise CapabilityError("uncomputation needs inverse access or inverse_free=True")
    s = _xor_mode(state, cfg.m, cfg.r)
    for name in block_names(cfg.r):
        s = _unestimate_block(bb, s, name, cfg.m, target, inverse_free)
    return s


def ancilla_names(r: int) -> list[str]:
    return block_names(r) + ["mode"]


# --------------------------------------------------------------------------
# sector route


def _sector_register_phases(ctrl, m: int, inverse: bool = False) -> np.ndarray:
    """Phase of ``c-U^x`` on every hidden eigenvector for every control value ``x``.

    Issues one kickback per control bit, so it is charged ``2^m - 1`` calls.
    """
    n = 1 << m
    out = None
    for i in range(m):
        k = ctrl.sector_kickback(1 << i, inverse=inverse)
        if out is None:
            out = np.ones((k.size, n), dtype=complex)
        out[:, bit_mask(m, i)] *= k[:, None]
    return out


def _fourier_sandwich(phases: np.ndarray, m: int) -> np.ndarray:
    """Rows ``F^dag diag(phases) F |0>``."""
    f = qft(m)
    return (phases / np.sqrt(1 << m)) @ f.conj()


def sector_block_amplitudes(ctrl, m: int) -> np.ndarray:
    """Amplitudes ``c[k, l]`` of one standard estimation for hidden eigenvector ``k``."""
    return _fourier_sandwich(_sector_register_phases(ctrl, m), m)


def sector_unblock_amplitudes(ctrl, m: int, inverse_free: bool) -> np.ndarray:
    """``w[k] = V_k^dag |0>`` for the block uncomputation ``V_k``.

    ``<0| V_k |l> = conj(w[k, l])``.  For the exact inverse, ``w`` equals the
    Stage I amplitudes.
    """
    if inverse_free:
        ph = _sector_register_phases(ctrl, m)[:, negate_mod(m)]
    else:
        ph = _sector_register_phases(ctrl, m, inverse=True)
    return _fourier_sandwich(ph.conj(), m)


def mode_weights(q, r: int) -> np.ndarray:
    """``W[s, v] = sum over y in Z_N^r with mode(y) = v of prod_i q[s, y_i]``.

    For each candidate modal count ``c``, values below ``v`` may appear at
    most ``c - 1`` times and values above at most ``c`` times (ties go to the
    smallest value).  Truncated exponential generating functions of the other
    values are multiplied as prefix and suffix products, so the cost is
    ``O(N r^2)`` per row instead of ``N^r``.  ``q`` may be complex.
    """
    q = np.atleast_2d(np.asarray(q, dtype=complex))
    S, N = q.shape
    D = r + 1
    n = np.arange(D)
    cs = np.arange(1, r + 1)
    inv_fact = np.array([1.0 / factorial(k) for k in range(D)])
    qpow = q[..., None] ** n * inv_fact                    # (S, N, D)
    lim_lo = (n[None, :] <= cs[:, None] - 1).astype(float)  # (C, D), values below v
    lim_hi = (n[None, :] <= cs[:, None]).astype(float)      # values above v

    def mul(poly, coeffs):
        out = np.zeros_like(poly)
        for k in range(D):
            out[..., k:] += poly[..., : D - k] * coeffs[..., k : k + 1]
        return out

    C = cs.size
    unit = np.zeros((C, S, D), dtype=complex)
    unit[..., 0] = 1.0
    pre = np.empty((N, C, S, D), dtype=complex)
    cur = unit
    for v in range(N):
        pre[v] = cur
        cur = mul(cur, qpow[None, :, v, :] * lim_lo[:, None, :])
    suf = np.empty((N, C, S, D), dtype=complex)
    cur = unit
    for v in range(N - 1, -1, -1):
        suf[v] = cur
        cur = mul(cur, qpow[None, :, v, :] * lim_hi[:, None, :])
    # pick coefficient r - c of pre * suf
    sel = (n[None, :, None] + n[None, None, :]) == (r - cs)[:, None, None]  # (C, D, D)
    coef = np.einsum("vcsa,vcsb,cab->vcs", pre, suf, sel.astype(float))
    lead = np.array([factorial(r) / factorial(c) for c in cs])
    qc = q.T[:, None, :] ** cs[None, :, None]             # (N, C, S)
    return np.einsum("c,vcs,vcs->sv", lead, qc, coef)


@lru_cache(maxsize=256)
def _mode_weights_cached(key: bytes, shape: tuple[int, int], r: int) -> np.ndarray:
    q = np.frombuffer(key, dtype=complex).reshape(shape)
    out = mode_weights(q, r)
    out.flags.writeable = False
    return out


def mode_weights_cached(q: np.ndarray, r: int) -> np.ndarray:
    q = np.ascontiguousarray(q, dtype=complex)
    return _mode_weights_cached(q.tobytes(), q.shape, r)


@dataclass(frozen=True)
class SectorEstimate:
    """Per-eigenvector result of Stage I + Stage III in the sector route.

    ``mode_probs[k, v]`` is the probability that the mode register holds
    ``v`` for hidden eigenvector ``k``; ``pair_weights[k, v]`` is the matching
    weight ``sum <0|Stage III|y> <y|Stage I|0>`` that multiplies the Stage II
    phase of ``v`` in the final zero-ancilla amplitude.  ``inverse_defect[k]``
    bounds ``||c^(x)r - w^(x)r||`` by ``r ||c - w||`` when Stage III is not the
    exact inverse.
    """

    mode_probs: np.ndarray
    pair_weights: np.ndarray
    exact_inverse: bool
    inverse_defect: np.ndarray | None = None


def sector_estimate(ctrl, cfg: AncillaConfig, *, inverse_free: bool = False) -> SectorEstimate:
    """Run Stages I and III of the majority-vote estimator in the sector picture."""
    m, r = cfg.m, cfg.r
    c = None
    for _ in range(r):
        c = sector_block_amplitudes(ctrl, m)
    w = None
    for _ in range(r):
        w = sector_unblock_amplitudes(ctrl, m, inverse_free)
    probs = np.abs(c) ** 2
    mode_probs = mode_weights_cached(probs, r).real
    if inverse_free:
        pair = mode_weights_cached(w.conj() * c, r)
        defect = r * np.linalg.norm(c - w, axis=1)
        return SectorEstimate(mode_probs, pair, False, defect)
    return SectorEstimate(mode_probs, mode_probs.astype(complex), True)


def sector_failure_weight(est: SectorEstimate, lam: np.ndarray, m: int) -> np.ndarray:
    """Per-eigenvector mass on mode values farther than ``1/2^m`` from the eigenvalue."""
    return np.array([est.mode_probs[k][failure_mask(l, m)].sum() for k, l in enumerate(lam)])
