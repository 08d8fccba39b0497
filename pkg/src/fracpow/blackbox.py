"""Query-counted black-box access to a hidden unitary.

A :class:`BlackBox` hides a :class:`~fracpow.qcore.SpectralFixture` and only
exposes applications of ``U``, controlled powers of ``U`` and their inverses.
Every application is charged to a :class:`QueryLedger`.

:func:`kitaev_controlled` builds a controlled operation out of plain ``U``
calls with the controlled-SWAP trick: a reference register in an eigenstate
of ``U`` absorbs ``U`` when the control is off, so the pair realizes
``c-(e^{-2 pi i lam_ref} U)`` up to a global phase.

The ``sector_*`` methods exist for the eigen-sector simulation backend.  They
describe the action of controlled powers on each hidden eigenvector and are
charged exactly like the corresponding dense calls.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .qcore import (
    Register,
    SpectralFixture,
    StateVector,
    apply_on,
    bit_mask,
    rng_from_seed,
    spectral_power,
)


class CapabilityError(RuntimeError):
    """The black box does not offer the requested kind of access."""


@dataclass
class QueryLedger:
    calls_u: int = 0
    calls_cu: int = 0
    calls_uinv: int = 0
    calls_cuinv: int = 0

    def controlled_units(self) -> int:
        return self.calls_cu + self.calls_cuinv

    def total(self) -> int:
        return self.calls_u + self.calls_cu + self.calls_uinv + self.calls_cuinv

    def as_dict(self) -> dict[str, int]:
        return {"calls_u": self.calls_u, "calls_cu": self.calls_cu,
                "calls_uinv": self.calls_uinv, "calls_cuinv": self.calls_cuinv}

    def copy(self) -> "QueryLedger":
        return QueryLedger(**self.as_dict())


def _control_mask(s: StateVector, control) -> tuple[str, np.ndarray]:
    """Resolve ``control`` (a 1-qubit register name or ``(name, bit)``) to a mask."""
    if isinstance(control, tuple):
        name, bit = control
        reg = s.register(name)
        if not 0 <= bit < reg.qubits:
            raise ValueError(f"bit {bit} out of range for register {name!r}")
        return name, bit_mask(reg.qubits, bit)
    reg = s.register(control)
    if reg.qubits != 1:
        raise ValueError(
            f"control register {control!r} has {reg.qubits} qubits; pass (name, bit)")
    return control, bit_mask(1, 0)


class BlackBox:
    """Hidden unitary with per-kind query counting.

    Parameters
    ----------
    fixture:
        The hidden unitary.
    plain, controlled, inverse:
        Which kinds of access are offered.  ``inverse`` covers both
        ``U^-1`` and controlled ``U^-1``.
    """

    def __init__(self, fixture: SpectralFixture, *, plain: bool = True,
                 controlled: bool = True, inverse: bool = True):
        self._fixture = fixture
        self.capabilities = frozenset(
            name for name, on in (("plain", plain), ("controlled", controlled),
                                  ("inverse", inverse)) if on)
        self.ledger = QueryLedger()

    @property
    def dim(self) -> int:
        return self._fixture.dim

    @property
    def qubits(self) -> int:
        return self._fixture.qubits

    def reset(self) -> None:
        self.ledger = QueryLedger()

    def _require(self, cap: str) -> None:
        if cap not in self.capabilities:
            raise CapabilityError(f"black box does not offer {cap!r} access")

    def _check_target(self, s: StateVector, target: str) -> None:
        if s.register(target).dim != self.dim:
            raise ValueError(
                f"register {target!r} has dimension {s.register(target).dim}, "
                f"black box acts on dimension {self.dim}")

    @lru_cache(maxsize=64)
    def _power(self, j: int) -> np.ndarray:
        return spectral_power(self._fixture, j)

    # oracle calls ----------------------------------------------------------

    def apply(self, s: StateVector, target: str = "target") -> StateVector:
        self._require("plain")
        self._check_target(s, target)
        self.ledger.calls_u += 1
        return apply_on(s, self._power(1), target)

    def apply_inverse(self, s: StateVector, target: str = "target") -> StateVector:
        self._require("inverse")
        self._check_target(s, target)
        self.ledger.calls_uinv += 1
        return apply_on(s, self._power(1).conj().T, target)

    def controlled_power(self, j: int, s: StateVector, control, target: str = "target", *,
                         inverse: bool = False) -> StateVector:
        """``c-U^j`` (or ``c-U^-j``) on ``target``, charged as ``j`` controlled calls."""
        if j < 0:
            raise ValueError("j must be non-negative")
        self._require("controlled")
        if inverse:
            self._require("inverse")
        self._check_target(s, target)
        if j == 0:
            return s
        name, mask = _control_mask(s, control)
        u = self._power(j)
        if inverse:
            self.ledger.calls_cuinv += j
            u = u.conj().T
        else:
            self.ledger.calls_cu += j
        return apply_on(s, u, target, control=name, mask=mask)

    # eigen-sector simulation hooks ------------------------------------------

    def sector_basis(self) -> np.ndarray:
        """Hidden eigenbasis (columns).  Simulator-side only; never charged."""
        return self._fixture.eigvecs

    def sector_kickback(self, j: int, *, inverse: bool = False) -> np.ndarray:
        """Phase picked up by each hidden eigenvector under ``c-U^j``.

        Charged exactly like :meth:`controlled_power` with the same arguments.
        """
        if j < 0:
            raise ValueError("j must be non-negative")
        self._require("controlled")
        if inverse:
            self._require("inverse")
        if inverse:
            self.ledger.calls_cuinv += j
        else:
            self.ledger.calls_cu += j
        return _kick(self._fixture.eigphases, j, -1 if inverse else 1)


def _kick(lam: np.ndarray, j: int, sign: int) -> np.ndarray:
    return np.exp(sign * 2j * np.pi * np.mod(lam * j, 1.0))


def hidden_fixture(bb: BlackBox) -> SpectralFixture:
    """Ground truth behind a black box, for oracle comparisons in tests and metrics."""
    return bb._fixture


# --------------------------------------------------------------------------
# controlled operations from uncontrolled ones


def cswap(s: StateVector, control, a: str, b: str) -> StateVector:
    """Swap registers ``a`` and ``b`` on the branches where ``control`` is set."""
    name, mask = _control_mask(s, control)
    if s.register(a).dim != s.register(b).dim:
        raise ValueError("swapped registers must have equal dimension")
    t = np.array(s.tensor())
    ci, ai, bi = s.index(name), s.index(a), s.index(b)
    moved = np.moveaxis(t, ci, 0)
    sel = moved[mask]
    # after dropping the control axis, positions of a and b shift if they follow it
    aa = ai - (ai > ci) + 1
    bb = bi - (bi > ci) + 1
    moved[mask] = np.swapaxes(sel, aa, bb)
    return s._replace(np.moveaxis(moved, 0, ci))


class KitaevControlled:
    """Controlled ``U`` assembled from plain calls and a retained reference register.

    The reference register ``ref`` holds an eigenvector of the hidden unitary
    for the whole computation.  Each elementary controlled use is the sandwich
    ``CSWAP(control; target, ref) . U_ref . CSWAP(control; target, ref)`` and
    costs one ``calls_u``.
    """

    def __init__(self, bb: BlackBox, reference: np.ndarray, ref_index: int | None = None,
                 ref_name: str = "ref"):
        reference = np.asarray(reference, dtype=complex).reshape(-1)
        if reference.size != bb.dim:
            raise ValueError(
                f"reference has dimension {reference.size}, black box acts on {bb.dim}")
        self.bb = bb
        self.reference = reference
        self.ref_index = ref_index
        self.ref_name = ref_name

    @property
    def ledger(self) -> QueryLedger:
        return self.bb.ledger

    @property
    def dim(self) -> int:
        return self.bb.dim

    @property
    def capabilities(self) -> frozenset:
        # the inverse sandwich needs U^-1 on the reference
        if "inverse" in self.bb.capabilities:
            return frozenset({"controlled", "inverse"})
        return frozenset({"controlled"})

    def attach(self, s: StateVector) -> StateVector:
        """Append the reference register to a state."""
        ref = StateVector.single(self.reference, self.ref_name, normalize=True)
        return s.tensor_with(ref)

    def sandwich(self, s: StateVector, control, target: str = "target", *,
                 inverse: bool = False) -> StateVector:
        """One controlled use; with ``inverse`` the middle call is ``U^-1``."""
        s = cswap(s, control, target, self.ref_name)
        if inverse:
            s = self.bb.apply_inverse(s, self.ref_name)
        else:
            s = self.bb.apply(s, self.ref_name)
        return cswap(s, control, target, self.ref_name)

    def controlled_power(self, j: int, s: StateVector, control, target: str = "target", *,
                         inverse: bool = False) -> StateVector:
        if self.ref_name not in s.names:
            raise ValueError(f"state has no reference register {self.ref_name!r}; call attach()")
        for _ in range(j):
            s = self.sandwich(s, control, target, inverse=inverse)
        return s

    def matrix(self) -> np.ndarray:
        """Sandwich restricted to ``control (x) target`` with the reference held fixed.

        Column ``c`` is ``<ref| S |c>|ref>``; it equals
        ``e^{2 pi i lam_ref} c-(e^{-2 pi i lam_ref} U)``.  Computing it spends
        ``2 * dim`` plain calls.
        """
        layout = (Register("c", 1), Register("target", self.bb.qubits))
        cols = []
        for i in range(2 * self.dim):
            basis = np.zeros(2 * self.dim, dtype=complex)
            basis[i] = 1.0
            s = self.attach(StateVector(basis, layout))
            s = self.sandwich(s, "c")
            amps = s.tensor().reshape(2 * self.dim, self.dim) @ self.reference.conj()
            cols.append(amps)
        return np.array(cols).T

    def sector_basis(self) -> np.ndarray:
        return self.bb.sector_basis()

    def sector_kickback(self, j: int, *, inverse: bool = False) -> np.ndarray:
        """Per-eigenvector phase of ``j`` sandwiches relative to the reference.

        The common factor ``e^{2 pi i lam_ref j}`` is a global phase and is
        dropped.
        """
        if self.ref_index is None:
            raise ValueError("sector simulation needs an eigenvector reference")
        if inverse:
            self.bb._require("inverse")
            self.bb.ledger.calls_uinv += j
        else:
            self.bb._require("plain")
            self.bb.ledger.calls_u += j
        lam = hidden_fixture(self.bb).eigphases
        return _kick(np.mod(lam - lam[self.ref_index], 1.0), j, -1 if inverse else 1)


def kitaev_controlled(bb: BlackBox, reference=None, *, seed: int | None = None,
                      ref_name: str = "ref") -> KitaevControlled:
    """Build a controlled black box from plain ``U`` calls.

    ``reference`` is an eigenvector index, an explicit state, or ``None`` for
    the maximally mixed reference.  The mixed reference is realized by
    sampling one eigenvector uniformly with ``seed`` and keeping it for the
    whole run, so every use shares the same phase offset.
    """
    bb._require("plain")
    basis = bb.sector_basis()
    if reference is None:
        k = int(rng_from_seed(0 if seed is None else seed).integers(bb.dim))
        return KitaevControlled(bb, basis[:, k], k, ref_name)
    if isinstance(reference, (int, np.integer)):
        return KitaevControlled(bb, basis[:, int(reference)], int(reference), ref_name)
    reference = np.asarray(reference, dtype=complex).reshape(-1)
    if reference.size != bb.dim:
        raise ValueError(
            f"reference has dimension {reference.size}, black box acts on {bb.dim}")
    reference = reference / np.linalg.norm(reference)
    overlaps = np.abs(basis.conj().T @ reference)
    k = int(np.argmax(overlaps))
    idx = k if abs(overlaps[k] - 1) < 1e-12 else None
    return KitaevControlled(bb, reference, idx, ref_name)
