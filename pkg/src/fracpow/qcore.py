"""Dense complex linear algebra for small quantum registers.

States are plain complex numpy vectors wrapped in :class:`StateVector`, which
adds a register layout so operators can be applied to named sub-systems.
Operators are ordinary 2-D numpy arrays.  Eigenphases are stored as
``lam`` in ``[0, 1)`` with eigenvalue ``exp(2j*pi*lam)``.

Register ordering is big-endian: the first register in the layout holds the
most significant qubits, and a register's integer value is read big-endian
as well.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

NORM_ATOL = 1e-12
UNITARY_ATOL = 1e-10

#: Default limit on the dimension of dense operators (qubits).
MAX_OPERATOR_QUBITS = 14
#: Default limit on the total width of a simulated state (qubits).
MAX_STATE_QUBITS = 24


class ResourceLimitError(RuntimeError):
    """A requested register or operator exceeds the configured width."""


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains NaN or Inf")


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; streams are identical on every platform."""
    return np.random.Generator(np.random.Philox(seed))


# --------------------------------------------------------------------------
# registers and states


@dataclass(frozen=True)
class Register:
    name: str
    qubits: int

    @property
    def dim(self) -> int:
        return 1 << self.qubits


class StateVector:
    """Normalized amplitude vector over an ordered list of named registers.

    The amplitude array is read-only; every operation returns a new state.
    """

    __slots__ = ("amps", "layout")

    def __init__(self, amps, layout: Sequence[Register] | None = None, *,
                 normalize: bool = False, max_qubits: int = MAX_STATE_QUBITS):
        amps = np.array(amps, dtype=complex).reshape(-1)
        dim = amps.size
        if dim == 0 or dim & (dim - 1):
            raise ValueError(f"state dimension {dim} is not a power of two")
        if layout is None:
            layout = (Register("q", dim.bit_length() - 1),)
        layout = tuple(layout)
        names = [r.name for r in layout]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        total = sum(r.qubits for r in layout)
        if 1 << total != dim:
            raise ValueError(
                f"layout widths sum to {total} qubits but state has dimension {dim}")
        if total > max_qubits:
            raise ResourceLimitError(
                f"state needs {total} qubits, limit is {max_qubits}")
        _check_finite(amps, "state")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {norm!r} differs from 1")
        amps.flags.writeable = False
        self.amps = amps
        self.layout = layout

    # constructors -------------------------------------------------------

    @classmethod
    def basis(cls, layout: Sequence[Register], values: dict[str, int] | None = None,
              **kw) -> "StateVector":
        """Computational basis state; registers missing from ``values`` are 0."""
        values = values or {}
        layout = tuple(layout)
        unknown = set(values) - {r.name for r in layout}
        if unknown:
            raise KeyError(f"unknown registers {sorted(unknown)}")
        index = 0
        for reg in layout:
            v = values.get(reg.name, 0)
            if not 0 <= v < reg.dim:
                raise ValueError(f"value {v} out of range for register {reg.name}")
            index = (index << reg.qubits) | v
        amps = np.zeros(1 << sum(r.qubits for r in layout), dtype=complex)
        amps[index] = 1.0
        return cls(amps, layout, **kw)

    @classmethod
    def single(cls, amps, name: str = "target", **kw) -> "StateVector":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        return cls(amps, (Register(name, amps.size.bit_length() - 1),), **kw)

    # inspection ----------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def qubits(self) -> int:
        return sum(r.qubits for r in self.layout)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.layout)

    def register(self, name: str) -> Register:
        return self.layout[self.index(name)]

    def index(self, name: str) -> int:
        for i, reg in enumerate(self.layout):
            if reg.name == name:
                return i
        raise KeyError(f"no register named {name!r} in {self.names}")

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped with one axis per register (read-only view)."""
        return self.amps.reshape([r.dim for r in self.layout])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def __repr__(self) -> str:
        regs = ", ".join(f"{r.name}:{r.qubits}" for r in self.layout)
        return f"StateVector([{regs}])"

    # structural operations ---------------------------------------------

    def with_register(self, reg: Register, *, front: bool = True,
                      max_qubits: int = MAX_STATE_QUBITS) -> "StateVector":
        """Append a fresh register prepared in ``|0>``."""
        zero = np.zeros(reg.dim, dtype=complex)
        zero[0] = 1.0
        if front:
            amps, layout = np.kron(zero, self.amps), (reg,) + self.layout
        else:
            amps, layout = np.kron(self.amps, zero), self.layout + (reg,)
        return StateVector(amps, layout, max_qubits=max_qubits)

    def tensor_with(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amps, other.amps), self.layout + other.layout,
                           max_qubits=max(self.qubits + other.qubits, MAX_STATE_QUBITS))

    def weight_where(self, names: Iterable[str], value: int = 0) -> float:
        """Total probability that every register in ``names`` holds ``value``."""
        names = list(names)
        t = self.tensor()
        idx = tuple(value if r.name in names else slice(None) for r in self.layout)
        return float(np.sum(np.abs(t[idx]) ** 2))

    def project(self, names: Iterable[str], value: int = 0) -> tuple[np.ndarray, tuple[Register, ...]]:
        """Unnormalized component with registers ``names`` fixed to ``value``.

        Returns the flattened remaining amplitudes and their layout.
        """
        names = set(names)
        t = self.tensor()
        idx = tuple(value if r.name in names else slice(None) for r in self.layout)
        rest = tuple(r for r in self.layout if r.name not in names)
        return np.array(t[idx]).reshape(-1), rest

    def reorder(self, names: Sequence[str]) -> "StateVector":
        order = [self.index(n) for n in names]
        if sorted(order) != list(range(len(self.layout))):
            raise ValueError("reorder must name every register exactly once")
        t = np.transpose(self.tensor(), order)
        return StateVector(t.reshape(-1), tuple(self.layout[i] for i in order),
                           max_qubits=self.qubits)

    def _replace(self, tensor: np.ndarray) -> "StateVector":
        return StateVector(tensor.reshape(-1), self.layout, max_qubits=self.qubits)


# --------------------------------------------------------------------------
# operators


def check_unitary(u, atol: float = UNITARY_ATOL) -> np.ndarray:
    """Return ``u`` as a complex array after checking ``U^dag U = I`` entrywise."""
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {u.shape}")
    _check_finite(u, "matrix")
    dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if dev > atol:
        raise ValueError(f"matrix is not unitary (max deviation {dev:.3g})")
    return u


def tensor(a, b, *, max_qubits: int = MAX_OPERATOR_QUBITS) -> np.ndarray:
    """Kronecker product ``a (x) b`` with a dimension guard."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    dim = a.shape[0] * b.shape[0]
    if dim > 1 << max_qubits:
        raise ResourceLimitError(f"tensor product dimension {dim} exceeds 2**{max_qubits}")
    return np.kron(a, b)


def apply(u, s: StateVector) -> StateVector:
    """Apply an operator to the whole state."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (s.dim, s.dim):
        raise ValueError(f"operator shape {u.shape} does not match state dimension {s.dim}")
    return StateVector(u @ s.amps, s.layout, max_qubits=s.qubits)


def apply_on(s: StateVector, u, target: str, *, control: str | None = None,
             mask=None) -> StateVector:
    """Apply ``u`` to register ``target``, optionally conditioned on ``control``.

    ``mask`` is a boolean array over the basis values of ``control``; ``u``
    acts only on the branches where it is true.
    """
    u = np.asarray(u, dtype=complex)
    reg = s.register(target)
    if u.shape != (reg.dim, reg.dim):
        raise ValueError(
            f"operator shape {u.shape} does not match register {target!r} (dim {reg.dim})")
    t = np.moveaxis(s.tensor(), s.index(target), -1)
    if control is None:
        out = t @ u.T
        return s._replace(np.moveaxis(out, -1, s.index(target)))
    if control == target:
        raise ValueError("control and target must differ")
    creg = s.register(control)
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (creg.dim,):
        raise ValueError(f"mask must have shape ({creg.dim},)")
    # axis positions shift after moving the target to the end
    cax = s.index(control)
    if cax > s.index(target):
        cax -= 1
    t = np.moveaxis(t, cax, 0).copy()
    t[mask] = t[mask] @ u.T
    t = np.moveaxis(t, 0, cax)
    return s._replace(np.moveaxis(t, -1, s.index(target)))


def permute_register(s: StateVector, name: str, perm: np.ndarray) -> StateVector:
    """Basis permutation ``|x> -> |perm[x]>`` on one register."""
    perm = np.asarray(perm)
    reg = s.register(name)
    if sorted(perm.tolist()) != list(range(reg.dim)):
        raise ValueError("not a permutation")
    inv = np.argsort(perm)
    t = np.take(s.tensor(), inv, axis=s.index(name))
    return s._replace(t)


def bit_mask(qubits: int, bit: int) -> np.ndarray:
    """Mask of register values whose ``bit`` (weight ``2**bit``) is set."""
    return ((np.arange(1 << qubits) >> bit) & 1).astype(bool)


# --------------------------------------------------------------------------
# spectral fixtures


@dataclass(frozen=True, eq=False)
class SpectralFixture:
    """Unitary given by its eigenbasis and eigenphases, ``U = P diag(e^{2 pi i lam}) P^dag``.

    Every eigenphase must lie in ``[0, 1 - gap]``.  Phases are kept exactly as
    supplied (after reduction mod 1), so they remain the ground truth for every
    approximation in the package.
    """

    eigvecs: np.ndarray
    eigphases: np.ndarray
    gap: float

    def __post_init__(self):
        p = check_unitary(self.eigvecs)
        lam = np.mod(np.asarray(self.eigphases, dtype=float).reshape(-1), 1.0)
        if lam.size != p.shape[0]:
            raise ValueError(f"{lam.size} eigenphases for a {p.shape[0]}-dimensional basis")
        dim = p.shape[0]
        if dim & (dim - 1):
            raise ValueError(f"fixture dimension {dim} is not a power of two")
        _check_finite(lam, "eigenphases")
        if not 0 < self.gap <= 1:
            raise ValueError(f"gap must lie in (0, 1], got {self.gap}")
        bad = np.flatnonzero(lam > 1 - self.gap + 1e-15)
        if bad.size:
            raise ValueError(
                f"eigenphases {lam[bad].tolist()} violate the declared gap {self.gap}")
        p = p.copy()
        p.flags.writeable = False
        lam.flags.writeable = False
        object.__setattr__(self, "eigvecs", p)
        object.__setattr__(self, "eigphases", lam)

    @classmethod
    def diagonal(cls, phases, gap: float | None = None) -> "SpectralFixture":
        phases = np.mod(np.asarray(phases, dtype=float), 1.0)
        if gap is None:
            gap = min(1.0, 1.0 - float(phases.max())) or 1.0
        return cls(np.eye(phases.size, dtype=complex), phases, gap)

    @property
    def dim(self) -> int:
        return self.eigvecs.shape[0]

    @property
    def qubits(self) -> int:
        return self.dim.bit_length() - 1

    def matrix(self) -> np.ndarray:
        return spectral_power(self, 1)


def spectral_function(f: SpectralFixture, phase_fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """``P diag(exp(2 pi i phase_fn(lam))) P^dag``."""
    phases = np.exp(2j * np.pi * np.asarray(phase_fn(f.eigphases), dtype=float))
    return (f.eigvecs * phases) @ f.eigvecs.conj().T


def spectral_power(f: SpectralFixture, t) -> np.ndarray:
    """Exact primitive-branch power ``U**t`` of a fixture.

    Each eigenvalue ``exp(2 pi i lam)`` is raised to ``exp(2 pi i lam t)``
    with ``lam`` taken in ``[0, 1)``.  Integer ``t`` is reduced modulo 1 in
    the exponent before exponentiation, which keeps large integer powers
    accurate.
    """
    t = float(t) if not isinstance(t, int) else t
    if isinstance(t, float) and not np.isfinite(t):
        raise ValueError("t must be finite")
    if isinstance(t, int):
        return spectral_function(f, lambda lam: _int_phase(lam, t))
    return spectral_function(f, lambda lam: lam * t)


def _int_phase(lam: np.ndarray, j: int) -> np.ndarray:
    # exact frac(lam * j): floats are dyadic rationals, so Fraction is lossless
    return np.array([float((Fraction(x) * j) % 1) for x in lam.tolist()])


# --------------------------------------------------------------------------
# distances


def pure_trace_distance(u, v) -> float:
    """Trace distance ``|| |u><u| - |v><v| ||_Tr = 2 sqrt(1 - |<u|v>|^2)``.

    Evaluated as twice the norm of the component of ``v`` orthogonal to ``u``,
    which equals the closed form for unit vectors but keeps full relative
    precision when the states nearly coincide.
    """
    a = u.amps if isinstance(u, StateVector) else np.asarray(u, dtype=complex)
    b = v.amps if isinstance(v, StateVector) else np.asarray(v, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    resid = b - np.vdot(a, b) * a
    return float(min(2.0, 2.0 * np.linalg.norm(resid)))


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state: normalized i.i.d. standard complex Gaussians."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def operator_error_sample(a, b, n_samples: int, seed: int) -> float:
    """Largest pure trace distance between ``a|phi>`` and ``b|phi>`` over Haar samples."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = rng_from_seed(seed)
    worst = 0.0
    for _ in range(n_samples):
        phi = haar_state(a.shape[0], rng)
        worst = max(worst, pure_trace_distance(a @ phi, b @ phi))
    return worst


# --------------------------------------------------------------------------
# a few fixed gates

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
