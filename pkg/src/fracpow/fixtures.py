"""Named spectral fixtures and their JSON file format.

Spectrum specifiers understood by :func:`from_spec`:

``dyadic``
    ``lam_k = (k mod 2^m) / 2^m``; phase estimation with ``m`` bits is exact.
``third``
    ``lam`` alternates between ``0`` and ``1/3``; never exact in binary.
``qft``
    The quantum Fourier transform on ``dim`` (a power of two), whose four
    eigenvalues are ``1, i, -1, -i``.
``prime:b``
    Phases ``l/p`` over the first ``b`` primes, every prime present.
``file:path.json``
    ``{"dim", "eigvecs", "eigphases", "gap"}`` with ``eigvecs`` a row-major
    list of ``[re, im]`` pairs.

Random eigenbases are drawn from a Philox stream keyed on ``(seed, 1)`` so
they never share draws with the input-state stream keyed on ``seed``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .phasest import qft
from .qcore import SpectralFixture, haar_unitary

BUILTIN = ("dyadic", "third", "qft", "prime:b", "file:path")


def basis_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox([seed, 1]))


def _basis(dim: int, seed: int | None) -> np.ndarray:
    if seed is None:
        return np.eye(dim, dtype=complex)
    return haar_unitary(dim, basis_rng(seed))


def _check_dim(dim: int) -> None:
    if dim < 1 or dim & (dim - 1):
        raise ValueError(f"dim must be a power of two, got {dim}")


def dyadic(dim: int, m: int, seed: int | None = None) -> SpectralFixture:
    _check_dim(dim)
    n = 1 << m
    lam = (np.arange(dim) % n) / n
    return SpectralFixture(_basis(dim, seed), lam, 1.0 / n)


def third(dim: int = 2, seed: int | None = None) -> SpectralFixture:
    _check_dim(dim)
    lam = (np.arange(dim) % 2) / 3.0
    return SpectralFixture(_basis(dim, seed), lam, 1.0 / 3.0)


def qft_fixture(dim: int) -> SpectralFixture:
    """Eigendecomposition of the QFT built from its spectral projectors.

    ``F^4 = I``, so ``P_k = (1/4) sum_j (i^{-k} F)^j`` projects onto the
    eigenspace of ``i^k``.  Each projector is diagonalized separately, which
    keeps the eigenspaces exactly orthogonal despite the degeneracy.
    """
    _check_dim(dim)
    n = dim.bit_length() - 1
    f = qft(n)
    vecs, lam = [], []
    for k in range(4):
        g = (1j) ** (-k) * f
        p = (np.eye(dim) + g + g @ g + g @ g @ g) / 4
        w, v = np.linalg.eigh((p + p.conj().T) / 2)
        keep = w > 0.5
        vecs.append(v[:, keep])
        lam += [k / 4] * int(keep.sum())
    return SpectralFixture(np.hstack(vecs), np.array(lam), 0.25)


def prime_fixture(b: int, dim: int | None = None, seed: int | None = None):
    from .ratspec import PrimeSpectrumFixture

    if dim is None:
        dim = 1
        while dim < b:
            dim *= 2
    _check_dim(dim)
    cyc = PrimeSpectrumFixture.primorial_cycle(b, dim)
    return PrimeSpectrumFixture.build(cyc.assignment, b, eigvecs=_basis(dim, seed))


def save_fixture(f: SpectralFixture, path) -> None:
    doc = {
        "dim": f.dim,
        "eigvecs": [[float(z.real), float(z.imag)] for z in f.eigvecs.reshape(-1)],
        "eigphases": [float(x) for x in f.eigphases],
        "gap": float(f.gap),
    }
    Path(path).write_text(json.dumps(doc) + "\n")


def load_fixture(path) -> SpectralFixture:
    doc = json.loads(Path(path).read_text())
    unknown = set(doc) - {"dim", "eigvecs", "eigphases", "gap"}
    if unknown:
        raise ValueError(f"unknown fixture keys: {sorted(unknown)}")
    dim = int(doc["dim"])
    pairs = np.asarray(doc["eigvecs"], dtype=float)
    if pairs.shape != (dim * dim, 2):
        raise ValueError(f"eigvecs must hold {dim * dim} [re, im] pairs")
    vecs = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(dim, dim)
    return SpectralFixture(vecs, np.asarray(doc["eigphases"], dtype=float), float(doc["gap"]))


def from_spec(spec: str, *, dim: int = 4, m: int = 2, seed: int | None = None):
    """Build a fixture from a specifier (see the module docstring)."""
    if spec == "dyadic":
        return dyadic(dim, m, seed)
    if spec == "third":
        return third(dim, seed)
    if spec == "qft":
        return qft_fixture(dim)
    if spec.startswith("prime:"):
        return prime_fixture(int(spec.split(":", 1)[1]), dim, seed)
    if spec.startswith("file:"):
        return load_fixture(spec.split(":", 1)[1])
    raise ValueError(f"unknown spectrum {spec!r}; expected one of {', '.join(BUILTIN)}")
