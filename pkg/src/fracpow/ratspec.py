"""Exact eigenphase recovery for spectra with small prime denominators.

If every eigenphase is ``l/p`` with ``p`` among the first ``b`` primes, an
``m``-bit estimate with ``2^m > 2 p_b p_{b-1}`` pins down ``l/p`` uniquely,
and continued fractions recover it.  Once the fraction is known, any power
``t`` (however large) only needs ``t * l mod p``, so the number of oracle
calls does not depend on ``t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .blackbox import BlackBox, hidden_fixture
from .phasest import AncillaConfig
from .qcore import SpectralFixture, StateVector, haar_unitary, rng_from_seed


def first_primes(b: int) -> list[int]:
    if b < 1:
        raise ValueError("b must be at least 1")
    out: list[int] = []
    n = 2
    while len(out) < b:
        if all(n % p for p in out if p * p <= n):
            out.append(n)
        n += 1
    return out


def primorial(b: int) -> int:
    """Product of the first ``b`` primes."""
    return math.prod(first_primes(b))


def continued_fraction(h: int, q: int) -> list[int]:
    """Partial quotients of ``h/q`` (Euclid's algorithm)."""
    terms = []
    while q:
        a, r = divmod(h, q)
        terms.append(a)
        h, q = q, r
    return terms


def convergents(h: int, q: int) -> list[Fraction]:
    """All convergents of ``h/q``, ending with ``h/q`` in lowest terms."""
    if q <= 0 or not 0 <= h < q:
        raise ValueError(f"need 0 <= h < q, got h={h}, q={q}")
    out = []
    p0, q0, p1, q1 = 0, 1, 1, 0
    for a in continued_fraction(h, q):
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append(Fraction(p1, q1))
    return out


def _candidates(h: int, q: int) -> list[Fraction]:
    """Convergents and intermediate fractions of ``h/q``.

    Every best rational approximation of the first kind is among them; the
    endpoints ``0`` and ``1`` are added for the circular wrap.
    """
    out = [Fraction(0), Fraction(1)]
    p0, q0, p1, q1 = 0, 1, 1, 0
    for a in continued_fraction(h, q):
        for k in range(1, a + 1):
            out.append(Fraction(k * p1 + p0, k * q1 + q0))
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
    return out


def _circ(x: Fraction, y: Fraction) -> Fraction:
    d = (x - y) % 1
    return min(d, 1 - d)


def recover_eigenphase(h: int, m: int, p_max: int,
                       denominators: Iterable[int] | None = None) -> Fraction | None:
    """The fraction ``l/p`` with ``p <= p_max`` within ``1/2^m`` of ``h/2^m``.

    Distances are measured around the circle, so ``0/1`` is found from
    estimates just below 1.  ``denominators`` restricts the admissible
    denominators (for example to a set of primes).  Returns ``None`` when no
    admissible fraction lies in range.
    """
    q = 1 << m
    if not 0 <= h < q:
        raise ValueError(f"h must lie in [0, 2^m), got {h}")
    allowed = None if denominators is None else set(denominators)
    x = Fraction(h, q)
    tol = Fraction(1, q)
    best = None
    for c in _candidates(h, q):
        c = c % 1
        if c.denominator > p_max:
            continue
        if allowed is not None and c.denominator not in allowed and c != 0:
            continue
        if _circ(x, c) <= tol and (best is None or _circ(x, c) < _circ(x, best)):
            best = c
    return best


def uniqueness_bound(primes: Sequence[int]) -> int:
    """``2 p_b p_{b-1}`` for the largest two primes (``2 p_1`` when ``b = 1``)."""
    ps = sorted(primes)
    return 2 * ps[-1] * (ps[-2] if len(ps) > 1 else 1)


def required_m(primes: Sequence[int]) -> int:
    """Smallest ``m`` with ``2^m > 2 p_b p_{b-1}``."""
    return uniqueness_bound(primes).bit_length()


@dataclass(frozen=True, eq=False)
class PrimeSpectrumFixture:
    """Spectral fixture whose eigenphases are fractions over the first ``b`` primes."""

    b: int
    assignment: tuple[Fraction, ...]
    underlying: SpectralFixture

    @property
    def primes(self) -> list[int]:
        return first_primes(self.b)

    @property
    def dim(self) -> int:
        return self.underlying.dim

    @property
    def order(self) -> int:
        """Order of the unitary: lcm of the denominators that occur."""
        return math.lcm(*(f.denominator for f in self.assignment))

    @classmethod
    def build(cls, fractions: Sequence, b: int | None = None, *, eigvecs=None,
              seed: int | None = None) -> "PrimeSpectrumFixture":
        """Fixture with the given phases; the basis is Haar-random from ``seed`` unless given."""
        fr = tuple(Fraction(f) % 1 for f in fractions)
        dens = {f.denominator for f in fr} - {1}
        if b is None:
            b = 1
            while not dens <= set(first_primes(b)):
                b += 1
        primes = set(first_primes(b))
        if not dens <= primes:
            raise ValueError(f"denominators {sorted(dens - primes)} are not among the first {b} primes")
        dim = len(fr)
        if eigvecs is None:
            eigvecs = np.eye(dim, dtype=complex) if seed is None else haar_unitary(dim, rng_from_seed(seed))
        lam = np.array([float(f) for f in fr])
        gap = 1.0 - max(lam) if max(lam) > 0 else 1.0
        return cls(b, fr, SpectralFixture(eigvecs, lam, gap))

    @classmethod
    def primorial_cycle(cls, b: int, dim: int, *, seed: int | None = None) -> "PrimeSpectrumFixture":
        """Fixture in which every prime ``p_1 .. p_b`` occurs with numerator 1 (order = primorial)."""
        ps = first_primes(b)
        if dim < b:
            raise ValueError(f"need dim >= b to place every prime, got dim={dim}, b={b}")
        fr = [Fraction(1, p) for p in ps]
        k = 0
        while len(fr) < dim:
            p = ps[k % b]
            fr.append(Fraction((k // b + 2) % p, p))
            k += 1
        return cls.build(fr, b, seed=seed)


def modular_phase(t: int, frac: Fraction) -> Fraction:
    """``(t * l mod p) / p`` in exact arithmetic."""
    return Fraction((t * frac.numerator) % frac.denominator, frac.denominator)


def exact_power_apply(pf: PrimeSpectrumFixture, s, t, cfg: AncillaConfig, *,
                      bb: BlackBox | None = None, backend: str = "auto"):
    """``U^t`` on a prime-denominator spectrum with ``t``-independent query cost.

    Stage II recovers ``l/p`` from each mode value by continued fractions and
    applies ``exp(2 pi i (t l mod p) / p)`` with exact rational arithmetic.
    Only integer ``t`` is accepted.
    """
    from .power import _as_target, _finish, three_stage

    primes = pf.primes
    bound = uniqueness_bound(primes)
    if (1 << cfg.m) <= bound:
        raise PremiseError(
            f"2^m = {1 << cfg.m} must exceed 2 p_b p_(b-1) = {bound}; use m >= {required_m(primes)}",
            required_m(primes))
    if bb is None:
        bb = BlackBox(pf.underlying)
    if isinstance(t, float):
        if not t.is_integer():
            raise ValueError("exact_power_apply takes integer t; route reals through power_apply")
        t = int(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    s = _as_target(s, bb.dim)
    p_max = max(primes)
    n = 1 << cfg.m
    phases = np.empty(n, dtype=complex)
    for h in range(n):
        frac = recover_eigenphase(h, cfg.m, p_max, primes)
        if frac is None:
            phases[h] = 1.0
        else:
            ph = modular_phase(t, frac)
            phases[h] = np.exp(2j * np.pi * float(ph))
    out, residual, failure, full, route = three_stage(bb, s, cfg, phases, backend=backend)
    lam_exact = pf.assignment
    basis = pf.underlying.eigvecs
    ideal_ph = np.exp(2j * np.pi * np.array([float(modular_phase(t, f)) for f in lam_exact]))
    ideal = basis @ (ideal_ph * (basis.conj().T @ s.amps))
    return _finish(bb, out, residual, failure, full, route, ideal)


class PremiseError(ValueError):
    """The precision is too low for unique continued-fraction recovery."""

    def __init__(self, msg: str, required: int):
        super().__init__(msg)
        self.required_m = required
