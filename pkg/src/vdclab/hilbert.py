"""Sparse vectors in the character basis of L^2 of the d-torus.

A character e_m(x) = exp(2 pi i m.x) is indexed by an integer vector m.
Vectors are finite complex combinations of characters, so inner products,
products, and norms are exact combinatorial operations on the index maps.

Index equality is decided from three residues modulo distinct 61-bit
primes (a linear fingerprint of m), so indices whose entries have grown
to thousands of bits under a hyperbolic automorphism still compare in
O(1).  The full integer vector is kept alongside for exact audits; the
per-pair collision probability of the triple fingerprint is ~2^-183 and
the experiment drivers that lean on it re-verify with an independent
prime set.
"""

from __future__ import annotations

import math
from typing import Iterable

# Distinct 61-bit primes; the B set is reserved for fingerprint audits.
PRIMES_A = (2305843009213693951, 2305843009213693921, 2305843009213693907)
PRIMES_B = (2305843009213693723, 2305843009213693693, 2305843009213693669)
_BASES = (1000003, 1000033, 1000037)

_weight_cache: dict[tuple[tuple[int, ...], int], tuple[tuple[int, ...], ...]] = {}


def fingerprint_weights(primes: tuple[int, ...], dim: int) -> tuple[tuple[int, ...], ...]:
    """Per-(prime, coordinate) weights for the linear index fingerprint."""
    key = (primes, dim)
    w = _weight_cache.get(key)
    if w is None:
        w = tuple(
            tuple(pow(_BASES[j % len(_BASES)], i + 1, p) for i in range(dim))
            for j, p in enumerate(primes)
        )
        _weight_cache[key] = w
    return w


def fingerprint(m: tuple[int, ...], primes: tuple[int, ...] = PRIMES_A) -> tuple[int, ...]:
    w = fingerprint_weights(primes, len(m))
    return tuple(
        sum(mi * wi for mi, wi in zip(m, wj)) % p for p, wj in zip(primes, w)
    )


class CharIndex:
    """Exponent vector of a character, with O(1) fingerprint equality.

    Adding indices adds fingerprints componentwise mod p, so products of
    characters never need the weights recomputed.
    """

    __slots__ = ("m", "fp", "_hash")

    def __init__(self, m: Iterable[int], fp: tuple[int, ...] | None = None):
        mt = tuple(int(v) for v in m)
        object.__setattr__(self, "m", mt)
        object.__setattr__(self, "fp", fp if fp is not None else fingerprint(mt))
        object.__setattr__(self, "_hash", hash((len(mt), self.fp)))

    def __setattr__(self, *a):
        raise AttributeError("CharIndex is immutable")

    @property
    def dim(self) -> int:
        return len(self.m)

    def __eq__(self, other):
        return (
            isinstance(other, CharIndex)
            and self.fp == other.fp
            and len(self.m) == len(other.m)
        )

    def __hash__(self):
        return self._hash

    def __add__(self, other: "CharIndex") -> "CharIndex":
        if len(self.m) != len(other.m):
            raise ValueError("dimension mismatch")
        fp = tuple((a + b) % p for a, b, p in zip(self.fp, other.fp, PRIMES_A))
        return CharIndex(tuple(a + b for a, b in zip(self.m, other.m)), fp)

    def __neg__(self) -> "CharIndex":
        fp = tuple((-a) % p for a, p in zip(self.fp, PRIMES_A))
        return CharIndex(tuple(-a for a in self.m), fp)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.m)

    def sup_norm(self) -> int:
        return max(abs(v) for v in self.m)

    def __repr__(self):
        return f"e{self.m}"


class CharVector:
    """Finite complex combination of characters; immutable by convention.

    Zero amplitudes are never stored, so the coefficient map is a faithful
    support description and ||f||^2 = sum |c_m|^2 exactly.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[CharIndex, complex] | None = None):
        object.__setattr__(
            self, "coeffs", {k: complex(v) for k, v in (coeffs or {}).items() if v != 0}
        )

    def __setattr__(self, *a):
        raise AttributeError("CharVector is immutable")

    @classmethod
    def basis(cls, m: Iterable[int], amplitude: complex = 1.0) -> "CharVector":
        return cls({CharIndex(m): amplitude})

    @classmethod
    def zero(cls) -> "CharVector":
        return cls({})

    @classmethod
    def constant(cls, dim: int, value: complex = 1.0) -> "CharVector":
        return cls({CharIndex((0,) * dim): value})

    def dim(self) -> int | None:
        for k in self.coeffs:
            return k.dim
        return None

    def is_zero(self) -> bool:
        return not self.coeffs

    def support(self) -> tuple[CharIndex, ...]:
        return tuple(self.coeffs)

    def amplitude(self, m: Iterable[int]) -> complex:
        return self.coeffs.get(CharIndex(m), 0j)

    def mean(self) -> complex:
        """Integral over the torus: the coefficient of the constant character."""
        d = self.dim()
        if d is None:
            return 0j
        return self.coeffs.get(CharIndex((0,) * d), 0j)

    def norm_sq(self) -> float:
        return math.fsum(abs(c) ** 2 for c in self.coeffs.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def inner(self, other: "CharVector") -> complex:
        a, b = self.coeffs, other.coeffs
        if len(b) < len(a):
            return sum((a[k] * b[k].conjugate() for k in b if k in a), 0j)
        return sum((a[k] * b[k].conjugate() for k in a if k in b), 0j)

    def __add__(self, other: "CharVector") -> "CharVector":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k, 0j) + v
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return CharVector(out)

    def __rmul__(self, scalar: complex) -> "CharVector":
        if scalar == 0:
            return CharVector({})
        return CharVector({k: scalar * v for k, v in self.coeffs.items()})

    def __sub__(self, other: "CharVector") -> "CharVector":
        return self + (-1.0) * other

    def __mul__(self, other: "CharVector") -> "CharVector":
        return char_mul(self, other)

    def conjugate(self) -> "CharVector":
        return CharVector({-k: v.conjugate() for k, v in self.coeffs.items()})

    def evaluate_at(self, point: Iterable[float]) -> complex:
        """Pointwise value sum c_m e^{2 pi i m.x}; for tests and oracles."""
        x = tuple(point)
        total = 0j
        for k, v in self.coeffs.items():
            t = math.fsum(mi * xi for mi, xi in zip(k.m, x))
            total += v * complex(math.cos(TWO_PI_ * t), math.sin(TWO_PI_ * t))
        return total

    def __repr__(self):
        if not self.coeffs:
            return "CharVector(0)"
        terms = ", ".join(f"{k}: {v:.6g}" for k, v in self.coeffs.items())
        return f"CharVector({terms})"


TWO_PI_ = 2.0 * math.pi


def char_inner(u: CharVector, v: CharVector) -> complex:
    """<u, v> in L^2: characters are orthonormal, so this is exact."""
    return u.inner(v)


def char_combine(terms: list[tuple[complex, CharVector]]) -> CharVector:
    """Linear combination with exact pruning of cancelled coefficients."""
    out: dict[CharIndex, complex] = {}
    for scalar, vec in terms:
        if scalar == 0:
            continue
        for k, v in vec.coeffs.items():
            s = out.get(k, 0j) + scalar * v
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
    return CharVector(out)


def char_mul(u: CharVector, v: CharVector) -> CharVector:
    """Pointwise product: coefficient convolution, indices add."""
    out: dict[CharIndex, complex] = {}
    for ku, cu in u.coeffs.items():
        for kv, cv in v.coeffs.items():
            k = ku + kv
            s = out.get(k, 0j) + cu * cv
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
    return CharVector(out)
