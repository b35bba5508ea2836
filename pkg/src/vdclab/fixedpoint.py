"""Exact mod-1 arithmetic for phases built from declared irrationals.

Irrational numbers enter every computation here only through a pinned
128-bit fixed-point truncation, and every reduction mod 1 of an integer
multiple k*x happens in integer arithmetic before anything is rounded to
a float.  This removes the classic failure mode where n^2 * alpha mod 1
computed in doubles loses ~10 digits by n ~ 10^5.

A FormalPhase is an integer combination of declared irrationals plus a
rational.  It supports exact addition, integer scaling, and an exact
"is this an integer?" test: declared irrationals are treated as formally
independent symbols, so a phase is integral iff every irrational
coefficient is zero and the rational part is an integer.
"""

from __future__ import annotations

import math
from fractions import Fraction

FRAC_BITS = 128
SCALE = 1 << FRAC_BITS
TWO_PI = 2.0 * math.pi


class Irrational:
    """A named irrational in [0,1), pinned as a fixed-point truncation.

    ``fix`` is the integer floor(value * 2^128).  Two declared symbols are
    the same symbol iff both label and pinned value agree.
    """

    __slots__ = ("fix", "label", "_hash")

    def __init__(self, fix: int, label: str):
        if not 0 <= fix < SCALE:
            raise ValueError(f"irrational {label!r}: fixed-point value out of [0,1)")
        if fix == 0:
            raise ValueError(f"irrational {label!r}: value 0 is rational")
        object.__setattr__(self, "fix", fix)
        object.__setattr__(self, "label", label)
        object.__setattr__(self, "_hash", hash((fix, label)))

    def __setattr__(self, *a):  # immutable
        raise AttributeError("Irrational is immutable")

    def times_mod1_fix(self, k: int) -> int:
        """Exact fixed-point value of k*x mod 1 (no rounding at any k)."""
        return (k * self.fix) % SCALE

    def times_mod1(self, k: int) -> float:
        return self.times_mod1_fix(k) / SCALE

    def as_fraction(self) -> Fraction:
        return Fraction(self.fix, SCALE)

    def __float__(self) -> float:
        return self.fix / SCALE

    def __eq__(self, other):
        return (
            isinstance(other, Irrational)
            and self.fix == other.fix
            and self.label == other.label
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Irrational({self.label}={self.fix / SCALE:.12f}...)"

    @classmethod
    def sqrt_minus_int(cls, radicand: int, sub: int, label: str) -> "Irrational":
        """sqrt(radicand) - sub, truncated to 128 bits; must land in (0,1)."""
        fix = math.isqrt(radicand << (2 * FRAC_BITS)) - sub * SCALE
        return cls(fix, label)

    @classmethod
    def from_decimal_string(cls, text: str, label: str) -> "Irrational":
        """Parse a decimal in [0,1) to its 128-bit truncation."""
        frac = Fraction(text)
        if not 0 < frac < 1:
            raise ValueError(f"irrational {label!r}: literal must lie in (0,1)")
        return cls((frac.numerator * SCALE) // frac.denominator, label)

    @classmethod
    def from_hex(cls, text: str, label: str) -> "Irrational":
        return cls(int(text, 16), label)


class FormalPhase:
    """rational + sum of integer multiples of declared irrationals."""

    __slots__ = ("rational", "irr")

    def __init__(self, rational: Fraction = Fraction(0), irr: dict | None = None):
        object.__setattr__(self, "rational", rational)
        # canonical: no zero coefficients; plain dict, never mutated after init
        object.__setattr__(
            self, "irr", {s: c for s, c in (irr or {}).items() if c != 0}
        )

    def __setattr__(self, *a):
        raise AttributeError("FormalPhase is immutable")

    @classmethod
    def zero(cls) -> "FormalPhase":
        return _ZERO

    @classmethod
    def of(cls, rational=0, **symbol_coeffs) -> "FormalPhase":
        raise NotImplementedError  # pragma: no cover - see from_terms

    @classmethod
    def from_rational(cls, value) -> "FormalPhase":
        return cls(Fraction(value))

    @classmethod
    def from_irrational(cls, symbol: Irrational, coeff: int = 1) -> "FormalPhase":
        return cls(Fraction(0), {symbol: coeff})

    def __add__(self, other: "FormalPhase") -> "FormalPhase":
        irr = dict(self.irr)
        for s, c in other.irr.items():
            n = irr.get(s, 0) + c
            if n:
                irr[s] = n
            else:
                del irr[s]
        out = FormalPhase.__new__(FormalPhase)
        object.__setattr__(out, "rational", self.rational + other.rational)
        object.__setattr__(out, "irr", irr)
        return out

    def __neg__(self) -> "FormalPhase":
        out = FormalPhase.__new__(FormalPhase)
        object.__setattr__(out, "rational", -self.rational)
        object.__setattr__(out, "irr", {s: -c for s, c in self.irr.items()})
        return out

    def __sub__(self, other: "FormalPhase") -> "FormalPhase":
        return self + (-other)

    def scale(self, k: int) -> "FormalPhase":
        if k == 0:
            return _ZERO
        out = FormalPhase.__new__(FormalPhase)
        object.__setattr__(out, "rational", self.rational * k)
        object.__setattr__(out, "irr", {s: c * k for s, c in self.irr.items()})
        return out

    def is_integral(self) -> bool:
        """True iff the phase is an integer as a formal expression.

        Irrational parts never cancel the rational part: the symbols are
        treated as rationally independent of each other and of 1.
        """
        return not self.irr and self.rational.denominator == 1

    def num_den_mod1(self) -> tuple[int, int]:
        """Exact (num, den) with value mod 1 == num/den, den = q * 2^128."""
        q = self.rational.denominator
        den = q * SCALE
        num = self.rational.numerator * SCALE
        for s, c in self.irr.items():
            num += q * c * s.fix
        return num % den, den

    def fraction_mod1(self) -> Fraction:
        num, den = self.num_den_mod1()
        return Fraction(num, den)

    def float_mod1(self) -> float:
        num, den = self.num_den_mod1()
        return num / den

    def symbols(self) -> tuple[Irrational, ...]:
        return tuple(self.irr)

    def _key(self):
        r = self.rational
        return (r, tuple(sorted(((s.label, s.fix, c) for s, c in self.irr.items()))))

    def reduced_key(self):
        """Key identifying the phase mod 1 (rational part reduced)."""
        r = self.rational - self.rational.__floor__()
        return (r, tuple(sorted(((s.label, s.fix, c) for s, c in self.irr.items()))))

    def __eq__(self, other):
        return isinstance(other, FormalPhase) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        parts = []
        if self.rational or not self.irr:
            parts.append(str(self.rational))
        for s, c in sorted(self.irr.items(), key=lambda kv: kv[0].label):
            parts.append(f"{c:+d}*{s.label}")
        return "Phase(" + " ".join(parts) + ")"


_ZERO = FormalPhase(Fraction(0), {})


def cis(t: float) -> complex:
    """e^{2 pi i t} for t in [0,1); exact at the quarter points so that
    rational alternating sums cancel to literal zero."""
    if t == 0.0:
        return complex(1.0, 0.0)
    if t == 0.5:
        return complex(-1.0, 0.0)
    if t == 0.25:
        return complex(0.0, 1.0)
    if t == 0.75:
        return complex(0.0, -1.0)
    a = TWO_PI * t
    return complex(math.cos(a), math.sin(a))


def phase_amplitude(phase: FormalPhase) -> complex:
    return cis(phase.float_mod1())


class CompensatedSum:
    """Neumaier-compensated streaming sum for complex values."""

    __slots__ = ("re", "im", "cre", "cim")

    def __init__(self):
        self.re = self.im = self.cre = self.cim = 0.0

    def add(self, z: complex) -> None:
        x = z.real
        t = self.re + x
        if abs(self.re) >= abs(x):
            self.cre += (self.re - t) + x
        else:
            self.cre += (x - t) + self.re
        self.re = t
        y = z.imag
        t = self.im + y
        if abs(self.im) >= abs(y):
            self.cim += (self.im - t) + y
        else:
            self.cim += (y - t) + self.im
        self.im = t

    def value(self) -> complex:
        return complex(self.re + self.cre, self.im + self.cim)
