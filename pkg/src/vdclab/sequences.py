"""Integer sequences, their difference profiles, and equidistribution
diagnostics (Weyl sums, star discrepancy, the n^k alpha window sets).

Polynomial sequences are stored in the binomial basis C(n,0), C(n,1), ...
because a polynomial is integer-valued exactly when those coefficients
are integers; evaluation then stays in integer arithmetic for every n.
Floor-power sequences floor(n^c) are exact: c that reduces to a small
rational p/q takes an integer-root path, everything else goes through
high-precision decimal exponentials with a certified distance-to-integer
guard, and an ambiguous floor raises instead of rounding silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

from .fixedpoint import SCALE, CompensatedSum, Irrational, cis


class FloorAmbiguityError(ArithmeticError):
    """n^c is within 2^-64 of an integer: the floor cannot be certified."""

    def __init__(self, n: int, c: Fraction, distance: float):
        self.n = n
        self.c = c
        self.distance = distance
        super().__init__(
            f"floor of {n}^{float(c):.10g} is ambiguous "
            f"(within {distance:.3g} of an integer)"
        )


class IntegerSequence:
    """Base: a map n -> k_n on n >= 1, exact."""

    def eval(self, n: int) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def diff(self, h: int) -> "IntegerSequence":
        if h < 1:
            raise ValueError("difference shift h must be >= 1")
        return DifferenceSequence(self, h)

    def __call__(self, n: int) -> int:
        return self.eval(n)


class PolynomialSequence(IntegerSequence):
    """Integer-valued polynomial in the binomial basis: sum b_j * C(n, j)."""

    def __init__(self, binomial_coeffs, label: str = ""):
        bc = tuple(int(b) for b in binomial_coeffs)
        while bc and bc[-1] == 0:
            bc = bc[:-1]
        self.binomial_coeffs = bc
        self.label = label

    @classmethod
    def from_power_coefficients(cls, coeffs, label: str = "") -> "PolynomialSequence":
        """coeffs[i] multiplies n^i; rationals allowed, the polynomial must
        be integer-valued (checked via its finite differences at 0)."""
        cs = [Fraction(c) for c in coeffs]

        def value(x: int) -> Fraction:
            acc = Fraction(0)
            for c in reversed(cs):
                acc = acc * x + c
            return acc

        deg = len(cs) - 1
        bcoeffs = []
        for j in range(deg + 1):
            b = sum((-1) ** (j - i) * math.comb(j, i) * value(i) for i in range(j + 1))
            if b.denominator != 1:
                raise ValueError(
                    f"polynomial is not integer-valued: binomial coefficient {j} = {b}"
                )
            bcoeffs.append(int(b))
        return cls(bcoeffs, label)

    @property
    def degree(self) -> int:
        return max(len(self.binomial_coeffs) - 1, 0)

    def eval(self, n: int) -> int:
        if n < 0:
            raise ValueError("sequence index must be >= 0")
        return sum(b * math.comb(n, j) for j, b in enumerate(self.binomial_coeffs))

    def shift(self, h: int) -> "PolynomialSequence":
        """The polynomial n -> p(n + h), via Vandermonde:
        C(n+h, j) = sum_t C(h, j-t) C(n, t)."""
        bc = self.binomial_coeffs
        return PolynomialSequence(
            tuple(
                sum(bc[j] * math.comb(h, j - t) for j in range(t, len(bc)))
                for t in range(len(bc))
            )
        )

    def __sub__(self, other: "PolynomialSequence") -> "PolynomialSequence":
        a, b = self.binomial_coeffs, other.binomial_coeffs
        width = max(len(a), len(b))
        return PolynomialSequence(
            tuple(
                (a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)
                for i in range(width)
            )
        )

    def diff(self, h: int) -> "PolynomialSequence":
        """Closed form for k_{n+h} - k_n, one degree lower."""
        if h < 1:
            raise ValueError("difference shift h must be >= 1")
        out = self.shift(h) - self
        out.label = f"{self.label}_diff{h}" if self.label else ""
        return out

    def power_coefficients(self) -> tuple[Fraction, ...]:
        """Coefficients over the power basis (for rank checks)."""
        deg = self.degree
        out = [Fraction(0)] * (deg + 1)
        basis = [Fraction(1)]  # C(n,0) = 1
        for j, b in enumerate(self.binomial_coeffs):
            for i, c in enumerate(basis):
                out[i] += b * c
            # C(n, j+1) = C(n, j) * (n - j) / (j + 1)
            nxt = [Fraction(0)] * (len(basis) + 1)
            for i, c in enumerate(basis):
                nxt[i + 1] += c / (j + 1)
                nxt[i] -= c * j / (j + 1)
            basis = nxt
        return tuple(out)

    def __repr__(self):
        return f"PolynomialSequence(binomial={self.binomial_coeffs})"


def _integer_root(a: int, q: int) -> int:
    """floor(a^(1/q)) for a >= 0 by integer Newton iteration."""
    if a < 0:
        raise ValueError("negative radicand")
    if a < 2 or q == 1:
        return a
    x = 1 << -(-a.bit_length() // q)  # upper-ish seed
    while True:
        y = ((q - 1) * x + a // x ** (q - 1)) // q
        if y >= x:
            break
        x = y
    while x ** q > a:
        x -= 1
    return x


class FloorPowerSequence(IntegerSequence):
    """k_n = floor(n^c) with c > 0 pinned to 128 fractional bits.

    When c reduces to a rational p/q with small denominator the floor is
    computed exactly as the integer q-th root of n^p.  Otherwise n^c is
    evaluated in decimal arithmetic with enough guard digits that the
    only uncertifiable case is a true near-integer, which raises.
    """

    AMBIGUITY = 2.0 ** -64
    _RATIONAL_DENOM_LIMIT = 1 << 20

    def __init__(self, c_fix: int, label: str = ""):
        if c_fix <= 0:
            raise ValueError("exponent c must be positive")
        self.c_fix = c_fix
        self.c = Fraction(c_fix, SCALE)
        self.label = label
        self._rational = self.c if self.c.denominator <= self._RATIONAL_DENOM_LIMIT else None

    @classmethod
    def from_fraction(cls, c, label: str = "") -> "FloorPowerSequence":
        c = Fraction(c)
        return cls((c.numerator * SCALE) // c.denominator, label)

    def eval(self, n: int) -> int:
        if n < 1:
            raise ValueError("sequence index must be >= 1")
        if self._rational is not None:
            p, q = self._rational.numerator, self._rational.denominator
            return _integer_root(n ** p, q)
        # c is a full-width fixed-point value: decimal exponential with
        # error around 1e-60, far below the 2^-64 ambiguity band
        digits = int(float(self.c) * math.log10(n)) + 80
        with localcontext() as ctx:
            ctx.prec = digits
            x = (Decimal(n).ln() * (Decimal(self.c_fix) / Decimal(SCALE))).exp()
            nearest = x.to_integral_value(rounding="ROUND_HALF_EVEN")
            dist = abs(x - nearest)
            if dist < Decimal(self.AMBIGUITY):
                raise FloorAmbiguityError(n, self.c, float(dist))
            return int(x)

    def __repr__(self):
        return f"FloorPowerSequence(c={float(self.c):.10g})"


class TableSequence(IntegerSequence):
    """Explicit finite table; n indexes from 1."""

    def __init__(self, values, label: str = ""):
        self.values = tuple(int(v) for v in values)
        self.label = label

    def eval(self, n: int) -> int:
        if not 1 <= n <= len(self.values):
            raise ValueError(f"table sequence defined for 1 <= n <= {len(self.values)}")
        return self.values[n - 1]

    def diff(self, h: int) -> "TableSequence":
        if h < 1:
            raise ValueError("difference shift h must be >= 1")
        v = self.values
        return TableSequence(tuple(v[i + h] - v[i] for i in range(len(v) - h)))


class DifferenceSequence(IntegerSequence):
    """Lazy view of k_{n+h} - k_n."""

    def __init__(self, base: IntegerSequence, h: int):
        self.base = base
        self.h = h

    def eval(self, n: int) -> int:
        return self.base.eval(n + self.h) - self.base.eval(n)


def seq_eval(spec: IntegerSequence, n: int) -> int:
    return spec.eval(n)


def diff_profile(spec: IntegerSequence, h: int) -> IntegerSequence:
    return spec.diff(h)


def weyl_sum(spec: IntegerSequence, x: Irrational, big_n: int) -> complex:
    """(1/N) sum_{n<=N} e^{2 pi i k_n x}, each k_n x reduced mod 1 in
    integer arithmetic before the exponential; ascending n, compensated."""
    if big_n < 1:
        raise ValueError("N must be >= 1")
    acc = CompensatedSum()
    fix = x.fix
    for n in range(1, big_n + 1):
        t = (spec.eval(n) * fix) % SCALE
        acc.add(cis(t / SCALE))
    return acc.value() / big_n


def star_discrepancy(spec: IntegerSequence, x: Irrational, big_n: int) -> float:
    """D*_N of {k_n x mod 1} via the sorted-points formula."""
    if big_n < 1:
        raise ValueError("N must be >= 1")
    fix = x.fix
    pts = sorted(((spec.eval(n) * fix) % SCALE) / SCALE for n in range(1, big_n + 1))
    d = 0.0
    for i, u in enumerate(pts):
        d = max(d, (i + 1) / big_n - u, u - i / big_n)
    return d


@dataclass(frozen=True)
class RkSpec:
    """Visit set {n : n^k alpha mod 1 in window}, window closed."""

    k: int
    alpha: Irrational
    window: tuple[Fraction, Fraction] = (Fraction(1, 4), Fraction(3, 4))

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")
        lo, hi = self.window
        if not (0 <= lo <= hi <= 1):
            raise ValueError("window must be contained in [0,1]")


@dataclass(frozen=True)
class RkResult:
    members: tuple[int, ...]
    boundary_hits: tuple[int, ...]


def rk_enumerate(spec: RkSpec, big_n: int) -> RkResult:
    """Ordered members of the visit set up to N; membership decided by
    exact fixed-point reduction, exact boundary hits flagged."""
    lo, hi = spec.window
    lo_n, lo_d = lo.numerator, lo.denominator
    hi_n, hi_d = hi.numerator, hi.denominator
    fix = spec.alpha.fix
    members: list[int] = []
    boundary: list[int] = []
    for n in range(1, big_n + 1):
        v = (n ** spec.k * fix) % SCALE
        in_lo = v * lo_d >= lo_n * SCALE
        in_hi = v * hi_d <= hi_n * SCALE
        if in_lo and in_hi:
            members.append(n)
            if v * lo_d == lo_n * SCALE or v * hi_d == hi_n * SCALE:
                boundary.append(n)
    return RkResult(tuple(members), tuple(boundary))


def polynomials_independent(polys) -> bool:
    """True iff no nontrivial rational combination of the given integer
    polynomials is constant (their degree >= 1 parts are independent)."""
    vecs = [p.power_coefficients() for p in polys]
    width = max((len(v) for v in vecs), default=1)
    rows = [
        [v[i] if i < len(v) else Fraction(0) for i in range(1, width)] for v in vecs
    ]
    return _rank(rows) == len(vecs)


def _rank(rows) -> int:
    rows = [r[:] for r in rows]
    if not rows or not rows[0]:
        return 0
    rank = 0
    for col in range(len(rows[0])):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / lead[col]
                rows[r] = [a - f * b for a, b in zip(rows[r], lead)]
        rank += 1
        if rank == len(rows):
            break
    return rank
