"""Affine measure-preserving automorphisms of the d-torus and their exact
unitary action on the character basis.

A system is x -> A x + b with A an integer matrix, |det A| = 1, and b a
vector of formal phases.  Composition never leaves the class, iterates
have the closed form T^n x = A^n x + (sum_{j<n} A^j) b, and the action on
a character is

    e_m o T^n = exp(2 pi i m . b_n) * e_{(A^T)^n m},

which the walkers below evaluate with integer-only phase accumulation so
that orbits of length 10^5 carry no rounding drift at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .fixedpoint import SCALE, FormalPhase, cis
from .hilbert import CharIndex, CharVector

Matrix = tuple[tuple[int, ...], ...]


class OrbitCapError(RuntimeError):
    """Raised when an index orbit is neither closed nor certified infinite
    within the iteration cap."""


# ---------------------------------------------------------------------------
# integer matrix helpers


def mat_identity(d: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a
    )


def mat_vec(a: Matrix, v: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def vec_mat(v: tuple[int, ...], a: Matrix) -> tuple[int, ...]:
    """Row-vector product v A, i.e. A^T applied to v."""
    n = len(a)
    return tuple(sum(v[r] * a[r][j] for r in range(n)) for j in range(n))


def mat_det(a: Matrix) -> int:
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    det = 0
    for j in range(n):
        minor = tuple(row[:j] + row[j + 1 :] for row in a[1:])
        det += (-1) ** j * a[0][j] * mat_det(minor)
    return det


def mat_adjugate(a: Matrix) -> Matrix:
    n = len(a)
    if n == 1:
        return ((1,),)
    cof = [
        [
            (-1) ** (i + j)
            * mat_det(
                tuple(
                    tuple(a[r][c] for c in range(n) if c != j)
                    for r in range(n)
                    if r != i
                )
            )
            for j in range(n)
        ]
        for i in range(n)
    ]
    return tuple(tuple(cof[j][i] for j in range(n)) for i in range(n))


def mat_unimodular_inverse(a: Matrix) -> Matrix:
    det = mat_det(a)
    if det not in (1, -1):
        raise ValueError(f"matrix is not unimodular (det = {det})")
    adj = mat_adjugate(a)
    if det == 1:
        return adj
    return tuple(tuple(-x for x in row) for row in adj)


def mat_mod(a: Matrix, p: int) -> Matrix:
    return tuple(tuple(x % p for x in row) for row in a)


def mat_mul_mod(a: Matrix, b: Matrix, p: int) -> Matrix:
    n = len(a)
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) % p for col in bt) for row in a
    )


def mat_pow_mod(a: Matrix, e: int, p: int) -> Matrix:
    if e < 0:
        raise ValueError("negative exponent in modular power")
    result = mat_identity(len(a))
    base = mat_mod(a, p)
    while e:
        if e & 1:
            result = mat_mul_mod(result, base, p)
        base = mat_mul_mod(base, base, p)
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# affine systems


@dataclass(frozen=True)
class AffineSystem:
    """x -> A x + b on T^d, with |det A| = 1 so Haar measure is preserved."""

    matrix: Matrix
    translation: tuple[FormalPhase, ...]
    label: str = ""

    def __post_init__(self):
        d = len(self.matrix)
        if any(len(row) != d for row in self.matrix):
            raise ValueError("matrix must be square")
        if any(not isinstance(x, int) for row in self.matrix for x in row):
            raise ValueError("matrix entries must be integers")
        if mat_det(self.matrix) not in (1, -1):
            raise ValueError(f"matrix must be unimodular, det = {mat_det(self.matrix)}")
        if len(self.translation) != d:
            raise ValueError("translation length must match matrix dimension")

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @classmethod
    def rotation(cls, phases, label: str = "") -> "AffineSystem":
        b = tuple(phases)
        return cls(mat_identity(len(b)), b, label)

    @classmethod
    def automorphism(cls, matrix, label: str = "") -> "AffineSystem":
        m = tuple(tuple(int(x) for x in row) for row in matrix)
        return cls(m, (FormalPhase.zero(),) * len(m), label)

    def is_rotation(self) -> bool:
        return self.matrix == mat_identity(self.dim)

    def is_translation_free(self) -> bool:
        return all(p.is_integral() for p in self.translation)

    def compose(self, other: "AffineSystem") -> "AffineSystem":
        """self after other: x -> A_s (A_o x + b_o) + b_s."""
        m = mat_mul(self.matrix, other.matrix)
        b = tuple(
            _mat_phase_row(self.matrix, r, other.translation) + self.translation[r]
            for r in range(self.dim)
        )
        return AffineSystem(m, b)

    def inverse(self) -> "AffineSystem":
        inv = mat_unimodular_inverse(self.matrix)
        b = tuple(
            -_mat_phase_row(inv, r, self.translation) for r in range(self.dim)
        )
        return AffineSystem(inv, b)


def _mat_phase_row(m: Matrix, r: int, phases: tuple[FormalPhase, ...]) -> FormalPhase:
    total = FormalPhase.zero()
    for c, coeff in enumerate(m[r]):
        if coeff:
            total = total + phases[c].scale(coeff)
    return total


def systems_commute(t: AffineSystem, s: AffineSystem) -> bool:
    if t.dim != s.dim:
        return False
    if mat_mul(t.matrix, s.matrix) != mat_mul(s.matrix, t.matrix):
        return False
    ts = t.compose(s)
    st = s.compose(t)
    return all(
        (a - b).is_integral() for a, b in zip(ts.translation, st.translation)
    )


def system_power(t: AffineSystem, n: int) -> AffineSystem:
    """Closed-form iterate T^n, exact for any integer n.

    The translation is sum_{j<n} A^j b, accumulated by binary doubling of
    affine pairs; for a rotation this collapses to n*b.
    """
    if n == 0:
        return AffineSystem(mat_identity(t.dim), (FormalPhase.zero(),) * t.dim)
    if n < 0:
        return system_power(t.inverse(), -n)
    if t.is_rotation():
        return AffineSystem(t.matrix, tuple(p.scale(n) for p in t.translation))
    result: AffineSystem | None = None
    base = t
    e = n
    while e:
        if e & 1:
            result = base if result is None else base.compose(result)
        e >>= 1
        if e:
            base = base.compose(base)
    return result


def pushforward(t: AffineSystem, f: CharVector, n: int) -> CharVector:
    """f o T^n in the character basis; unitary, so norms are preserved."""
    if n == 0 or f.is_zero():
        return f
    tn = system_power(t, n)
    out: dict[CharIndex, complex] = {}
    for k, amp in f.coeffs.items():
        phase = FormalPhase.zero()
        for mr, br in zip(k.m, tn.translation):
            if mr:
                phase = phase + br.scale(mr)
        new_index = CharIndex(vec_mat(k.m, tn.matrix))
        out[new_index] = out.get(new_index, 0j) + amp * cis(phase.float_mod1())
    return CharVector(out)


# Largest order of a finite-order element of GL_d(Z): if an index orbit
# is periodic its period is such an order, so failing to return within
# this many steps certifies the orbit infinite.
_MAX_FINITE_ORDER = {1: 2, 2: 6, 3: 6, 4: 12, 5: 12, 6: 30}


def invariant_projection(
    t: AffineSystem,
    f: CharVector,
    max_iter: int = 10_000,
    norm_cap: int = 1 << 200,
) -> CharVector:
    """Orthogonal projection of f onto the T-invariant subspace.

    Each character index m is walked under A^T.  A finite orbit of period
    p supports an invariant component iff the accumulated phase around the
    cycle is integral as a formal expression (irrational parts never
    cancel unless their integer coefficients vanish); the projection of
    e_m is then the phase-corrected cycle average.  An orbit is certified
    infinite (projection 0) once it fails to return within the largest
    finite element order of GL_d(Z), for d <= 6; in higher dimension the
    certificate falls back to the norm cap and the iteration cap, and an
    orbit still undecided at the cap raises.
    """
    out: dict[CharIndex, complex] = {}
    b = t.translation
    d = t.dim
    order_bound = _MAX_FINITE_ORDER.get(d)
    budget = min(max_iter, order_bound) if order_bound is not None else max_iter
    for k, amp in f.coeffs.items():
        m0 = k.m
        m = m0
        partial = FormalPhase.zero()
        cycle: list[tuple[tuple[int, ...], FormalPhase]] = []
        closed = False
        escaped = False
        for _ in range(budget):
            cycle.append((m, partial))
            step = FormalPhase.zero()
            for mr, br in zip(m, b):
                if mr:
                    step = step + br.scale(mr)
            partial = partial + step
            m = vec_mat(m, t.matrix)
            if m == m0:
                closed = True
                break
            if max(abs(v) for v in m) > norm_cap:
                escaped = True
                break
        certified = (
            closed or escaped or (order_bound is not None and budget >= order_bound)
        )
        if not certified:
            raise OrbitCapError(
                f"orbit growth exceeds cap for index {m0} "
                f"(no cycle within {budget} steps)"
            )
        if not closed:
            continue  # certified infinite orbit: wandering, projects to 0
        if not partial.is_integral():
            continue  # cycle phase != 1: no invariant component
        p = len(cycle)
        for mj, phase_j in cycle:
            idx = CharIndex(mj)
            out[idx] = out.get(idx, 0j) + (amp / p) * cis(phase_j.float_mod1())
    return CharVector(out)


# ---------------------------------------------------------------------------
# exact orbit walkers


def _translation_nums(t: AffineSystem) -> tuple[int, tuple[int, ...]]:
    """Common denominator D = q * 2^128 and numerators of b mod 1 over D."""
    q = 1
    for p in t.translation:
        q = q * p.rational.denominator // math.gcd(q, p.rational.denominator)
    den = q * SCALE
    nums = []
    for p in t.translation:
        num = p.rational.numerator * (q // p.rational.denominator) * SCALE
        for sym, c in p.irr.items():
            num += q * c * sym.fix
        nums.append(num % den)
    return den, tuple(nums)


class ExponentWalker:
    """Tracks one character of f o T^s as the exponent s moves forward.

    State is the current index (A^T)^s m and the exact phase accumulator
    sum_{j<s} (A^T)^j m . b as an integer numerator mod D; jumps by delta
    compose cached affine powers, so polynomial exponent schedules cost
    O(1) amortized per step and nothing is ever rounded.
    """

    __slots__ = (
        "system", "den", "base_nums", "m", "exponent", "acc", "amp0",
        "_rotation", "_rot_base", "_pairs", "_last",
    )

    def __init__(self, system: AffineSystem, m: tuple[int, ...], amp: complex = 1.0):
        self.system = system
        self.den, self.base_nums = _translation_nums(system)
        self.m = tuple(int(v) for v in m)
        self.exponent = 0
        self.acc = 0
        self.amp0 = complex(amp)
        self._rotation = system.is_rotation()
        self._rot_base = (
            sum(mi * ni for mi, ni in zip(self.m, self.base_nums)) % self.den
            if self._rotation
            else 0
        )
        # cache: delta -> (A^delta, translation nums of T^delta mod den)
        self._pairs: dict[int, tuple[Matrix, tuple[int, ...]]] = {}
        self._last: int | None = None

    def _compose(self, p1, p2):
        """Affine pair for T^{d1+d2} from pairs for T^{d1}, T^{d2}."""
        m1, t1 = p1
        m2, t2 = p2
        mm = mat_mul(m1, m2)
        tt = tuple(
            (sum(m1[r][c] * t2[c] for c in range(len(t2))) + t1[r]) % self.den
            for r in range(len(t1))
        )
        return mm, tt

    _KEEP = 4096  # strides at most this large stay cached permanently

    def _pair(self, delta: int):
        cached = self._pairs.get(delta)
        if cached is not None:
            self._last = delta
            return cached
        last = self._last
        if last is not None and delta > last > 0:
            # polynomial exponent schedules have eventually constant
            # higher differences, so delta - last recurs: one compose
            inc = delta - last
            pinc = self._pairs.get(inc)
            if pinc is None:
                pinc = self._pow_pair(inc)
                if inc <= self._KEEP:
                    self._pairs[inc] = pinc
            pair = self._compose(pinc, self._pairs[last])
        else:
            pair = self._pow_pair(delta)
        self._pairs[delta] = pair
        if last is not None and last > self._KEEP:
            self._pairs.pop(last, None)
        self._last = delta
        return pair

    def _pow_pair(self, delta: int):
        if delta < 0:
            inv = self.system.inverse()
            den, nums = _translation_nums(inv)
            # denominators can differ only in the rational part; rescale
            base = (inv.matrix, tuple(n * (self.den // den) % self.den for n in nums))
            return self._pow_from(base, -delta)
        base = (self.system.matrix, self.base_nums)
        return self._pow_from(base, delta)

    def _pow_from(self, base, e: int):
        d = len(self.m)
        result = (mat_identity(d), (0,) * d)
        while e:
            if e & 1:
                result = self._compose(base, result)
            e >>= 1
            if e:
                base = self._compose(base, base)
        return result

    def advance_to(self, s: int) -> None:
        delta = s - self.exponent
        if delta == 0:
            return
        if self._rotation:
            self.acc = (self.acc + delta * self._rot_base) % self.den
            self.exponent = s
            return
        mat, tnums = self._pair(delta)
        # phase picked up over the jump: current index dotted with the
        # translation of T^delta
        self.acc = (
            self.acc + sum(mi * ti for mi, ti in zip(self.m, tnums))
        ) % self.den
        self.m = vec_mat(self.m, mat)
        self.exponent = s

    def amplitude(self) -> complex:
        return self.amp0 * cis(self.acc / self.den)

    def index(self) -> CharIndex:
        return CharIndex(self.m)

    def term(self) -> tuple[CharIndex, complex]:
        return self.index(), self.amplitude()


def orbit_vectors(system: AffineSystem, f: CharVector, count: int, exponents=None):
    """Yield f o T^{s(n)} for n = 1..count (s(n) = n when exponents is None)."""
    walkers = [ExponentWalker(system, k.m, amp) for k, amp in f.coeffs.items()]
    for n in range(1, count + 1):
        s = n if exponents is None else exponents(n)
        vec: dict[CharIndex, complex] = {}
        for w in walkers:
            w.advance_to(s)
            idx, amp = w.term()
            prev = vec.get(idx, 0j) + amp
            if prev == 0:
                vec.pop(idx, None)
            else:
                vec[idx] = prev
        yield CharVector(vec)


def is_totally_ergodic_rotation(t: AffineSystem) -> bool:
    """A rotation is totally ergodic iff no nonzero integer vector m makes
    m.b rational, i.e. the irrational coefficient matrix of b has full
    column rank over Q."""
    if not t.is_rotation():
        return False
    symbols: list = []
    for p in t.translation:
        for s in p.irr:
            if s not in symbols:
                symbols.append(s)
    if not symbols:
        return False
    d = t.dim
    rows = [
        [Fraction(t.translation[c].irr.get(s, 0)) for c in range(d)] for s in symbols
    ]
    return _rank(rows) == d


def is_hyperbolic_automorphism(t: AffineSystem) -> bool:
    """Weak mixing certificate used by the drivers: a translation-free
    2x2 unimodular matrix with |trace| > 2 has no root-of-unity eigenvalue."""
    if not t.is_translation_free():
        return False
    if t.dim != 2:
        raise ValueError("hyperbolicity check implemented for 2x2 matrices only")
    return abs(t.matrix[0][0] + t.matrix[1][1]) > 2


def _rank(rows: list[list[Fraction]]) -> int:
    rows = [r[:] for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, len(rows)):
            if rows[r][col] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                fct = rows[r][col] / pr[col]
                rows[r] = [a - fct * b for a, b in zip(rows[r], pr)]
        rank += 1
        if rank == len(rows):
            break
    return rank
