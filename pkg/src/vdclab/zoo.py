"""Built-in labeled systems, observables, and orbits used by the
experiment drivers and the test suite.

Every irrational is pinned as an explicit 128-bit truncation so that all
tables are reproducible bit for bit.  The expected classification labels
are the ground truth the spectral classifier is exercised against:

* a rotation orbit of a nonzero character is an eigenfunction orbit, so
  its correlation measure is a single atom (spectrally singular);
* the skew-product observable e^{2 pi i y} has exactly vanishing shifted
  correlations, the absolutely continuous extreme (spectrally Lebesgue);
* an equal-weight direct sum of the two carries half its mass in the
  atom and half in the flat part (mixed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

from .fixedpoint import FRAC_BITS, FormalPhase, Irrational, cis
from .hilbert import CharVector, char_combine
from .sequences import PolynomialSequence
from .systems import AffineSystem, orbit_vectors

SQRT2_MINUS_1 = Irrational.sqrt_minus_int(2, 1, "alpha")
GOLDEN_MINUS_1 = Irrational(
    (math.isqrt(5 << (2 * FRAC_BITS)) - (1 << FRAC_BITS)) // 2, "beta"
)

N_SQUARED = PolynomialSequence((0, 1, 2), label="n^2")        # n^2 = C(n,1) + 2C(n,2)
LINEAR = PolynomialSequence((0, 1), label="n")
TRIANGULAR = PolynomialSequence((0, 0, 1), label="n(n-1)/2")  # C(n,2)


def _phase(sym: Irrational, coeff: int = 1) -> FormalPhase:
    return FormalPhase.from_irrational(sym, coeff)


def rotation_1d(sym: Irrational = SQRT2_MINUS_1, label: str = "") -> AffineSystem:
    return AffineSystem.rotation((_phase(sym),), label or f"rotation({sym.label})")


def rotation_2d_first(sym: Irrational = SQRT2_MINUS_1) -> AffineSystem:
    """Rotation of T^2 moving only the first coordinate."""
    return AffineSystem.rotation(
        (_phase(sym), FormalPhase.zero()), f"rotation2d({sym.label},0)"
    )


def rotation_2d_second(sym: Irrational = GOLDEN_MINUS_1) -> AffineSystem:
    return AffineSystem.rotation(
        (FormalPhase.zero(), _phase(sym)), f"rotation2d(0,{sym.label})"
    )


def rotation_2d_ergodic(
    a: Irrational = SQRT2_MINUS_1, b: Irrational = GOLDEN_MINUS_1
) -> AffineSystem:
    """Totally ergodic rotation of T^2 (independent irrational coordinates)."""
    return AffineSystem.rotation((_phase(a), _phase(b)), f"rotation2d({a.label},{b.label})")


def skew_product(sym: Irrational = SQRT2_MINUS_1) -> AffineSystem:
    """T(x, y) = (x + alpha, y + x): zero entropy, correlation measure of
    e^{2 pi i y} flat, atoms at multiples of alpha on the base factor."""
    return AffineSystem(
        ((1, 0), (1, 1)), (_phase(sym), FormalPhase.zero()), f"skew({sym.label})"
    )


def cat_map() -> AffineSystem:
    """Hyperbolic automorphism of T^2: the weakly mixing workhorse."""
    return AffineSystem.automorphism(((2, 1), (1, 1)), "cat")


def counterexample_t() -> AffineSystem:
    """T(x, y) = (x, y + x); no translation at all."""
    return AffineSystem(
        ((1, 0), (1, 1)), (FormalPhase.zero(), FormalPhase.zero()), "cx_T"
    )


def counterexample_s(sym: Irrational = SQRT2_MINUS_1) -> AffineSystem:
    """S(x, y) = (x + 2 alpha, y + x)."""
    return AffineSystem(((1, 0), (1, 1)), (_phase(sym, 2), FormalPhase.zero()), "cx_S")


@dataclass(frozen=True)
class OrbitSpec:
    """A named orbit of character vectors with ground-truth metadata."""

    name: str
    description: str
    factory: Callable[[int], Iterator[CharVector]]
    irrationals: tuple[Irrational, ...]
    expected: str | None = None  # classification ground truth, if labeled
    label: str = ""

    def vectors(self, count: int) -> Iterator[CharVector]:
        return self.factory(count)


def rotation_orbit(sym: Irrational = SQRT2_MINUS_1) -> OrbitSpec:
    system = rotation_2d_first(sym)
    f = CharVector.basis((1, 0))
    return OrbitSpec(
        name="rotation_orbit",
        description="T^n e_(1,0) under the rotation by alpha: eigenfunction orbit,"
        " single atom at alpha",
        factory=lambda count: orbit_vectors(system, f, count),
        irrationals=(sym,),
        expected="singular",
    )


def skew_lebesgue_orbit(sym: Irrational = SQRT2_MINUS_1) -> OrbitSpec:
    system = skew_product(sym)
    f = CharVector.basis((0, 1))
    return OrbitSpec(
        name="skew_lebesgue_orbit",
        description="T^n e_(0,1) under the skew product: the shifted"
        " correlations vanish identically",
        factory=lambda count: orbit_vectors(system, f, count),
        irrationals=(sym,),
        expected="Lebesgue",
    )


def mixed_orbit(sym: Irrational = SQRT2_MINUS_1) -> OrbitSpec:
    rot = rotation_orbit(sym)
    skew = skew_lebesgue_orbit(sym)
    w = 2.0 ** -0.5

    def factory(count: int) -> Iterator[CharVector]:
        for a, b in zip(rot.vectors(count), skew.vectors(count)):
            yield char_combine([(w, a), (w, b)])

    return OrbitSpec(
        name="mixed_orbit",
        description="equal-weight direct sum of the rotation and skew orbits:"
        " half the mass in the atom, half flat",
        factory=factory,
        irrationals=(sym,),
        expected="mixed",
    )


def vdc_square_orbit(sym: Irrational = SQRT2_MINUS_1) -> OrbitSpec:
    """f_n = e^{2 pi i n^2 alpha} e_(1,0): every shifted correlation is a
    quadratic Weyl sum and decays."""
    system = rotation_2d_first(sym)
    f = CharVector.basis((1, 0))

    def factory(count: int) -> Iterator[CharVector]:
        return orbit_vectors(system, f, count, exponents=N_SQUARED.eval)

    return OrbitSpec(
        name="vdc_square_orbit",
        description="rotation pushed along n^2: correlations are quadratic"
        " Weyl sums",
        factory=factory,
        irrationals=(sym,),
        expected=None,
    )


def constant_orbit(dim: int = 2) -> OrbitSpec:
    vec = CharVector.constant(dim)

    def factory(count: int) -> Iterator[CharVector]:
        for _ in range(count):
            yield vec

    return OrbitSpec(
        name="constant_orbit",
        description="f_n = 1 for all n: atom at 0, the canonical singular"
        " weight sequence",
        factory=factory,
        irrationals=(),
        expected="singular",
    )


def singular_weights(sym: Irrational = SQRT2_MINUS_1) -> Callable[[int], complex]:
    """c_n = e^{2 pi i n alpha}: bounded, correlation measure a single atom."""

    def weight(n: int) -> complex:
        return cis(sym.times_mod1(n))

    return weight


def weight_orbit(sym: Irrational = SQRT2_MINUS_1) -> OrbitSpec:
    """The weights wrapped as scalar multiples of the constant character,
    so the classifier can run on them."""
    w = singular_weights(sym)

    def factory(count: int) -> Iterator[CharVector]:
        for n in range(1, count + 1):
            yield CharVector.basis((0,), w(n))

    return OrbitSpec(
        name="weight_orbit",
        description="e^{2 pi i n alpha} as amplitudes of the constant"
        " character on T^1",
        factory=factory,
        irrationals=(sym,),
        expected="singular",
    )


def constant_weight_orbit() -> OrbitSpec:
    """Weights c_n = 1 wrapped like weight_orbit: singular with atom at 0."""

    def factory(count: int) -> Iterator[CharVector]:
        vec = CharVector.basis((0,), 1.0)
        for _ in range(count):
            yield vec

    return OrbitSpec(
        name="constant_weight_orbit",
        description="unit weights as amplitudes of the constant character",
        factory=factory,
        irrationals=(),
        expected="singular",
    )


def labeled_orbits() -> list[OrbitSpec]:
    return [
        rotation_orbit(),
        skew_lebesgue_orbit(),
        mixed_orbit(),
        weight_orbit(),
        constant_orbit(),
        vdc_square_orbit(),
    ]


def zoo_listing() -> list[dict]:
    """For the command line: every built-in system and orbit with labels."""
    systems = [
        ("rotation_alpha", rotation_1d(), "circle rotation by alpha = sqrt(2)-1"),
        ("rotation_beta", rotation_1d(GOLDEN_MINUS_1), "circle rotation by beta = (sqrt(5)-1)/2"),
        ("rotation_2d", rotation_2d_ergodic(), "totally ergodic rotation of T^2"),
        ("skew_product", skew_product(), "T(x,y) = (x+alpha, y+x)"),
        ("cat_map", cat_map(), "hyperbolic automorphism [[2,1],[1,1]]"),
        ("counterexample_T", counterexample_t(), "T(x,y) = (x, y+x)"),
        ("counterexample_S", counterexample_s(), "S(x,y) = (x+2 alpha, y+x)"),
    ]
    out = []
    for name, system, desc in systems:
        out.append(
            {
                "kind": "system",
                "name": name,
                "description": desc,
                "dim": system.dim,
            }
        )
    for orbit in labeled_orbits():
        out.append(
            {
                "kind": "orbit",
                "name": orbit.name,
                "description": orbit.description,
                "expected": orbit.expected,
            }
        )
    return out
