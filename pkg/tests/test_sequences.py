"""Integer sequences, Weyl sums, discrepancy, and the visit sets."""

import math
import random
from fractions import Fraction

import pytest

from vdclab.fixedpoint import SCALE, Irrational
from vdclab.sequences import (
    DifferenceSequence,
    FloorAmbiguityError,
    FloorPowerSequence,
    PolynomialSequence,
    RkSpec,
    TableSequence,
    diff_profile,
    polynomials_independent,
    rk_enumerate,
    seq_eval,
    star_discrepancy,
    weyl_sum,
)
from vdclab.zoo import GOLDEN_MINUS_1, SQRT2_MINUS_1

ALPHA = SQRT2_MINUS_1


def _poly(*power_coeffs):
    return PolynomialSequence.from_power_coefficients(list(power_coeffs))


def test_polynomial_eval_examples():
    assert seq_eval(_poly(0, 0, 1), 7) == 49
    assert seq_eval(_poly(0, Fraction(-1, 2), Fraction(1, 2)), 5) == 10  # n(n-1)/2


def test_polynomial_must_be_integer_valued():
    with pytest.raises(ValueError, match="integer-valued"):
        PolynomialSequence.from_power_coefficients([0, Fraction(1, 2)])


def test_polynomial_binomial_vs_rational_eval():
    # binomial-basis evaluation agrees with direct rational evaluation
    rng = random.Random(19)
    coeffs = [Fraction(0), Fraction(-1, 2), Fraction(0), Fraction(1, 2)]  # (n^3 - n)/2
    p = PolynomialSequence.from_power_coefficients(coeffs)
    for _ in range(10_000):
        n = rng.randint(1, 10**9)
        direct = sum(c * n**i for i, c in enumerate(coeffs))
        assert direct.denominator == 1
        assert p.eval(n) == direct


def test_diff_profile_closed_forms():
    n2 = _poly(0, 0, 1)
    d1 = diff_profile(n2, 1)
    assert [d1.eval(n) for n in (1, 2, 3)] == [3, 5, 7]  # 2n+1
    d3 = diff_profile(n2, 3)
    assert [d3.eval(n) for n in (1, 2, 10)] == [15, 21, 69]  # 6n+9
    assert d3.degree == 1


def test_diff_profile_table():
    t = TableSequence([1, 4, 9, 16])
    d = diff_profile(t, 2)
    assert [d.eval(1), d.eval(2)] == [8, 12]
    with pytest.raises(ValueError):
        d.eval(3)


def test_floor_power_examples():
    fp = FloorPowerSequence.from_fraction(Fraction(3, 2))
    assert fp.eval(4) == 8
    assert fp.eval(2) == 2  # floor(2.828...)
    assert [fp.eval(n) for n in (1, 9, 10)] == [1, 27, 31]


def test_floor_power_large_rational_exponent_exact():
    fp = FloorPowerSequence.from_fraction(Fraction(5, 2))
    for n in (4, 9, 100):
        assert fp.eval(n) == math.isqrt(n**5)


def test_floor_power_irrational_exponent():
    # c = sqrt(2) as a 128-bit truncation; cross-check against a direct
    # high-precision evaluation
    c_fix = math.isqrt(2 << (2 * 128))
    fp = FloorPowerSequence(c_fix)
    from decimal import Decimal, localcontext

    with localcontext() as ctx:
        ctx.prec = 80
        c = Decimal(c_fix) / Decimal(1 << 128)
        for n in (2, 3, 10, 97):
            expected = int((Decimal(n).ln() * c).exp())
            assert fp.eval(n) == expected


def test_floor_power_ambiguity_flagged():
    # c = the 128-bit truncation of log2(5): 2^c is within 2^-64 of 5,
    # so the floor cannot be certified and must not be silently rounded
    from decimal import Decimal, localcontext

    with localcontext() as ctx:
        ctx.prec = 60
        c_fix = int(Decimal(5).ln() / Decimal(2).ln() * (1 << 128))
    fp = FloorPowerSequence(c_fix)
    with pytest.raises(FloorAmbiguityError):
        fp.eval(2)
    assert fp.eval(3) > 0  # away from integers the floor is certified


def test_difference_sequence_lazy():
    fp = FloorPowerSequence.from_fraction(Fraction(3, 2))
    d = DifferenceSequence(fp, 2)
    assert d.eval(4) == fp.eval(6) - fp.eval(4)


def test_weyl_sum_at_zero_frequency_is_one():
    x = Irrational(1, "tiny")  # value 2^-128: k*x mod 1 stays 0 for small k
    assert weyl_sum(_poly(0, 1), ALPHA, 1) == pytest.approx(
        complex(math.cos(2 * math.pi * float(ALPHA)), math.sin(2 * math.pi * float(ALPHA))),
        abs=1e-12,
    )
    # x = 0 is rational; emulate with the identity-zero sequence instead
    zero_seq = _poly(0)
    assert weyl_sum(zero_seq, ALPHA, 57) == pytest.approx(1.0, abs=0)


def test_weyl_sum_alternating_exact_zero():
    half = Irrational(1 << 127, "half")
    assert weyl_sum(_poly(0, 1), half, 100) == 0j  # exact cancellation


def test_weyl_sum_geometric_oracle():
    # k_n = n: closed form |sum| = |sin(pi N x)| / (N |sin(pi x)|)
    lin = _poly(0, 1)
    for big_n in (100, 1000):
        got = abs(weyl_sum(lin, ALPHA, big_n))
        x = float(ALPHA)
        expected = abs(math.sin(math.pi * big_n * x)) / (big_n * abs(math.sin(math.pi * x)))
        assert got == pytest.approx(expected, abs=1e-9)
        assert got <= 1 / (2 * big_n * min(x, 1 - x)) + 1e-12


def test_weyl_sum_squares_small():
    v = abs(weyl_sum(_poly(0, 0, 1), ALPHA, 10_000))
    assert v < 0.02


def test_star_discrepancy_formula_examples():
    # single point at 1/2: D* = 1/2
    t = TableSequence([1])
    half = Irrational(1 << 127, "half")
    assert star_discrepancy(t, half, 1) == pytest.approx(0.5)
    # all points at 0 (k_n even, x = 1/2): D* = 1
    t2 = TableSequence([2, 4, 6, 8])
    assert star_discrepancy(t2, half, 4) == pytest.approx(1.0)


def test_star_discrepancy_golden_low():
    d = star_discrepancy(_poly(0, 1), GOLDEN_MINUS_1, 10_000)
    assert d < 0.01


def test_star_discrepancy_brute_force_oracle():
    # compare against the definition sup_t |#{u_n <= t}/N - t| over a fine t-grid
    t = TableSequence([3, 1, 4, 1, 5, 9, 2, 6])
    big_n = 8
    d = star_discrepancy(t, ALPHA, big_n)
    pts = sorted(((t.eval(n) * ALPHA.fix) % SCALE) / SCALE for n in range(1, big_n + 1))
    worst = 0.0
    for i in range(20_001):
        x = i / 20_000
        count = sum(1 for u in pts if u < x or u == x)
        worst = max(worst, abs(count / big_n - x))
    assert d == pytest.approx(worst, abs=1e-3)


def test_rk_full_window():
    spec = RkSpec(2, ALPHA, (Fraction(0), Fraction(1)))
    res = rk_enumerate(spec, 50)
    assert res.members == tuple(range(1, 51))


def test_rk_membership_exact():
    spec = RkSpec(2, ALPHA)
    res = rk_enumerate(spec, 100)
    # oracle: direct check with exact reduction
    expected = tuple(
        n for n in range(1, 101)
        if Fraction((n * n * ALPHA.fix) % SCALE, SCALE) >= Fraction(1, 4)
        and Fraction((n * n * ALPHA.fix) % SCALE, SCALE) <= Fraction(3, 4)
    )
    assert res.members == expected
    assert not res.boundary_hits


def test_rk_density_near_half():
    res = rk_enumerate(RkSpec(2, ALPHA), 100)
    assert abs(len(res.members) / 100 - 0.5) <= 0.1


def test_rk_boundary_flagged():
    # alpha = 1/4 as a fixed-point value: n = 1 hits the window edge exactly
    quarter = Irrational(1 << 126, "quarter")
    res = rk_enumerate(RkSpec(2, quarter), 4)
    assert 1 in res.members
    assert 1 in res.boundary_hits


def test_rk_window_validation():
    with pytest.raises(ValueError):
        RkSpec(2, ALPHA, (Fraction(-1, 4), Fraction(1, 2)))
    with pytest.raises(ValueError):
        RkSpec(1, ALPHA)


def test_polynomials_independent():
    p2, p3, p5 = _poly(0, 0, 1), _poly(0, 0, 0, 1), _poly(0, 0, 0, 0, 0, 1)
    assert polynomials_independent([p2, p3, p5])
    # n^2 and 2n^2 + 1 are dependent
    assert not polynomials_independent([p2, _poly(1, 0, 2)])


def test_shifted_family_independent_for_x2x3x5():
    p2, p3, p5 = _poly(0, 0, 1), _poly(0, 0, 0, 1), _poly(0, 0, 0, 0, 0, 1)
    for h in range(1, 33):
        family = [p.shift(h) - p2 for p in (p2, p3, p5)]
        family += [p3 - p2, p5 - p2]
        assert polynomials_independent(family)


def test_difference_weyl_sums_vanish():
    # |weyl_sum(diff(n^2, h), x, 1e5)| < 0.02 for h = 1..8 and both
    # pinned irrationals
    n2 = _poly(0, 0, 1)
    for x in (ALPHA, GOLDEN_MINUS_1):
        for h in range(1, 9):
            v = abs(weyl_sum(n2.diff(h), x, 100_000))
            assert v < 0.02, (x.label, h, v)


def test_rk_density_tracks_window_length():
    # |#R_k/N - |window|| <= 3 D*_N of the driving sequence n^2 alpha
    n2 = _poly(0, 0, 1)
    for big_n in (200, 500):
        res = rk_enumerate(RkSpec(2, ALPHA), big_n)
        disc = star_discrepancy(n2, ALPHA, big_n)
        assert abs(len(res.members) / big_n - 0.5) <= 3 * disc
