"""Correlation profiles, averaged norms, product averages, and measures
of box intersections, each checked against an independent brute-force
oracle at small size."""

from fractions import Fraction

import numpy as np
import pytest

from vdclab.correlate import (
    ResolutionError,
    Schedule,
    averaged_norm,
    box_measure,
    cesaro_correlation,
    inner_product_average,
    interval_measure_exact,
    product_average,
    profile_psd_ok,
    toeplitz_min_eig,
)
from vdclab.fixedpoint import FormalPhase, cis
from vdclab.hilbert import CharVector, char_combine, char_inner
from vdclab.sequences import PolynomialSequence
from vdclab.systems import AffineSystem
from vdclab.zoo import (
    GOLDEN_MINUS_1,
    N_SQUARED,
    SQRT2_MINUS_1,
    TRIANGULAR,
    constant_orbit,
    counterexample_s,
    counterexample_t,
    mixed_orbit,
    rotation_2d_first,
    rotation_2d_second,
    rotation_orbit,
    skew_lebesgue_orbit,
    singular_weights,
    vdc_square_orbit,
)

ALPHA = SQRT2_MINUS_1
SMALL = Schedule((200, 400, 800))


def oracle_cesaro(vectors, lags, big_n):
    """Direct double loop over <f_{n+h}, f_n>."""
    out = []
    for h in range(lags + 1):
        total = 0j
        for n in range(big_n):
            total += char_inner(vectors[n + h], vectors[n])
        out.append(total / big_n)
    return np.array(out)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule((10, 20))
    with pytest.raises(ValueError):
        Schedule((10, 10, 20))
    s = Schedule.geometric(100_000)
    assert s.cutoffs[0] == 1000 and s.top == 100_000


def test_rotation_profile_exact_phases():
    prof = cesaro_correlation(rotation_orbit(), lags=16, schedule=SMALL)
    for h in range(17):
        assert abs(prof.gamma()[h] - cis(ALPHA.times_mod1(h))) < 1e-13
    assert prof.stability < 1e-13


def test_skew_profile_exact_zeros():
    prof = cesaro_correlation(skew_lebesgue_orbit(), lags=16, schedule=SMALL)
    assert prof.gamma()[0] == 1.0
    assert np.all(prof.gamma()[1:] == 0.0)


def test_constant_profile():
    prof = cesaro_correlation(constant_orbit(), lags=8, schedule=SMALL)
    assert np.allclose(prof.gamma(), 1.0, atol=0)


def test_profile_matches_brute_force_oracle():
    for orbit in (rotation_orbit(), skew_lebesgue_orbit(), mixed_orbit(), vdc_square_orbit()):
        vectors = list(orbit.vectors(216))
        sched = Schedule((50, 100, 200))
        prof = cesaro_correlation(orbit, lags=16, schedule=sched)
        for big_n in sched:
            expected = oracle_cesaro(vectors, 16, big_n)
            assert np.max(np.abs(prof.gammas[big_n] - expected)) < 1e-12


def test_profile_cauchy_schwarz_bound():
    for orbit in (rotation_orbit(), mixed_orbit(), vdc_square_orbit()):
        prof = cesaro_correlation(orbit, lags=32, schedule=SMALL)
        assert np.max(np.abs(prof.gamma())) <= prof.sup_sq + 1e-12


def test_profile_orbit_too_short():
    vecs = [CharVector.basis((1,)) for _ in range(10)]
    with pytest.raises(ValueError, match="orbit ended"):
        cesaro_correlation(vecs, lags=4, schedule=Schedule((4, 6, 8)))


def test_averaged_norm_weyl_reduction():
    # weights 1 on the n^2 rotation orbit: the norm is a quadratic Weyl sum
    from vdclab.sequences import weyl_sum

    sched = Schedule((500, 1000, 2000))
    norms = averaged_norm(vdc_square_orbit(), None, sched)
    for big_n, v in zip(sched, norms):
        expected = abs(weyl_sum(N_SQUARED, ALPHA, big_n))
        assert v == pytest.approx(expected, abs=1e-12)


def test_averaged_norm_constant_orbit():
    assert averaged_norm(constant_orbit(), None, SMALL) == pytest.approx([1, 1, 1])


def test_averaged_norm_sign_flip_constant():
    # c_n = (-1)^n against f_n = (-1)^n e_1: the product is constant
    def orbit(count):
        for n in range(1, count + 1):
            yield CharVector.basis((1,), (-1.0) ** n)

    norms = averaged_norm(orbit, (float((-1) ** n) for n in range(1, 801)), SMALL)
    assert norms == pytest.approx([1, 1, 1])


def test_averaged_norm_linearity():
    # weights c with orbit f equals weights 1 with orbit c_n f_n, exactly
    w = singular_weights()
    direct = averaged_norm(skew_lebesgue_orbit(), (w(n) for n in range(1, 801)), SMALL)

    def scaled(count):
        for n, vec in enumerate(skew_lebesgue_orbit().vectors(count), start=1):
            yield char_combine([(w(n), vec)])

    folded = averaged_norm(scaled, None, SMALL)
    assert direct == folded


def test_product_average_identity_exponent_zero():
    f = char_combine([(1, CharVector.basis((1, 0))), (2, CharVector.basis((0, 1)))])
    zero_seq = PolynomialSequence((0,))
    avg = product_average([(rotation_2d_first(), zero_seq, f)], 50)
    assert set(avg.coeffs) == set(f.coeffs)
    for k, v in f.coeffs.items():
        assert abs(avg.coeffs[k] - v) < 1e-12


def test_product_average_counterexample_is_one():
    t, s = counterexample_t(), counterexample_s()
    factors = [
        (t, None, CharVector.basis((1, -1))),
        (s, None, CharVector.basis((0, 1))),
        (s, TRIANGULAR, CharVector.basis((-1, 0))),
    ]
    one = CharVector.constant(2)
    for big_n in (10, 100, 1000):
        avg = product_average(factors, big_n)
        assert (avg - one).norm() < 1e-12


def test_product_average_commuting_rotations_weyl_oracle():
    # T^n e_(1,0) * S^{n^2} e_(0,1) reduces to the Weyl sum of n a + n^2 b
    from vdclab.fixedpoint import SCALE

    factors = [
        (rotation_2d_first(), None, CharVector.basis((1, 0))),
        (rotation_2d_second(), N_SQUARED, CharVector.basis((0, 1))),
    ]
    big_n = 2000
    avg = product_average(factors, big_n)
    total = 0j
    for n in range(1, big_n + 1):
        t = ((n * ALPHA.fix + n * n * GOLDEN_MINUS_1.fix) % SCALE) / SCALE
        total += cis(t)
    assert avg.norm() == pytest.approx(abs(total) / big_n, abs=1e-12)


def test_product_average_multi_term_matches_pushforward_sum():
    from vdclab.systems import pushforward

    t = counterexample_t()
    f = char_combine([(1, CharVector.basis((1, 0))), (1j, CharVector.basis((0, 1)))])
    big_n = 37
    avg = product_average([(t, None, f)], big_n)
    acc = {}
    for n in range(1, big_n + 1):
        for k, v in pushforward(t, f, n).coeffs.items():
            acc[k] = acc.get(k, 0j) + v
    for k, v in acc.items():
        assert abs(avg.coeffs[k] - v / big_n) < 1e-12


def test_box_measure_simple_square():
    ident = AffineSystem.rotation((FormalPhase.zero(), FormalPhase.zero()))
    box = ((Fraction(0), Fraction(1, 2)), (Fraction(0), Fraction(1, 2)))
    gm = box_measure([(ident, 0, (box,))], 64)
    assert gm.value == pytest.approx(0.25, abs=2 / 64)
    assert gm.error_bound == pytest.approx(4 / 64)


def test_box_measure_disjoint_translates_exact_zero():
    half = FormalPhase.from_rational(Fraction(1, 2))
    shift = AffineSystem.rotation((half, half))
    box = ((Fraction(0), Fraction(1, 4)), (Fraction(0), Fraction(1, 4)))
    gm = box_measure([(shift, 0, (box,)), (shift, 1, (box,))], 40)
    assert gm.count == 0


def test_box_measure_resolution_error():
    ident = AffineSystem.rotation((FormalPhase.zero(),))
    box = ((Fraction(0), Fraction(1, 2)),)
    with pytest.raises(ResolutionError, match="need at least"):
        box_measure([(ident, 0, (box,))], 10, max_error=0.01)


def test_box_measure_agrees_with_exact_intervals():
    t = rotation_2d_first()
    s = rotation_2d_second()
    box = ((Fraction(0), Fraction(1, 2)), (Fraction(0), Fraction(1, 2)))
    for n, k in [(3, 9), (17, 289), (88, 7744)]:
        constraints = [(t, 0, (box,)), (t, n, (box,)), (s, k, (box,))]
        gm = box_measure(constraints, 400)
        exact = interval_measure_exact([(t, 0, box), (t, n, box), (s, k, box)])
        assert abs(gm.value - float(exact)) <= gm.error_bound


def test_interval_measure_examples():
    # [0, 1/2) against itself shifted by 0.3 -> overlap 0.2
    rot = AffineSystem.rotation((FormalPhase.from_rational(Fraction(3, 10)),))
    box = ((Fraction(0), Fraction(1, 2)),)
    val = interval_measure_exact([(rot, 0, box), (rot, 1, box)])
    assert val == Fraction(1, 5)
    # shift 0: overlap 1/2
    val = interval_measure_exact([(rot, 0, box), (rot, 0, box)])
    assert val == Fraction(1, 2)


def test_interval_measure_wraparound_grid_oracle():
    # shift 0.75 wraps: overlap 1/4; cross-check against a fine grid count
    rot = AffineSystem.rotation((FormalPhase.from_rational(Fraction(3, 4)),))
    box = ((Fraction(0), Fraction(1, 2)),)
    val = interval_measure_exact([(rot, 0, box), (rot, 1, box)])
    assert val == Fraction(1, 4)
    m = 10_000
    count = sum(
        1
        for i in range(m)
        if ((2 * i + 1) / (2 * m)) % 1 < 0.5 and ((2 * i + 1) / (2 * m) + 0.75) % 1 < 0.5
    )
    assert abs(float(val) - count / m) < 1e-3


def test_interval_measure_rejects_non_rotation():
    from vdclab.zoo import skew_product

    box = ((Fraction(0), Fraction(1, 2)), (Fraction(0), Fraction(1, 2)))
    with pytest.raises(ValueError, match="rotations only"):
        interval_measure_exact([(skew_product(), 1, box)])


def test_profile_psd_and_toeplitz():
    for orbit in (rotation_orbit(), skew_lebesgue_orbit(), mixed_orbit()):
        prof = cesaro_correlation(orbit, lags=64, schedule=SMALL)
        assert profile_psd_ok(prof)
        assert toeplitz_min_eig(prof.gamma()) >= -1e-10


def test_hermitian_extension():
    prof = cesaro_correlation(rotation_orbit(), lags=8, schedule=SMALL)
    ext = prof.extended()
    g = prof.gamma()
    assert np.allclose(ext[8 + 3], g[3]) and np.allclose(ext[8 - 3], np.conj(g[3]))


def test_determinism_bit_identical():
    a = cesaro_correlation(mixed_orbit(), lags=32, schedule=SMALL)
    b = cesaro_correlation(mixed_orbit(), lags=32, schedule=SMALL)
    for big_n in SMALL:
        assert np.array_equal(a.gammas[big_n], b.gammas[big_n])
    na = averaged_norm(vdc_square_orbit(), None, SMALL)
    nb = averaged_norm(vdc_square_orbit(), None, SMALL)
    assert na == nb


def test_inner_product_average_oracle():
    sched = Schedule((50, 100, 150))
    vals = inner_product_average(mixed_orbit(), rotation_orbit(), sched)
    fs = list(mixed_orbit().vectors(150))
    gs = list(rotation_orbit().vectors(150))
    for big_n, got in zip(sched, vals):
        expected = sum(char_inner(f, g) for f, g in zip(fs[:big_n], gs[:big_n])) / big_n
        assert abs(got - expected) < 1e-12
