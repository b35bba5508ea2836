"""Spectral estimation: Fejer densities, atom scans, Wiener statistics,
l2 tails, classification, and the polarization identity."""

import math

import numpy as np
import pytest

from vdclab.correlate import CorrelationProfile, Schedule, cesaro_correlation
from vdclab.fixedpoint import cis
from vdclab.spectral import (
    DEFAULT_THRESHOLDS,
    Thresholds,
    UnstableProfileError,
    atom_scan,
    classify,
    cross_spectrum_polarization,
    default_candidates,
    fejer_density,
    l2_tail,
    wiener_statistic,
)
from vdclab.hilbert import char_combine
from vdclab.zoo import (
    SQRT2_MINUS_1,
    mixed_orbit,
    rotation_orbit,
    skew_lebesgue_orbit,
    weight_orbit,
)

ALPHA = SQRT2_MINUS_1
SMALL = Schedule((200, 400, 800))


def synthetic_profile(gamma, stability=0.0, irrationals=(ALPHA,)):
    """Wrap a coefficient array as a stable profile (test helper)."""
    sched = Schedule((1, 2, 3))
    g = np.asarray(gamma, dtype=np.complex128)
    return CorrelationProfile(
        schedule=sched,
        lags=len(g) - 1,
        gammas={1: g, 2: g, 3: g},
        stability=stability,
        sup_sq=float(np.max(np.abs(g))) if len(g) else 0.0,
        irrationals=irrationals,
    )


def test_fejer_density_delta_profile_is_flat():
    prof = synthetic_profile([1.0] + [0.0] * 64)
    dens = fejer_density(prof, 256)
    assert np.allclose(dens, 1.0, atol=1e-12)


def test_fejer_density_zero_profile():
    prof = synthetic_profile([0.0] * 33)
    dens = fejer_density(prof, 128)
    assert np.allclose(dens, 0.0, atol=1e-15)


def test_fejer_density_kernel_closed_form():
    # gamma(h) = e^{2 pi i h a}: the density is the Fejer kernel centered
    # at a, peak about H+1 at the nearest grid point
    lags = 64
    g = np.array([cis(ALPHA.times_mod1(h)) for h in range(lags + 1)])
    prof = synthetic_profile(g)
    grid = 512
    dens = fejer_density(prof, grid)
    a = float(ALPHA)

    def kernel(u):
        s = math.sin(math.pi * u)
        if abs(s) < 1e-15:
            return lags + 1.0
        return (math.sin(math.pi * (lags + 1) * u) / s) ** 2 / (lags + 1)

    for j in range(0, grid, 7):
        assert dens[j] == pytest.approx(kernel(j / grid - a), abs=1e-8)
    peak = int(np.argmax(dens))
    assert abs(peak / grid - a) < 1.0 / grid
    assert dens[peak] == pytest.approx(lags + 1, rel=0.05)


def test_fejer_mass_conservation_and_positivity():
    for orbit in (rotation_orbit(), skew_lebesgue_orbit(), mixed_orbit()):
        prof = cesaro_correlation(orbit, lags=128, schedule=SMALL)
        dens = fejer_density(prof, 512)
        assert dens.min() >= -1e-8
        assert abs(dens.mean() - prof.gamma0()) < 1e-10


def test_fejer_rejects_unstable():
    prof = synthetic_profile([1.0, 0.5], stability=10.0)
    with pytest.raises(UnstableProfileError):
        fejer_density(prof, 64)


def test_atom_scan_exact_mass_at_atom():
    lags = 256
    g = np.array([cis(ALPHA.times_mod1(h)) for h in range(lags + 1)])
    prof = synthetic_profile(g)
    atoms = atom_scan(prof)
    at_alpha = [a for a in atoms if a.label == "1*alpha"]
    assert len(at_alpha) == 1
    assert at_alpha[0].mass == pytest.approx(1.0, abs=1e-12)
    assert abs(at_alpha[0].imag_residue) < 1e-12
    # all other candidates follow the geometric-sum bound 1/(2H dist)
    for atom in atoms:
        if atom.label == "1*alpha":
            continue
        dist = min(abs(atom.location - float(ALPHA)), 1 - abs(atom.location - float(ALPHA)))
        assert abs(atom.mass) <= 1 / (2 * lags * dist) + 1e-9


def test_atom_scan_flat_profile_masses_small():
    lags = 128
    prof = synthetic_profile([1.0] + [0.0] * lags)
    atoms = atom_scan(prof)
    for atom in atoms:
        assert abs(atom.mass) <= 1.0 / lags + 1e-12


def test_wiener_examples():
    lags = 64
    g = np.array([cis(ALPHA.times_mod1(h)) for h in range(lags + 1)])
    assert wiener_statistic(synthetic_profile(g)) == pytest.approx(1.0)
    flat = synthetic_profile([1.0] + [0.0] * lags)
    assert wiener_statistic(flat) == pytest.approx(1.0 / (2 * lags + 1))


def test_wiener_two_atoms_half():
    # gamma(h) = (1 + e^{2 pi i h a})/2: atoms of mass 1/2 at 0 and a,
    # total squared atomic mass 1/2; direct average at H = 4096
    lags = 4096
    g = np.array([0.5 * (1 + cis(ALPHA.times_mod1(h))) for h in range(lags + 1)])
    prof = synthetic_profile(g)
    assert wiener_statistic(prof) == pytest.approx(0.5, abs=0.02)


def test_l2_tail_examples():
    lags = 64
    zero = synthetic_profile([1.0] + [0.0] * lags)
    tail = l2_tail(zero)
    assert np.all(tail.partial == 0.0)
    assert tail.slope == float("-inf")

    const = synthetic_profile([cis(ALPHA.times_mod1(h)) for h in range(lags + 1)])
    tail = l2_tail(const)
    assert tail.partial[-1] == pytest.approx(lags)  # divergent partial sums
    assert tail.top_octave_increment == pytest.approx(lags - lags // 2)

    lags = 512
    recip = synthetic_profile([1.0] + [1.0 / h for h in range(1, lags + 1)])
    tail = l2_tail(recip)
    assert tail.partial[-1] == pytest.approx(math.pi**2 / 6, abs=2e-3)
    assert tail.slope == pytest.approx(-2.0, abs=1e-6)


def test_classification_zoo_small():
    # lag budget 1024: enough that spurious candidate masses fall below
    # the atom floor (full-size margins are the acceptance suite's job)
    sched = Schedule((2048, 3072, 4096))
    for orbit, expected in [
        (rotation_orbit(), "singular"),
        (skew_lebesgue_orbit(), "Lebesgue"),
        (mixed_orbit(), "mixed"),
        (weight_orbit(), "singular"),
    ]:
        prof = cesaro_correlation(orbit, lags=1024, schedule=sched)
        est = classify(prof)
        assert est.tag == expected, (orbit.name, est.tag, est.reasons)


def test_classification_mixed_atom_mass():
    prof = cesaro_correlation(mixed_orbit(), lags=1024, schedule=Schedule((2048, 3072, 4096)))
    est = classify(prof)
    assert len(est.atoms) == 1
    assert est.atoms[0].mass == pytest.approx(0.5, abs=0.05)


def test_classification_abstains_on_unstable():
    prof = synthetic_profile([1.0, 0.3, 0.2], stability=1.0)
    est = classify(prof)
    assert est.tag == "inconclusive"
    assert "unstable" in est.reasons[0]


def test_classification_thresholds_recorded():
    prof = cesaro_correlation(rotation_orbit(), lags=256, schedule=SMALL)
    thresholds = Thresholds(lattice_multiples=4)
    est = classify(prof, thresholds)
    assert est.thresholds == thresholds
    assert est.to_json_dict()["thresholds"]["lattice_multiples"] == 4


def test_default_candidates_cover_lattice_and_rationals():
    cands = default_candidates((ALPHA,), DEFAULT_THRESHOLDS)
    labels = {c.label for c in cands}
    assert "1*alpha" in labels and "-1*alpha" in labels and "0/1" in labels and "1/2" in labels
    values = [c.value for c in cands]
    assert len(values) == len(set(values))  # deduplicated


def test_polarization_identity_self():
    cs = cross_spectrum_polarization(rotation_orbit(), rotation_orbit(), 16, SMALL)
    prof = cesaro_correlation(rotation_orbit(), lags=16, schedule=SMALL)
    assert np.max(np.abs(cs.direct - prof.gamma())) < 1e-12
    assert cs.max_discrepancy < 1e-10


def test_polarization_orthogonal_supports():
    cs = cross_spectrum_polarization(skew_lebesgue_orbit(), rotation_orbit(), 16, SMALL)
    assert np.max(np.abs(cs.direct)) == 0.0
    assert cs.max_discrepancy < 1e-10


def test_polarization_sesquilinear_scaling():
    def doubled(count):
        for vec in rotation_orbit().vectors(count):
            yield char_combine([(2.0, vec)])

    cs = cross_spectrum_polarization(doubled, rotation_orbit(), 12, SMALL)
    for h in range(13):
        assert cs.direct[h] == pytest.approx(2.0 * cis(ALPHA.times_mod1(h)), abs=1e-12)
    assert cs.max_discrepancy < 1e-9


def test_wiener_dominates_squared_atom_masses():
    # at the full lag budget the averaged squared coefficients dominate
    # the summed squared atom masses up to 0.05
    sched = Schedule((4096, 8192, 16384))
    for orbit in (rotation_orbit(), skew_lebesgue_orbit(), mixed_orbit()):
        prof = cesaro_correlation(orbit, lags=4096, schedule=sched)
        atoms = atom_scan(prof)
        atomic_energy = sum(a.mass ** 2 for a in atoms if a.mass > 0.01)
        assert wiener_statistic(prof) >= atomic_energy - 0.05
