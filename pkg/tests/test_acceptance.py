"""Acceptance suite: every headline claim at its stated tolerance.

Each criterion prints one PASS/FAIL line (visible with -v / -s or in the
captured output); tolerances are pinned here, not configurable.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from vdclab.correlate import Schedule, cesaro_correlation, profile_psd_ok
from vdclab.fixedpoint import cis
from vdclab.hilbert import CharVector
from vdclab.sequences import PolynomialSequence
from vdclab.spectral import classify, cross_spectrum_polarization, fejer_density
from vdclab.systems import AffineSystem, system_power, vec_mat
from vdclab.experiments import (
    run_counterexample,
    run_nf,
    run_orthogonality,
    run_recurrence,
    run_rk,
    run_t1t2,
    run_weighted_vdc,
)
from vdclab.zoo import (
    GOLDEN_MINUS_1,
    N_SQUARED,
    SQRT2_MINUS_1,
    cat_map,
    mixed_orbit,
    rotation_1d,
    rotation_2d_first,
    rotation_2d_second,
    rotation_orbit,
    skew_lebesgue_orbit,
    weight_orbit,
)

CLASSIFY_LAGS = 4096
CLASSIFY_SCHEDULE = Schedule((4096, 8192, 16384))


def _report(criterion: str, ok: bool, detail: str = ""):
    line = f"{'PASS' if ok else 'FAIL'}: {criterion}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def zoo_profiles():
    out = {}
    for orbit in (rotation_orbit(), skew_lebesgue_orbit(), mixed_orbit(), weight_orbit()):
        out[orbit.name] = cesaro_correlation(
            orbit, lags=CLASSIFY_LAGS, schedule=CLASSIFY_SCHEDULE
        )
    return out


def test_criterion_1_counterexample_exactness():
    t0 = time.perf_counter()
    rep = run_counterexample(SQRT2_MINUS_1, Schedule.geometric(100_000), tol=1e-9)
    elapsed = time.perf_counter() - t0
    deviations = [r["value"] for r in rep.rows if r["metric"] == "deviation_from_one"]
    ok = (
        rep.verdict == "pass"
        and all(d < 1e-9 for d in deviations)
        and len(deviations) == len(Schedule.geometric(100_000).cutoffs)
        and elapsed < 10.0
    )
    _report(
        "counterexample product average equals 1 to 1e-9 at every cutoff",
        ok,
        f"max deviation {max(deviations):.3e}, {elapsed:.1f} s",
    )


def test_criterion_2_classification_zoo(zoo_profiles):
    t0 = time.perf_counter()
    rot = classify(zoo_profiles["rotation_orbit"])
    skw = classify(zoo_profiles["skew_lebesgue_orbit"])
    mix = classify(zoo_profiles["mixed_orbit"])
    elapsed = time.perf_counter() - t0

    alpha = float(SQRT2_MINUS_1)
    rot_atom = next((a for a in rot.atoms if abs(a.location - alpha) < 1e-9), None)
    ok_rot = rot.tag == "singular" and rot_atom is not None and abs(rot_atom.mass - 1) <= 0.05
    skew_gamma = zoo_profiles["skew_lebesgue_orbit"].gamma()
    ok_skew = (
        skw.tag == "Lebesgue"
        and all(abs(skew_gamma[h]) < 1e-12 for h in range(1, 65))
        and np.all(skew_gamma[1:] == 0.0)
    )
    mix_atom = next((a for a in mix.atoms if abs(a.location - alpha) < 1e-9), None)
    ok_mix = mix.tag == "mixed" and mix_atom is not None and abs(mix_atom.mass - 0.5) <= 0.05
    ok = ok_rot and ok_skew and ok_mix and elapsed < 60.0
    _report(
        "classification zoo: rotation singular (atom 1 +- 0.05), skew Lebesgue "
        "(gamma exactly 0), direct sum mixed (atom 0.5 +- 0.05)",
        ok,
        f"tags {rot.tag}/{skw.tag}/{mix.tag}, masses "
        f"{rot_atom.mass if rot_atom else float('nan'):.4f}/"
        f"{mix_atom.mass if mix_atom else float('nan'):.4f}, {elapsed:.1f} s classify",
    )


def test_criterion_3_weighted_averaging():
    t0 = time.perf_counter()
    rep = run_weighted_vdc(
        skew_lebesgue_orbit(), weight_orbit(), Schedule.geometric(100_000), tol=0.05
    )
    elapsed = time.perf_counter() - t0
    norms = {
        r["N"]: r["value"] for r in rep.rows if r["metric"] == "weighted_norm"
    }
    top3 = [norms[n] for n in Schedule.geometric(100_000).top_k(3)]
    ok = (
        rep.verdict == "pass"
        and norms[100_000] < 0.05
        and top3[0] > top3[1] > top3[2]
        and elapsed < 60.0
    )
    _report(
        "singular weights against the Lebesgue orbit: norm < 0.05 at N = 1e5, "
        "decreasing across the top three cutoffs",
        ok,
        f"top norm {norms[100_000]:.3e}, {elapsed:.1f} s",
    )


def test_criterion_4_orthogonality():
    rep = run_orthogonality(
        skew_lebesgue_orbit(), rotation_orbit(), Schedule.geometric(100_000), tol=0.02
    )
    value = [r["value"] for r in rep.rows if r["metric"] == "cross_correlation_abs"][-1]
    ok = rep.verdict == "pass" and value < 0.02
    _report(
        "Lebesgue-vs-rotation mean inner product < 0.02 at N = 1e5",
        ok,
        f"value {value:.3e}",
    )


def test_criterion_5_product_average_and_recurrence():
    t0 = time.perf_counter()
    sched = Schedule.geometric(100_000)
    rep_nf = run_nf(
        rotation_2d_first(SQRT2_MINUS_1),
        rotation_2d_second(GOLDEN_MINUS_1),
        N_SQUARED,
        CharVector.basis((1, 0)),
        CharVector.basis((0, 1)),
        sched,
        tol=0.05,
    )
    d_top = [r["value"] for r in rep_nf.rows if r["metric"] == "product_average_distance"][-1]
    box = ((Fraction(0), Fraction(1, 2)), (Fraction(0), Fraction(1, 2)))
    rep_rec = run_recurrence(
        rotation_2d_first(SQRT2_MINUS_1),
        rotation_2d_second(GOLDEN_MINUS_1),
        N_SQUARED,
        box,
        sched,
    )
    avg_top = [r["value"] for r in rep_rec.rows if r["metric"] == "recurrence_average"][-1]
    elapsed = time.perf_counter() - t0
    ok = (
        rep_nf.verdict == "pass"
        and d_top < 0.05
        and rep_rec.verdict == "pass"
        and abs(avg_top - 1 / 16) < 0.01
        and avg_top >= 1 / 64
        and elapsed < 120.0
    )
    _report(
        "rotation product average: D_N < 0.05 at 1e5; recurrence average "
        "within 0.01 of 1/16 and >= 1/64",
        ok,
        f"D {d_top:.3e}, average {avg_top:.6f}, {elapsed:.1f} s",
    )


def test_criterion_6_rk_dichotomy():
    t0 = time.perf_counter()
    box = ((Fraction(0), Fraction(9, 10)),)
    rep = run_rk(
        2,
        SQRT2_MINUS_1,
        rotation_1d(SQRT2_MINUS_1),
        [rotation_1d(GOLDEN_MINUS_1)],
        box,
        n_max=500,
        resolution=2000,
        positivity_margin=10.0,
    )
    elapsed = time.perf_counter() - t0
    counts = [r["value"] for r in rep.rows if r["metric"] == "nonrecurrence_count"]
    pos = [
        (r["value"], r["error_bound"])
        for r in rep.rows
        if r["metric"] == "positivity_measure"
    ]
    best = max(v for v, _ in pos)
    err = pos[0][1]
    ok = (
        rep.verdict == "pass"
        and len(counts) == 248
        and all(c == 0.0 for c in counts)
        and best > 10 * err
        and elapsed < 300.0
    )
    _report(
        "visit-set dichotomy: zero strip survivors at every n in R_2 "
        "(resolution 2000^2) and positive rotation intersection > 10x grid error",
        ok,
        f"{len(counts)} visit times, best measure {best:.3f} vs error {err:.4f}, "
        f"{elapsed:.1f} s",
    )


def _t1t2_exact_norm_oracle(big_n: int) -> float:
    """Independent big-integer evaluation of the hyperbolic instance norm
    at small N: the accumulation is keyed on exact index vectors."""
    cat = cat_map().matrix
    m_f = (1, 0)
    m_g = (1, 0)
    acc: dict[tuple, complex] = {}
    for n in range(1, big_n + 1):
        exponent = n * n + 2 * n  # S^{n^2} W^n with W = S^2
        power = system_power(AffineSystem.automorphism(cat), exponent)
        idx = tuple(
            a + b for a, b in zip(m_f, vec_mat(m_g, power.matrix))
        )
        amp = cis(SQRT2_MINUS_1.times_mod1(n))
        acc[idx] = acc.get(idx, 0j) + amp
    return math.sqrt(math.fsum(abs(v) ** 2 for v in acc.values())) / big_n


def test_criterion_7_weakly_mixing_driver():
    cat = cat_map()
    w = AffineSystem.automorphism(system_power(cat, 2).matrix, "cat^2")
    sched = Schedule((200, 1000, 2000))
    rep = run_t1t2(
        rotation_2d_first(SQRT2_MINUS_1),
        [],
        cat,
        w,
        [PolynomialSequence.from_power_coefficients([0, 0, 1], "n^2")],
        CharVector.basis((1, 0)),
        [],
        [CharVector.basis((1, 0))],
        sched,
        tol=0.05,
        audit_exact_n=200,
    )
    rows = {r["metric"]: r["value"] for r in rep.rows if r["N"] == 2000}
    norm_rows = {r["N"]: r["value"] for r in rep.rows if r["metric"] == "product_norm"}
    oracle = _t1t2_exact_norm_oracle(200)
    ok = (
        rep.verdict == "pass"
        and norm_rows[2000] < 0.05
        and rows["fingerprint_disagreements"] == 0.0
        and rows["exact_index_disagreements"] == 0.0
        and abs(norm_rows[200] - oracle) < 1e-10
    )
    _report(
        "hyperbolic driver: norm < 0.05 at N = 2000, zero fingerprint "
        "disagreements, big-integer cross-check at N = 200 matches",
        ok,
        f"norm {norm_rows[2000]:.4f}, oracle delta {abs(norm_rows[200] - oracle):.2e}",
    )


def test_criterion_8_polarization():
    sched = Schedule((1000, 2000, 4000))
    pairs = []
    orbits = [rotation_orbit(), skew_lebesgue_orbit(), mixed_orbit()]
    worst = 0.0
    for a in orbits:
        for b in orbits:
            cs = cross_spectrum_polarization(a, b, 64, sched)
            worst = max(worst, cs.max_discrepancy)
            pairs.append((a.name, b.name, cs.max_discrepancy))
    ok = worst < 1e-9
    _report(
        "polarization identity: direct and polarized cross coefficients agree "
        "to 1e-9 on all zoo pairs, h <= 64",
        ok,
        f"worst discrepancy {worst:.2e} over {len(pairs)} pairs",
    )


def test_criterion_9_infrastructure(zoo_profiles, tmp_path):
    fejer_ok = True
    psd_ok = True
    details = []
    for name, prof in zoo_profiles.items():
        dens = fejer_density(prof)
        g0 = prof.gamma0()
        if dens.min() < -1e-8 or abs(dens.mean() - g0) > 1e-10:
            fejer_ok = False
        details.append(f"{name}: min {dens.min():.2e}")
        if not profile_psd_ok(prof):
            psd_ok = False
    # byte-determinism of emitted reports
    from vdclab.cli import main

    cfg = {
        "experiment": "counterexample",
        "irrationals": {"alpha": {"builtin": "sqrt2_minus_1"}},
        "schedule": {"cutoffs": [1000, 2000, 4000]},
        "params": {"alpha": "alpha"},
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["run", str(cfg_path), "--out", str(out1)]) == 0
    assert main(["run", str(cfg_path), "--out", str(out2)]) == 0
    deterministic = all(
        (out1 / f).read_bytes() == (out2 / f).read_bytes()
        for f in ("report.json", "metrics.csv", "decay.csv")
    )
    ok = fejer_ok and psd_ok and deterministic
    _report(
        "infrastructure: Fejer density >= -1e-8 and integrates to gamma(0) "
        "+- 1e-10; Toeplitz PSD to tolerance; reports byte-deterministic",
        ok,
        "; ".join(details),
    )
