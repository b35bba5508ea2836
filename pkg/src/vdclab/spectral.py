"""Spectral measure estimation from a correlation profile, and the
Lebesgue / singular / mixed / inconclusive classification.

The limiting correlations gamma(h) of a square-averageable orbit are the
Fourier coefficients of a positive measure on the circle.  From finite
data we estimate that measure three ways at once: a Fejer kernel density
(nonnegative by construction up to float noise), a direct mass scan over
an explicit lattice of atom candidates, and the averaged squared
coefficients (whose limit is the total squared atom mass).  Square-
summable coefficients force an absolutely continuous measure, which is
the Lebesgue-side detection rule; it is sufficient but not necessary, so
the classifier deliberately under-approximates that class and abstains
rather than guess.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .correlate import CorrelationProfile, Schedule, UnstableProfileError, cesaro_correlation, take_vectors
from .fixedpoint import SCALE, CompensatedSum, Irrational, cis
from .hilbert import char_combine


class SpectralError(RuntimeError):
    """An estimate violated one of its construction invariants."""


@dataclass(frozen=True)
class Thresholds:
    wiener_tol: float = 0.02          # below: no appreciable atomic mass
    l2_increment_factor: float = 0.02  # eps_l2 = factor * gamma(0)^2
    singular_tol: float = 0.05        # atoms carry >= (1 - tol) of gamma(0)
    atom_floor: float = 0.01          # per-atom detection threshold (x gamma(0))
    mixed_floor: float = 0.10         # each component >= floor * gamma(0)
    density_floor: float = 1e-8       # Fejer negativity tolerance
    mass_tol: float = 1e-10           # density-integral vs gamma(0)
    imag_residue_tol: float = 1e-10
    stability_factor: float = 10.0    # refuse when stability > factor * wiener_tol
    lattice_multiples: int = 8        # candidate atoms k*alpha, |k| <= this
    rational_denominator_max: int = 8
    grid_size: int = 8192

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class AtomCandidate:
    value: Fraction  # exact location mod 1
    label: str


@dataclass(frozen=True)
class Atom:
    location: float
    mass: float
    imag_residue: float
    label: str


@dataclass(frozen=True)
class L2Tail:
    partial: np.ndarray          # partial[j] = sum_{1<=h<=j} |gamma(h)|^2
    slope: float                 # log-log fit of per-h increments, top octave
    top_octave_increment: float  # partial[H] - partial[H//2]


@dataclass(frozen=True)
class SpectralEstimate:
    tag: str                     # Lebesgue | singular | mixed | inconclusive
    atoms: tuple[Atom, ...]
    atom_total: float
    wiener: float
    l2: L2Tail | None
    density_min: float | None
    density_integral: float | None
    gamma0: float
    stability: float
    thresholds: Thresholds
    reasons: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "tag": self.tag,
            "atoms": [
                {"location": a.location, "mass": a.mass, "label": a.label}
                for a in self.atoms
            ],
            "atom_total": self.atom_total,
            "wiener": self.wiener,
            "l2_top_octave_increment": None if self.l2 is None else self.l2.top_octave_increment,
            "l2_slope": None if self.l2 is None else self.l2.slope,
            "density_min": self.density_min,
            "density_integral": self.density_integral,
            "gamma0": self.gamma0,
            "stability": self.stability,
            "thresholds": self.thresholds.as_dict(),
            "reasons": list(self.reasons),
        }


def _require_stable(profile: CorrelationProfile, thresholds: Thresholds) -> None:
    limit = thresholds.stability_factor * thresholds.wiener_tol
    if profile.stability > limit:
        raise UnstableProfileError(
            f"profile oscillates by {profile.stability:.3g} across the top "
            f"schedule entries (limit {limit:.3g})"
        )


def fejer_density(
    profile: CorrelationProfile,
    grid_size: int | None = None,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> np.ndarray:
    """Fejer-kernel density sigma_H at x_j = j/G from the top-N profile.

    sigma_H(x) = sum_{|h|<=H} (1 - |h|/(H+1)) gamma(h) e^{-2 pi i h x}
    with gamma(-h) = conj gamma(h): the synthesis kernel conjugate to the
    coefficient convention gamma(h) = int e^{2 pi i h x} dmu, so an atom
    of the measure shows up as a Fejer peak at its own location.  The
    grid is a single FFT; the real part is returned after checking the
    imaginary residue.
    """
    _require_stable(profile, thresholds)
    g = grid_size or thresholds.grid_size
    h = profile.lags
    if g < 2 * h:
        raise ValueError("grid size must be at least twice the lag budget")
    gamma = profile.gamma()
    coeff = np.zeros(g, dtype=np.complex128)
    weights = 1.0 - np.arange(h + 1) / (h + 1)
    coeff[0] = gamma[0].real
    for hh in range(1, h + 1):
        c = weights[hh] * gamma[hh]
        coeff[hh] += c
        coeff[g - hh] += np.conj(c)
    density = np.fft.fft(coeff)
    residue = float(np.max(np.abs(density.imag)))
    if residue > thresholds.imag_residue_tol:
        raise SpectralError(f"Fejer synthesis imaginary residue {residue:.3g}")
    return density.real


def default_candidates(
    irrationals: tuple[Irrational, ...],
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[AtomCandidate]:
    """The declared-irrational lattice {k*alpha} plus small rationals."""
    seen: dict[Fraction, str] = {}
    k_max = thresholds.lattice_multiples
    for sym in irrationals:
        for k in range(-k_max, k_max + 1):
            if k == 0:
                continue
            val = Fraction((k * sym.fix) % SCALE, SCALE)
            seen.setdefault(val, f"{k}*{sym.label}")
    for q in range(1, thresholds.rational_denominator_max + 1):
        for p in range(q):
            if math.gcd(p, q) == 1:
                seen.setdefault(Fraction(p, q), f"{p}/{q}")
    return [AtomCandidate(v, l) for v, l in sorted(seen.items(), key=lambda kv: kv[0])]


def atom_scan(
    profile: CorrelationProfile,
    candidates: list[AtomCandidate] | None = None,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> list[Atom]:
    """Candidate atom masses mass(a) = (1/H) sum_{h<=H} gamma(h) e^{-2 pi i h a}.

    The phase h*a is reduced mod 1 exactly (the candidate is an exact
    rational with denominator q * 2^128), so a candidate equal to the true
    atom location accumulates its mass with no phase drift.
    """
    _require_stable(profile, thresholds)
    if candidates is None:
        candidates = default_candidates(profile.irrationals, thresholds)
    gamma = profile.gamma()
    h_max = profile.lags
    out: list[Atom] = []
    for cand in candidates:
        num, den = cand.value.numerator, cand.value.denominator
        acc = 0j
        t = 0
        for hh in range(1, h_max + 1):
            t = (t + num) % den
            acc += gamma[hh] * cis(t / den).conjugate()
        mass = acc / h_max
        out.append(
            Atom(
                location=float(cand.value),
                mass=float(mass.real),
                imag_residue=float(mass.imag),
                label=cand.label,
            )
        )
    return out


def wiener_statistic(profile: CorrelationProfile) -> float:
    """(1/(2H+1)) sum_{|h|<=H} |gamma(h)|^2: limits to the summed squared
    atom masses of the underlying measure."""
    gamma = profile.gamma()
    h = profile.lags
    sq = np.abs(gamma) ** 2
    return float((sq[0] + 2.0 * sq[1:].sum()) / (2 * h + 1))


def l2_tail(profile: CorrelationProfile) -> L2Tail:
    """Running sums of |gamma(h)|^2 and a log-log slope of the per-h
    increments over the top octave (h in (H/2, H])."""
    gamma = profile.gamma()
    h = profile.lags
    inc = np.abs(gamma[1:]) ** 2
    partial = np.concatenate([[0.0], np.cumsum(inc)])
    lo = h // 2
    octave = inc[lo:]
    hs = np.arange(lo + 1, h + 1, dtype=float)
    positive = octave > 0
    if not np.any(positive):
        slope = float("-inf")
    else:
        x = np.log(hs[positive])
        y = np.log(octave[positive])
        slope = float(np.polyfit(x, y, 1)[0]) if len(x) > 1 else 0.0
    return L2Tail(
        partial=partial,
        slope=slope,
        top_octave_increment=float(partial[h] - partial[lo]),
    )


def _subtract_atoms(gamma: np.ndarray, atoms: list[Atom], candidates: dict[str, Fraction]) -> np.ndarray:
    out = gamma.astype(np.complex128).copy()
    h_max = len(gamma) - 1
    for atom in atoms:
        val = candidates[atom.label]
        num, den = val.numerator, val.denominator
        t = 0
        out[0] -= atom.mass
        for hh in range(1, h_max + 1):
            t = (t + num) % den
            out[hh] -= atom.mass * cis(t / den)
    return out


def classify(
    profile: CorrelationProfile,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
    candidates: list[AtomCandidate] | None = None,
) -> SpectralEstimate:
    """Tag a profile Lebesgue, singular, mixed, or inconclusive.

    Lebesgue: negligible Wiener statistic and converged l2 partial sums.
    Singular: detected atoms carry essentially all of gamma(0).
    Mixed: both an atomic and a square-summable residual component of
    appreciable mass.  Anything else, including an unstable profile,
    abstains.
    """
    limit = thresholds.stability_factor * thresholds.wiener_tol
    if profile.stability > limit:
        return SpectralEstimate(
            tag="inconclusive",
            atoms=(),
            atom_total=0.0,
            wiener=float("nan"),
            l2=None,
            density_min=None,
            density_integral=None,
            gamma0=profile.gamma0(),
            stability=profile.stability,
            thresholds=thresholds,
            reasons=(
                f"profile unstable: oscillation {profile.stability:.3g} exceeds {limit:.3g}",
            ),
        )
    if candidates is None:
        candidates = default_candidates(profile.irrationals, thresholds)
    g0 = profile.gamma0()
    density = fejer_density(profile, thresholds.grid_size, thresholds)
    density_min = float(density.min())
    density_integral = float(density.mean())
    scan = atom_scan(profile, candidates, thresholds)
    detected = [a for a in scan if a.mass >= thresholds.atom_floor * max(g0, 1e-30)]
    atom_total = math.fsum(a.mass for a in detected)
    wiener = wiener_statistic(profile)
    tail = l2_tail(profile)

    if density_min < -thresholds.density_floor * max(g0, 1.0):
        raise SpectralError(f"Fejer density dips to {density_min:.3g}")
    if abs(density_integral - g0) > thresholds.mass_tol * max(g0, 1.0):
        raise SpectralError(
            f"density integral {density_integral!r} != gamma(0) {g0!r}"
        )
    if atom_total > g0 + thresholds.singular_tol * max(g0, 1.0):
        raise SpectralError(f"atom masses {atom_total:.6g} exceed gamma(0) {g0:.6g}")

    eps_l2 = thresholds.l2_increment_factor * g0 * g0
    reasons: list[str] = []
    if g0 == 0.0:
        tag = "Lebesgue"
        reasons.append("zero orbit energy: spectral measure vanishes")
    elif atom_total >= (1.0 - thresholds.singular_tol) * g0:
        tag = "singular"
        reasons.append(f"atoms carry {atom_total:.4g} of gamma(0) = {g0:.4g}")
    elif wiener < thresholds.wiener_tol * g0 * g0 and tail.top_octave_increment < eps_l2:
        tag = "Lebesgue"
        reasons.append(
            f"wiener {wiener:.4g} below tolerance and l2 increment "
            f"{tail.top_octave_increment:.4g} converged"
        )
    else:
        cand_by_label = {c.label: c.value for c in candidates}
        residual_mass = g0 - atom_total
        residual_gamma = _subtract_atoms(profile.gamma(), detected, cand_by_label)
        res_inc = np.abs(residual_gamma[1:]) ** 2
        res_top = float(np.sum(res_inc[profile.lags // 2 :]))
        if (
            atom_total >= thresholds.mixed_floor * g0
            and residual_mass >= thresholds.mixed_floor * g0
            and res_top < eps_l2
        ):
            tag = "mixed"
            reasons.append(
                f"atomic mass {atom_total:.4g} and square-summable residual "
                f"{residual_mass:.4g} both appreciable"
            )
        else:
            tag = "inconclusive"
            reasons.append(
                "neither the atomic nor the square-summable criterion resolves "
                f"(wiener {wiener:.4g}, atoms {atom_total:.4g}, "
                f"l2 increment {tail.top_octave_increment:.4g})"
            )
    return SpectralEstimate(
        tag=tag,
        atoms=tuple(detected),
        atom_total=atom_total,
        wiener=wiener,
        l2=tail,
        density_min=density_min,
        density_integral=density_integral,
        gamma0=g0,
        stability=profile.stability,
        thresholds=thresholds,
        reasons=tuple(reasons),
    )


@dataclass(frozen=True)
class CrossSpectrum:
    lags: int
    direct: np.ndarray
    polarized: np.ndarray
    max_discrepancy: float


def cross_spectrum_polarization(
    orbit_f,
    orbit_g,
    lags: int,
    schedule: Schedule,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> CrossSpectrum:
    """Cross coefficients c(h) = lim (1/N) sum <f_{n+h}, g_n>, computed
    directly and via the four polarized auto-profiles of f + a g for
    a in {1, -1, i, -i}; both are returned with their max discrepancy."""
    top = schedule.top
    count = top + lags
    fs = list(take_vectors(orbit_f, count))[:count]
    gs = list(take_vectors(orbit_g, count))[:count]
    if len(fs) < count or len(gs) < count:
        raise ValueError(f"both orbits must supply {count} vectors")

    direct_acc = [CompensatedSum() for _ in range(lags + 1)]
    for n in range(top):
        g_n = gs[n]
        for h in range(lags + 1):
            direct_acc[h].add(fs[n + h].inner(g_n))
    direct = np.array([acc.value() / top for acc in direct_acc])

    polarized_profiles = {}
    for a in (1, -1, 1j, -1j):
        combined = [char_combine([(1.0, f), (a, g)]) for f, g in zip(fs, gs)]
        prof = cesaro_correlation(combined, lags=lags, schedule=schedule)
        _require_stable(prof, thresholds)
        polarized_profiles[a] = prof.gamma()
    polarized = 0.25 * (
        polarized_profiles[1]
        - polarized_profiles[-1]
        + 1j * polarized_profiles[1j]
        - 1j * polarized_profiles[-1j]
    )
    disc = float(np.max(np.abs(direct - polarized)))
    return CrossSpectrum(lags=lags, direct=direct, polarized=polarized, max_discrepancy=disc)
