"""Cesaro correlation profiles along a cutoff schedule, averaged norms,
product averages, and measures of intersections of box preimages.

gamma_N(h) = (1/N) sum_{n<=N} <f_{n+h}, f_n> is assembled per character
index: within one index the shifted products reduce to a scalar
cross-correlation, which numpy evaluates in a fixed order, and indices
that occur only once can contribute only at lag 0, so exactly-zero
correlations come out as literal 0.0 rather than rounding noise.  The
oscillation of the profile across the top two schedule entries is the
stability diagnostic downstream classifiers use to decide whether the
finite data has settled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .fixedpoint import CompensatedSum, Irrational
from .hilbert import CharIndex, CharVector
from .systems import ExponentWalker, system_power

_DENSE_THRESHOLD = 512
_BAND = 1e-12  # float uncertainty band around box boundaries


class ResolutionError(ValueError):
    """Grid too coarse for the requested error bound."""

    def __init__(self, required: int, requested: int):
        self.required = required
        super().__init__(
            f"resolution {requested} too small for requested error bound; "
            f"need at least {required} cells per axis"
        )


class UnstableProfileError(RuntimeError):
    """Correlation profile oscillates too much across the schedule top."""


@dataclass(frozen=True)
class Schedule:
    """Increasing cutoffs N_1 < ... < N_Q along which averages are read."""

    cutoffs: tuple[int, ...]

    def __post_init__(self):
        cs = self.cutoffs
        if len(cs) < 3:
            raise ValueError("schedule needs at least three cutoffs")
        if any(b <= a for a, b in zip(cs, cs[1:])):
            raise ValueError("schedule cutoffs must be strictly increasing")
        if cs[0] < 1:
            raise ValueError("cutoffs must be positive")

    @classmethod
    def geometric(cls, budget: int = 100_000, base: int = 1000, factor: int = 2) -> "Schedule":
        cs = []
        n = base
        while n <= budget:
            cs.append(n)
            n *= factor
        if not cs or cs[-1] != budget:
            cs.append(budget)
        return cls(tuple(cs))

    @property
    def top(self) -> int:
        return self.cutoffs[-1]

    def top_k(self, k: int) -> tuple[int, ...]:
        return self.cutoffs[-k:]

    def __iter__(self):
        return iter(self.cutoffs)


def take_vectors(orbit, count: int):
    """Normalize the orbit argument: an object with .vectors(count), a
    callable count -> iterable, or a plain iterable."""
    if hasattr(orbit, "vectors"):
        return orbit.vectors(count)
    if callable(orbit):
        return orbit(count)
    return orbit


class _OrbitArrays:
    """Flat (n, index id, amplitude) triples of a streamed orbit."""

    def __init__(self, vectors, count: int):
        pos: list[int] = []
        ids: list[int] = []
        amps: list[complex] = []
        intern: dict[CharIndex, int] = {}
        sup_sq = 0.0
        n = 0
        it = iter(vectors)
        while n < count:
            n += 1
            try:
                vec = next(it)
            except StopIteration:
                raise ValueError(f"orbit ended at n = {n}; {count} vectors required")
            except Exception as exc:
                raise RuntimeError(f"orbit generator failed at n = {n}: {exc}") from exc
            nsq = 0.0
            for idx, amp in vec.coeffs.items():
                iid = intern.get(idx)
                if iid is None:
                    iid = len(intern)
                    intern[idx] = iid
                pos.append(n)
                ids.append(iid)
                amps.append(amp)
                nsq += abs(amp) ** 2
            sup_sq = max(sup_sq, nsq)
        self.pos = np.asarray(pos, dtype=np.int64)
        self.ids = np.asarray(ids, dtype=np.int64)
        self.amps = np.asarray(amps, dtype=np.complex128)
        self.sup_sq = sup_sq
        self.count = count
        self.n_ids = len(intern)

    def groups(self):
        """Per-id (positions, amplitudes), ordered by first occurrence."""
        order = np.argsort(self.ids, kind="stable")
        sorted_ids = self.ids[order]
        bounds = np.flatnonzero(np.diff(sorted_ids)) + 1
        for chunk in np.split(order, bounds):
            yield self.pos[chunk], self.amps[chunk]


@dataclass(frozen=True)
class CorrelationProfile:
    """gamma_N(h) for every schedule cutoff, h = 0..H."""

    schedule: Schedule
    lags: int
    gammas: dict[int, np.ndarray]
    stability: float
    sup_sq: float
    irrationals: tuple[Irrational, ...] = ()
    label: str = ""

    @property
    def top_n(self) -> int:
        return self.schedule.top

    def gamma(self, n: int | None = None) -> np.ndarray:
        return self.gammas[self.top_n if n is None else n]

    def gamma0(self) -> float:
        return float(self.gamma()[0].real)

    def extended(self, n: int | None = None) -> np.ndarray:
        """gamma(-H..H) with gamma(-h) = conj gamma(h)."""
        g = self.gamma(n)
        return np.concatenate([np.conj(g[:0:-1]), g])


def _group_correlation(gamma: np.ndarray, positions, amps, big_n: int, lags: int) -> None:
    """Accumulate sum_{n<=N} f_{n+h} conj(f_n) restricted to one index.

    The lag-0 diagonal is accumulated as a real sum of squared moduli in
    every path, so gamma_N(0) is exactly real by construction."""
    sel = positions <= big_n + lags
    p = positions[sel]
    a = amps[sel]
    if len(p) == 0:
        return
    base = p <= big_n
    gamma[0] += float(np.sum(np.abs(a[base]) ** 2))
    if len(p) == 1:
        return
    if len(p) >= _DENSE_THRESHOLD:
        x = np.zeros(big_n, dtype=np.complex128)
        x[p[base] - 1] = a[base]
        y = np.zeros(big_n + lags, dtype=np.complex128)
        y[p - 1] = a
        gamma[1:] += np.correlate(y, x, "valid")[1:]
        return
    gaps = p[None, :] - p[:, None]
    valid = (gaps >= 1) & (gaps <= lags) & (p[:, None] <= big_n)
    prods = a[None, :] * np.conj(a[:, None])
    np.add.at(gamma, gaps[valid], prods[valid])


def cesaro_correlation(
    orbit,
    lags: int | None = None,
    schedule: Schedule | None = None,
    irrationals: tuple[Irrational, ...] | None = None,
    label: str = "",
) -> CorrelationProfile:
    """Correlation profile of an orbit of character vectors.

    The default lag budget H = floor(sqrt(N_Q)) keeps h far below N, in
    the order the iterated limits are taken; callers may override it when
    the orbit's correlations are exactly N-independent.
    """
    schedule = schedule or Schedule.geometric()
    top = schedule.top
    if lags is None:
        lags = int(math.isqrt(top))
    if lags < 1:
        raise ValueError("lag budget must be >= 1")
    if irrationals is None:
        irrationals = tuple(getattr(orbit, "irrationals", ()) or ())
    data = _OrbitArrays(take_vectors(orbit, top + lags), top + lags)
    groups = list(data.groups())
    gammas: dict[int, np.ndarray] = {}
    for big_n in schedule:
        gamma = np.zeros(lags + 1, dtype=np.complex128)
        for positions, amps in groups:
            _group_correlation(gamma, positions, amps, big_n, lags)
        gamma /= big_n
        if gamma[0].imag != 0.0 or gamma[0].real < 0:
            raise AssertionError("gamma_N(0) must be real and nonnegative")
        gammas[big_n] = gamma
    a, b = schedule.top_k(2)
    stability = float(np.max(np.abs(gammas[b] - gammas[a])))
    return CorrelationProfile(
        schedule=schedule,
        lags=lags,
        gammas=gammas,
        stability=stability,
        sup_sq=data.sup_sq,
        irrationals=tuple(irrationals),
        label=label or getattr(orbit, "label", ""),
    )


def averaged_norm(orbit, weights, schedule: Schedule | None = None) -> list[float]:
    """|| (1/N) sum_{n<=N} c_n f_n || at each cutoff, accumulated per
    character index so the cost is the total support, never N^2."""
    schedule = schedule or Schedule.geometric()
    top = schedule.top
    vectors = take_vectors(orbit, top)
    witer = _weight_iter(weights)
    acc: dict[CharIndex, complex] = {}
    out: list[float] = []
    cut = iter(schedule)
    next_cut = next(cut)
    n = 0
    for vec in vectors:
        n += 1
        if n > top:
            break
        c = next(witer)
        if c != 0:
            for idx, amp in vec.coeffs.items():
                acc[idx] = acc.get(idx, 0j) + c * amp
        while n == next_cut:
            norm = math.sqrt(math.fsum(abs(v) ** 2 for v in acc.values())) / n
            out.append(norm)
            try:
                next_cut = next(cut)
            except StopIteration:
                next_cut = -1
    if n < top:
        raise ValueError(f"orbit ended at n = {n}; {top} vectors required")
    return out


def _weight_iter(weights):
    if weights is None:
        while True:
            yield 1.0
    elif callable(weights):
        n = 0
        while True:
            n += 1
            yield complex(weights(n))
    else:
        for w in weights:
            yield complex(w)


def stream_product_average(factors, snapshots):
    """Yield (N, averaged CharVector) at each snapshot cutoff for the
    running product average (1/N) sum_n prod_j f_j o T_j^{s_j(n)}.

    Coefficients are accumulated per raw index tuple; character objects
    with their fingerprints are only materialized at the snapshots."""
    dims = {f[0].dim for f in factors}
    if len(dims) != 1:
        raise ValueError("all factors must act on the same torus")
    d = dims.pop()
    walkers = []
    for system, seq, vec in factors:
        char_walkers = [ExponentWalker(system, k.m, amp) for k, amp in vec.coeffs.items()]
        walkers.append((seq, char_walkers))
    acc: dict[tuple[int, ...], complex] = {}
    zero = (0,) * d
    snaps = sorted(snapshots)
    si = 0
    singleton = all(len(cw) == 1 for _, cw in walkers)
    for n in range(1, snaps[-1] + 1):
        if singleton:
            m = zero
            amp = 1.0 + 0j
            for seq, (w,) in walkers:
                w.advance_to(n if seq is None else seq.eval(n))
                m = tuple(a + b for a, b in zip(m, w.m))
                amp *= w.amplitude()
            acc[m] = acc.get(m, 0j) + amp
        else:
            terms = [(zero, 1.0 + 0j)]
            for seq, char_walkers in walkers:
                s = n if seq is None else seq.eval(n)
                factor_terms = []
                for w in char_walkers:
                    w.advance_to(s)
                    factor_terms.append((w.m, w.amplitude()))
                terms = [
                    (tuple(a + b for a, b in zip(ti, tj)), ai * aj)
                    for ti, ai in terms
                    for tj, aj in factor_terms
                ]
            for m, amp in terms:
                acc[m] = acc.get(m, 0j) + amp
        if n == snaps[si]:
            avg = CharVector({CharIndex(k): v / n for k, v in acc.items()})
            yield n, avg
            si += 1
            if si == len(snaps):
                return


def product_average(factors, big_n: int) -> CharVector:
    """(1/N) sum_n prod_j pushforward(T_j, f_j, s_j(n)) as an explicit vector."""
    for _, vec in stream_product_average(factors, [big_n]):
        return vec
    raise RuntimeError("unreachable")


# ---------------------------------------------------------------------------
# measures of box intersections


@dataclass(frozen=True)
class GridMeasure:
    value: float
    error_bound: float
    count: int
    cells: int
    resolution: int
    uncertain_resolved: int = 0


def _box_facets(boxes) -> int:
    return sum(2 * len(box) for box in boxes)


def _is_full(lo: Fraction, hi: Fraction) -> bool:
    return lo <= 0 and hi >= 1


def box_measure(constraints, resolution: int, max_error: float | None = None) -> GridMeasure:
    """Midpoint-grid estimate of mu(cap_i T_i^{-n_i} A_i) on T^d.

    Every cell midpoint is pushed through the exact iterate: the rational
    part of each coordinate is reduced as an integer numerator mod 2M and
    the irrational shift mod 1 comes from the fixed-point phase, so a cell
    is only ever in doubt when it sits within 1e-12 of a box face, and the
    doubtful ones are resolved in exact rational arithmetic -- the count
    is exact, the measure's only error is the midpoint rule itself, with
    reported bound (total boundary facets)/M.  Constraints are evaluated
    in order on the surviving cell set, so a restrictive first set prunes
    the grid for the rest.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    d = constraints[0][0].dim
    total_facets = 0
    for system, _, boxes in constraints:
        if system.dim != d:
            raise ValueError("all systems must act on the same torus")
        for box in boxes:
            if len(box) != d:
                raise ValueError("box dimension mismatch")
        total_facets += _box_facets(boxes)
    error_bound = total_facets / resolution
    if max_error is not None and error_bound > max_error:
        raise ResolutionError(math.ceil(total_facets / max_error), resolution)
    if d not in (1, 2):
        raise ValueError("grid path implemented for d in {1, 2}")

    m = resolution
    two_m = 2 * m
    if d == 1:
        axes = [2 * np.arange(m, dtype=np.int64) + 1]
        cells = m
    else:
        i = 2 * np.arange(m, dtype=np.int64) + 1
        axes = [np.repeat(i, m), np.tile(i, m)]
        cells = m * m

    powers = []
    for system, steps, boxes in constraints:
        power = system_power(system, steps)
        if any(abs(e) > 1 << 40 for row in power.matrix for e in row):
            raise ValueError("iterate matrix entries exceed the fast-path bound 2^40")
        shifts = [p.num_den_mod1() for p in power.translation]
        powers.append((power.matrix, shifts, boxes))

    uncertain = np.zeros(cells, dtype=bool)
    for matrix, shifts, boxes in powers:
        needed = [
            r for r in range(d) if any(not _is_full(*box[r]) for box in boxes)
        ]
        values = {}
        for r in needed:
            num = sum(matrix[r][s] * axes[s] for s in range(d)) % two_m
            sn, sd = shifts[r]
            values[r] = (num / two_m + sn / sd) % 1.0
        size = len(axes[0])
        c_in = np.zeros(size, dtype=bool)
        c_out = np.ones(size, dtype=bool)
        for box in boxes:
            b_in = np.ones(size, dtype=bool)
            b_out = np.zeros(size, dtype=bool)
            for r in needed:
                lo, hi = box[r]
                if _is_full(lo, hi):
                    continue
                v = values[r]
                lo_f, hi_f = float(lo), float(hi)
                seam = (v < _BAND) | (v > 1.0 - _BAND)
                b_in &= (v >= lo_f + _BAND) & (v < hi_f - _BAND) & ~seam
                b_out |= ((v < lo_f - _BAND) | (v >= hi_f + _BAND)) & ~seam
            c_in |= b_in
            c_out &= b_out
        keep = ~c_out
        uncertain = (uncertain | (~c_in & ~c_out))[keep]
        axes = [a[keep] for a in axes]

    count = int(np.count_nonzero(~uncertain))
    resolved = 0
    if np.any(uncertain):
        for cell in np.flatnonzero(uncertain):
            resolved += 1
            cell_axes = tuple(int(a[cell]) for a in axes)
            ok = True
            for matrix, shifts, boxes in powers:
                exact = [
                    (
                        Fraction(
                            sum(matrix[r][s] * cell_axes[s] for s in range(d)), two_m
                        )
                        + Fraction(shifts[r][0], shifts[r][1])
                    )
                    % 1
                    for r in range(d)
                ]
                if not any(
                    all(lo <= exact[r] < hi for r, (lo, hi) in enumerate(box))
                    for box in boxes
                ):
                    ok = False
                    break
            if ok:
                count += 1
    return GridMeasure(
        value=count / cells,
        error_bound=error_bound,
        count=count,
        cells=cells,
        resolution=resolution,
        uncertain_resolved=resolved,
    )


def interval_measure_exact(constraints) -> Fraction:
    """Exact mu(cap_i T_i^{-n_i} A_i) when every system is a rotation and
    every A_i is a single box: per coordinate, intersect circular arcs."""
    d = constraints[0][0].dim
    total = Fraction(1)
    for system, _, _ in constraints:
        if not system.is_rotation():
            raise ValueError("interval_measure_exact accepts rotations only")
        if system.dim != d:
            raise ValueError("dimension mismatch")
    for r in range(d):
        segments = [(Fraction(0), Fraction(1))]
        for system, steps, box in constraints:
            lo, hi = box[r]
            shift = system.translation[r].scale(steps).fraction_mod1()
            a = (lo - shift) % 1
            b_len = hi - lo
            if b_len >= 1:
                continue
            if b_len <= 0:
                segments = []
                break
            b = a + b_len
            if b <= 1:
                arcs = [(a, b)]
            else:
                arcs = [(a, Fraction(1)), (Fraction(0), b - 1)]
            segments = _intersect(segments, arcs)
            if not segments:
                break
        length = sum((b - a for a, b in segments), Fraction(0))
        total *= length
        if total == 0:
            return total
    return total


def _intersect(segs1, segs2):
    out = []
    for a1, b1 in segs1:
        for a2, b2 in segs2:
            a, b = max(a1, a2), min(b1, b2)
            if a < b:
                out.append((a, b))
    return out


# ---------------------------------------------------------------------------
# positive semidefiniteness of the extended correlation sequence


def toeplitz_matrix(gamma: np.ndarray) -> np.ndarray:
    """Hermitian Toeplitz matrix of the extended sequence gamma(-H..H)."""
    h = len(gamma) - 1
    ext = np.concatenate([np.conj(gamma[:0:-1]), gamma])
    idx = np.subtract.outer(np.arange(h + 1), np.arange(h + 1))
    return ext[idx + h]


def toeplitz_psd_ok(gamma: np.ndarray, tol: float) -> bool:
    """Certify min eig >= -tol by Cholesky of T + tol*I."""
    t = toeplitz_matrix(gamma)
    try:
        np.linalg.cholesky(t + tol * np.eye(len(t)))
        return True
    except np.linalg.LinAlgError:
        return False


def toeplitz_min_eig(gamma: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(toeplitz_matrix(gamma))[0])


def profile_psd_ok(profile: CorrelationProfile, float_floor: float = 1e-8) -> bool:
    """Conservative PSD check at tolerance 10*stability plus a float floor."""
    tol = 10.0 * profile.stability + float_floor * max(profile.gamma0(), 1.0)
    return toeplitz_psd_ok(profile.gamma(), tol)


def inner_product_average(orbit_f, orbit_g, schedule: Schedule | None = None) -> list[complex]:
    """(1/N) sum <f_n, g_n> at each cutoff, compensated accumulation."""
    schedule = schedule or Schedule.geometric()
    top = schedule.top
    fs = take_vectors(orbit_f, top)
    gs = take_vectors(orbit_g, top)
    acc = CompensatedSum()
    out: list[complex] = []
    cuts = set(schedule.cutoffs)
    n = 0
    for f, g in zip(fs, gs):
        n += 1
        if n > top:
            break
        acc.add(f.inner(g))
        if n in cuts:
            out.append(acc.value() / n)
    if n < top:
        raise ValueError(f"orbits ended at n = {n}; {top} vectors required")
    return out
