"""Configuration parsing, experiment dispatch, and deterministic report
emission.

A config is a single JSON document declaring named irrationals (pinned
fixed-point values), affine systems (integer matrix plus translation
strings over the declared symbols), observables (character combinations),
integer sequences, a cutoff schedule, tolerances, and the experiment to
run with its parameter bindings.  Validation collects every violation,
not just the first.  Reports are byte-deterministic: rerunning the same
config writes identical files, which `--seed-check` verifies.

    vdclab run <config.json> --out <dir> [--threads K] [--seed-check]
    vdclab validate <config.json>
    vdclab zoo
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .correlate import Schedule
from .experiments import (
    ExperimentReport,
    run_counterexample,
    run_nf,
    run_orthogonality,
    run_recurrence,
    run_rk,
    run_single_t,
    run_t1t2,
    run_vdc_suite,
    run_weighted_vdc,
)
from .fixedpoint import FormalPhase, Irrational
from .hilbert import CharVector
from .sequences import (
    FloorPowerSequence,
    IntegerSequence,
    PolynomialSequence,
    TableSequence,
)
from .systems import AffineSystem, mat_det, orbit_vectors
from .zoo import (
    OrbitSpec,
    SQRT2_MINUS_1,
    GOLDEN_MINUS_1,
    labeled_orbits,
    zoo_listing,
)


class ConfigError(ValueError):
    """Carries the full list of violations found in a config document."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid config:\n  " + "\n  ".join(violations))


_BUILTIN_IRRATIONALS = {
    "sqrt2_minus_1": SQRT2_MINUS_1.fix,
    "golden_minus_1": GOLDEN_MINUS_1.fix,
}

_TOP_KEYS = {
    "experiment",
    "irrationals",
    "systems",
    "observables",
    "sequences",
    "schedule",
    "tolerances",
    "params",
}


@dataclass
class ConfigDocument:
    experiment: str
    irrationals: dict[str, Irrational]
    systems: dict[str, AffineSystem]
    observables: dict[str, CharVector]
    sequences: dict[str, IntegerSequence]
    schedule: Schedule | None
    tolerances: dict[str, float]
    params: dict

    def __eq__(self, other):
        if not isinstance(other, ConfigDocument):
            return NotImplemented
        return (
            self.experiment == other.experiment
            and self.irrationals == other.irrationals
            and self.systems == other.systems
            and {k: v.coeffs for k, v in self.observables.items()}
            == {k: v.coeffs for k, v in other.observables.items()}
            and _seq_keys(self.sequences) == _seq_keys(other.sequences)
            and self.schedule == other.schedule
            and self.tolerances == other.tolerances
            and self.params == other.params
        )


def _seq_keys(seqs: dict[str, IntegerSequence]) -> dict:
    out = {}
    for name, s in seqs.items():
        if isinstance(s, PolynomialSequence):
            out[name] = ("polynomial", s.binomial_coeffs)
        elif isinstance(s, FloorPowerSequence):
            out[name] = ("floor_power", s.c_fix)
        elif isinstance(s, TableSequence):
            out[name] = ("table", s.values)
        else:
            out[name] = ("other", id(s))
    return out


# ---------------------------------------------------------------------------
# parsing


_TERM_RE = re.compile(r"^\s*([+-]?\d+(?:/\d+)?)\s*$")
_SYM_RE = re.compile(r"^\s*([+-]?)\s*(?:(\d+)\s*\*\s*)?([A-Za-z_][A-Za-z_0-9]*)\s*$")


def parse_phase(text: str, irrationals: dict[str, Irrational]) -> FormalPhase:
    """Translation strings: rationals and integer multiples of declared
    symbols joined by + or -, e.g. "1/2+2*alpha" or "-alpha"."""
    s = text.strip()
    if not s:
        raise ValueError("empty phase expression")
    # split keeping signs: insert separators before +/- not at the start
    parts = re.findall(r"[+-]?[^+-]+", s.replace(" ", ""))
    rational = Fraction(0)
    irr: dict[Irrational, int] = {}
    for part in parts:
        m = _TERM_RE.match(part)
        if m:
            rational += Fraction(m.group(1))
            continue
        m = _SYM_RE.match(part)
        if not m:
            raise ValueError(f"cannot parse phase term {part!r}")
        sign, coeff, name = m.groups()
        if name not in irrationals:
            raise ValueError(f"undeclared irrational symbol {name!r}")
        c = int(coeff) if coeff else 1
        if sign == "-":
            c = -c
        sym = irrationals[name]
        irr[sym] = irr.get(sym, 0) + c
    return FormalPhase(rational, irr)


def phase_to_string(phase: FormalPhase) -> str:
    parts: list[str] = []
    if phase.rational != 0:
        parts.append(str(phase.rational))
    for sym, c in sorted(phase.irr.items(), key=lambda kv: kv[0].label):
        if c == 1:
            term = sym.label
        elif c == -1:
            term = f"-{sym.label}"
        else:
            term = f"{c}*{sym.label}"
        if parts and not term.startswith("-"):
            parts.append("+" + term)
        else:
            parts.append(term)
    return "".join(parts) if parts else "0"


def _parse_irrationals(raw: dict, errors: list[str]) -> dict[str, Irrational]:
    out: dict[str, Irrational] = {}
    for name, spec in raw.items():
        try:
            if not isinstance(spec, dict):
                raise ValueError("expected an object")
            keys = set(spec)
            if keys == {"builtin"}:
                fix = _BUILTIN_IRRATIONALS.get(spec["builtin"])
                if fix is None:
                    raise ValueError(f"unknown builtin {spec['builtin']!r}")
                out[name] = Irrational(fix, name)
            elif keys == {"hex"}:
                out[name] = Irrational.from_hex(spec["hex"], name)
            elif keys == {"decimal"}:
                out[name] = Irrational.from_decimal_string(spec["decimal"], name)
            else:
                raise ValueError("must have exactly one of builtin/hex/decimal")
        except (ValueError, KeyError, TypeError) as exc:
            errors.append(f"irrationals.{name}: {exc}")
    return out


def _parse_systems(raw: dict, irrationals, errors: list[str]) -> dict[str, AffineSystem]:
    out = {}
    for name, spec in raw.items():
        try:
            unknown = set(spec) - {"matrix", "translation"}
            if unknown:
                raise ValueError(f"unknown keys {sorted(unknown)}")
            matrix = tuple(tuple(int(x) for x in row) for row in spec["matrix"])
            det = mat_det(matrix)
            if det not in (1, -1):
                raise ValueError(f"det != +-1 (det = {det})")
            translation = tuple(
                parse_phase(t, irrationals) for t in spec["translation"]
            )
            out[name] = AffineSystem(matrix, translation, label=name)
        except (ValueError, KeyError, TypeError) as exc:
            errors.append(f"systems.{name}: {exc}")
    return out


def _parse_observables(raw: dict, errors: list[str]) -> dict[str, CharVector]:
    out = {}
    for name, terms in raw.items():
        try:
            coeffs = {}
            for term in terms:
                unknown = set(term) - {"index", "amplitude"}
                if unknown:
                    raise ValueError(f"unknown keys {sorted(unknown)}")
                idx = tuple(int(v) for v in term["index"])
                re_im = term.get("amplitude", [1.0, 0.0])
                amp = complex(float(re_im[0]), float(re_im[1]))
                vec = CharVector.basis(idx, amp)
                for k, v in vec.coeffs.items():
                    coeffs[k] = coeffs.get(k, 0j) + v
            out[name] = CharVector(coeffs)
        except (ValueError, KeyError, TypeError, IndexError) as exc:
            errors.append(f"observables.{name}: {exc}")
    return out


def _parse_sequences(raw: dict, errors: list[str]) -> dict[str, IntegerSequence]:
    out = {}
    for name, spec in raw.items():
        try:
            kind = spec.get("kind")
            if kind == "polynomial":
                keys = set(spec) - {"kind", "power_coefficients", "binomial_coefficients"}
                if keys:
                    raise ValueError(f"unknown keys {sorted(keys)}")
                if "binomial_coefficients" in spec:
                    out[name] = PolynomialSequence(
                        [int(c) for c in spec["binomial_coefficients"]], label=name
                    )
                else:
                    out[name] = PolynomialSequence.from_power_coefficients(
                        [Fraction(str(c)) for c in spec["power_coefficients"]],
                        label=name,
                    )
            elif kind == "floor_power":
                keys = set(spec) - {"kind", "c"}
                if keys:
                    raise ValueError(f"unknown keys {sorted(keys)}")
                out[name] = FloorPowerSequence.from_fraction(
                    Fraction(str(spec["c"])), label=name
                )
            elif kind == "table":
                keys = set(spec) - {"kind", "values"}
                if keys:
                    raise ValueError(f"unknown keys {sorted(keys)}")
                out[name] = TableSequence(spec["values"], label=name)
            else:
                raise ValueError(f"unknown sequence kind {kind!r}")
        except (ValueError, KeyError, TypeError) as exc:
            errors.append(f"sequences.{name}: {exc}")
    return out


def parse_config(text: str) -> ConfigDocument:
    """Parse and fully validate a config document; raises ConfigError with
    every violation found."""
    errors: list[str] = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be an object"])
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        errors.append(f"unknown top-level keys {sorted(unknown)}")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        errors.append(
            f"experiment must be one of {sorted(EXPERIMENTS)}, got {experiment!r}"
        )
    irrationals = _parse_irrationals(raw.get("irrationals", {}), errors)
    systems = _parse_systems(raw.get("systems", {}), irrationals, errors)
    observables = _parse_observables(raw.get("observables", {}), errors)
    sequences = _parse_sequences(raw.get("sequences", {}), errors)
    schedule = None
    if "schedule" in raw:
        spec = raw["schedule"]
        try:
            keys = set(spec)
            if keys == {"cutoffs"}:
                schedule = Schedule(tuple(int(c) for c in spec["cutoffs"]))
            elif keys <= {"budget", "base", "factor"} and "budget" in spec:
                schedule = Schedule.geometric(
                    int(spec["budget"]),
                    int(spec.get("base", 1000)),
                    int(spec.get("factor", 2)),
                )
            else:
                raise ValueError("schedule needs either cutoffs or budget")
        except (ValueError, TypeError) as exc:
            errors.append(f"schedule: {exc}")
    tolerances = raw.get("tolerances", {})
    if not all(isinstance(v, (int, float)) for v in tolerances.values()):
        errors.append("tolerances must map names to numbers")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        errors.append("params must be an object")
        params = {}
    doc = ConfigDocument(
        experiment=experiment if isinstance(experiment, str) else "",
        irrationals=irrationals,
        systems=systems,
        observables=observables,
        sequences=sequences,
        schedule=schedule,
        tolerances=dict(tolerances),
        params=params,
    )
    if not errors and experiment in EXPERIMENTS:
        errors.extend(EXPERIMENTS[experiment].validate(doc))
    if errors:
        raise ConfigError(errors)
    return doc


def serialize(doc: ConfigDocument) -> str:
    """Canonical JSON for a config document; parse(serialize(doc)) == doc."""
    raw: dict = {"experiment": doc.experiment}
    if doc.irrationals:
        raw["irrationals"] = {
            name: {"hex": hex(sym.fix)} for name, sym in doc.irrationals.items()
        }
    if doc.systems:
        raw["systems"] = {
            name: {
                "matrix": [list(row) for row in system.matrix],
                "translation": [phase_to_string(p) for p in system.translation],
            }
            for name, system in doc.systems.items()
        }
    if doc.observables:
        raw["observables"] = {
            name: [
                {"index": list(k.m), "amplitude": [v.real, v.imag]}
                for k, v in vec.coeffs.items()
            ]
            for name, vec in doc.observables.items()
        }
    if doc.sequences:
        seqs = {}
        for name, s in doc.sequences.items():
            if isinstance(s, PolynomialSequence):
                seqs[name] = {
                    "kind": "polynomial",
                    "binomial_coefficients": list(s.binomial_coeffs),
                }
            elif isinstance(s, FloorPowerSequence):
                seqs[name] = {"kind": "floor_power", "c": str(s.c)}
            elif isinstance(s, TableSequence):
                seqs[name] = {"kind": "table", "values": list(s.values)}
        raw["sequences"] = seqs
    if doc.schedule is not None:
        raw["schedule"] = {"cutoffs": list(doc.schedule.cutoffs)}
    if doc.tolerances:
        raw["tolerances"] = doc.tolerances
    if doc.params:
        raw["params"] = doc.params
    return json.dumps(raw, indent=1, sort_keys=True)


# ---------------------------------------------------------------------------
# experiment registry: parameter binding and validation per driver


_ZOO_ORBITS = {o.name: o for o in labeled_orbits()}


def _build_orbit(doc: ConfigDocument, spec, errors: list[str], where: str):
    if isinstance(spec, dict) and set(spec) == {"zoo"}:
        orbit = _ZOO_ORBITS.get(spec["zoo"])
        if orbit is None and not errors:
            errors.append(f"{where}: unknown zoo orbit {spec['zoo']!r}")
        return orbit
    if isinstance(spec, dict) and set(spec) <= {"system", "observable", "exponents"}:
        missing = {"system", "observable"} - set(spec)
        if missing:
            errors.append(f"{where}: missing keys {sorted(missing)}")
            return None
        system = doc.systems.get(spec["system"])
        vec = doc.observables.get(spec["observable"])
        seq = doc.sequences.get(spec["exponents"]) if "exponents" in spec else None
        if system is None:
            errors.append(f"{where}: undeclared system {spec['system']!r}")
        if vec is None:
            errors.append(f"{where}: undeclared observable {spec['observable']!r}")
        if "exponents" in spec and seq is None:
            errors.append(f"{where}: undeclared sequence {spec['exponents']!r}")
        if errors or system is None or vec is None:
            return None
        symbols = tuple(
            {s: None for p in system.translation for s in p.irr}
        )
        exponents = seq.eval if seq is not None else None
        return OrbitSpec(
            name=f"{spec['system']}^n {spec['observable']}",
            description="config-defined orbit",
            factory=lambda count: orbit_vectors(system, vec, count, exponents=exponents),
            irrationals=symbols,
        )
    errors.append(f"{where}: expected {{'zoo': name}} or system/observable binding")
    return None


def _need(doc, table: str, name, errors, where: str):
    store = getattr(doc, table)
    if name not in store:
        errors.append(f"{where}: undeclared {table[:-1]} {name!r}")
        return None
    return store[name]


def _parse_box(spec, errors, where: str):
    try:
        return tuple(
            (Fraction(str(lo)), Fraction(str(hi))) for lo, hi in spec
        )
    except (ValueError, TypeError) as exc:
        errors.append(f"{where}: bad box ({exc})")
        return None


class _Experiment:
    def __init__(self, required, optional, builder):
        self.required = set(required)
        self.optional = set(optional)
        self.builder = builder

    def validate(self, doc: ConfigDocument) -> list[str]:
        errors: list[str] = []
        missing = self.required - set(doc.params)
        unknown = set(doc.params) - self.required - self.optional
        if missing:
            errors.append(f"params: missing {sorted(missing)}")
        if unknown:
            errors.append(f"params: unknown {sorted(unknown)}")
        if not errors:
            try:
                self.builder(doc, errors, dry_run=True)
            except Exception as exc:  # validation must not crash
                errors.append(f"params: {exc}")
        return errors

    def run(self, doc: ConfigDocument, threads: int) -> ExperimentReport:
        errors: list[str] = []
        call = self.builder(doc, errors, dry_run=False, threads=threads)
        if errors:
            raise ConfigError(errors)
        return call()


def _tol(doc, key, default):
    return float(doc.tolerances.get(key, default))


def _counterexample_builder(doc, errors, dry_run, threads=1):
    alpha = _need(doc, "irrationals", doc.params.get("alpha"), errors, "params.alpha")
    if dry_run or errors:
        return None
    return lambda: run_counterexample(
        alpha, doc.schedule or Schedule.geometric(), tol=_tol(doc, "tol", 1e-9)
    )


def _vdc_suite_builder(doc, errors, dry_run, threads=1):
    orbit = _build_orbit(doc, doc.params.get("orbit"), errors, "params.orbit")
    if dry_run or errors:
        return None
    return lambda: run_vdc_suite(
        orbit,
        doc.schedule or Schedule.geometric(),
        hypothesis_tol=_tol(doc, "hypothesis_tol", 0.02),
        conclusion_tol=_tol(doc, "conclusion_tol", 0.05),
    )


def _weighted_builder(doc, errors, dry_run, threads=1):
    orbit = _build_orbit(doc, doc.params.get("orbit"), errors, "params.orbit")
    weights = _build_orbit(doc, doc.params.get("weights"), errors, "params.weights")
    if dry_run or errors:
        return None
    return lambda: run_weighted_vdc(
        orbit, weights, doc.schedule or Schedule.geometric(), tol=_tol(doc, "tol", 0.05)
    )


def _orthogonality_builder(doc, errors, dry_run, threads=1):
    orbit_f = _build_orbit(doc, doc.params.get("orbit_f"), errors, "params.orbit_f")
    orbit_g = _build_orbit(doc, doc.params.get("orbit_g"), errors, "params.orbit_g")
    if dry_run or errors:
        return None
    return lambda: run_orthogonality(
        orbit_f, orbit_g, doc.schedule or Schedule.geometric(), tol=_tol(doc, "tol", 0.02)
    )


def _nf_builder(doc, errors, dry_run, threads=1):
    t = _need(doc, "systems", doc.params.get("T"), errors, "params.T")
    s = _need(doc, "systems", doc.params.get("S"), errors, "params.S")
    k = _need(doc, "sequences", doc.params.get("sequence"), errors, "params.sequence")
    f = _need(doc, "observables", doc.params.get("f"), errors, "params.f")
    g = _need(doc, "observables", doc.params.get("g"), errors, "params.g")
    if dry_run or errors:
        return None
    return lambda: run_nf(
        t, s, k, f, g, doc.schedule or Schedule.geometric(), tol=_tol(doc, "tol", 0.05)
    )


def _recurrence_builder(doc, errors, dry_run, threads=1):
    t = _need(doc, "systems", doc.params.get("T"), errors, "params.T")
    s = _need(doc, "systems", doc.params.get("S"), errors, "params.S")
    k = _need(doc, "sequences", doc.params.get("sequence"), errors, "params.sequence")
    box = _parse_box(doc.params.get("box"), errors, "params.box")
    if dry_run or errors:
        return None
    return lambda: run_recurrence(
        t, s, k, box, doc.schedule or Schedule.geometric(), tol=_tol(doc, "tol", 1e-6)
    )


def _rk_builder(doc, errors, dry_run, threads=1):
    alpha = _need(doc, "irrationals", doc.params.get("alpha"), errors, "params.alpha")
    t = _need(doc, "systems", doc.params.get("T"), errors, "params.T")
    s_list = [
        _need(doc, "systems", name, errors, "params.S")
        for name in doc.params.get("S", [])
    ]
    box = _parse_box(doc.params.get("box"), errors, "params.box")
    k = doc.params.get("k", 2)
    if not isinstance(k, int) or k < 2:
        errors.append("params.k: must be an integer >= 2")
    if dry_run or errors:
        return None
    return lambda: run_rk(
        k,
        alpha,
        t,
        s_list,
        box,
        n_max=int(doc.params.get("n_max", 500)),
        resolution=int(doc.params.get("resolution", 2000)),
        threads=threads,
    )


def _single_t_builder(doc, errors, dry_run, threads=1):
    t = _need(doc, "systems", doc.params.get("T"), errors, "params.T")
    s = _need(doc, "systems", doc.params.get("S"), errors, "params.S")
    polys = [
        _need(doc, "sequences", name, errors, "params.polys")
        for name in doc.params.get("polys", [])
    ]
    f = _need(doc, "observables", doc.params.get("f"), errors, "params.f")
    g_list = [
        _need(doc, "observables", name, errors, "params.g")
        for name in doc.params.get("g", [])
    ]
    if not errors and len(polys) != len(g_list):
        errors.append("params: polys and g must have equal length")
    if dry_run or errors:
        return None
    return lambda: run_single_t(
        t, s, polys, f, g_list, doc.schedule or Schedule.geometric(),
        tol=_tol(doc, "tol", 0.05),
    )


def _t1t2_builder(doc, errors, dry_run, threads=1):
    t = _need(doc, "systems", doc.params.get("T"), errors, "params.T")
    r_list = [
        _need(doc, "systems", name, errors, "params.R")
        for name in doc.params.get("R", [])
    ]
    s = _need(doc, "systems", doc.params.get("S"), errors, "params.S")
    w = _need(doc, "systems", doc.params.get("W"), errors, "params.W")
    polys = [
        _need(doc, "sequences", name, errors, "params.polys")
        for name in doc.params.get("polys", [])
    ]
    f = _need(doc, "observables", doc.params.get("f"), errors, "params.f")
    h_list = [
        _need(doc, "observables", name, errors, "params.h")
        for name in doc.params.get("h", [])
    ]
    g_list = [
        _need(doc, "observables", name, errors, "params.g")
        for name in doc.params.get("g", [])
    ]
    if not errors and (len(polys) != len(g_list) or len(r_list) != len(h_list)):
        errors.append("params: polys/g and R/h must pair up")
    if dry_run or errors:
        return None
    return lambda: run_t1t2(
        t, r_list, s, w, polys, f, h_list, g_list,
        doc.schedule or Schedule((500, 1000, 2000)),
        tol=_tol(doc, "tol", 0.05),
        audit_exact_n=int(doc.params.get("audit_exact_n", 200)),
    )


EXPERIMENTS = {
    "counterexample": _Experiment({"alpha"}, set(), _counterexample_builder),
    "vdc_suite": _Experiment({"orbit"}, set(), _vdc_suite_builder),
    "weighted_vdc": _Experiment({"orbit", "weights"}, set(), _weighted_builder),
    "orthogonality": _Experiment({"orbit_f", "orbit_g"}, set(), _orthogonality_builder),
    "nf": _Experiment({"T", "S", "sequence", "f", "g"}, set(), _nf_builder),
    "recurrence": _Experiment({"T", "S", "sequence", "box"}, set(), _recurrence_builder),
    "rk": _Experiment(
        {"alpha", "T", "S", "box"}, {"k", "n_max", "resolution"}, _rk_builder
    ),
    "single_T": _Experiment({"T", "S", "polys", "f", "g"}, set(), _single_t_builder),
    "t1t2": _Experiment(
        {"T", "S", "W", "polys", "f", "g"}, {"R", "h", "audit_exact_n"}, _t1t2_builder
    ),
}


# ---------------------------------------------------------------------------
# report emission


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_outputs(report: ExperimentReport, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(
        json.dumps(report.to_json_dict(), indent=1, sort_keys=True) + "\n"
    )
    metrics_path = out_dir / "metrics.csv"
    lines = ["N,h_or_n,metric,value,error_bound"]
    for r in report.rows:
        lines.append(
            ",".join(
                [
                    str(r["N"]),
                    "" if r["h_or_n"] is None else str(r["h_or_n"]),
                    r["metric"],
                    _fmt(r["value"]),
                    _fmt(r["error_bound"]),
                ]
            )
        )
    metrics_path.write_text("\n".join(lines) + "\n")
    decay_path = out_dir / "decay.csv"
    lines = [f"N,{report.headline}"]
    for r in report.rows:
        if r["metric"] == report.headline:
            lines.append(f"{r['N']},{_fmt(r['value'])}")
    decay_path.write_text("\n".join(lines) + "\n")
    return [report_path, metrics_path, decay_path]


_EXIT = {"pass": 0, "fail": 2, "abstain": 3}


def run(config_text: str, out_dir: Path, threads: int = 1, seed_check: bool = False) -> int:
    """Parse, dispatch, write report.json / metrics.csv / decay.csv, and
    map the verdict to the exit code (0 pass, 2 fail, 3 abstain)."""
    doc = parse_config(config_text)
    experiment = EXPERIMENTS[doc.experiment]
    report = experiment.run(doc, threads)
    paths = write_outputs(report, out_dir)
    print(f"{report.name}: {report.verdict} ({report.wall_clock:.2f} s)")
    for check in report.checks:
        mark = "ok" if check["passed"] else "FAILED"
        print(f"  [{check['kind']}] {check['description']}: {mark}")
    for note in report.notes:
        print(f"  note: {note}")
    if seed_check:
        first = {p.name: p.read_bytes() for p in paths}
        report2 = experiment.run(doc, threads)
        paths2 = write_outputs(report2, out_dir)
        second = {p.name: p.read_bytes() for p in paths2}
        if first != second:
            print("seed-check: reruns differ", file=sys.stderr)
            return 2
        print("seed-check: outputs byte-identical across reruns")
    return _EXIT[report.verdict]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vdclab",
        description="correlation profiles, spectral classification, and "
        "recurrence experiments on affine torus systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--out", type=Path, required=True)
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument(
        "--seed-check",
        action="store_true",
        help="run twice and verify byte-identical outputs",
    )
    p_val = sub.add_parser("validate", help="validate a config document")
    p_val.add_argument("config", type=Path)
    sub.add_parser("zoo", help="list built-in labeled systems and orbits")
    args = parser.parse_args(argv)

    if args.command == "zoo":
        for entry in zoo_listing():
            extra = (
                f" [expected: {entry['expected']}]"
                if entry.get("expected")
                else ""
            )
            print(f"{entry['kind']:7s} {entry['name']:22s} {entry['description']}{extra}")
        return 0
    if args.command == "validate":
        try:
            parse_config(args.config.read_text())
        except ConfigError as exc:
            for v in exc.violations:
                print(f"violation: {v}", file=sys.stderr)
            return 1
        print("valid")
        return 0
    # run
    try:
        return run(
            args.config.read_text(), args.out, threads=args.threads,
            seed_check=args.seed_check,
        )
    except ConfigError as exc:
        for v in exc.violations:
            print(f"violation: {v}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
