"""Command-line front end.

Exit codes: 0 ok, 2 bad input, 3 signaling input, 4 solver inconsistency,
5 derivation mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .derive import derive_delta_bounds
from .files import ScenarioFormatError, dump_scenario, load_scenario, scenario_to_json
from .lp import LpError
from .measures import MeasureError, delta_min_lp, gamma_min_lp, s_value
from .rational import format_decimal, format_rational
from .rng import SplitMix64, random_scenario
from .scenario import (ExpectationVector, Kind, Scenario, ScenarioError, SignalingError,
                       check_no_signaling, from_expectations, to_expectations)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SIGNALING = 3
EXIT_INCONSISTENT = 4
EXIT_MISMATCH = 5


def _q(x):
    return None if x is None else format_rational(x)


def _human(x) -> str:
    if x is None:
        return "n/a"
    return f"{format_rational(x)} ({format_decimal(x)})"


@dataclass
class Analysis:
    scenario: Scenario
    s_value: Fraction | None
    gamma: object
    delta: object

    @property
    def equal(self) -> bool:
        return self.gamma.value == self.delta.value

    def problems(self) -> list[str]:
        """Disagreements that can only come from a solver bug."""
        out = []
        if self.scenario.kind is Kind.GENERIC:
            return out
        if not self.equal:
            out.append(f"gamma_min {self.gamma.value} != delta_min {self.delta.value}")
        if not self.gamma.agree:
            out.append(f"gamma_min {self.gamma.value} != closed form {self.gamma.closed_form}")
        if not self.delta.agree:
            out.append(f"delta_min {self.delta.value} != closed form {self.delta.closed_form}")
        return out

    def to_json(self, witnesses: bool = False) -> dict:
        s = self.scenario
        out = scenario_to_json(s)
        out["no_signaling"] = {"ok": True, "violations": []}
        out["s_value"] = _q(self.s_value)
        out["gamma_min"] = {"value": _q(self.gamma.value),
                            "closed_form": _q(self.gamma.closed_form),
                            "agree": self.gamma.agree}
        out["delta_min"] = {"value": _q(self.delta.value),
                            "closed_form": _q(self.delta.closed_form),
                            "agree": self.delta.agree,
                            "extended_delta": self.delta.extended_delta}
        out["equal"] = self.equal
        if witnesses:
            qd, cp = self.gamma.witness, self.delta.witness
            out["witnesses"] = {
                "quasi_distribution": {
                    "properties": list(qd.properties),
                    "mass": _q(qd.mass),
                    "atoms": {k: _q(v) for k, v in qd.as_strings().items()},
                },
                "coupling": {
                    "variables": [str(v) for v in cp.variables],
                    "delta": _q(cp.delta),
                    "atoms": {k: _q(v) for k, v in cp.as_strings().items()},
                },
            }
        return out

    def to_text(self, witnesses: bool = False) -> str:
        s = self.scenario
        lines = [f"kind: {s.kind.value}", "tables:"]
        for t in s.tables:
            probs = "  ".join(f"{lab}={format_rational(p)}" for lab, p in zip(("++", "+-", "-+", "--"), t.probs))
            lines.append(f"  {t.context} ({t.left.property}, {t.right.property}): {probs}")
        lines.append("no-signaling: ok")
        if self.s_value is not None:
            lines.append(f"S: {_human(self.s_value)}")
        lines.append(f"gamma_min: {_human(self.gamma.value)}"
                     + ("" if self.gamma.closed_form is None else f"   closed form {_human(self.gamma.closed_form)}"))
        lines.append(f"delta_min: {_human(self.delta.value)}"
                     + ("" if self.delta.closed_form is None else f"   closed form {_human(self.delta.closed_form)}"))
        if self.delta.extended_delta:
            lines.append("  (delta sums over every pair of copies of a property seen in 3+ contexts)")
        lines.append(f"equal: {'yes' if self.equal else 'no'}")
        if witnesses:
            qd, cp = self.gamma.witness, self.delta.witness
            lines.append(f"quasi-distribution over ({', '.join(qd.properties)}), mass {_human(qd.mass)}:")
            for k, v in qd.as_strings().items():
                lines.append(f"  {k}: {format_rational(v)}")
            lines.append(f"coupling over ({', '.join(str(v) for v in cp.variables)}):")
            for k, v in cp.as_strings().items():
                lines.append(f"  {k}: {format_rational(v)}")
        return "\n".join(lines)


def analyze(s: Scenario) -> Analysis:
    gamma = gamma_min_lp(s)
    delta = delta_min_lp(s)
    return Analysis(s, s_value(s), gamma, delta)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _load(path) -> Scenario:
    try:
        return load_scenario(path)
    except OSError as exc:
        raise ScenarioFormatError(f"cannot read {path}: {exc.strerror}") from None


def _signaling_text(report) -> str:
    lines = ["signaling input: marginals differ between contexts"]
    for v in report.violations:
        lines.append(f"  {v.property}: contexts {v.context1!r} vs {v.context2!r}, "
                     f"P[+] differs by {format_rational(v.difference)}")
    return "\n".join(lines)


def _signaling_json(report) -> dict:
    return {"ok": report.ok,
            "violations": [{"property": v.property, "context1": v.context1,
                            "context2": v.context2, "difference": format_rational(v.difference)}
                           for v in report.violations]}


def cmd_analyze(args, out, err) -> int:
    s = _load(args.file)
    report = check_no_signaling(s)
    if not report.ok:
        if args.json:
            out.write(_dumps({"no_signaling": _signaling_json(report)}) + "\n")
        err.write(_signaling_text(report) + "\n")
        return EXIT_SIGNALING
    a = analyze(s)
    if args.json:
        out.write(_dumps(a.to_json(args.witness)) + "\n")
    else:
        out.write(a.to_text(args.witness) + "\n")
    problems = a.problems()
    if problems:
        err.write("solver inconsistency: " + "; ".join(problems) + "\n")
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_check(args, out, err) -> int:
    s = _load(args.file)
    report = check_no_signaling(s)
    if not report.ok:
        err.write(_signaling_text(report) + "\n")
        return EXIT_SIGNALING
    out.write(f"ok: {s.kind.value} scenario, {len(s.properties)} properties, "
              f"{len(s.tables)} tables, no-signaling holds\n")
    return EXIT_OK


# -- random ------------------------------------------------------------------

def _analyze_one(s: Scenario):
    a = analyze(s)
    return a.gamma.value, a.delta.value, a.s_value, a.problems()


def worker_count() -> int:
    raw = os.environ.get("CONTEXTURE_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ScenarioError("CONTEXTURE_THREADS must be an integer") from None
    return 1


def _discrepant(s: Scenario) -> bool:
    return bool(analyze(s).problems())


def _simplicity(q: Fraction):
    return q.denominator, abs(q.numerator), q < 0


def minimize_scenario(s: Scenario, failing=_discrepant) -> Scenario:
    """Greedy simplification keeping ``failing(s)`` true.

    Each expectation (correlation or marginal) is replaced by the simplest
    value from 0, +/-1, +/-1/2, ... that keeps the tables valid and the
    failure present.
    """
    e = to_expectations(s)
    pairs = {t.context: (t.left.property, t.right.property) for t in s.tables}
    current = s
    candidates = [Fraction(0), Fraction(1), Fraction(-1)]
    for den in (2, 4, 8, 16):
        candidates += [Fraction(k, den) for k in range(-den + 1, den) if Fraction(k, den).denominator == den]
    for field_name in ("marginals", "pair_correlations"):
        for key in list(getattr(e, field_name)):
            old = getattr(e, field_name)[key]
            for c in candidates:
                if _simplicity(c) >= _simplicity(old):
                    continue
                parts = {"pair_correlations": dict(e.pair_correlations), "marginals": dict(e.marginals)}
                parts[field_name][key] = c
                trial_e = ExpectationVector(**parts)
                try:
                    trial = from_expectations(s.kind, trial_e, pairs)
                except ScenarioError:
                    continue
                if failing(trial):
                    e, current = trial_e, trial
                    break
    return current


def cmd_random(args, out, err) -> int:
    kind = Kind.parse(args.kind)
    if kind is Kind.GENERIC:
        raise ScenarioError("random scenarios are only defined for lg and epr")
    if args.count < 1:
        raise ScenarioError("--count must be at least 1")
    if args.denominator_bound < 2:
        raise ScenarioError("--denominator-bound must be at least 2")
    rng = SplitMix64(args.seed)
    scenarios = [random_scenario(rng, kind, args.denominator_bound) for _ in range(args.count)]
    workers = worker_count()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_analyze_one, scenarios, chunksize=32))
    else:
        results = map(_analyze_one, scenarios)
    max_gap = Fraction(0)
    contextual = 0
    for index, (s, (gamma, delta, sv, problems)) in enumerate(zip(scenarios, results)):
        gap = abs(gamma - delta)
        max_gap = max(max_gap, gap)
        contextual += gamma > 0
        if args.json:
            row = {"index": index, "s_value": _q(sv), "gamma_min": _q(gamma),
                   "delta_min": _q(delta), "equal": gamma == delta}
            out.write(json.dumps(row) + "\n")
        else:
            out.write(f"#{index}  S={_human(sv)}  gamma_min={_human(gamma)}  delta_min={_human(delta)}\n")
        if problems:
            path = Path(args.repro_dir) / f"contexture-repro-{args.seed}-{index}.json"
            path.write_text(dump_scenario(minimize_scenario(s)), encoding="utf-8")
            err.write(f"solver inconsistency on scenario {index}: {'; '.join(problems)}\n"
                      f"reproducer written to {path}\n")
            return EXIT_INCONSISTENT
    summary = {"count": args.count, "kind": kind.value, "seed": args.seed,
               "denominator_bound": args.denominator_bound,
               "max_discrepancy": _q(max_gap),
               "contextual": contextual, "noncontextual": args.count - contextual}
    if args.json:
        out.write(json.dumps({"summary": summary}) + "\n")
    else:
        out.write(f"count: {args.count}  max |gamma_min - delta_min|: {_q(max_gap)}  "
                  f"contextual: {contextual}  noncontextual: {args.count - contextual}\n")
    return EXIT_OK


# -- derive ------------------------------------------------------------------

def cmd_derive(args, out, err) -> int:
    try:
        kind = Kind.parse(args.kind)
    except ScenarioError:
        kind = None
    if kind not in (Kind.LEGGETT_GARG, Kind.EPR_BELL):
        raise ScenarioError(f"derive supports lg and epr, not {args.kind!r}")
    if args.samples < 0:
        raise ScenarioError("--samples must be nonnegative")
    report = derive_delta_bounds(kind, samples=args.samples, seed=args.seed)
    if args.json:
        out.write(_dumps(report.as_dict()) + "\n")
    else:
        lines = [f"kind: {kind.value}",
                 f"connection system: {report.nontrivial_count} non-trivial + "
                 f"{report.trivial_count} trivial rows",
                 f"derived system equivalent to published bounds: "
                 f"{'yes' if report.equivalent else 'no'}"]
        for name, check in (("published Delta system", report.projection_check),
                            ("connection system", report.connection_check)):
            if check is not None:
                lines.append(f"{name} vs coupling polytope: vertices sound "
                             f"{'yes' if check.vertices_sound else 'no'}, "
                             f"{check.membership_failures}/{check.membership_samples} samples outside")
        lines.append(f"derived system ({len(report.derived_system)} rows):")
        lines += ["  " + r for r in report.derived_system.format()]
        out.write("\n".join(lines) + "\n")
    if not report.ok:
        err.write("derivation mismatch\n")
        return EXIT_MISMATCH
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contexture",
                                     description="Exact contextuality measures for pairwise binary systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="compute both measures for a scenario file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.add_argument("--witness", action="store_true", help="include the optimal quasi-distribution and coupling")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("random", help="compare the measures on random no-signaling scenarios")
    p.add_argument("--kind", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--denominator-bound", type=int, default=64)
    p.add_argument("--json", action="store_true")
    p.add_argument("--repro-dir", default=".", help="where a failing scenario is written")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("derive", help="eliminate connection correlations and compare with the published bounds")
    p.add_argument("kind")
    p.add_argument("--json", action="store_true")
    p.add_argument("--samples", type=int, default=200, help="membership samples per projection check (0 skips)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("check", help="validate a scenario file and its no-signaling condition")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out, err)
    except (LpError, MeasureError) as exc:
        err.write(f"solver inconsistency: {exc}\n")
        return EXIT_INCONSISTENT
    except SignalingError as exc:
        err.write(_signaling_text(exc.report) + "\n")
        return EXIT_SIGNALING
    except ScenarioFormatError as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (ScenarioError, ValueError) as exc:
        err.write(f"input error: {exc}\n")
        return EXIT_INPUT


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
