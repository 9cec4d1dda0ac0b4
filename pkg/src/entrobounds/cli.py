"""Command-line front end.

    entrobounds bounds FILE | --builtin NAME --x V
    entrobounds sweep --builtin NAME --from A --to B --step S --out F
    entrobounds verify --seed N --trials T
    entrobounds accinfo FILE --outcomes K --restarts R --seed N

Exit codes: 0 all invariants pass, 1 invariant violation (or dimension
guard), 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import accinfo, bounds, scenarios
from .exceptions import DimensionTooLarge, EntroBoundsError, InvariantViolation, ParseError
from .instruments import Instrument, Operation
from .qstates import Ensemble, ProbVector
from .randgen import random_density, random_instrument, rng_for

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

SWEEP_HEADER = ("x", "I_c", "B_Hlv", "B_SWW", "B_Hall", "B_nub", "b_nlb", "b_Scu", "b_subent", "b1", "b2")
SWEEP_FIELDS = ("i_c", "b_hlv", "b_sww", "b_hall", "b_nub", "b_nlb", "b_scu", "b_subent", "b1", "b2")


# ---------------------------------------------------------------- scenario files

def encode_matrix(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def _decode_matrix(obj, d: int, path: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != d:
        raise ParseError(f"{path}: expected a list of {d} rows")
    out = np.empty((d, d), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != d:
            raise ParseError(f"{path}[{i}]: expected a row of {d} entries")
        for j, z in enumerate(row):
            if (not isinstance(z, list) or len(z) != 2
                    or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in z)):
                raise ParseError(f"{path}[{i}][{j}]: expected a [re, im] pair of numbers")
            out[i, j] = complex(float(z[0]), float(z[1]))
    return out


def scenario_to_dict(s: scenarios.Scenario) -> dict:
    e, inst = s.ensemble, s.instrument
    return {
        "dimension": e.dim,
        "alphabet": list(e.labels),
        "prior": [float(p) for p in e.weights],
        "letter_states": [encode_matrix(r) for r in e.states],
        "outcomes": list(inst.labels),
        "instrument": [[encode_matrix(k) for k in op.kraus] for op in inst.ops],
    }


def _require(doc: dict, key: str, kind, path: str = ""):
    if key not in doc:
        raise ParseError(f"{path}{key}: missing field")
    val = doc[key]
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ParseError(f"{path}{key}: expected {getattr(kind, '__name__', kind)}")
    return val


def scenario_from_dict(doc) -> scenarios.Scenario:
    if not isinstance(doc, dict):
        raise ParseError("<root>: expected an object")
    if "builtin" in doc:
        name = doc["builtin"]
        if name not in scenarios.BUILTINS:
            raise ParseError(f"builtin: unknown scenario {name!r}; choose from {sorted(scenarios.BUILTINS)}")
        params = doc.get("parameters", {})
        if not isinstance(params, dict):
            raise ParseError("parameters: expected an object")
        x = params.get("x", 0.0)
        if not isinstance(x, (int, float)) or isinstance(x, bool) or x < 0:
            raise ParseError("parameters.x: expected a nonnegative number")
        return scenarios.builtin(name, float(x))

    d = _require(doc, "dimension", int)
    if d < 1:
        raise ParseError("dimension: must be positive")
    alphabet = _require(doc, "alphabet", list)
    prior = _require(doc, "prior", list)
    states = _require(doc, "letter_states", list)
    outcomes_raw = _require(doc, "instrument", list)
    if len(prior) != len(alphabet):
        raise ParseError(f"prior: {len(prior)} entries for {len(alphabet)} letters")
    if len(states) != len(alphabet):
        raise ParseError(f"letter_states: {len(states)} matrices for {len(alphabet)} letters")
    for i, p in enumerate(prior):
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise ParseError(f"prior[{i}]: expected a number")
    rhos = [_decode_matrix(m, d, f"letter_states[{i}]") for i, m in enumerate(states)]
    ops = []
    for w, fam in enumerate(outcomes_raw):
        if not isinstance(fam, list) or not fam:
            raise ParseError(f"instrument[{w}]: expected a nonempty list of Kraus matrices")
        ops.append(Operation(np.array([_decode_matrix(k, d, f"instrument[{w}][{k_i}]") for k_i, k in enumerate(fam)])))
    labels = doc.get("outcomes", [str(w) for w in range(len(ops))])
    if not isinstance(labels, list) or len(labels) != len(ops):
        raise ParseError(f"outcomes: expected {len(ops)} labels")
    try:
        ens = Ensemble(ProbVector(tuple(str(a) for a in alphabet), np.array(prior, dtype=float)), rhos)
    except EntroBoundsError as exc:
        raise ParseError(f"letter_states/prior: {exc}") from None
    try:
        inst = Instrument(tuple(str(w) for w in labels), tuple(ops))
    except EntroBoundsError as exc:
        raise ParseError(f"instrument: {exc}") from None
    return scenarios.Scenario(ens, inst, "file")


def load_scenario(path: str) -> scenarios.Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(doc)


def dump_scenario(s: scenarios.Scenario, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(s), fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------- formatting

def fmt(v) -> str:
    if v is None:
        return "nan"
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def format_report(r: bounds.BoundsReport) -> list[str]:
    lines = [f"{name:<20s} {fmt(getattr(r, field))}" for name, field in zip(SWEEP_HEADER[1:], SWEEP_FIELDS)]
    lines.append(f"{'I_q(eta)':<20s} {fmt(r.iq_eta)}")
    if not r.hall_available:
        lines.append("average state singular: Hall-dual quantities unavailable")
    if r.completed_outcomes:
        lines.append("zero-probability outcomes: " + ", ".join(r.completed_outcomes))
    for name, slack in r.checks():
        verdict = "PASS" if slack >= -bounds.SLACK else "FAIL"
        lines.append(f"{verdict} {name:<18s} slack {fmt(slack)}")
    return lines


def sweep_grid(a: float, b: float, step: float) -> list[float]:
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return [a + k * step for k in range(n)]


# ---------------------------------------------------------------- commands

def cmd_bounds(s: scenarios.Scenario, out=None) -> int:
    out = out or sys.stdout
    r = bounds.full_report(s.ensemble, s.instrument)
    for line in format_report(r):
        print(line, file=out)
    return EXIT_VIOLATION if r.violations() else EXIT_OK


def cmd_sweep(name: str, a: float, b: float, step: float, path: str) -> int:
    rows = []
    for x in sweep_grid(a, b, step):
        s = scenarios.builtin(name, x)
        r = bounds.full_report(s.ensemble, s.instrument)
        rows.append([fmt(x)] + [fmt(getattr(r, f)) for f in SWEEP_FIELDS])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        w.writerows(rows)
    return EXIT_OK


class _Suite:
    def __init__(self, name: str):
        self.name = name
        self.count = 0
        self.worst = math.inf
        self.failures = 0

    def record(self, slack: float, tol: float = bounds.SLACK):
        self.count += 1
        self.worst = min(self.worst, slack)
        if slack < -tol:
            self.failures += 1

    def line(self) -> str:
        verdict = "PASS" if self.failures == 0 else "FAIL"
        return f"{verdict} {self.name:<22s} checks {self.count:6d} failures {self.failures:4d} worst slack {self.worst:.3e}"


def run_verify(seed: int, trials: int) -> list[_Suite]:
    suites = {k: _Suite(k) for k in ("ordering", "identities", "uhlmann", "groenewold_lindblad", "iq_inequality")}
    rng = rng_for(seed)
    for _ in range(trials):
        d = int(rng.integers(2, 4))
        s = scenarios.random_scenario(rng, d, int(rng.integers(2, 5)), int(rng.integers(2, 5)), int(rng.integers(1, 3)))
        e, inst = s.ensemble, s.instrument
        r = bounds.full_report(e, inst)
        for _, slack in r.checks():
            suites["ordering"].record(slack)

        m = bounds.measure(e, inst)
        idt = bounds.chi_identities(e, inst, m)
        tri = bounds.tripartite_final(e, inst, m)
        direct, sym = bounds.sww_forms(e, inst, m)
        gaps = [idt.max_gap(), tri.max_gap(), tri.tensf_residual, abs(direct - sym)]
        g = bounds.gamma_channel_check(e, m.povm)
        gaps += [g.joint_residual, g.product_residual]
        for gap in gaps:
            suites["identities"].record(-gap)
        suites["identities"].record(idt.varineq_slack)
        suites["identities"].record(idt.aprioribound_slack)
        suites["identities"].record(g.slack)

        rho, phi = random_density(rng, d), random_density(rng, d)
        suites["uhlmann"].record(bounds.uhlmann_slack(inst, rho, phi))

        single = random_instrument(rng, d, int(rng.integers(2, 4)), 1)
        suites["groenewold_lindblad"].record(bounds.iq_gain(single, random_density(rng, d)))
        lhs, ic = bounds.iqineq_terms(e, inst)
        suites["iq_inequality"].record(lhs - ic)
    return list(suites.values())


def cmd_verify(seed: int, trials: int, out=None) -> int:
    out = out or sys.stdout
    suites = run_verify(seed, trials)
    print(f"seed {seed} trials {trials}", file=out)
    for s in suites:
        print(s.line(), file=out)
    return EXIT_OK if all(s.failures == 0 for s in suites) else EXIT_VIOLATION


def cmd_accinfo(s: scenarios.Scenario, outcomes: int | None, restarts: int, seed: int, out=None) -> int:
    out = out or sys.stdout
    e = s.ensemble
    res = accinfo.accessible_info(e, outcomes, restarts, seed)
    lo, hi = accinfo.bracket(e)
    print(f"accessible_info {fmt(res.value)}", file=out)
    print(f"bracket [{fmt(lo)}, {fmt(hi)}]", file=out)
    for label, el in zip(res.povm.labels, res.povm.elements):
        print(f"E({label}) = {json.dumps(encode_matrix(np.round(el, 12) + 0.0))}", file=out)
    ok = lo - bounds.SLACK <= res.value <= hi + bounds.SLACK
    return EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _finite_float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("expected a finite number")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="entrobounds", description="Entropy bounds for quantum measurements.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bounds", help="print the bound report of a scenario")
    b.add_argument("file", nargs="?")
    b.add_argument("--builtin", choices=sorted(scenarios.BUILTINS))
    b.add_argument("--x", type=_finite_float, default=0.0)

    s = sub.add_parser("sweep", help="tabulate all bounds of a builtin over a grid of x")
    s.add_argument("--builtin", required=True, choices=sorted(scenarios.BUILTINS))
    s.add_argument("--from", dest="x_min", type=_finite_float, required=True)
    s.add_argument("--to", dest="x_max", type=_finite_float, required=True)
    s.add_argument("--step", type=_finite_float, required=True)
    s.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run the invariant suites on random scenarios")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=100)

    a = sub.add_parser("accinfo", help="maximize I_c over rank-one POVMs")
    a.add_argument("file")
    a.add_argument("--outcomes", type=int, default=None)
    a.add_argument("--restarts", type=int, default=4)
    a.add_argument("--seed", type=int, default=0)
    return p


def _scenario_arg(args, parser) -> scenarios.Scenario:
    if args.builtin is not None:
        if args.file is not None:
            parser.error("give either a scenario file or --builtin, not both")
        return scenarios.builtin(args.builtin, args.x)
    if args.file is None:
        parser.error("a scenario file or --builtin is required")
    return load_scenario(args.file)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "bounds":
            return cmd_bounds(_scenario_arg(args, parser))
        if args.command == "sweep":
            if args.step <= 0:
                parser.error("--step must be positive")
            if args.x_min > args.x_max:
                parser.error("--from must not exceed --to")
            if args.x_min < 0:
                parser.error("--from must be nonnegative")
            return cmd_sweep(args.builtin, args.x_min, args.x_max, args.step, args.out)
        if args.command == "verify":
            if args.trials < 1:
                parser.error("--trials must be at least 1")
            return cmd_verify(args.seed, args.trials)
        if args.command == "accinfo":
            if args.restarts < 1:
                parser.error("--restarts must be at least 1")
            return cmd_accinfo(load_scenario(args.file), args.outcomes, args.restarts, args.seed)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimensionTooLarge, InvariantViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EntroBoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
