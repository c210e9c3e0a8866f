"""Command-line surface.

Exit codes: 0 success / expectation met; 1 expectation mismatch or
refusal; 2 input error; 3 internal three-way-equivalence violation
(always a bug, never a property of the input).
"""

from __future__ import annotations

import argparse
import json
import sys

from gmpy2 import mpq

from .consistency import (NotRepresentableError, TheoremViolationError,
                          decompose, epsilon, theorem_main_report,
                          validate_decomposition)
from .cones import dd_convert
from .corpus import (CorpusError, build_scenario, corpus_names,
                     scenario_from_json)
from .market import k_cone
from .risk import RiskError, UnsupportedEvaluation, rho
from .scalars import parse_scalar, scalar_to_json
from .space import (EnumerationCapExceeded, Measure, RandomVec, SpaceError,
                    StoppingTime)
from .stability import (UndefinedPastingError, crucial_claim_check,
                        lifted_acceptance_dual, paste, predictable_preimage,
                        vstability_witness_search)

OK, MISMATCH, INPUT_ERROR, THEOREM_VIOLATION = 0, 1, 2, 3


class CliError(Exception):
    pass


def _load_scenario(args):
    sources = [s for s in (args.corpus, args.scenario) if s]
    if len(sources) != 1:
        raise CliError("give exactly one of --corpus or --scenario")
    if args.corpus:
        try:
            return build_scenario(args.corpus, numeraire=args.numeraire)
        except CorpusError as e:
            raise CliError(str(e))
    try:
        with open(args.scenario) as fh:
            data = json.load(fh)
        return scenario_from_json(data)
    except (OSError, ValueError, KeyError, SpaceError, RiskError) as e:
        raise CliError(f"cannot load scenario: {e}")


def _parse_claim(space, text):
    try:
        vals = json.loads(text)
    except ValueError:
        try:
            with open(text) as fh:
                vals = json.load(fh)
        except (OSError, ValueError) as e:
            raise CliError(f"claim is neither inline JSON nor a file: {e}")
    if not isinstance(vals, list) or len(vals) != space.n:
        raise CliError(f"claim needs {space.n} scalar entries")
    try:
        return RandomVec.scalar(tuple(parse_scalar(v) for v in vals))
    except (ValueError, TypeError) as e:
        raise CliError(f"bad claim entry: {e}")


def _parse_measure(space, text):
    claim = _parse_claim(space, text)
    try:
        return Measure(tuple(v[0] for v in claim.values))
    except (ValueError, SpaceError) as e:
        raise CliError(f"bad measure: {e}")


def _emit(args, payload_json: dict, text_lines):
    if args.json:
        print(json.dumps(payload_json, indent=2))
    else:
        for line in text_lines:
            print(line)


def _fmt_rv(rv) -> str:
    return "(" + ", ".join(str(v[0]) for v in rv.values) + ")"


def cmd_check(args) -> int:
    spec = _load_scenario(args)
    report = theorem_main_report(spec.risk_measure(), spec.V)
    _emit(args, report.to_json(), [
        f"scenario: {spec.name}",
        f"time_consistent: {report.time_consistent}",
        f"representable:   {report.representable}",
        f"dual_stable:     {report.dual_stable}",
        f"agreement:       {report.agreement}",
    ])
    if args.expect:
        want = [w.strip().lower() == "true" for w in args.expect.split(",")]
        got = [report.time_consistent, report.representable,
               report.dual_stable]
        if want != got:
            print(f"expectation mismatch: wanted {want}, got {got}",
                  file=sys.stderr)
            return MISMATCH
    return OK


def cmd_eval(args) -> int:
    spec = _load_scenario(args)
    rm = spec.risk_measure()
    X = _parse_claim(spec.space, args.claim)
    rv = rho(rm, args.t, X)
    lines = [f"rho_{args.t} = {_fmt_rv(rv)}"]
    payload = {"rho": [scalar_to_json(v[0]) for v in rv.values]}
    if args.t < spec.space.horizon:
        ev = epsilon(rm, spec.V, args.t, X)
        lines.append(f"epsilon_{args.t} = {_fmt_rv(ev)}")
        payload["epsilon"] = [scalar_to_json(v[0]) for v in ev.values]
    _emit(args, payload, lines)
    return OK


def cmd_decompose(args) -> int:
    spec = _load_scenario(args)
    rm = spec.risk_measure()
    X = _parse_claim(spec.space, args.claim)
    try:
        pis = decompose(rm, spec.V, X)
    except NotRepresentableError as e:
        print(f"refused: {e}", file=sys.stderr)
        return MISMATCH
    valid = validate_decomposition(rm, spec.V, X, pis)
    payload = {"portfolios": [[scalar_to_json(x) for x in pi] for pi in pis],
               "validated": valid}
    lines = [f"pi_{t} = ({', '.join(str(x) for x in pi)})"
             for t, pi in enumerate(pis)] + [f"validated: {valid}"]
    _emit(args, payload, lines)
    return OK if valid else THEOREM_VIOLATION


def cmd_paste(args) -> int:
    spec = _load_scenario(args)
    Q = _parse_measure(spec.space, args.q)
    W = _parse_measure(spec.space, args.qprime)
    try:
        tvals = json.loads(args.tau)
        if isinstance(tvals, int):
            tvals = [tvals] * spec.space.n
        tau = StoppingTime(tuple(int(v) for v in tvals), spec.space)
    except (ValueError, SpaceError) as e:
        raise CliError(f"bad stopping time: {e}")
    pasted = paste(spec.space, Q, W, tau)
    _emit(args, {"pasted": [scalar_to_json(w) for w in pasted.weights]},
          ["pasted = (" + ", ".join(str(w) for w in pasted.weights) + ")"])
    return OK


def cmd_duals(args) -> int:
    spec = _load_scenario(args)
    rm = spec.risk_measure()
    t = args.t
    D = lifted_acceptance_dual(rm, spec.V)
    kt = k_cone(rm, spec.V, t)
    pre = dd_convert(predictable_preimage(D, t))
    claim = crucial_claim_check(rm, spec.V, t)
    payload = {
        "dual_generators": [[scalar_to_json(x) for x in g]
                            for g in D.cone.generators],
        "k_cone_generators": [[scalar_to_json(x) for x in g]
                              for g in kt.generators],
        "preimage_generators": [[scalar_to_json(x) for x in g]
                                for g in pre.generators],
        "crucial_claim": claim.holds,
    }
    lines = [f"A_0(V)* generators: {len(D.cone.generators)}",
             f"K_{t} generators: {len(kt.generators)}",
             f"pre-image hull generators: {len(pre.generators)}",
             f"K = (M)* identity: {claim.holds}"]
    if not claim.holds:
        lines.append(claim.note)
    _emit(args, payload, lines)
    return OK if claim.holds else THEOREM_VIOLATION


def cmd_witness(args) -> int:
    spec = _load_scenario(args)
    rm = spec.risk_measure()
    w = vstability_witness_search(rm, spec.V)
    if w is None:
        _emit(args, {"witness": None}, ["no pasting witness found"])
        return OK
    _emit(args, {"witness": w.to_json()}, [
        f"tau = {list(w.tau.values)}",
        f"Q = ({', '.join(str(x) for x in w.Q.weights)})",
        f"Q' = ({', '.join(str(x) for x in w.Qprime.weights)})",
        f"pasted = ({', '.join(str(x) for x in w.pasted.weights)})",
        f"violated: {w.violated}",
    ])
    return OK


def cmd_corpus(args) -> int:
    if args.action == "list":
        for name in corpus_names():
            print(name)
        return OK
    spec = build_scenario(args.name, numeraire=args.numeraire)
    print(json.dumps(spec.to_json(), indent=2))
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="conerisk",
        description="exact deciders for dynamic coherent risk measures: "
                    "time consistency, representability and dual stability")
    sub = p.add_subparsers(dest="command", required=True)

    def add_common(sp, needs_t=False, needs_claim=False):
        sp.add_argument("--corpus", help="built-in scenario name")
        sp.add_argument("--scenario", help="scenario JSON file")
        sp.add_argument("--numeraire", default="paper",
                        choices=("paper", "unit"))
        sp.add_argument("--json", action="store_true")
        sp.add_argument("--cap", type=int, default=None,
                        help="stopping-time enumeration cap")
        if needs_t:
            sp.add_argument("--t", type=int, required=True)
        if needs_claim:
            sp.add_argument("--claim", required=True,
                            help="inline JSON array of scalars, or a file")

    sp = sub.add_parser("check", help="run the three-way equivalence report")
    add_common(sp)
    sp.add_argument("--expect", help="comma list: consistent,representable,"
                                     "stable as true/false")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("eval", help="evaluate the risk and hedge values")
    add_common(sp, needs_t=True, needs_claim=True)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("decompose", help="split a claim into one-step bets")
    add_common(sp, needs_claim=True)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("paste", help="paste two measures at a stopping time")
    add_common(sp)
    sp.add_argument("--q", required=True, help="first measure (JSON array)")
    sp.add_argument("--qprime", required=True, help="second measure")
    sp.add_argument("--tau", required=True,
                    help="constant time or JSON array of per-atom times")
    sp.set_defaults(func=cmd_paste)

    sp = sub.add_parser("duals", help="emit dual cones and the K=(M)* verdict")
    add_common(sp, needs_t=True)
    sp.set_defaults(func=cmd_duals)

    sp = sub.add_parser("witness", help="search for a pasting counterexample")
    add_common(sp)
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("corpus", help="list or emit built-in scenarios")
    sp.add_argument("action", choices=("list", "emit"))
    sp.add_argument("name", nargs="?")
    sp.add_argument("--numeraire", default="paper",
                    choices=("paper", "unit"))
    sp.set_defaults(func=cmd_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "cap", None):
        import os
        os.environ["CONERISK_CAP"] = str(args.cap)
    try:
        return args.func(args)
    except TheoremViolationError as e:
        print(f"theorem violation (engine bug): {e}", file=sys.stderr)
        return THEOREM_VIOLATION
    except (CliError, CorpusError, RiskError, SpaceError, UndefinedPastingError,
            UnsupportedEvaluation, EnumerationCapExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
