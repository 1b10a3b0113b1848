"""Command-line interface.

Subcommands: depend, residue, density, challenge, reconstruct, campaign.
Exit codes: 0 success, 1 reconstruction failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import re
import sys

from . import dependence, harness, lines, milnor
from .polyfield import FieldDescriptor, ParseError, parse, prime_field, rationals

EXIT_OK = 0
EXIT_RECONSTRUCTION_FAILED = 1
EXIT_INVALID_INPUT = 2


def parse_field_spec(spec: str) -> FieldDescriptor:
    """Field specs like Q(t1,t2), F3(t1,t2), F_5(x,y)."""
    m = re.fullmatch(r"\s*(Q|F_?(\d+))\s*\(([^)]*)\)\s*", spec)
    if not m:
        raise ValueError(f"cannot parse field spec {spec!r}")
    names = tuple(v.strip() for v in m.group(3).split(",") if v.strip())
    if m.group(1) == "Q":
        return rationals(*names)
    return prime_field(int(m.group(2)), *names)


def _cmd_depend(args) -> int:
    desc = parse_field_spec(args.field)
    x = parse(args.x, desc)
    y = parse(args.y, desc)
    verdict = dependence.alg_dependent(x, y)
    rel = dependence.dependence_relation(x, y) if verdict else None
    print(json.dumps({
        "x": str(x), "y": str(y), "field": str(desc),
        "algebraically_dependent": verdict,
        "relation": str(rel) if rel is not None else None,
    }, indent=2))
    return EXIT_OK


def _cmd_residue(args) -> int:
    desc = parse_field_spec(args.field)
    entries = [parse(t.strip(), desc) for t in args.symbol.split(",")]
    s = milnor.symbol(entries)
    if args.center == "infinity":
        v = milnor.at_infinity()
    elif args.center.startswith("infinity:"):
        var = args.center.split(":", 1)[1]
        v = milnor.at_variable_infinity(desc.var_index(var))
    else:
        h = parse(args.center, desc)
        if not h.den.is_constant():
            raise ValueError("center must be a polynomial")
        v = milnor.at_center(h.num)
    r = milnor.residue(s, v)
    print(json.dumps({
        "symbol": s.serialize(),
        "center": v.describe(),
        "residue": r.serialize(),
    }, indent=2))
    return EXIT_OK


def _cmd_density(args) -> int:
    if args.table:
        print("d\tratio\tdecimal\tlimit")
        limit = 1 / args.p ** (args.r - 1)
        for d in range(1, args.d + 1):
            ratio = lines.density_ratio(args.p, args.r, d)
            print(f"{d}\t{ratio.numerator}/{ratio.denominator}\t{float(ratio):.8f}\t{limit:.8f}")
    else:
        ratio = lines.density_ratio(args.p, args.r, args.d)
        limit = 1 / args.p ** (args.r - 1)
        print(f"{args.d}\t{ratio.numerator}/{ratio.denominator}\t{float(ratio):.8f}\t{limit:.8f}")
    return EXIT_OK


def _cmd_challenge(args) -> int:
    desc = parse_field_spec(args.field)
    ch = harness.generate_challenge(args.seed, args.family, desc)
    data = ch.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(data, fh, indent=2)
        print(f"wrote {args.out} (id {ch.challenge_id()})")
    else:
        print(json.dumps(data, indent=2))
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    with open(args.infile) as fh:
        data = json.load(fh)
    ch = harness.challenge_from_json(data)
    report = harness.run_challenge(ch, seed=data.get("seed", 0),
                                   verification_classes=args.verification_classes)
    out = report.to_json()
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(out, fh, indent=2)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(out, indent=2))
    return EXIT_OK if report.success else EXIT_RECONSTRUCTION_FAILED


def _cmd_campaign(args) -> int:
    with open(args.config) as fh:
        cfg = harness.CampaignConfig.from_json(json.load(fh))
    reports = harness.run_campaign(cfg)
    summary = harness.campaign_summary(reports)
    payload = {"summary": summary, "reports": [r.to_json() for r in reports]}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(payload, fh, indent=2)
        print(f"wrote {args.out}: {summary['successes']}/{summary['total']} succeeded")
    else:
        print(json.dumps(payload, indent=2))
    return EXIT_OK if summary["successes"] == summary["total"] else EXIT_RECONSTRUCTION_FAILED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fieldrec")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("depend", help="algebraic dependence of two elements")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--field", required=True, help="e.g. 'Q(t1,t2)' or 'F3(t1,t2)'")
    p.set_defaults(func=_cmd_depend)

    p = sub.add_parser("residue", help="tame residue of a symbol at a center")
    p.add_argument("--symbol", required=True, help="comma-separated entries")
    p.add_argument("--center", required=True,
                   help="polynomial, 'infinity', or 'infinity:<var>'")
    p.add_argument("--field", required=True)
    p.set_defaults(func=_cmd_residue)

    p = sub.add_parser("density", help="exact monomial density ratios")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--table", action="store_true")
    p.set_defaults(func=_cmd_density)

    p = sub.add_parser("challenge", help="generate a concealed-isomorphism challenge")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--family", choices=harness.FAMILIES, required=True)
    p.add_argument("--field", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_challenge)

    p = sub.add_parser("reconstruct", help="run the engine on a challenge file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.add_argument("--verification-classes", type=int, default=500)
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("campaign", help="run a reconstruction campaign")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_campaign)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ValueError, ZeroDivisionError, OSError, KeyError,
            json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
