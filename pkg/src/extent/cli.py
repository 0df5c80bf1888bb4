"""``extent`` command line: check, interpret, stability, oracle-diff."""

from __future__ import annotations

import argparse
import sys

from .presheaf import carrier_cap, get_base


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def cmd_check(args) -> int:
    from .kernel import check_program
    from .syntax import ParseError, parse, show_decl
    try:
        decls = parse(_read(args.file))
    except ParseError as err:
        print(f"{args.file}:{err.line}:{err.col}: syntax error: {err.msg}"
              + (f" (expected {', '.join(sorted(err.expected))})" if err.expected else ""))
        return 1
    report = check_program(decls)
    for d in report.decls:
        status = "ok" if d.verdict else f"REJECT {d.report.kind}"
        print(f"{args.file}:{d.decl.line}: {status}: {show_decl(d.decl)}")
        if not d.verdict:
            print(f"    {d.report.reason}")
        if args.trace:
            for rule, node in d.report.trace:
                print(f"    {rule:<12} {node}")
    return 0 if report.verdict else 1


def cmd_interpret(args) -> int:
    from .interpret import Uninterpretable, interpret_program
    base = get_base(args.base)
    try:
        results = interpret_program(_read(args.file), base, args.bound)
    except Uninterpretable as err:
        print(f"{args.file}: cannot interpret: {err}")
        return 1
    print(f"base {base.name}, objects {list(base.objects)}, bound {args.bound}")
    for r in results:
        sizes = " ".join(f"{o}:{n}" for o, n in zip(base.objects, r.stage_sizes))
        line = f"{r.name}: {r.type_text}\n    |Ext| per stage  {sizes}"
        if r.point:
            line += "\n    named point      " + " ".join(f"{o}:{x}" for o, x in zip(base.objects, r.point))
        print(line)
    return 0


def cmd_stability(args) -> int:
    from .harness import Config, run_suite, violations
    bases = args.base or ["terminal", "arrow", "delta1"]
    configs = [Config(base=get_base(b).name, bound_k=args.bound, carrier_cap=carrier_cap(args.cap))
               for b in bases]
    body = run_suite(configs, args.n, seed=args.seed, report=args.report,
                     log=lambda msg: print(msg, file=sys.stderr))
    summary = body["summary"]
    for name, c in summary["counts"].items():
        print(f"{name:<22} pass {c['pass']:>4}  fail {c['fail']:>4}  skipped {c['skipped']:>4}")
    for entry in body["instances"]:
        bad = violations(entry)
        if bad:
            print(f"violation: seed {entry['seed']} base {entry['base']} shape {entry['shape']}: {', '.join(bad)}")
    skipped = max(c["skipped"] for c in summary["counts"].values())
    if summary["violations"] or skipped > args.max_skipped * max(1, summary["instances"]):
        return 1
    return 0


def cmd_oracle_diff(args) -> int:
    from .harness import Config, decode_point, ext_oracle, gen_instance
    from .extension import ext_former, leibniz_ext
    from .presheaf import SizeLimit
    base = get_base(args.base)
    inst = gen_instance(args.seed, Config(base=base.name, bound_k=args.bound))
    inp = inst.inp
    ext = ext_former(inp)
    oracle = ext_oracle(inp)
    try:
        lei = leibniz_ext(inp, cap=64 * carrier_cap())
    except SizeLimit:
        lei = None
    print(f"seed {args.seed} base {base.name} shape {inst.shape_name} Γ sizes {list(inst.gamma.sizes)}")
    same = True
    for c in range(base.n_objects):
        for g in range(inst.gamma.sizes[c]):
            ours = [decode_point(inp, c, g, x) for x in range(ext.tables[c][g].point_count())]
            theirs = oracle[c, g]
            print(f"stage {base.objects[c]} γ={g}: pointwise {len(ours)}  oracle {len(theirs)}"
                  + ("" if lei is None else f"  leibniz {len(lei[c, g])}"))
            for i in range(max(len(ours), len(theirs))):
                left = _fmt(ours[i]) if i < len(ours) else "-"
                right = _fmt(theirs[i]) if i < len(theirs) else "-"
                mark = " " if left == right else "!"
                print(f"  {mark} {left:<40} {right}")
                same &= left == right
    return 0 if same else 1


def _fmt(section: dict) -> str:
    return " ".join(f"{e}.{g}.{p}={v}" for (e, g, p), v in sorted(section.items()))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="extent", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="type-check a .stt file")
    p.add_argument("file")
    p.add_argument("--trace", action="store_true", help="print the rules applied per node")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("interpret", help="stagewise cardinalities of extension types")
    p.add_argument("file")
    p.add_argument("--base", default="delta1")
    p.add_argument("--bound", type=int, default=3)
    p.set_defaults(func=cmd_interpret)

    p = sub.add_parser("stability", help="run the randomized strict-stability suite")
    p.add_argument("--base", action="append", help="repeatable; default terminal, arrow, delta1")
    p.add_argument("--bound", type=int, default=3)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=None, help="carrier cap (default from EXTENT_CARRIER_CAP)")
    p.add_argument("--report")
    p.add_argument("--max-skipped", type=float, default=0.1,
                   help="tolerated fraction of cross-checks skipped on size limits")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("oracle-diff", help="pointwise extension fibers next to the brute-force oracle")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--base", default="terminal")
    p.add_argument("--bound", type=int, default=3)
    p.set_defaults(func=cmd_oracle_diff)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
