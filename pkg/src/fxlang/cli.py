"""The `fx` command line tool.

Subcommands: check, run, tree, count, bench, list, selftest.  Exit codes
for `run`: 0 on a value, 1 on parse/type errors, 2 on an unhandled
operation, 3 on fuel exhaustion.
"""

from __future__ import annotations

import argparse
import sys

from fxlang import bench as bn
from fxlang import countlib as cl
from fxlang import machine as mc
from fxlang import smallstep as ss
from fxlang import trees as tr
from fxlang.errors import FuelExhausted
from fxlang.parser import ParseError, parse_program
from fxlang.pprint import render_mval, to_source
from fxlang.typecheck import TypeCheckError, typecheck_program


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        src = fh.read()
    sig, term = parse_program(src)
    typecheck_program(sig, term)
    return sig, term


def cmd_check(args) -> int:
    try:
        sig, term = _load(args.file)
    except (ParseError, TypeCheckError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return 1
    ty = typecheck_program(sig, term)
    print(f"{args.file}: ok, type {ty}")
    return 0


def cmd_run(args) -> int:
    try:
        sig, term = _load(args.file)
    except (ParseError, TypeCheckError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return 1
    if args.semantics == "smallstep":
        if args.trace:
            from fxlang.syntax import complete_handlers

            cfg = ss.StateConfig(complete_handlers(term, sig) if sig else term)
            steps = 0
            while steps < args.fuel:
                out = ss.step(cfg, sig)
                if not isinstance(out, ss.StateConfig):
                    break
                steps += 1
                print(to_source(out.term))
                cfg = out
            else:
                print(f"fuel exhausted after {steps} reductions", file=sys.stderr)
                return 3
        try:
            out, steps, _ = ss.evaluate(term, sig, fuel=args.fuel)
        except FuelExhausted as exc:
            print(f"fuel exhausted after {exc.steps} reductions", file=sys.stderr)
            return 3
        if isinstance(out, ss.NormalOp):
            print(f"unhandled operation {out.op}", file=sys.stderr)
            print(f"reductions: {steps}")
            return 2
        print(to_source(out.value))
        print(f"reductions: {steps}")
        return 0
    if args.trace:
        try:
            for tick, rule, head, depth in mc.trace_run(term, sig, fuel=args.fuel):
                print(f"tick={tick} rule={rule} comp={head} depth(k)={depth}")
        except FuelExhausted as exc:
            print(f"fuel exhausted after {exc.steps} transitions", file=sys.stderr)
            return 3
        return 0
    try:
        res = mc.run_machine(term, sig, fuel=args.fuel)
    except FuelExhausted as exc:
        print(f"fuel exhausted after {exc.steps} transitions", file=sys.stderr)
        return 3
    if isinstance(res.outcome, mc.FinalUnhandledOp):
        print(f"unhandled operation {res.outcome.op}", file=sys.stderr)
        print(f"ticks: {res.ticks}  envOps: {res.envops}")
        return 2
    print(render_mval(res.outcome.value))
    print(f"ticks: {res.ticks}  envOps: {res.envops}")
    return 0


def cmd_tree(args) -> int:
    pred_name = bn.resolve_pred(args.pred, args.variant)
    try:
        pred, bits = cl.build_predicate(pred_name, args.n)
    except (KeyError, ValueError) as exc:
        print(str(exc), file=sys.stderr)
        return 1
    depth = args.depth if args.depth is not None else 2 * bits + 2
    tree = tr.extract_tree(pred, fuel=args.fuel, depth_bound=depth)
    if args.format == "dot":
        print(tree.to_dot(timed=args.timed))
    else:
        print(tree.to_text(timed=args.timed))
    if tree.is_partial():
        print("warning: tree is partial (see unexplored lines)", file=sys.stderr)
    kind, reason = tree.classify_detail(bits)
    if kind is tr.Classification.N_STANDARD:
        print(f"classification: {bits}-standard")
    elif kind is tr.Classification.N_PREDICATE:
        print(f"classification: {bits}-predicate, not n-standard ({reason})")
    else:
        print(f"classification: neither ({reason})")
    return 0


def cmd_count(args) -> int:
    try:
        rep = cl.run_report(args.impl, bn.resolve_pred(args.pred, args.variant),
                            args.n, fuel=args.fuel)
    except (KeyError, ValueError, cl.LintError) as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except FuelExhausted as exc:
        print(f"fuel exhausted after {exc.steps} transitions", file=sys.stderr)
        return 3
    print(f"{rep.impl} x {rep.pred} @ n={rep.n}: {rep.result}")
    print(f"ticks: {rep.ticks}  envOps: {rep.envops}")
    return 0


def cmd_bench(args) -> int:
    if args.spec:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = bn.parse_spec_file(fh.read())
    else:
        if not args.impls or not args.preds:
            print("bench needs --spec FILE or both --impls and --preds", file=sys.stderr)
            return 1
        preds = []
        for entry in args.preds.split(","):
            name, _, variant = entry.strip().partition(":")
            preds.append((name, variant))
        spec = bn.BenchSpec(
            impls=[s.strip() for s in args.impls.split(",")],
            preds=preds,
            n_min=args.nmin,
            n_max=args.nmax,
            fuel=args.fuel,
            reps=args.reps,
            out=args.out,
        )
    rows = bn.run_grid(spec)
    csv_text = bn.grid_csv(rows)
    if spec.out:
        with open(spec.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        print(f"wrote {len(rows)} rows to {spec.out}")
    else:
        sys.stdout.write(csv_text)
    return 0


def cmd_list(args) -> int:
    rows = sorted(cl.catalog().items())
    print(f"{'name':16} {'kind':10} {'level':12} {'class':14} summary")
    for name, d in rows:
        klass = d.input_class or d.accepts or "-"
        print(f"{name:16} {d.kind:10} {d.level:12} {klass:14} {d.summary}")
    return 0


def cmd_selftest(args) -> int:
    from fxlang.acceptance import run_all

    results = run_all()
    failed = [r for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    print(f"\n{len(results) - len(failed)}/{len(results)} criteria passed "
          f"in {total:.1f}s")
    return 1 if failed else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="fx",
        description="interpreter workbench: run programs, extract decision "
                    "trees, and measure counting algorithms in machine steps",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("check", help="parse and typecheck a program file")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="evaluate a program file")
    p.add_argument("file")
    p.add_argument("--semantics", choices=("machine", "smallstep"), default="machine")
    p.add_argument("--fuel", type=int, default=mc.DEFAULT_FUEL)
    p.add_argument("--trace", action="store_true", help="print one line per transition")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("tree", help="extract and print a predicate's decision tree")
    p.add_argument("--pred", required=True)
    p.add_argument("--variant", default="")
    p.add_argument("-n", type=int, default=None)
    p.add_argument("--timed", action="store_true", help="include per-edge step counts")
    p.add_argument("--format", choices=("text", "dot"), default="text")
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--fuel", type=int, default=1_000_000)
    p.set_defaults(fn=cmd_tree)

    p = sub.add_parser("count", help="run one counter on one predicate")
    p.add_argument("--impl", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--variant", default="")
    p.add_argument("-n", type=int, default=None)
    p.add_argument("--fuel", type=int, default=mc.DEFAULT_FUEL)
    p.set_defaults(fn=cmd_count)

    p = sub.add_parser("bench", help="run a counter x predicate grid, emit CSV")
    p.add_argument("--spec", help="flat key=value spec file")
    p.add_argument("--impls", help="comma-separated counter names")
    p.add_argument("--preds", help="comma-separated predicates (name[:variant])")
    p.add_argument("--nmin", type=int, default=2)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--fuel", type=int, default=mc.DEFAULT_FUEL)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("list", help="print the program catalog")
    p.set_defaults(fn=cmd_list)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.set_defaults(fn=cmd_selftest)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
