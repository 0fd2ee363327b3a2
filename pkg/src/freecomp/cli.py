"""Command line entry point: ``freecomp <subcommand> ...``.

Exit status is 0 on success, 1 when a verification fails or a rewrite does
not apply, and 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import __version__
from .errors import (
    InvalidInputError,
    NoWitnessError,
    OutsideClassError,
    ParseError,
    RuleNotApplicableError,
)
from .fdim import (
    ALL_RATIONALS,
    INF,
    AlgebraExpression,
    Derivation,
    FreeProductExpression,
    comprirrat_data,
    compress_factor,
    compress_free_product,
    fdim,
    free_product,
    fundamental_group_witness,
    opaque,
    single,
)
from .matrix_model import (
    CheckRow,
    SimulationConfig,
    gue_moments,
    verify_compressed_semicircular,
    verify_freeness,
    verify_Y_construction,
)
from .moments import MAX_WORD_LENGTH, psi_word_detail
from .nc import enumerate_nc, enumerate_nc_pairings, kreweras_complement, nc_mobius, parse_partition
from .serialize import (
    emit_derivation,
    emit_expression,
    emit_number,
    parse_expression,
    parse_moments_document,
)
from .suite import run_suite
from .surd import exact, sqrt_exact

USAGE_ERRORS = (ParseError, InvalidInputError)
DOMAIN_ERRORS = (OutsideClassError, RuleNotApplicableError, NoWitnessError)


class Output:
    def __init__(self, as_json: bool, stream):
        self.as_json = as_json
        self.stream = stream

    def emit(self, payload: dict, text: str):
        if self.as_json:
            self.stream.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        else:
            self.stream.write(text.rstrip("\n") + "\n")


def _load_json(source: str, what: str):
    if source == "-":
        text = sys.stdin.read()
    elif os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(what, f"invalid JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from None


def _exact_arg(text: str, what: str):
    try:
        return exact(text)
    except InvalidInputError as exc:
        raise ParseError(what, str(exc)) from None


def _count_arg(text: str):
    if text == "inf":
        return INF
    try:
        k = int(text)
    except ValueError:
        raise ParseError("--count", f"expected an integer or 'inf', got {text!r}") from None
    return k


# --------------------------------------------------------------------------
# subcommands


def cmd_nc(args, out: Output) -> int:
    if args.nc_op == "enumerate":
        ground = range(2, 2 * args.size + 1, 2) if args.evens else range(1, args.size + 1)
        parts = enumerate_nc_pairings(ground) if args.pairings else enumerate_nc(ground)
        texts = [str(p) for p in parts]
        out.emit({"ground": list(ground), "count": len(texts), "partitions": texts},
                 f"{len(texts)} partitions\n" + "\n".join(texts))
    elif args.nc_op == "kreweras":
        pi = parse_partition(args.partition, _ground(args.ground))
        comp = kreweras_complement(pi)
        out.emit({"partition": str(pi), "complement": str(comp), "blocks": len(comp)}, str(comp))
    else:
        ground = _ground(args.ground)
        pi, sigma = parse_partition(args.pi, ground), parse_partition(args.sigma, ground)
        mu = nc_mobius(pi, sigma)
        out.emit({"pi": str(pi), "sigma": str(sigma), "mobius": mu}, str(mu))
    return 0


def _ground(text):
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParseError("--ground", f"expected comma-separated integers, got {text!r}") from None


def cmd_moments(args, out: Output) -> int:
    model, word = parse_moments_document(_load_json(args.document, "document"))
    res = psi_word_detail(model, word, max_n=args.max_n)
    contributions = [
        {"pairing": str(p), "complement": str(c), "contribution": v.real}
        for p, c, v in res.pairings
    ]
    payload = {
        "value": res.value.real,
        "imag": res.value.imag,
        "pairing_count": res.pairing_count,
        "per_pairing_contributions": contributions,
    }
    lines = [f"psi = {res.value.real:.15g}  ({res.pairing_count} pairings)"]
    lines += [f"  {c['pairing']} -> {c['complement']}: {c['contribution']:.15g}" for c in contributions]
    out.emit(payload, "\n".join(lines))
    return 0


def cmd_fdim(args, out: Output) -> int:
    expr = parse_expression(_load_json(args.expression, "expression"))
    if isinstance(expr, FreeProductExpression):
        raise ParseError("expression", "fdim expects an algebra, not a free product")
    value = fdim(expr)
    out.emit({"expression": emit_expression(expr), "canonical": str(expr), "fdim": emit_number(value)},
             f"fdim({expr}) = {'inf' if value == INF else value}")
    return 0


def cmd_freeprod(args, out: Output) -> int:
    exprs = []
    for i, src in enumerate(args.expressions):
        doc = _load_json(src, f"expressions[{i}]")
        items = doc if isinstance(doc, list) else [doc]
        for j, item in enumerate(items):
            e = parse_expression(item, f"$[{i}]" if len(items) == 1 else f"$[{i}][{j}]")
            if not isinstance(e, AlgebraExpression):
                raise ParseError(f"$[{i}]", "free products take algebras as operands")
            exprs.append(e)
    log = Derivation()
    result = free_product(exprs, log=log)
    out.emit({"result": emit_expression(result), "canonical": str(result), "fdim": emit_number(fdim(result)),
              "derivation": emit_derivation(log)},
             " * ".join(f"({e})" for e in exprs) + f" = {result}")
    return 0


def _compression_parameter(args):
    if (args.t is None) == (args.t_squared is None):
        raise ParseError("--t", "give exactly one of --t and --t-squared")
    if args.t is not None:
        return _exact_arg(args.t, "--t")
    return sqrt_exact(_exact_arg(args.t_squared, "--t-squared"))


def cmd_compress(args, out: Output) -> int:
    t = _compression_parameter(args)
    if args.irrational:
        if args.count is None:
            raise ParseError("--count", "irrational compression data needs --count")
        data = comprirrat_data(_count_arg(args.count), t)
        out.emit(
            {"n": data.n, "r": emit_number(data.r), "D": emit_expression(data.D),
             "P": emit_expression(data.P), "N": emit_expression(data.N)},
            f"n = {data.n}, r = {data.r}\nD = {data.D}\nN = {data.N}\nP = {data.P}",
        )
        return 0
    if args.count is not None:
        k = _count_arg(args.count)
        gens = args.generators or ()
        if list(gens) == [ALL_RATIONALS]:
            gens = ALL_RATIONALS
        fam = (single(opaque("A", gens)),) if k == INF else tuple(
            single(opaque(f"A{i}")) for i in range(1, k + 1)
        )
        expr = FreeProductExpression(fam, k)
    elif args.expression is not None:
        expr = parse_expression(_load_json(args.expression, "expression"))
    else:
        raise ParseError("expression", "give an expression or --count")
    if args.witness:
        if not isinstance(expr, FreeProductExpression):
            raise ParseError("expression", "witnesses need a free product")
        log = fundamental_group_witness(expr, t)
        out.emit({"t": emit_number(t), "rules": log.rules(), "derivation": emit_derivation(log)},
                 f"witness for t = {t}: " + " -> ".join(log.rules()))
        return 0
    log = Derivation()
    if isinstance(expr, FreeProductExpression):
        result = compress_free_product(expr, t, log=log)
    else:
        result = compress_factor(expr, t, log=log)
    out.emit({"t": emit_number(t), "result": emit_expression(result), "canonical": str(result),
              "derivation": emit_derivation(log)},
             f"({expr})_{t} = {result}")
    return 0


def cmd_verify(args, out: Output) -> int:
    report = run_suite(args.filter)
    rows = [
        {"name": r.name, "anchor": r.anchor, "provenance": r.provenance,
         "expected": r.expected, "observed": r.observed, "pass": r.passed}
        for r in report.results
    ]
    lines = [
        f"{'PASS' if r.passed else 'FAIL'} {r.name} [{r.provenance}] {r.anchor}"
        + ("" if r.passed else f"\n     expected {r.expected}, observed {r.observed}")
        for r in report.results
    ]
    failed = len(report.failures())
    lines.append(f"{len(rows) - failed}/{len(rows)} cases passed")
    out.emit({"cases": rows, "passed": report.passed}, "\n".join(lines))
    return report.exit_code


def cmd_simulate(args, out: Output) -> int:
    cfg = SimulationConfig(args.dim, args.trials, args.seed, args.order)
    checks = ["gue", "compressed", "freeness", "Y"] if args.check == "all" else [args.check]
    reports = []
    for name in checks:
        if name == "gue":
            reports.append(gue_moments(cfg))
        elif name == "compressed":
            reports.append(verify_compressed_semicircular(cfg, _exact_arg(args.q, "--q")))
        elif name == "freeness":
            reports.append(verify_freeness(cfg))
        else:
            reports.append(verify_Y_construction(args.E, args.K, cfg))
    rows = [r for rep in reports for r in rep.rows]
    passed = all(rep.passed for rep in reports)
    csv_text = _rows_csv(rows)
    summary = {
        "config": {"N": cfg.N, "trials": cfg.trials, "seed": cfg.seed, "order": cfg.max_moment_order},
        "checks": {rep.check: rep.passed for rep in reports},
        "rows": [r.as_dict() for r in rows],
        "passed": passed,
    }
    if args.csv_out:
        with open(args.csv_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text)
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
    out.emit(summary, csv_text)
    return 0 if passed else 1


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CheckRow.CSV_FIELDS)
    for r in rows:
        d = r.as_dict()
        w.writerow([d[k] if not isinstance(d[k], float) else repr(d[k]) for k in CheckRow.CSV_FIELDS])
    return buf.getvalue()


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable JSON output")
    common.add_argument("--config", metavar="FILE", help="JSON object of option defaults")

    parser = argparse.ArgumentParser(
        prog="freecomp",
        description="Non-crossing combinatorics, corner moments, free dimension and random-matrix checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    nc = sub.add_parser("nc", parents=[common], help="non-crossing partitions")
    nc_sub = nc.add_subparsers(dest="nc_op", required=True)
    en = nc_sub.add_parser("enumerate", parents=[common], help="list NC(n) or NCP(n)")
    en.add_argument("--size", type=int, required=True, help="number of labels")
    en.add_argument("--pairings", action="store_true", help="pairings only")
    en.add_argument("--evens", action="store_true", help="use labels 2, 4, ..., 2n")
    kr = nc_sub.add_parser("kreweras", parents=[common], help="complement on the odd labels")
    kr.add_argument("partition", help='e.g. "{2,4}{6,8}"')
    kr.add_argument("--ground", help="comma-separated labels (default: union of blocks)")
    mo = nc_sub.add_parser("mobius", parents=[common], help="Moebius function of [pi, sigma]")
    mo.add_argument("pi")
    mo.add_argument("sigma")
    mo.add_argument("--ground", help="comma-separated labels (default: union of blocks)")

    m = sub.add_parser("moments", parents=[common], help="evaluate psi on a word via pairings")
    m.add_argument("document", help="JSON file, literal, or - for stdin: {model, word}")
    m.add_argument("--max-n", type=int, default=MAX_WORD_LENGTH, help="largest word length accepted")

    f = sub.add_parser("fdim", parents=[common], help="free dimension of an algebra")
    f.add_argument("expression", help="algebra JSON (file, literal, or -)")

    fp = sub.add_parser("freeprod", parents=[common], help="free product of algebras")
    fp.add_argument("expressions", nargs="+", help="algebra JSON documents, or one JSON list")

    c = sub.add_parser("compress", parents=[common], help="compressions, irrational data, witnesses")
    c.add_argument("expression", nargs="?", help="algebra or free-product JSON")
    c.add_argument("--t", help="compression parameter as p/q")
    c.add_argument("--t-squared", help="square of the compression parameter, for surd t")
    c.add_argument("--count", help="free product of COUNT opaque factors (integer or inf)")
    c.add_argument("--generators", nargs="*", help="fundamental-group generators for --count inf, or Q+")
    c.add_argument("--irrational", action="store_true", help="emit D, N and P for non-integer 1/t")
    c.add_argument("--witness", action="store_true", help="certify t in the fundamental group")

    v = sub.add_parser("verify", parents=[common], help="run the built-in verification suite")
    v.add_argument("--filter", help="glob over case names, e.g. 'compr*'")

    s = sub.add_parser("simulate", parents=[common], help="random-matrix Monte Carlo checks")
    s.add_argument("--seed", type=int, default=20240601)
    s.add_argument("--dim", type=int, default=1000, help="matrix dimension N")
    s.add_argument("--trials", type=int, default=50)
    s.add_argument("--order", type=int, default=6, help="largest moment order (even)")
    s.add_argument("--check", choices=["all", "gue", "compressed", "freeness", "Y"], default="all")
    s.add_argument("--q", default="1/2", help="trace of the compressing projection")
    s.add_argument("--E", type=int, default=2, help="number of matrix blocks for the Y check")
    s.add_argument("--K", type=int, default=1, help="size of each matrix block for the Y check")
    s.add_argument("--csv-out", help="also write the CSV table here")
    s.add_argument("--json-out", help="also write the JSON summary here")

    parser.set_defaults(_subparsers={"nc": nc, "enumerate": en, "kreweras": kr, "mobius": mo, "moments": m,
                                     "fdim": f, "freeprod": fp, "compress": c, "verify": v, "simulate": s})
    return parser


COMMANDS = {
    "nc": cmd_nc,
    "moments": cmd_moments,
    "fdim": cmd_fdim,
    "freeprod": cmd_freeprod,
    "compress": cmd_compress,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
}


def _apply_config(parser, args, argv):
    if not args.config:
        return args
    cfg = _load_json(args.config, "--config")
    if not isinstance(cfg, dict):
        raise ParseError("--config", "expected a JSON object")
    leaf = args.nc_op if args.command == "nc" else args.command
    target = args._subparsers[leaf]
    cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
    known = {a.dest for a in target._actions} - {"help", "config"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ParseError("--config", f"unknown options {unknown}")
    target.set_defaults(**cfg)
    return parser.parse_args(argv)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Output(args.json, stdout)
    try:
        args = _apply_config(parser, args, argv)
        out = Output(args.json, stdout)
        return COMMANDS[args.command](args, out)
    except USAGE_ERRORS as exc:
        _report(out, stderr, "usage", exc)
        return 2
    except DOMAIN_ERRORS as exc:
        _report(out, stderr, "failure", exc)
        return 1


def _report(out: Output, stderr, kind: str, exc: Exception):
    if out.as_json:
        out.stream.write(json.dumps({"error": str(exc), "kind": kind, "type": type(exc).__name__}) + "\n")
    stderr.write(f"error: {exc}\n")


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
