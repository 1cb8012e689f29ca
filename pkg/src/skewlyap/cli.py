"""Command-line entry point: ``skewlyap <command> [flags]``.

Exit status is 0 when every requested check passes, 1 when any fails, 2 when
something is indeterminate (interval overlap or an unresolved statistical
test) and 64 on a usage error.  Reports go to standard output as JSON (with a
``schema`` field and a provenance header), CSV, or whitespace-separated plot
data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from . import avalanche, certifier, constants, diophantine, harmonic, lyapunov
from .cocycle import MASK, CocycleParams
from .ledger import FAIL, INDETERMINATE, PASS, fmt, precision

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_INDETERMINATE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _add_common(p, seed=0):
    p.add_argument("--seed", type=int, default=seed)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $SKEWLYAP_THREADS or 1)")
    p.add_argument("--precision", default=None,
                   help="interval bits for certified commands; double|double-double for sampling")
    p.add_argument("--config", default=None, help="key=value file merged under explicit flags")
    p.add_argument("--output", default=None, help="write the report here instead of stdout")
    fmt_group = p.add_mutually_exclusive_group()
    fmt_group.add_argument("--json", dest="format", action="store_const", const="json")
    fmt_group.add_argument("--csv", dest="format", action="store_const", const="csv")
    fmt_group.add_argument("--plot-data", dest="format", action="store_const", const="plot-data")
    p.set_defaults(format="json")


def _add_sampling(p, N, samples):
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--E", type=float, default=0.0)
    p.add_argument("--N", type=int, default=N)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--mode", choices=("monte-carlo", "grid"), default="monte-carlo")


def build_parser() -> _Parser:
    parser = _Parser(prog="skewlyap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"skewlyap {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("constants", help="constants table and its certified ledger")
    p.add_argument("--R", type=_fraction, default=Fraction(4))
    p.add_argument("--R1", type=_fraction, default=Fraction(3))
    p.add_argument("--R2", type=_fraction, default=Fraction(2))
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1, 2))
    _add_common(p)

    p = sub.add_parser("verify-harmonic", help="quadrature and Hilbert-transform checks")
    p.add_argument("--grid", type=int, default=harmonic.DEFAULT_GRID)
    _add_common(p, seed=7)

    p = sub.add_parser("estimate", help="sample L_N")
    _add_sampling(p, 1000, 10_000)
    _add_common(p)

    p = sub.add_parser("ldt", help="L_N, L_2N and deviation-set measures")
    _add_sampling(p, 1000, 10_000)
    p.add_argument("--variant", choices=sorted(certifier.VARIANTS), default=None,
                   help="also judge the initial-scale conditions of this variant")
    _add_common(p)

    p = sub.add_parser("sweep", help="L_N over an energy grid or a list of couplings")
    _add_sampling(p, 1000, 2_000)
    p.add_argument("--E-count", dest="E_count", type=int, default=33)
    p.add_argument("--lambdas", type=_float_list, default=None,
                   help="comma-separated couplings; switches to a coupling sweep at fixed --E")
    _add_common(p)

    p = sub.add_parser("ap-fuzz", help="fuzz the avalanche principle on admissible chains")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--n-max", dest="n_max", type=int, default=100)
    _add_common(p, seed=1)

    p = sub.add_parser("dioph", help="torus norms, continued fraction, divisor bounds")
    p.add_argument("--kmax", type=int, default=10 ** 6)
    p.add_argument("--divisor-max", dest="divisor_max", type=int, default=10 ** 7)
    p.add_argument("--sigma", type=float, default=1e-3)
    _add_common(p)

    p = sub.add_parser("weyl", help="linear and quadratic-phase exponential sums")
    p.add_argument("--K", type=int, default=100)
    p.add_argument("--p1", type=int, default=10)
    p.add_argument("--p2", type=int, default=100)
    p.add_argument("--trials", type=int, default=100)
    _add_common(p, seed=3)

    p = sub.add_parser("certify", help="replay a theorem's proof from initial-scale inputs")
    p.add_argument("--variant", choices=sorted(certifier.VARIANTS), required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", default=None, help="ScaleStats JSON or explicit interval inputs")
    src.add_argument("--threshold-inputs", action="store_true",
                     help="use inputs sitting exactly on the variant's hypotheses")
    p.add_argument("--k", type=float, default=3.0, help="stderr multiple for sampled inputs")
    _add_common(p)

    p = sub.add_parser("verify-paper", help="every constant-only inequality of the induction")
    _add_common(p)
    return parser


# -- configuration -------------------------------------------------------------

def read_config(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser: _Parser, argv: list) -> None:
    """Install config values as subcommand defaults, so explicit flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    command = next((a for a in argv if not a.startswith("-")), None)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    if command not in subparsers.choices:
        return
    sp = subparsers.choices[command]
    by_dest = {a.dest: a for a in sp._actions}
    aliases = {"lambda": "lam", "E_count": "E_count"}
    defaults = {}
    for key, value in read_config(known.config).items():
        dest = aliases.get(key, key)
        if dest in ("json", "csv", "plot_data"):
            if value.lower() in ("1", "true", "yes"):
                defaults["format"] = dest.replace("_", "-")
            continue
        if dest not in by_dest or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        action = by_dest[dest]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = value.lower() in ("1", "true", "yes")
        else:
            defaults[dest] = value
    sp.set_defaults(**defaults)
    # argparse converts string defaults through the action's type only when
    # the default was set before parsing; required options must be relaxed.
    for dest in defaults:
        if dest in by_dest:
            by_dest[dest].required = False


# -- report emission -------------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return fmt(x)
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if hasattr(x, "a") and hasattr(x, "b"):
        return fmt(x)
    return x


def provenance(args) -> dict:
    flags = {k: v for k, v in vars(args).items() if k not in ("output", "config")}
    return _jsonable({"tool": "skewlyap", "version": __version__, "command": args.command,
                      "seed": getattr(args, "seed", None), "precision": getattr(args, "precision", None),
                      "flags": flags})


def emit_plot_data(columns, rows, header=None) -> str:
    """Whitespace-separated columns with a ``#`` comment header."""
    out = io.StringIO()
    if header:
        out.write(f"# {header}\n")
    out.write("# " + " ".join(columns) + "\n")
    for row in rows:
        out.write(" ".join(repr(float(v)) for v in row) + "\n")
    return out.getvalue()


def emit_csv(columns, rows, header=None) -> str:
    out = io.StringIO()
    if header:
        out.write(f"# {header}\n")
    w = csv.writer(out, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return out.getvalue()


def render(args, result: dict, table=None) -> str:
    """``table`` is (columns, rows) for commands with a tabular form."""
    if args.format == "json" or table is None:
        doc = {"schema": SCHEMA, "provenance": provenance(args)}
        doc.update(_jsonable(result))
        return json.dumps(doc, indent=2) + "\n"
    header = "provenance " + json.dumps(provenance(args), separators=(",", ":"))
    columns, rows = table
    if args.format == "csv":
        return emit_csv(columns, rows, header)
    return emit_plot_data(columns, rows, header)


def status_code(verdicts) -> int:
    verdicts = list(verdicts)
    if any(v == FAIL for v in verdicts):
        return EXIT_FAIL
    if any(v in (INDETERMINATE, lyapunov.UNRESOLVED) for v in verdicts):
        return EXIT_INDETERMINATE
    return EXIT_OK


def _bool_verdict(ok) -> str:
    return PASS if ok else FAIL


# -- commands ----------------------------------------------------------------------

def _bits(args, default=128) -> int:
    if args.precision is None:
        return default
    try:
        bits = int(args.precision)
    except ValueError:
        raise UsageError(f"--precision must be a bit count here, got {args.precision!r}") from None
    if bits < 64:
        raise UsageError("--precision must be at least 64 bits")
    return bits


def _plan(args) -> lyapunov.SamplingPlan:
    prec = args.precision or "double"
    if prec not in ("double", "double-double"):
        raise UsageError(f"--precision must be double or double-double here, got {prec!r}")
    return lyapunov.SamplingPlan(mode=args.mode, samples=args.samples, seed=args.seed, precision=prec)


def cmd_constants(args):
    radii = constants.Radii(args.R, args.R1, args.R2)
    bits = _bits(args)
    with precision(bits):
        table = constants.constants_table(radii, args.lam, interval=True)
        lams = sorted({Fraction(1, 2), Fraction(1), args.lam})
        led = constants.numeric_ledger(radii, lams)
        values = table.as_dict()
        values["C4"] = constants.c4()
        values["C5"] = constants.c5()
    result = {"radii": [args.R, args.R1, args.R2], "lambda": args.lam,
              "table": {k: fmt(v) for k, v in values.items()},
              "ledger": [e.to_dict() for e in led], "verdict": led.verdict()}
    return result, None, [led.verdict()]


def cmd_verify_harmonic(args):
    report = harmonic.verify_all(size=args.grid, seed=args.seed)
    return report, None, [_bool_verdict(report["passed"])]


def cmd_estimate(args):
    params = CocycleParams(args.lam, args.E)
    mean, se = lyapunov.estimate_L(params, args.N, _plan(args), args.threads)
    result = {"lambda": args.lam, "E": args.E, "N": args.N, "samples": args.samples,
              "L_N": mean, "stderr": se}
    return result, (["N", "L_N", "stderr"], [(args.N, mean, se)]), [PASS]


def cmd_ldt(args):
    params = CocycleParams(args.lam, args.E)
    stats = lyapunov.estimate_scale_stats(params, args.N, _plan(args), args.threads)
    result = {"lambda": args.lam, "E": args.E, "stats": stats.to_dict()}
    verdicts = [PASS]
    if args.variant:
        report = lyapunov.check_initial_conditions(stats, args.variant)
        result["initial_conditions"] = report
        verdicts = [report[c]["verdict"] for c in ("i", "ii", "iii")]
    cols = ["N", "L_N", "stderr_L", "L_2N", "stderr_L2", "B_N", "B_2N", "B_N_upper95", "B_2N_upper95"]
    row = (stats.N, stats.L_N, stats.stderr_L, stats.L_2N, stats.stderr_L2, stats.B_N_measure,
           stats.B_2N_measure, stats.B_N_upper95, stats.B_2N_upper95)
    return result, (cols, [row]), verdicts


def cmd_sweep(args):
    plan = _plan(args)
    if args.lambdas is not None:
        rows = lyapunov.sweep_couplings(args.E, args.lambdas, args.N, plan, args.threads)
        cols = ["lambda", "L_N", "lambda2", "L_N_over_lambda2"]
        result = {"E": args.E, "N": args.N, "rows": [dict(zip(cols, r)) for r in rows]}
    else:
        rows = lyapunov.sweep_energies(args.lam, args.N, plan, args.E_count, args.threads)
        cols = ["E", "L_N", "stderr", "B_N", "upper95"]
        result = {"lambda": args.lam, "N": args.N, "rows": [dict(zip(cols, r)) for r in rows]}
    return result, (cols, rows), [PASS]


def cmd_ap_fuzz(args):
    chains = avalanche.ap_fuzz(trials=args.trials, n_max=args.n_max, seed=args.seed)
    pairs = avalanche.pair_fuzz(trials=args.trials, seed=args.seed)
    result = {"chains": chains, "pairs": pairs, "passed": chains["passed"] and pairs["passed"]}
    return result, None, [_bool_verdict(result["passed"])]


def cmd_dioph(args):
    three_k = diophantine.check_three_k_bound(args.kmax)
    cf = diophantine.continued_fraction(diophantine.OMEGA, depth=50)
    cf_ok = all(a == 1 for a in cf.partial_quotients)
    sep = diophantine.gold_separation(args.sigma)
    div = diophantine.divisor_bounds(args.divisor_max)
    result = {"three_k": three_k, "continued_fraction": {"partial_quotients": cf.partial_quotients,
                                                         "all_ones": cf_ok},
              "separation": sep, "divisor_bounds": div}
    checks = [three_k["passed"], cf_ok, sep["passed"], div["passed"]]
    result["passed"] = all(checks)
    return result, None, [_bool_verdict(c) for c in checks]


def cmd_weyl(args):
    s1 = diophantine.weyl_S1(args.K, args.p2) if args.p2 >= args.K else None
    rng = np.random.Generator(np.random.Philox(key=args.seed))
    worst2 = worst3 = 0.0
    failures = 0
    last = None
    for _ in range(args.trials):
        y = int.from_bytes(rng.bytes(16), "little") & MASK
        r = diophantine.weyl_S2_S3(args.K, args.p1, args.p2, y)
        worst2 = max(worst2, r["measuredS2"] / r["boundS2"]) if r["boundS2"] else worst2
        worst3 = max(worst3, r["measuredS3"] / r["boundS3"]) if r["boundS3"] else worst3
        failures += not r["passed"]
        last = r
    s45 = diophantine.weyl_S4_S5(args.K, args.p1)
    result = {"S1": s1, "S2_S3": {"trials": args.trials, "failures": failures,
                                  "worst_fraction_S2": worst2, "worst_fraction_S3": worst3,
                                  "bounds": None if last is None else
                                  {"S2": last["boundS2"], "S3": last["boundS3"], "c_star": last.get("c_star")}},
              "S4_S5": s45}
    checks = [failures == 0, s45["passed"]] + ([s1["passed"]] if s1 else [])
    result["passed"] = all(checks)
    return result, None, [_bool_verdict(c) for c in checks]


def load_inputs(path: str, variant: certifier.Variant, k: float) -> certifier.CertInputs:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc.msg}") from None
    stats = doc.get("stats", doc)
    if "L_N" in stats:
        if int(stats.get("N", variant.N0)) != variant.N0:
            raise UsageError(f"input scale N={stats['N']} does not match N0={variant.N0} of {variant.name}")
        return certifier.CertInputs.from_stats(stats, k)
    try:
        vals = {key: _parse_input_value(stats[key]) for key in ("L_N0", "L_2N0", "B_N0", "B_2N0")}
    except KeyError as exc:
        raise UsageError(f"{path} lacks {exc.args[0]}") from None
    return certifier.CertInputs(**vals)


def _parse_input_value(v):
    if isinstance(v, list) and len(v) == 2:
        return (_parse_input_value(v[0]), _parse_input_value(v[1]))
    if isinstance(v, (int, str)):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(v)
    raise UsageError(f"cannot read input value {v!r}")


def cmd_certify(args):
    variant = certifier.get_variant(args.variant)
    bits = _bits(args)
    with precision(bits):
        if args.threshold_inputs:
            inputs = certifier.CertInputs.at_threshold(args.variant)
        else:
            inputs = load_inputs(args.input, variant, args.k)
        cert = certifier.certify_theorem(args.variant, inputs, prec=bits)
        result = cert.to_dict()
    return result, None, [e.verdict for e in cert.entries]


def cmd_verify_paper(args):
    led = certifier.verify_paper(_bits(args))
    result = {"entries": [e.to_dict() for e in led], "count": len(led),
              "passed": sum(e.passed for e in led), "verdict": led.verdict()}
    return result, None, [e.verdict for e in led]


COMMANDS = {
    "constants": cmd_constants, "verify-harmonic": cmd_verify_harmonic, "estimate": cmd_estimate,
    "ldt": cmd_ldt, "sweep": cmd_sweep, "ap-fuzz": cmd_ap_fuzz, "dioph": cmd_dioph, "weyl": cmd_weyl,
    "certify": cmd_certify, "verify-paper": cmd_verify_paper,
}


def run(argv=None, stdout=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        result, table, verdicts = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"skewlyap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"skewlyap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(args, result, table)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return status_code(verdicts)


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
