"""Command line entry point.

Every command prints one canonical JSON document (sorted keys) carrying a
"manifest" block; --out writes it to a file instead.  Exit codes: 0 success,
2 bad input, 3 precision exhausted or budget spent, 4 mathematical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .errors import BudgetExceeded, ElladicError, ValidationError
from .jsonio import (InputSet, certified_errors, digest, dumps, element, load_automorphism, load_chain,
                     load_cocycle, load_field, load_form, load_group, load_map, load_rep, load_series, manifest)
from .padic_core import (INF, RingSpec, cap_N, digit_stats, factorial_valuation, hensel_root,
                         multinomial_valuation_bound, multinomial_valuation_exact, padic_log, scalar, teichmuller)


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, usage=self.format_usage().strip())


class Context:
    def __init__(self, args, argv):
        self.args = args
        self.argv = argv
        self.inputs = InputSet()
        self.ring = None

    def load(self, value):
        """A file path, '-' for stdin, or inline JSON text."""
        text = value.lstrip()
        if text.startswith(("{", "[")):
            self.inputs.digests[f"inline:{len(self.inputs.digests)}"] = digest(value.encode())
            try:
                return json.loads(value)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"inline JSON is invalid: {exc.msg}") from None
        return self.inputs.load(value)

    @property
    def seed(self):
        return self.args.seed

    def cutoff(self, default):
        return self.args.cutoff if self.args.cutoff is not None else default


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational number: {text!r}") from None


def _ring(ctx, ell, default_P=12):
    P = ctx.args.precision if ctx.args.precision is not None else default_P
    ctx.ring = RingSpec(int(ell), int(P))
    return ctx.ring


# ---------------------------------------------------------------------------
# padic

def cmd_padic(ctx):
    a = ctx.args
    op = a.op
    if op == "factval":
        return {"v": factorial_valuation(a.ell, _int(a.a))}
    if op == "digits":
        s, d = digit_stats(a.ell, _int(a.a))
        return {"digit_sum": s, "digit_count": d}
    if op == "multinomial":
        vec = [int(x) for x in str(a.a).split(",")]
        return {"exact": multinomial_valuation_exact(a.ell, vec),
                "bound": str(multinomial_valuation_bound(a.ell, vec))}
    if op == "capn":
        value, arg = cap_N(a.ell, _fraction(a.c), _fraction(a.f))
        return {"value": str(value), "argmax": arg}
    ring = _ring(ctx, a.ell)
    if op == "teich":
        return {"value": str(teichmuller(ring, _int(a.u)))}
    if op == "log":
        return {"value": str(padic_log(scalar(ring, a.x)))}
    if op == "root":
        return {"value": str(hensel_root(a.d, scalar(ring, a.u), _int(a.residue)))}
    raise UsageError(f"unknown padic operation {op}")


def _int(text):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ValidationError(f"not an integer: {text!r}") from None


# ---------------------------------------------------------------------------
# series

def _form_or_series(obj):
    return load_form(obj) if "degree" in obj else load_series(obj)


def cmd_series(ctx):
    from .series import antiderivative, contract, dlog, exterior_d, wedge
    a = ctx.args
    op = a.op
    if op in ("add", "sub", "mul"):
        f, g = load_series(ctx.load(a.f)), load_series(ctx.load(a.g))
        out = {"add": f + g, "sub": f - g, "mul": f * g}[op]
        return _series_out(ctx, out)
    if op == "inverse":
        return _series_out(ctx, load_series(ctx.load(a.f)).inverse())
    if op == "norm":
        f = load_series(ctx.load(a.f))
        ctx.ring = f.ring
        gn = f.gauss_norm(_fraction(a.a))
        cert = gn.certified
        return {"log_norm": "inf" if gn.log_norm == INF else str(gn.log_norm), "radius_exponent": str(gn.radius_exponent),
                "tail_bound": None if gn.tail_bound is None else str(gn.tail_bound),
                "certified": None if cert is None else ("inf" if cert == INF else str(cert))}
    if op == "d":
        return _series_out(ctx, exterior_d(_form_or_series(ctx.load(a.f))))
    if op == "dlog":
        return _series_out(ctx, dlog(load_series(ctx.load(a.f))))
    if op == "wedge":
        return _series_out(ctx, wedge(load_form(ctx.load(a.alpha)), load_form(ctx.load(a.beta))))
    if op == "contract":
        return _series_out(ctx, contract(load_field(ctx.load(a.field)), load_form(ctx.load(a.form))))
    if op == "antiderivative":
        return _series_out(ctx, antiderivative(load_form(ctx.load(a.form))))
    raise UsageError(f"unknown series operation {op}")


def _series_out(ctx, x):
    ctx.ring = x.ring
    return x.to_json()


# ---------------------------------------------------------------------------
# flows

def cmd_flow(ctx):
    from .flows import (certify, flow_from_field, hamiltonian_potential, interpolate_iterate, log_norm_bound,
                        vector_field_log)
    a = ctx.args
    op = a.op
    if op == "potential":
        X = load_field(ctx.load(a.field))
        omega = load_form(ctx.load(a.omega))
        return _series_out(ctx, hamiltonian_potential(X, omega))
    if op == "flow":
        X = load_field(ctx.load(a.field))
        ctx.ring = X.ring
        radius = _fraction(a.a) if a.a else Fraction(1, X.ring.e)
        return flow_from_field(X, radius).at(_time(X.ring, a.t)).to_json()
    psi = load_map(ctx.load(a.psi))
    ctx.ring = psi.ring
    radius = _fraction(a.a) if a.a else Fraction(1, psi.ring.e)
    if op == "certify":
        return {"certificate": certify(psi, radius).to_json()}
    if op == "interpolate":
        cert = certify(psi, radius)
        out = interpolate_iterate(psi, _time(psi.ring, a.t), cert).to_json()
        out["certificate"] = cert.to_json()
        return out
    if op == "iterate":
        k = _int(a.k)
        return psi.power(k).to_json()
    if op == "field":
        X = vector_field_log(psi)
        out = X.to_json()
        bound = log_norm_bound(psi.ring.ell, psi.N, radius)
        out["certificate"] = {"radius_exponent": str(radius), "log_norm_bound": str(bound),
                              "congruence_order": psi.N}
        return out
    raise UsageError(f"unknown flow operation {op}")


def _time(ring, text):
    text = str(text)
    return scalar(ring, text) if text.startswith("w:") else _fraction(text)


# ---------------------------------------------------------------------------
# chains

def cmd_chains(ctx):
    from .bar import boundary, homology_divisors, homotopy_F, inn, parse_modulus, solve_boundary
    a = ctx.args
    G = load_group(ctx.load(a.group))
    if a.op == "homology":
        ell, k = parse_modulus(a.mod)
        return {"degree": a.degree, "mod": f"{ell}^{k}", "divisors": homology_divisors(G, a.degree, ell, k)}
    c = load_chain(ctx.load(a.chain), G)
    if a.op == "boundary":
        return {"chain": boundary(c).to_json()}
    if a.op == "homotopy":
        h = element(G, a.h)
        return {"chain": homotopy_F(c, h).to_json(), "conjugated": inn(c, h).to_json()}
    if a.op == "solve":
        d = solve_boundary(c)
        return {"chain": d.to_json(), "check": boundary(d) == c}
    raise UsageError(f"unknown chains operation {a.op}")


# ---------------------------------------------------------------------------
# regulator

def _matrix_list(obj):
    if isinstance(obj, dict):
        return obj.get("tuple"), obj.get("P"), int(obj.get("ell", 3))
    return obj, None, 3


def cmd_reg(ctx):
    from .bar import BarChain, MatrixGroup, parse_modulus
    from .regulator import evaluate_chain, minimal_cutoff, psi_transfer
    a = ctx.args
    if a.op == "cutoff":
        method = a.method
        return {"cutoff": minimal_cutoff(a.ell, a.s, _fraction(a.depth), _fraction(a.target), method),
                "method": method}
    if a.op == "phi3":
        tup, P, ell = _matrix_list(ctx.load(a.tuple))
        if not isinstance(tup, list) or len(tup) != 4:
            raise ValidationError("phi3 expects a homogeneous 4-tuple of matrices")
        prec = INF if P is None else int(P)
        cutoff = ctx.cutoff(minimal_cutoff(ell, 3, 1, 4))
        return psi_transfer(tup, 3, cutoff, ell, input_prec=prec).to_json()
    if a.op == "eval-chain":
        obj = ctx.load(a.chain)
        ell, k = parse_modulus(obj.get("mod", "3^1"))
        P = int(obj.get("P", k))
        first = obj["terms"][0]["tuple"][0] if obj.get("terms") else [[1]]
        G = MatrixGroup(len(first), ell, P)
        c = BarChain.from_json(obj, G)
        cutoff = ctx.cutoff(minimal_cutoff(ell, 3, 1, 4))
        return evaluate_chain(c, cutoff, ell, input_prec=P, coefficient_modulus=c.k).to_json()
    raise UsageError(f"unknown reg operation {a.op}")


# ---------------------------------------------------------------------------
# symplectic

def cmd_symp(ctx):
    from .symplectic import omega_vs_cup, poisson_bracket, tr_alt, vmat
    a = ctx.args
    if a.op == "tralt":
        X, Y = ctx.load(a.x), ctx.load(a.y)
        try:
            r = len(X[0][0])
        except (TypeError, IndexError):
            raise ValidationError("tralt expects d x d matrices of length-r vectors") from None
        mod = _int(a.mod)
        return {"tralt": [list(row) for row in tr_alt(vmat(X, r, mod), vmat(Y, r, mod), mod)], "mod": mod}
    if a.op == "omega":
        rep_obj = ctx.load(a.rep)
        G = load_group(rep_obj["group"] if "group" in rep_obj else ctx.load(a.group))
        rho0 = load_rep(rep_obj, G)
        if not a.cocycle or len(a.cocycle) != 2:
            raise UsageError("omega needs --cocycle twice")
        c1, _ = load_cocycle(ctx.load(a.cocycle[0]), G)
        c2, _ = load_cocycle(ctx.load(a.cocycle[1]), G)
        z = load_chain(ctx.load(a.cycle), G)
        return omega_vs_cup(c1, c2, rho0, z)
    if a.op == "bracket":
        f, g = load_series(ctx.load(a.f)), load_series(ctx.load(a.g))
        return _series_out(ctx, poisson_bracket(f, g, load_form(ctx.load(a.omega))))
    raise UsageError(f"unknown symp operation {a.op}")


# ---------------------------------------------------------------------------
# volume

def load_setup(ctx, obj):
    """Group, representation, fundamental cycle and conjugation data from one JSON document."""
    from .volume import ConjugationDatum, VolumeSetup, intertwiner
    G = load_group(obj["group"])
    rho = load_rep(obj["rep"], G)
    c = load_chain(obj["cycle"], G)
    data = []
    for i, item in enumerate(obj.get("data", [])):
        sigma = load_automorphism(item["automorphism"], G)
        h = item.get("h")
        if h is None:
            h = intertwiner(rho, sigma, seed=ctx.seed)
        data.append(ConjugationDatum(sigma, tuple(tuple(int(x) for x in row) for row in h), int(item.get("a", 1)),
                                     item.get("name", f"datum{i}")))
    return G, VolumeSetup(rho, c, data), data


def cmd_vol(ctx):
    from .volume import cocycle_audit, restriction_audit, twist_defect
    a = ctx.args
    obj = ctx.load(a.setup)
    try:
        G, setup, data = load_setup(ctx, obj)
    except KeyError as exc:
        raise ValidationError(f"setup JSON lacks {exc}") from None
    cutoff = ctx.cutoff(int(obj.get("cutoff", 6)))
    by_name = {d.name: d for d in data}
    if a.op == "compute":
        names = [a.datum] if a.datum else [d.name for d in data]
        out = {}
        for name in names:
            if name not in by_name:
                raise ValidationError(f"no conjugation datum named {name!r}")
            out[name] = twist_defect(setup, by_name[name], cutoff, ambiguity=a.ambiguity).to_json()
        return {"results": out, "cutoff": cutoff}
    if a.op == "audit-cocycle":
        pairs = obj.get("pairs") or [[s.name, t.name] for s in data for t in data]
        try:
            resolved = [(by_name[s], by_name[t]) for s, t in pairs]
        except KeyError as exc:
            raise ValidationError(f"no conjugation datum named {exc}") from None
        report = cocycle_audit(setup, resolved, cutoff)
        return {"report": report, "pass": all(r["pass"] for r in report)}
    if a.op == "audit-restriction":
        spec = obj.get("restriction")
        if not spec:
            raise ValidationError("setup JSON has no 'restriction' block")
        sub = [element(G, x) for x in spec["subgroup"]]
        pos = {g: i for i, g in enumerate(sub)}
        terms = {}
        for item in spec["cycle"]["terms"]:
            tup = tuple(pos[element(G, x)] for x in item["tuple"])
            terms[tup] = terms.get(tup, 0) + int(item["coeff"])
        from .bar import BarChain, parse_modulus
        ell, k = parse_modulus(spec["cycle"]["mod"])
        c_sub = BarChain(None, 2, terms, ell, k)
        report = restriction_audit(setup, sub, c_sub, int(spec["index"]), data, cutoff)
        return {"report": report, "pass": all(r["pass"] for r in report)}
    raise UsageError(f"unknown vol operation {a.op}")


# ---------------------------------------------------------------------------
# verify

def cmd_verify(ctx):
    from .verify import run_suite
    a = ctx.args
    record = a.record_time
    lines = []

    def emit(outcome):
        line = outcome.line(record)
        lines.append(line)
        if a.out:
            print(line, flush=True)

    try:
        outcomes = run_suite(a.suite, seed=ctx.seed, budget=a.budget, emit=emit)
        incomplete = None
    except BudgetExceeded as exc:
        outcomes, incomplete = exc.outcomes, exc
    report = {"suite": a.suite,
              "criteria": [{"number": o.criterion.number, "suite": o.criterion.suite, "title": o.criterion.title,
                            "status": o.status, "detail": o.detail} for o in outcomes]}
    if incomplete is not None:
        report["incomplete"] = incomplete.to_json()
    failed = any(o.status != "PASS" for o in outcomes)
    return report, lines, (3 if incomplete is not None else (4 if failed else 0))


# ---------------------------------------------------------------------------
# parser

def _globals(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--precision", type=int, default=default, help="ring precision P for scalar commands")
    parser.add_argument("--cutoff", type=int, default=default, help="series cutoff for regulator evaluations")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0)
    parser.add_argument("--out", default=default, help="write the JSON result here instead of stdout")
    parser.add_argument("--record-time", action="store_true", default=argparse.SUPPRESS if suppress else False,
                        help="include wall time in the manifest (outputs then differ between runs)")


def build_parser():
    p = _Parser(prog="elladic", description="Exact l-adic toolkit")
    p.add_argument("--version", action="version", version=f"elladic {__version__}")
    _globals(p, suppress=False)
    common = _Parser(add_help=False)
    _globals(common, suppress=True)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def leaf(group, name, **kw):
        return group.add_parser(name, parents=[common], **kw)

    padic = sub.add_parser("padic", help="valuations and scalars").add_subparsers(dest="op", parser_class=_Parser)
    padic.required = True
    for name in ("factval", "digits", "multinomial"):
        q = leaf(padic, name)
        q.add_argument("--ell", type=int, required=True)
        q.add_argument("--a", required=True, help="integer, or comma separated for multinomial")
    q = leaf(padic, "capn")
    q.add_argument("--ell", type=int, required=True)
    q.add_argument("--c", required=True)
    q.add_argument("--f", required=True)
    q = leaf(padic, "teich")
    q.add_argument("--ell", type=int, required=True)
    q.add_argument("--u", required=True)
    q = leaf(padic, "log")
    q.add_argument("--ell", type=int, required=True)
    q.add_argument("--x", required=True, help="rational or 'w:.. u:.. mod l^..'")
    q = leaf(padic, "root")
    q.add_argument("--ell", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--u", required=True)
    q.add_argument("--residue", required=True)

    series = sub.add_parser("series", help="truncated series and forms").add_subparsers(dest="op",
                                                                                      parser_class=_Parser)
    series.required = True
    for name in ("add", "sub", "mul"):
        q = leaf(series, name)
        q.add_argument("--f", required=True)
        q.add_argument("--g", required=True)
    for name in ("inverse", "d", "dlog"):
        leaf(series, name).add_argument("--f", required=True)
    q = leaf(series, "norm")
    q.add_argument("--f", required=True)
    q.add_argument("--a", required=True, help="radius exponent in (0, 1/e]")
    q = leaf(series, "wedge")
    q.add_argument("--alpha", required=True)
    q.add_argument("--beta", required=True)
    q = leaf(series, "contract")
    q.add_argument("--field", required=True)
    q.add_argument("--form", required=True)
    leaf(series, "antiderivative").add_argument("--form", required=True)

    flow = sub.add_parser("flow", help="iterates and flows").add_subparsers(dest="op", parser_class=_Parser)
    flow.required = True
    q = leaf(flow, "interpolate")
    q.add_argument("--psi", required=True)
    q.add_argument("--t", required=True)
    q.add_argument("--a")
    q = leaf(flow, "iterate")
    q.add_argument("--psi", required=True)
    q.add_argument("--k", required=True)
    for name in ("field", "certify"):
        q = leaf(flow, name)
        q.add_argument("--psi", required=True)
        q.add_argument("--a")
    q = leaf(flow, "flow")
    q.add_argument("--field", required=True)
    q.add_argument("--t", required=True)
    q.add_argument("--a")
    q = leaf(flow, "potential")
    q.add_argument("--field", required=True)
    q.add_argument("--omega", required=True)

    chains = sub.add_parser("chains", help="bar complex").add_subparsers(dest="op", parser_class=_Parser)
    chains.required = True
    for name in ("boundary", "solve"):
        q = leaf(chains, name)
        q.add_argument("--group", required=True)
        q.add_argument("--chain", required=True)
    q = leaf(chains, "homotopy")
    q.add_argument("--group", required=True)
    q.add_argument("--chain", required=True)
    q.add_argument("--h", required=True)
    q = leaf(chains, "homology")
    q.add_argument("--group", required=True)
    q.add_argument("--degree", type=int, required=True)
    q.add_argument("--mod", required=True)

    reg = sub.add_parser("reg", help="regulator").add_subparsers(dest="op", parser_class=_Parser)
    reg.required = True
    leaf(reg, "phi3").add_argument("--tuple", required=True)
    leaf(reg, "eval-chain").add_argument("--chain", required=True)
    q = leaf(reg, "cutoff")
    q.add_argument("--target", required=True)
    q.add_argument("--depth", default="1")
    q.add_argument("--ell", type=int, default=3)
    q.add_argument("--s", type=int, default=3)
    q.add_argument("--method", choices=("lemma", "legendre"), default="lemma")

    symp = sub.add_parser("symp", help="symplectic structure").add_subparsers(dest="op", parser_class=_Parser)
    symp.required = True
    q = leaf(symp, "tralt")
    q.add_argument("--x", required=True)
    q.add_argument("--y", required=True)
    q.add_argument("--mod", required=True)
    q = leaf(symp, "omega")
    q.add_argument("--rep", required=True)
    q.add_argument("--group")
    q.add_argument("--cocycle", action="append")
    q.add_argument("--cycle", required=True)
    q = leaf(symp, "bracket")
    q.add_argument("--f", required=True)
    q.add_argument("--g", required=True)
    q.add_argument("--omega", required=True)

    vol = sub.add_parser("vol", help="volume cocycle").add_subparsers(dest="op", parser_class=_Parser)
    vol.required = True
    q = leaf(vol, "compute")
    q.add_argument("--setup", required=True)
    q.add_argument("--ambiguity", action="store_true")
    q.add_argument("--datum")
    leaf(vol, "audit-cocycle").add_argument("--setup", required=True)
    leaf(vol, "audit-restriction").add_argument("--setup", required=True)

    q = leaf(sub, "verify")
    q.add_argument("--suite", default="all",
                   choices=("padic", "chains", "flows", "regulator", "symplectic", "volume", "all"))
    q.add_argument("--budget", type=float, help="seconds")
    return p


HANDLERS = {"padic": cmd_padic, "series": cmd_series, "flow": cmd_flow, "chains": cmd_chains, "reg": cmd_reg,
            "symp": cmd_symp, "vol": cmd_vol}


def _write(text, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def dispatch(argv):
    argv = list(argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(dumps(exc.to_json()))
        return exc.exit_code
    ctx = Context(args, argv)
    start = time.perf_counter()
    try:
        if args.command == "verify":
            report, lines, code = cmd_verify(ctx)
            report["manifest"] = _manifest(ctx, report, start)
            if args.out:
                _write(dumps(report), args.out)
            else:
                sys.stdout.write("".join(line + "\n" for line in lines))
                if "incomplete" in report:
                    sys.stdout.write("INCOMPLETE " + report["incomplete"]["message"] + "\n")
            return code
        result = HANDLERS[args.command](ctx)
    except ElladicError as exc:
        sys.stderr.write(dumps(exc.to_json()))
        return exc.exit_code
    out = dict(result)
    out["manifest"] = _manifest(ctx, result, start)
    _write(dumps(out), args.out)
    return 0


def _manifest(ctx, result, start):
    args = ctx.args
    wall = time.perf_counter() - start if args.record_time else None
    m = manifest(ctx.argv, ctx.inputs, args.seed, precision=args.precision, cutoff=args.cutoff, ring=ctx.ring,
                 wall_time=wall, errors=certified_errors(result))
    threads = os.environ.get("ELLADIC_THREADS")
    if threads:
        m["threads"] = threads
    return m


def main(argv=None):
    sys.exit(dispatch(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
