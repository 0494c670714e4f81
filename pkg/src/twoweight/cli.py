"""Command-line front end.

Exit status: 0 when every check passed, 1 when some inequality was
violated, 2 for configuration errors.  Reports go to stdout as JSON lines
(sorted keys); tables are CSV.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import yaml

from . import __version__
from .domain import DyadicDomain, lognormal, load_function_csv
from .errors import DomainError
from .orlicz import HL, Associate, Lr, OrliczSpace, cube_norm_heap, maximal
from .rubio import RdFConfig
from .sparse import SparseFamily, build_cz_sparse, exceptional_sets, sparse_operator, verify_sparsity
from .suite import run_suite
from .verify import (PAIR_FAMILIES, main_stability, main_theorem_check, perez_stability,
                     perez_theorem_check, random_instance, reports_to_csv, reports_to_jsonl,
                     rh_extrapolation_check, step1_check)
from .weights import (WeightPair, a1_constant, bump_constant, make_pair_mq, neugebauer_constant,
                      power_weight_blowup, reverse_holder_constant, two_weight_ap_constant)
from .youngfn import YoungFunction, bp_test

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


# -- helpers ---------------------------------------------------------------------

def _young(family, r, delta):
    if family == "power":
        return YoungFunction.power(r)
    if family == "log_bump":
        return YoungFunction.log_bump(r, delta)
    if family == "loglog_bump":
        return YoungFunction.loglog_bump(r, delta)
    raise ConfigError(f"unknown Young family {family!r}")


def _space(args):
    kind = args.space
    if kind == "hl":
        return HL()
    if kind == "lr":
        return Lr(args.r)
    if kind == "orlicz":
        A = YoungFunction.from_csv(args.table) if args.table else _young(args.family, args.r, args.delta)
        return OrliczSpace(A)
    if kind == "associate":
        A = YoungFunction.from_csv(args.table) if args.table else _young(args.family, args.r, args.delta)
        return Associate(OrliczSpace(A))
    raise ConfigError(f"unknown space {kind!r}")


def _domain(args):
    return DyadicDomain(args.depth, shifts=tuple(args.shifts))


def _function(D, path, seed, sigma=1.0):
    if path:
        return load_function_csv(D, path)
    return lognormal(D, np.random.default_rng(seed), sigma)


def _emit(reports, out=None):
    text = reports_to_jsonl(reports)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(reports):
    return EXIT_OK if all(r.get("pass", True) for r in reports) else EXIT_VIOLATION


def _seeds(seed, n):
    return [(seed, i) for i in range(n)]


def _rng(task_seed):
    seed, i = task_seed
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(i + 1)[i])


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


# -- instance workers (module level so they pickle) --------------------------------------

def _families(preset):
    if preset == "all":
        return PAIR_FAMILIES
    if preset not in PAIR_FAMILIES:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PAIR_FAMILIES)} or all")
    return (preset,)


def _verify_task(task):
    kind, depth, fams, p, q, ts = task
    D = DyadicDomain(depth)
    fam = fams[ts[1] % len(fams)]
    inst = random_instance(D, fam, _rng(ts), p, q)
    if kind == "step1":
        rep = step1_check(D, inst["S"], inst["pair"], inst["f"], inst["rho"], p)
    elif kind == "main":
        rep = main_theorem_check(D, inst["S"], inst["pair"], inst["f"], p, RdFConfig(p, q))
    else:
        pair, f, S = inst["pair"], inst["f"], inst["S"]
        step = step1_check(D, S, pair, f, np.ones(D.n), p)
        S1 = sparse_operator(D, S, f) * pair.w
        S2 = step["constant"] * maximal(D, f * pair.v, Associate(pair.Y))
        rng = _rng((ts[0] + 1, ts[1]))
        samples = [np.ones(D.n)] + [lognormal(D, rng, 0.3) for _ in range(3)]
        rep = rh_extrapolation_check(D, S1, S2, p, q, samples)
    rep.update(instance=ts[1], family=fam, seed=ts[0], depth=depth)
    return rep


def _perez_task(task):
    depth, p, q, r, ts = task
    D = DyadicDomain(depth)
    rng = _rng(ts)
    pair = make_pair_mq(D, lognormal(D, rng, 1.0), q, Lr(r))
    f = lognormal(D, rng, 1.0)
    rep = perez_theorem_check(D, pair, f, p)
    rep.update(instance=ts[1], family="mq-pair", seed=ts[0], depth=depth)
    return rep


# -- subcommands -------------------------------------------------------------------

def cmd_bp_test(args):
    A = YoungFunction.from_csv(args.table) if args.table else _young(args.family, args.r, args.delta)
    res = bp_test(A, args.p, decades=args.decades)
    if args.json:
        d = res.to_dict()
        d.update(young=A.to_dict(), p=args.p)
        _emit([d])
    else:
        print(res.verdict)
    agree = res.analytic_verdict is None or res.analytic_verdict == res.numeric_verdict
    return EXIT_OK if agree else EXIT_VIOLATION


def cmd_norms(args):
    D = _domain(args)
    f = _function(D, args.input, args.seed)
    spec = _space(args)
    levels = range(D.depth + 1) if args.level is None else [args.level]
    lines = ["shift,level,index,norm"]
    for s in range(D.n_grids):
        h = cube_norm_heap(D, f, spec, s)
        for l in levels:
            for i in range(1 << l):
                lines.append(f"{s},{l},{i},{float(h[(1 << l) + i])!r}")
    _write_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_maximal(args):
    D = _domain(args)
    f = _function(D, args.input, args.seed)
    Mf = maximal(D, f, _space(args))
    lines = ["cell,x,f,maximal"]
    lines += [f"{i},{float(x)!r},{float(a)!r},{float(b)!r}" for i, (x, a, b) in enumerate(zip(D.centers, f, Mf))]
    _write_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _write_text(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_sparse(args):
    D = _domain(args)
    if args.family_file:
        with open(args.family_file) as fh:
            S = SparseFamily.from_text(fh.read())
    else:
        f = _function(D, args.input, args.seed)
        S = build_cz_sparse(D, f, args.lam, args.shift)
    ok, worst = verify_sparsity(D, S)
    rep = {"cubes": len(S), "shift": S.shift, "sparse": ok, "worst_ratio": worst, "pass": ok}
    if ok:
        E = exceptional_sets(D, S)
        rep["exceptional_min_fraction"] = min(
            float(D.mass[c].sum() / D.heap_mass(S.shift)[q.heap]) for q, c in E.items())
    if args.out:
        _write_text(S.to_text(), args.out)
    _emit([rep])
    return _status([rep])


def cmd_constants(args):
    D = _domain(args)
    if args.w:
        w = load_function_csv(D, args.w)
    else:
        w = lognormal(D, np.random.default_rng(args.seed), 0.5)
    if args.v:
        v = load_function_csv(D, args.v)
    elif args.mq:
        v = maximal(D, w, Lr(args.q))
    else:
        v = w.copy()
    Y = Lr(args.r) if args.space == "lr" else OrliczSpace(_young(args.family, args.r, args.delta))
    params = {"p": args.p, "q": args.q, "r": args.r, "depth": D.depth, "seed": args.seed}
    recs = []
    which = args.which or ["ap", "neugebauer", "bump", "rh", "a1"]
    for name in which:
        if name == "ap":
            c, wit = two_weight_ap_constant(D, w, v, args.p, with_witness=True)
        elif name == "neugebauer":
            c, wit = neugebauer_constant(D, w, v, args.p, args.neu_r, with_witness=True)
        elif name == "bump":
            c, wit = bump_constant(D, WeightPair(w, v, Y, args.q), args.q)
        elif name == "rh":
            c, wit = reverse_holder_constant(D, w, args.q / (args.q - 1), with_witness=True)
        elif name == "a1":
            c, wit = a1_constant(D, w), None
        else:
            raise ConfigError(f"unknown constant {name!r}")
        recs.append({"name": name, "constant": c, "witness_cube": None if wit is None else list(wit),
                     "parameters": params})
    _emit(recs, args.out)
    return EXIT_OK


def _verify_cmd(kind):
    def run(args):
        if not args.q > args.p:
            raise ConfigError("q must exceed p")
        fams = _families(args.preset)
        tasks = [(kind, args.depth, fams, args.p, args.q, ts) for ts in _seeds(args.seed, args.instances)]
        reps = _map(_verify_task, tasks, args.jobs)
        reps.sort(key=lambda r: r["instance"])
        if kind == "main" and args.stability:
            st = main_stability(p=args.p, q=args.q)
            st["check"] = "main_stability"
            reps.append(st)
        _emit(reps, args.out)
        if args.csv:
            _write_text(reports_to_csv(reps), args.csv)
        return _status(reps)
    return run


def cmd_verify_perez(args):
    tasks = [(args.depth, args.p, args.q, args.r, ts) for ts in _seeds(args.seed, args.instances)]
    reps = _map(_perez_task, tasks, args.jobs)
    reps.sort(key=lambda r: r["instance"])
    if args.stability:
        st = perez_stability(p=args.p, q=args.q, r=args.r)
        st["check"] = "perez_stability"
        reps.append(st)
    _emit(reps, args.out)
    if args.csv:
        _write_text(reports_to_csv(reps), args.csv)
    return _status(reps)


def cmd_blowup(args):
    depths = list(range(args.min_depth, args.max_depth + 1))
    vals = power_weight_blowup(args.alpha, args.beta, args.p, depths)
    ratios = [b / a for a, b in zip(vals, vals[1:])]
    rep = {"alpha": args.alpha, "beta": args.beta, "p": args.p, "depths": depths, "products": vals,
           "ratios": ratios, "expected_ratio": 2.0 ** abs(args.alpha - args.beta)}
    if args.csv:
        _write_text("depth,product\n" + "".join(f"{d},{v!r}\n" for d, v in zip(depths, vals)), args.csv)
    _emit([rep], args.out)
    return EXIT_OK


def cmd_suite(args):
    only = set(args.only) if args.only else None
    rows = run_suite(args.seed, quick=args.quick, only=only)
    _emit(rows, args.out)
    for r in rows:
        print(f"[{'PASS' if r['pass'] else 'FAIL'}] {r['criterion']:2d} {r['name']}", file=sys.stderr)
    return _status(rows)


# -- parser --------------------------------------------------------------------------

def _add_domain(p, depth=10):
    p.add_argument("--depth", type=int, default=depth)
    p.add_argument("--shifts", type=float, nargs="+", default=[0.0, 1.0 / 3.0])


def _add_young(p):
    p.add_argument("--family", default="power", choices=["power", "log_bump", "loglog_bump"])
    p.add_argument("--r", type=float, default=2.0, help="power / leading exponent")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--table", help="CSV of Young-function breakpoints")


def build_parser():
    ap = argparse.ArgumentParser(prog="twoweight", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML file; its keys set option defaults")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bp-test", parents=[common], help="classify a Young function against B_p")
    _add_young(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--decades", type=int, default=12)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bp_test)

    for name, fn, hlp in (("norms", cmd_norms, "cube norm table (CSV)"),
                          ("maximal", cmd_maximal, "maximal function profile (CSV)")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        _add_domain(p)
        _add_young(p)
        p.add_argument("--space", default="hl", choices=["hl", "lr", "orlicz", "associate"])
        p.add_argument("--input", help="CSV with one value per cell")
        if name == "norms":
            p.add_argument("--level", type=int)
        p.set_defaults(func=fn)

    p = sub.add_parser("sparse", parents=[common], help="build or verify a sparse family")
    _add_domain(p)
    p.add_argument("--input")
    p.add_argument("--family-file", help="verify this family instead of building one")
    p.add_argument("--lam", type=float, default=2.0)
    p.add_argument("--shift", type=int, default=0)
    p.set_defaults(func=cmd_sparse)
    p.description = "With --out the family is written there as 'shift level index' lines."

    p = sub.add_parser("constants", parents=[common], help="weight constants as JSON records")
    _add_domain(p)
    _add_young(p)
    p.add_argument("--w")
    p.add_argument("--v")
    p.add_argument("--mq", action="store_true", help="use v = M_q w")
    p.add_argument("--space", default="lr", choices=["lr", "orlicz"])
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=3.0)
    p.add_argument("--neu-r", type=float, default=1.5)
    p.add_argument("--which", nargs="+", choices=["ap", "neugebauer", "bump", "rh", "a1"])
    p.set_defaults(func=cmd_constants)

    for name, kind in (("verify-step1", "step1"), ("verify-main", "main"), ("verify-rh", "rh")):
        p = sub.add_parser(name, parents=[common], help=f"randomised {kind} sweep")
        _add_domain(p)
        p.add_argument("--preset", default="all")
        p.add_argument("--instances", type=int, default=10)
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--q", type=float, default=3.0)
        p.add_argument("--csv")
        if kind == "main":
            p.add_argument("--stability", action="store_true")
        p.set_defaults(func=_verify_cmd(kind))

    p = sub.add_parser("verify-perez", parents=[common], help="maximal theorem sweep")
    _add_domain(p)
    p.add_argument("--instances", type=int, default=10)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=3.0)
    p.add_argument("--r", type=float, default=3.0, help="Y = L^r, so Y' = L^(r')")
    p.add_argument("--stability", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_verify_perez)

    p = sub.add_parser("blowup", parents=[common], help="power-weight bump products by depth")
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--min-depth", type=int, default=8)
    p.add_argument("--max-depth", type=int, default=16)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("suite", parents=[common], help="randomised acceptance run")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", type=int, nargs="+")
    p.set_defaults(func=cmd_suite)
    return ap


def _load_config(path):
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if cfg is None:
        return {}
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping")
    flat = {}
    for k, v in cfg.items():
        # one level of nesting is allowed: {domain: {depth: 8}} sets depth
        if isinstance(v, dict):
            flat.update(v)
        else:
            flat[k] = v
    return {str(k).replace("-", "_"): v for k, v in flat.items()}


def parse(argv):
    ap = build_parser()
    args = ap.parse_args(argv)
    if getattr(args, "config", None):
        cfg = _load_config(args.config)
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        sub.set_defaults(**cfg)
        args = ap.parse_args(argv)  # flags override the file
    return args


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    except ConfigError as exc:
        print(f"twoweight: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, DomainError, OSError) as exc:
        print(f"twoweight: {exc}", file=sys.stderr)
        return EXIT_CONFIG


run = main

if __name__ == "__main__":
    sys.exit(main())
