"""Command-line driver: ``crsphere {eig,certify,funk-hecke,verify,sample}``.

Exit codes: 0 when every check holds, 1 when at least one is violated,
2 on usage or configuration errors. Options can also come from an INI file
(``--config``) with a ``[common]`` section and one section per command;
command-line flags override the file, and unknown keys are errors.
"""
from __future__ import annotations

import argparse
import configparser
import datetime
import sys

from . import __version__
from .certify import (
    CertGrid,
    certify_derivative_comparison,
    certify_duality_identity,
    certify_kernel_comparison,
    certify_limit_dQ,
    certify_spectral_ineq,
    chebyshev_q,
    default_sweep,
)
from .funk_hecke import (
    ConstantKernel,
    PowerKernel,
    QuadratureSpec,
    WeightedPowerKernel,
    compare_closed_form,
)
from .reports import ReportDocument, Table, make_report
from .sphere import HarmonicExpansion, SampleSpec, _parse_complex, sample_uniform
from .spectrum import (
    ConditionalQ,
    HLSKernel,
    Intertwining,
    SphereGeometry,
    WeightedHLSKernel,
    hls_gamma,
    intertwine_eig,
)
from .verify import (
    ExtremalSpec,
    verify_extremal_hls,
    verify_onofri,
    verify_sobolev_conformal,
    verify_sobolev_end,
    verify_sobolev_subcritical,
    verify_subcritical_hls,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2

# options that shape output rather than the computation; not echoed
_NOT_ECHOED = {"out", "config", "format", "stamp", "command", "handler"}


class UsageError(Exception):
    """Invalid parameters detected after argument parsing."""


def _count(text: str) -> int:
    """Sample counts accept scientific notation such as 1e7."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v >= 1 and v == int(v)):
        raise argparse.ArgumentTypeError(f"not a positive integer: {text!r}")
    return int(v)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _complex_list(text: str) -> list[complex]:
    try:
        return [_parse_complex(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of complex numbers: {text!r}") from None


def _expansion(text: str) -> HarmonicExpansion:
    try:
        return HarmonicExpansion.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--n", type=int, help="complex dimension n (sphere S^(2n+1))")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--samples", type=_count, default=1_000_000)
    g.add_argument("--streams", type=int, default=4)
    g.add_argument("--tol", type=float, help="comparison tolerance (command specific)")
    g.add_argument("--out", help="output file (default: standard output)")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--config", help="INI file with [common] and per-command sections")
    g.add_argument("--stamp", action="store_true",
                   help="record a UTC timestamp (reports are then not byte-reproducible)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="crsphere",
        description="Spectral data and sharp HLS / Sobolev inequality checks on S^(2n+1).",
    )
    parser.add_argument("--version", action="version", version=f"crsphere {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eig", parents=[common], help="tabulate eigenvalues on H_{jk}")
    p.add_argument("--op", choices=("intertwine", "conditional", "hls-gamma", "hls-kernel",
                                    "weighted"), default="intertwine")
    p.add_argument("--d", type=float)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--jmax", type=int, default=3)
    p.add_argument("--kmax", type=int, default=0)
    p.set_defaults(handler=cmd_eig)

    p = sub.add_parser("certify", parents=[common], help="certify spectral inequalities on grids")
    p.add_argument("--check", choices=("ineq", "derivative", "kernel", "limit", "duality"),
                   default="ineq")
    p.add_argument("--d", type=float, help="single d (default: sweep)")
    p.add_argument("--q", type=float, help="single q (default: Chebyshev points)")
    p.add_argument("--j", type=int, default=2, help="degree for --check limit")
    p.add_argument("--d-seq", type=_floats, help="increasing d values for --check limit")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--lambda2", type=float)
    p.add_argument("--jmax", type=int, default=30)
    p.add_argument("--kmax", type=int, default=30)
    p.add_argument("--strict-margin", type=float, default=1e-12)
    p.add_argument("--rhs-scale", type=float, default=1.0,
                   help="test hook: multiply the right-hand side")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("funk-hecke", parents=[common],
                       help="compare quadrature and closed-form kernel eigenvalues")
    p.add_argument("--kernel", choices=("power", "weighted", "constant"), default="power")
    p.add_argument("--alpha", type=float, default=0.6)
    p.add_argument("--jmax", type=int, default=6)
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--nodes-t", type=int, default=256)
    p.add_argument("--nodes-phi", type=int, default=512)
    p.set_defaults(handler=cmd_funk_hecke)

    p = sub.add_parser("verify", parents=[common], help="Monte Carlo inequality verification")
    p.add_argument("--ineq", required=True,
                   choices=("hls", "sobolev-conformal", "sobolev-subcritical", "sobolev-end",
                            "onofri", "extremal-hls"))
    p.add_argument("--f", type=_expansion, default=HarmonicExpansion.constant(1.0),
                   help='function, e.g. "const:1+mono:0.4,1,0,1,2"')
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--d", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--zeta", type=_complex_list)
    p.add_argument("--perturb", type=_expansion, help="perturbation added to the extremal")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("sample", parents=[common], help="dump uniform sphere samples")
    p.set_defaults(handler=cmd_sample)
    return parser


def _config_value(cfg, section, key, action):
    raw = cfg.get(section, key)
    if isinstance(action, argparse._StoreTrueAction):
        return cfg.getboolean(section, key)
    value = action.type(raw) if action.type is not None else raw
    if action.choices is not None and value not in action.choices:
        raise ValueError(f"choose from {sorted(action.choices)}")
    return value


def _apply_config(parser, argv):
    """Re-parse with defaults taken from the --config file, if any.

    Every section is validated against the options of its command
    (``[common]`` against the shared options); only ``[common]`` and the
    running command's section are applied, the latter taking precedence.
    """
    commands = parser._subparsers._group_actions[0].choices
    required = [a for sub in commands.values() for a in sub._actions if a.required]
    # required options may come from the config file, so the first pass
    # only locates the command and the file
    for a in required:
        a.required = False
    try:
        args = parser.parse_args(argv)
    finally:
        for a in required:
            a.required = True
    if not args.config:
        return parser.parse_args(argv)
    cfg = configparser.ConfigParser()
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except (OSError, configparser.Error) as exc:
        parser.error(f"cannot read config {args.config!r}: {exc}")
    shared = {a.dest for a in _common_parser()._actions}
    defaults = {}
    for section in cfg.sections():
        if section != "common" and section not in commands:
            parser.error(f"unknown config section [{section}]")
        sub = commands[args.command if section == "common" else section]
        actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
        for key in cfg.options(section):
            dest = "lam" if key == "lambda" else key.replace("-", "_")
            if dest not in actions or (section == "common" and dest not in shared):
                parser.error(f"unknown config key {key!r} in [{section}]")
            try:
                value = _config_value(cfg, section, key, actions[dest])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                parser.error(f"bad value for {key!r} in [{section}]: {exc}")
            if section in ("common", args.command):
                if section == "common" and dest in defaults:
                    continue
                defaults[dest] = value
    sub = commands[args.command]
    sub.set_defaults(**defaults)
    for a in sub._actions:
        if a.dest in defaults:
            a.required = False
    return parser.parse_args(argv)


def _echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _NOT_ECHOED or v is None:
            continue
        out["lambda" if k == "lam" else k] = str(v) if isinstance(v, HarmonicExpansion) else v
    return out


def _geom(args, default=1) -> SphereGeometry:
    return SphereGeometry(default if args.n is None else args.n)


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            flag = "--lambda" if name == "lam" else "--" + name.replace("_", "-")
            raise UsageError(f"{args.command} requires {flag}")


def _spec(args) -> SampleSpec:
    return SampleSpec(seed=args.seed, count=args.samples, streams=args.streams)


def _document(args, reports=(), table=None) -> ReportDocument:
    stamp = None
    if args.stamp:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return ReportDocument(args.command, _echo(args), list(reports), table, stamp)


# -- commands --------------------------------------------------------------------------------


def cmd_eig(args) -> ReportDocument:
    geom = _geom(args)
    if args.jmax < 0 or args.kmax < 0:
        raise UsageError("jmax and kmax must be non-negative")
    if args.op == "intertwine":
        _need(args, "d")
        kind = Intertwining(args.d)
    elif args.op == "conditional":
        kind = ConditionalQ()
    elif args.op in ("hls-gamma", "hls-kernel"):
        _need(args, "lam")
        kind = HLSKernel(args.lam)
    else:
        _need(args, "alpha")
        kind = WeightedHLSKernel(args.alpha)
    if args.op == "conditional":
        cells = [(j, 0) for j in range(args.jmax + 1)] + [(0, k) for k in range(1, args.kmax + 1)]
    else:
        cells = [(j, k) for j in range(args.jmax + 1) for k in range(args.kmax + 1)]
    rows = []
    for j, k in cells:
        if args.op == "hls-gamma":
            v = hls_gamma(geom, args.lam, (j, k))
        else:
            v = intertwine_eig(geom, kind, (j, k))
        rows.append([j, k, v])
    return _document(args, table=Table(["j", "k", "eigenvalue"], rows))


def _certify_grids(args):
    if args.d is not None:
        ns = [1 if args.n is None else args.n]
        triples = []
        for n in ns:
            geom = SphereGeometry(n)
            qs = [args.q] if args.q is not None else chebyshev_q(geom, args.d)
            triples += [(n, args.d, q) for q in qs]
        return triples
    if args.q is not None:
        raise UsageError("--q needs --d")
    return default_sweep(ns=(1, 2, 3) if args.n is None else (args.n,))


def cmd_certify(args) -> ReportDocument:
    tol = 1e-10 if args.tol is None else args.tol
    reports = []
    if args.check in ("ineq", "derivative"):
        for n, d, q in _certify_grids(args):
            grid = CertGrid(SphereGeometry(n), d, q, args.jmax, args.kmax, tol, args.strict_margin)
            if args.check == "ineq":
                reports += certify_spectral_ineq(grid, rhs_scale=args.rhs_scale)
            else:
                for j in range(grid.j_max + 1):
                    for k in range(grid.k_max + 1):
                        if j + k >= 1:
                            reports.append(certify_derivative_comparison(grid, (j, k)))
    elif args.check == "kernel":
        geom = _geom(args)
        Q = geom.Q
        if args.lam is not None and args.lambda2 is not None:
            pairs = [(args.lam, args.lambda2)]
        else:
            lams = [Q * i / 8 for i in range(1, 8)]
            pairs = [(a, b) for a in lams for b in lams if a < b]
        for l1, l2 in pairs:
            for j in range(args.jmax + 1):
                for k in range(args.kmax + 1):
                    reports.append(certify_kernel_comparison(
                        geom, l1, l2, (j, k), equality_tol=tol, strict_margin=args.strict_margin))
    elif args.check == "limit":
        _need(args, "q")
        geom = _geom(args)
        Q = geom.Q
        ds = args.d_seq or [Q - 1e-2, Q - 1e-4, Q - 1e-6]
        reports = certify_limit_dQ(geom, args.q, args.j, ds)
    else:
        geom = _geom(args)
        Q = geom.Q
        ds = [args.d] if args.d is not None else [1.0, Q / 2, Q - 0.5]
        for d in ds:
            for j in range(args.jmax + 1):
                for k in range(args.kmax + 1):
                    reports.append(certify_duality_identity(
                        geom, d, (j, k), **({} if args.tol is None else {"tol": args.tol})))
    return _document(args, reports)


def cmd_funk_hecke(args) -> ReportDocument:
    geom = _geom(args)
    tol = 1e-8 if args.tol is None else args.tol
    kernel = {"power": PowerKernel, "weighted": WeightedPowerKernel}.get(args.kernel)
    kernel = ConstantKernel() if kernel is None else kernel(args.alpha)
    quad = QuadratureSpec(args.nodes_t, args.nodes_phi)
    rows = compare_closed_form(geom, kernel, args.jmax, args.kmax, quad)
    reports = [
        make_report("funk-hecke-agreement",
                    {"n": geom.n, "kernel": args.kernel, "alpha": args.alpha, "j": j, "k": k},
                    diff, tol, 0.0)
        for j, k, _, _, diff in rows
    ]
    table = Table(["j", "k", "quadrature", "closed_form", "difference"],
                  [list(r) for r in rows])
    return _document(args, reports, table)


def cmd_verify(args) -> ReportDocument:
    geom = _geom(args)
    spec = _spec(args)
    f = args.f
    f.check_geometry(geom)
    if args.ineq == "hls":
        _need(args, "lam")
        p = 2.0 if args.p is None else args.p
        rep = verify_subcritical_hls(geom, args.lam, p, f, spec)
    elif args.ineq == "sobolev-conformal":
        _need(args, "d")
        rep = verify_sobolev_conformal(geom, args.d, f, spec)
    elif args.ineq == "sobolev-subcritical":
        _need(args, "d", "q")
        rep = verify_sobolev_subcritical(geom, args.d, args.q, f, spec)
    elif args.ineq == "sobolev-end":
        _need(args, "q")
        rep = verify_sobolev_end(geom, args.q, f, spec)
    elif args.ineq == "onofri":
        rep = verify_onofri(geom, f, spec)
    else:
        _need(args, "lam")
        zeta = args.zeta if args.zeta is not None else [0.0] * geom.dim
        rep = verify_extremal_hls(geom, args.lam, ExtremalSpec(tuple(zeta), "hls", args.lam),
                                  spec, perturbation=args.perturb)
    return _document(args, [rep])


def cmd_sample(args) -> ReportDocument:
    geom = _geom(args)
    pts = sample_uniform(geom, _spec(args))
    cols = []
    for a in range(1, geom.dim + 1):
        cols += [f"re_{a}", f"im_{a}"]
    rows = [[float(x) for z in row for x in (z.real, z.imag)] for row in pts]
    return _document(args, table=Table(cols, rows))


def _write(doc: ReportDocument, args):
    text = doc.to_csv() if args.format == "csv" else doc.to_json()
    if args.out:
        newline = "" if args.format == "csv" else None
        with open(args.out, "w", encoding="utf-8", newline=newline) as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        doc = args.handler(args)
    except (UsageError, ValueError, TypeError, OverflowError) as exc:
        print(f"crsphere {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _write(doc, args)
    except OSError as exc:
        print(f"crsphere: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_VIOLATION if doc.any_violated else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
