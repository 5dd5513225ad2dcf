"""Command-line interface: ``dilation-spaces <command> ...``.

Exit codes: 0 success, 1 invalid input, 2 a verification found violations.
Errors are written to stderr as JSON ``{"error": code, "message": text}``.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import classifier, dilations, distmat, products, spaces, verify
from .errors import ClassificationFailed, DilationSpacesError, InvalidArgument

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2


def _default_seed() -> int:
    raw = os.environ.get("DILATION_SPACES_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgument(f"DILATION_SPACES_SEED must be an integer, got {raw!r}") from None


def _load_json(arg: str):
    """Parse ``arg`` as inline JSON, or read it as a JSON file path."""
    text = arg.strip()
    if text[:1] in "{[" or text in ("true", "false", "null") or text[:1].isdigit() or text[:1] == "-":
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            pass
    try:
        return json.loads(Path(arg).read_text())
    except FileNotFoundError:
        raise InvalidArgument(f"no such file and not valid JSON: {arg}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{arg}: invalid JSON ({exc})") from None


def _load_space(arg: str) -> spaces.Space:
    obj = _load_json(arg)
    if isinstance(obj, dict) and "space" in obj and "type" not in obj:
        obj = obj["space"]
    return spaces.space_make(spaces.descriptor_from_json(obj))


def _load_points(space, arg: str) -> list:
    obj = _load_json(arg)
    if isinstance(obj, dict):
        obj = obj.get("points", [])
    return [spaces.point_from_json(space, p) for p in obj]


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# -- commands ---------------------------------------------------------------


def _descriptor_from_flags(args):
    if args.type == 0:
        if args.size is None or args.r is None:
            raise InvalidArgument("type 0 needs --size and --r")
        return spaces.Type0(args.size, args.r)
    if args.type == 1:
        if None in (args.n, args.a, args.b):
            raise InvalidArgument("type 1 needs --n, --a and --b")
        return spaces.Type1(args.n, args.a, args.b)
    if args.n is None or args.alpha is None:
        raise InvalidArgument("type 2 needs --n and --alpha")
    return spaces.Type2(args.n, args.alpha)


def cmd_space_make(args):
    desc = _descriptor_from_flags(args)
    space = spaces.space_make(desc)
    out = spaces.descriptor_to_json(desc)
    if space.fields:
        out["fields"] = [{"p": f.p, "k": f.k, "modulus": list(f.modulus)} for f in space.fields]
    _emit(_dump(out), args.out)
    return EXIT_OK


def _sampled(args):
    space = _load_space(args.space)
    if getattr(args, "points", None):
        pts = _load_points(space, args.points)
    else:
        pts = spaces.sample(space, args.count, args.depth, args.seed)
    return space, pts


def cmd_space_sample(args):
    space, pts = _sampled(args)
    out = {"space": spaces.descriptor_to_json(space.desc), "seed": args.seed, "depth": args.depth,
           "points": [spaces.point_to_json(p) for p in pts]}
    _emit(_dump(out), args.out)
    return EXIT_OK


def cmd_space_distmat(args):
    space, pts = _sampled(args)
    m = distmat.distance_matrix(space, pts, [f"p{i}" for i in range(len(pts))])
    _emit(distmat.matrix_to_csv_text(m), args.out)
    if args.sidecar:
        Path(args.sidecar).write_text(_dump(distmat.sidecar_to_json(m)))
    return EXIT_OK


def cmd_classify(args):
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise InvalidArgument(f"cannot read {args.input}: {exc}") from None
    sidecar = Path(args.sidecar).read_text() if args.sidecar else None
    m = distmat.matrix_from_csv_text(text, sidecar)
    policy = classifier.TolerancePolicy(args.rel_tol, args.gap_ratio)
    report = classifier.classify(m, policy)
    _emit(_dump(report.to_json(m.ids)), args.out)
    return EXIT_OK


def _render_table(results) -> str:
    buf = io.StringIO()
    buf.write(f"{'property':<12} {'checked':>10} {'violations':>10}  result\n")
    for r in results:
        buf.write(f"{r.name:<12} {r.checked:>10} {r.violations:>10}  {'PASS' if r.ok else 'FAIL'}\n")
    return buf.getvalue()


def cmd_verify(args):
    names = args.property or []
    if args.explain:
        text = "".join(f"{name}: {verify.STATEMENTS[name]}\n" for name in (names or verify.STATEMENTS))
        if not names or not args.space:
            _emit(text, args.out)
            return EXIT_OK
        sys.stderr.write(text)
    if not names:
        raise InvalidArgument("give at least one --property (or --explain)")
    if not args.space:
        raise InvalidArgument("--space is required")
    space = _load_space(args.space)
    results = [verify.run_property(n, space, count=args.count, depth=args.depth, seed=args.seed) for n in names]
    if args.format == "json":
        _emit(_dump(verify.report_json(space, results)), args.out)
    else:
        _emit(_render_table(results), args.out)
    return EXIT_OK if all(r.ok for r in results) else EXIT_VERIFY


def cmd_dilate(args):
    space = _load_space(args.space)
    a = spaces.point_from_json(space, _load_json(args.fix))
    b, c = (spaces.point_from_json(space, _load_json(x)) for x in args.map)
    domain = _load_points(space, args.domain) if args.domain else []
    u = dilations.two_point_witness(space, a, b, c, domain=domain)
    out = {"dilation": dilations.dilation_to_json(u),
           "scale": dilations.scale_to_json(dilations.scale_of(u, space)),
           "image_of_fixed": spaces.point_to_json(dilations.apply(u, a)),
           "image_of_moved": spaces.point_to_json(dilations.apply(u, b))}
    _emit(_dump(out), args.out)
    return EXIT_OK


def cmd_extend(args):
    space = _load_space(args.space)
    obj = _load_json(args.partial)
    pairs_raw = obj["pairs"] if isinstance(obj, dict) else obj
    partial = [(spaces.point_from_json(space, x), spaces.point_from_json(space, y)) for x, y in pairs_raw]
    pts = _load_points(space, args.sample)
    u = dilations.extend_partial(space, pts, partial)
    bad = dilations.dilation_violations(space, u, pts)
    out = {"dilation": dilations.dilation_to_json(u),
           "scale": dilations.scale_to_json(dilations.scale_of(u, space)),
           "pairs_checked": len(pts) * (len(pts) - 1) // 2, "violations": len(bad)}
    _emit(_dump(out), args.out)
    return EXIT_OK if not bad else EXIT_VERIFY


def cmd_product(args):
    descs = [spaces.descriptor_from_json(_load_json(s)) for s in args.spaces]
    if args.op == "sup":
        res = products.sup_product(descs)
        out = {"product": spaces.descriptor_to_json(res.desc)}
    elif args.op == "euclidean":
        desc, evaluate = products.euclidean_product(descs)
        rng = np.random.default_rng(args.seed)
        worst = 0.0
        for _ in range(args.samples):
            x, y = rng.normal(size=(2, desc.n))
            ref = float(np.linalg.norm(x - y)) ** desc.alpha
            worst = max(worst, abs(evaluate(x, y) - ref) / ref)
        out = {"product": spaces.descriptor_to_json(desc), "pairs_checked": args.samples,
               "max_relative_error": worst}
    else:
        desc, evaluate = products.euclidean_product(descs)
        metric = evaluate if args.rule == "euclidean" else products.lp_rule_evaluator(descs)
        report = products.probe_product_homogeneity(metric, desc.n, args.samples, args.seed)
        out = {"rule": args.rule, "dim": desc.n, **report.to_json()}
    _emit(_dump(out), args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    p = argparse.ArgumentParser(prog="dilation-spaces", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def sampling(q, count=50, depth=3):
        q.add_argument("--space", required=True, help="descriptor JSON (file or inline)")
        q.add_argument("--count", type=int, default=count)
        q.add_argument("--depth", type=int, default=depth)
        q.add_argument("--seed", type=int, default=seed)
        q.add_argument("--out")

    space = sub.add_parser("space", help="construct spaces, sample points, export distances")
    ssub = space.add_subparsers(dest="space_command", required=True)
    make = ssub.add_parser("make")
    make.add_argument("--type", type=int, choices=(0, 1, 2), required=True)
    make.add_argument("--n", type=int)
    make.add_argument("--a", type=float)
    make.add_argument("--b", type=float)
    make.add_argument("--alpha", type=float)
    make.add_argument("--size", type=int)
    make.add_argument("--r", type=float)
    make.add_argument("--out")
    make.set_defaults(func=cmd_space_make)
    samp = ssub.add_parser("sample")
    sampling(samp)
    samp.set_defaults(func=cmd_space_sample)
    dm = ssub.add_parser("distmat")
    sampling(dm)
    dm.add_argument("--points", help="points JSON (as written by 'space sample') instead of sampling")
    dm.add_argument("--sidecar", help="also write exact distances to this JSON file")
    dm.set_defaults(func=cmd_space_distmat)

    cl = sub.add_parser("classify", help="classify a CSV distance matrix")
    cl.add_argument("--input", required=True)
    cl.add_argument("--sidecar")
    cl.add_argument("--rel-tol", type=float, default=distmat.DEFAULT_REL_TOL)
    cl.add_argument("--gap-ratio", type=float, default=distmat.DEFAULT_GAP_RATIO)
    cl.add_argument("--out")
    cl.set_defaults(func=cmd_classify)

    ve = sub.add_parser("verify", help="run property suites on a sample")
    ve.add_argument("--property", action="append", choices=sorted(verify.PROPERTIES))
    ve.add_argument("--space")
    ve.add_argument("--count", type=int)
    ve.add_argument("--depth", type=int)
    ve.add_argument("--seed", type=int, default=seed)
    ve.add_argument("--format", choices=("table", "json"), default="table")
    ve.add_argument("--explain", action="store_true", help="print the statement each property checks")
    ve.add_argument("--out")
    ve.set_defaults(func=cmd_verify)

    di = sub.add_parser("dilate", help="two-point witness: fix A and send B to C")
    di.add_argument("--space", required=True)
    di.add_argument("--fix", required=True, metavar="A")
    di.add_argument("--map", nargs=2, required=True, metavar=("B", "C"))
    di.add_argument("--domain", help="extra points to tabulate (multi-factor type-1 spaces)")
    di.add_argument("--out")
    di.set_defaults(func=cmd_dilate)

    ex = sub.add_parser("extend", help="extend a partial dilation to a sample")
    ex.add_argument("--space", required=True)
    ex.add_argument("--partial", required=True, help='JSON {"pairs": [[source, target], ...]}')
    ex.add_argument("--sample", required=True, help="points JSON")
    ex.add_argument("--out")
    ex.set_defaults(func=cmd_extend)

    pr = sub.add_parser("product", help="product constructions and the product-metric probe")
    pr.add_argument("--op", choices=("sup", "euclidean", "probe"), required=True)
    pr.add_argument("--spaces", nargs="+", required=True, help="descriptor JSON per factor")
    pr.add_argument("--rule", choices=("euclidean", "lp"), default="lp",
                    help="probe: combine factor distances by (sum d^(2/alpha))^(alpha/2) or (sum d^(1/alpha))^alpha")
    pr.add_argument("--samples", type=int, default=50)
    pr.add_argument("--seed", type=int, default=seed)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_product)
    return p


def _fail(exc: Exception, code: int) -> int:
    err = {"error": getattr(exc, "code", "invalid-argument"), "message": str(exc)}
    if isinstance(exc, ClassificationFailed):
        err["diagnostics"] = exc.diagnostics
    sys.stderr.write(json.dumps(err, default=str) + "\n")
    return code


def run(argv=None) -> int:
    try:
        parser = build_parser()
    except DilationSpacesError as exc:
        return _fail(exc, EXIT_INVALID)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except ClassificationFailed as exc:
        return _fail(exc, EXIT_VERIFY)
    except (DilationSpacesError, ValueError, KeyError, TypeError, OSError) as exc:
        return _fail(exc, EXIT_INVALID)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
