"""Command-line entry point: ``chernlab <subcommand> ...``.

Residual rows go to stdout as JSON Lines; the human summary and the summary
object go to stderr. Exit codes: 0 every row passes, 1 some check fails,
2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time

import numpy as np

from . import catalog, functionals, identities, normalize
from .chern import point_tensors
from .dsl import finite_difference_jet, metric_jet
from .errors import ChernLabError, NotBalancedError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
P_TOL = 1e-8
BALANCED_TOL = 1e-8


class UsageError(Exception):
    pass


def _complex_json(a):
    a = np.asarray(a)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [_complex_json(x) for x in a]


_POINT_TOKEN = re.compile(r"^[+-]?(\d+(\.\d*)?(e[+-]?\d+)?)?([+-](\d+(\.\d*)?(e[+-]?\d+)?)?i|i)?$")


def parse_point(text: str, n: int) -> np.ndarray:
    """Comma-separated complex coordinates such as ``1,0.5-0.2i,i``."""
    out = []
    for part in text.split(","):
        tok = part.strip().replace(" ", "")
        if not tok or not _POINT_TOKEN.match(tok):
            raise UsageError(f"cannot parse coordinate {part.strip()!r} (use forms like 1, -0.5+2i, i)")
        tok = re.sub(r"(^|[+-])i$", r"\g<1>1i", tok)
        out.append(complex(tok.replace("i", "j")))
    if len(out) != n:
        raise UsageError(f"--point needs {n} coordinates, got {len(out)}")
    return np.array(out)


def _load(name: str):
    try:
        return catalog.load(name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc


def _jet(entry, z, args):
    if getattr(args, "fd", False):
        return finite_difference_jet(entry.spec, z, h=args.h)
    return metric_jet(entry.spec, z)


def _emit(rows):
    for row in rows:
        sys.stdout.write(json.dumps(row) + "\n")


def _summary(verdicts, functionals_summary, started, lines):
    for line in lines:
        print(line, file=sys.stderr)
    doc = {"verdicts": verdicts, "functionals": functionals_summary, "duration_ms": round(1000 * (time.perf_counter() - started))}
    print(json.dumps(doc), file=sys.stderr)


def _tol(args):
    if args.tol is not None:
        return args.tol
    return identities.FD_TOL if getattr(args, "fd", False) else identities.SYMBOLIC_TOL


# subcommands


def cmd_catalog(args) -> int:
    for name in catalog.BUILTIN_NAMES:
        entry = catalog.load_builtin(name)
        row = {
            "name": name,
            "dimension": entry.n,
            "metric": entry.spec.source(),
            "expected_properties": entry.expected_properties,
        }
        sys.stdout.write(json.dumps(row) + "\n")
    return EXIT_OK


def cmd_eval(args) -> int:
    entry = _load(args.manifold)
    z = parse_point(args.point, entry.n)
    pt = point_tensors(_jet(entry, z, args))
    T, R = pt.torsion.T, pt.curvature.R
    doc = {
        "manifold": entry.name,
        "point": _complex_json(z),
        "g": _complex_json(pt.jet.g),
        "frame": _complex_json(pt.frame.e),
        "gamma": _complex_json(pt.connection.gamma),
        "torsion": _complex_json(T),
        "curvature": _complex_json(R),
        "eta": _complex_json(functionals.gauduchon_eta(T)),
        "torsion_norm": functionals.torsion_norm(T),
        "ricci": {str(k): _complex_json(functionals.ricci(R, k)) for k in (1, 2, 3)},
        "max_abs_R": float(np.max(np.abs(R))),
    }
    sys.stdout.write(json.dumps(doc) + "\n")
    return EXIT_OK


def cmd_identities(args) -> int:
    started = time.perf_counter()
    entry = _load(args.manifold)
    tol = _tol(args)
    ids = list(identities.IdentityId)
    if args.only:
        try:
            ids = [identities.IdentityId(x.strip()) for x in args.only.split(",")]
        except ValueError as exc:
            raise UsageError(f"unknown identity in --only: {args.only}") from exc
    if args.c != 0:
        ids = [i for i in ids if i is not identities.IdentityId.EQ11]
    else:
        ids = [i for i in ids if i is not identities.IdentityId.EQ31]
    rows, reports = [], []
    eta, rmax, fvals, ric = [], [], [], []
    spectra = []
    for k, z in enumerate(catalog.sample_points(entry, args.points, args.seed)):
        pt = point_tensors(_jet(entry, z, args))
        for rep in identities.run_suite(pt, ids, args.c, tol):
            reports.append(rep)
            rows.append(rep.row(entry.name, k))
        eta.append(float(np.max(np.abs(functionals.gauduchon_eta(pt.torsion.T)))))
        rmax.append(float(np.max(np.abs(pt.curvature.R))))
        fvals.append(functionals.torsion_norm(pt.torsion.T))
        ric.append([float(np.max(np.abs(functionals.ricci(pt.curvature.R, kind)))) for kind in (1, 2, 3)])
        if args.spectrum:
            sp = functionals.rbc_extremes(pt.curvature, seed=args.seed)
            spectra.append([sp.min_value, sp.max_value])
    _emit(rows)

    failed = [r for r in rows if not r["pass"]]
    variants = {k.value: v for k, v in identities.passing_variants(reports).items()}
    const_id = identities.IdentityId.EQ31 if args.c != 0 else identities.IdentityId.EQ11
    const_rows = [r for r in reports if r.identity is const_id]
    verdicts = {
        "all_pass": not failed,
        "passing_variants": variants,
        "constant_B": {"c": args.c, "holds": all(r.passed for r in const_rows)} if const_rows else None,
    }
    summary = {
        "max_abs_eta": max(eta),
        "max_abs_R": max(rmax),
        "torsion_norm": [min(fvals), max(fvals)],
        "max_abs_ricci": [max(r[i] for r in ric) for i in range(3)],
    }
    if spectra:
        summary["rbc_extremes"] = spectra
    lines = [f"{entry.name}: {args.points} points, {len(rows)} rows, {len(failed)} failed (tol {tol:g})"]
    for ident in ids:
        for variant in identities.VARIANTS.get(ident, (identities.DEFAULT,)):
            vals = [r["max_abs_residual"] for r in rows if r["identity"] == ident.value and r["variant"] == variant]
            if vals:
                label = ident.value if variant == identities.DEFAULT else f"{ident.value}[{variant}]"
                lines.append(f"  {label:<24} max residual {max(vals):.3e}")
    _summary(verdicts, summary, started, lines)
    return EXIT_FAIL if failed else EXIT_OK


def _row(manifold, k, check, residual, where, ok, variant=identities.DEFAULT):
    return {
        "manifold": manifold,
        "point_index": k,
        "identity": check,
        "variant": variant,
        "max_abs_residual": residual,
        "argmax_indices": list(where),
        "pass": bool(ok),
    }


def _argmax(a):
    a = np.abs(np.asarray(a))
    return float(a.max()), [int(i) + 1 for i in np.unravel_index(int(np.argmax(a)), a.shape)]


def cmd_flatness(args) -> int:
    """Balanced check, frame normalization, P-vanishing check and max |R| per point."""
    started = time.perf_counter()
    entry = _load(args.manifold)
    if entry.n != 3:
        raise UsageError("flatness needs a threefold")
    tol = _tol(args)
    rows = []
    for k, z in enumerate(catalog.sample_points(entry, args.points, args.seed)):
        pt = point_tensors(_jet(entry, z, args))
        hyp = identities.residual_rbc_constant(pt, 0.0, tol)
        rows.append(hyp.row(entry.name, k))
        eta = functionals.gauduchon_eta(pt.torsion.T)
        worst, where = _argmax(eta)
        balanced = worst <= BALANCED_TOL
        rows.append(_row(entry.name, k, "balanced", worst, where, balanced))
        if balanced:
            frame, T_new = normalize.normalize_frame(pt.frame, pt.torsion.T, BALANCED_TOL)
            diag = np.array([[T_new[i, i, m] for m in range(3)] for i in range(3)])
            worst_n, where_n = _argmax(diag)
            rows.append(_row(entry.name, k, "normal_form", worst_n, [where_n[0], where_n[0], where_n[1]], worst_n <= normalize.NORMALIZED_TOL))
            rows.append(identities.p_vanishing_check(T_new, tol=P_TOL).row(entry.name, k))
        else:
            rows.append(_row(entry.name, k, "normal_form", None, [], False, "skipped: not balanced"))
            rows.append(_row(entry.name, k, "P", None, [], False, "skipped: not balanced"))
        worst_r, where_r = _argmax(pt.curvature.R)
        rows.append(_row(entry.name, k, "chern_flat", worst_r, where_r, worst_r <= tol))
    _emit(rows)

    def every(check):
        return all(r["pass"] for r in rows if r["identity"] == check)

    failed = [r for r in rows if not r["pass"]]
    verdicts = {
        "vanishing_B": every("EQ11"),
        "balanced": every("balanced"),
        "normalized": every("normal_form"),
        "P_vanishes": every("P"),
        "chern_flat": every("chern_flat"),
    }
    def worst_of(check):
        vals = [r["max_abs_residual"] for r in rows if r["identity"] == check and r["max_abs_residual"] is not None]
        return max(vals) if vals else None

    summary = {c: worst_of(c) for c in ("EQ11", "balanced", "normal_form", "P", "chern_flat")}
    lines = [f"{entry.name}: {args.points} points, {len(failed)} failed checks"]
    lines += [f"  {c:<12} {'yes' if v else 'no'}" for c, v in verdicts.items()]
    _summary(verdicts, summary, started, lines)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_normalize(args) -> int:
    entry = _load(args.manifold)
    if entry.n != 3:
        raise UsageError("normalize needs a threefold")
    z = parse_point(args.point, entry.n)
    pt = point_tensors(_jet(entry, z, args))
    T = pt.torsion.T
    doc = {"manifold": entry.name, "point": _complex_json(z), "eta": _complex_json(functionals.gauduchon_eta(T))}
    try:
        frame, T_new = normalize.normalize_frame(pt.frame, T, BALANCED_TOL)
    except NotBalancedError as exc:
        doc["error"] = str(exc)
        sys.stdout.write(json.dumps(doc) + "\n")
        print(f"{entry.name}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    A = normalize.torsion_matrix(T)
    diag = max(abs(T_new[i, i, m]) for i in range(3) for m in range(3))
    doc.update(
        {
            "torsion_matrix": _complex_json(A),
            "singular_values": [float(x) for x in np.linalg.svd(A, compute_uv=False)],
            "frame": _complex_json(frame.e),
            "normalized_torsion_matrix": _complex_json(normalize.torsion_matrix(T_new)),
            "max_abs_diagonal_torsion": float(diag),
            "pass": bool(diag <= normalize.NORMALIZED_TOL),
        }
    )
    sys.stdout.write(json.dumps(doc) + "\n")
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_bspectrum(args) -> int:
    entry = _load(args.manifold)
    z = parse_point(args.point, entry.n)
    pt = point_tensors(_jet(entry, z, args))
    sp = functionals.rbc_extremes(pt.curvature, restarts=args.restarts, seed=args.seed)
    doc = {
        "manifold": entry.name,
        "point": _complex_json(z),
        "min": sp.min_value,
        "max": sp.max_value,
        "argmin": {"rotation": _complex_json(sp.argmin[0]), "weights": [float(x) for x in sp.argmin[1]]},
        "argmax": {"rotation": _complex_json(sp.argmax[0]), "weights": [float(x) for x in sp.argmax[1]]},
        "restarts": sp.restarts,
        "converged": sp.converged,
        "sign": sp.sign(args.sign_tol),
    }
    sys.stdout.write(json.dumps(doc) + "\n")
    print(f"{entry.name}: B in [{sp.min_value:.6g}, {sp.max_value:.6g}] ({doc['sign']})", file=sys.stderr)
    return EXIT_OK if sp.converged else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chernlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def manifold(sp):
        sp.add_argument("manifold", help="builtin name or path to a JSON metric configuration")

    def jets(sp):
        sp.add_argument("--fd", action="store_true", help="use finite-difference jets")
        sp.add_argument("--h", type=float, default=1e-4, help="finite-difference step (default 1e-4)")

    def sampling(sp):
        sp.add_argument("--points", type=int, default=10)
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--tol", type=float, default=None, help="default 1e-6, or 1e-3 with --fd")

    sp = sub.add_parser("catalog", help="list builtin manifolds")
    sp.set_defaults(func=cmd_catalog)

    sp = sub.add_parser("eval", help="tensors at a point")
    manifold(sp)
    sp.add_argument("--point", required=True)
    jets(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("identities", help="identity residual suite")
    manifold(sp)
    sampling(sp)
    jets(sp)
    sp.add_argument("--c", type=float, default=0.0, help="constant for the constant-B identities")
    sp.add_argument("--only", default=None, help="comma-separated identity ids")
    sp.add_argument("--spectrum", action="store_true", help="also extremize B at each point")
    sp.set_defaults(func=cmd_identities)

    sp = sub.add_parser("flatness", help="balanced, normalized frame, P = 0, max |R|")
    manifold(sp)
    sampling(sp)
    jets(sp)
    sp.set_defaults(func=cmd_flatness)

    sp = sub.add_parser("normalize", help="normalized frame at a point")
    manifold(sp)
    sp.add_argument("--point", required=True)
    jets(sp)
    sp.set_defaults(func=cmd_normalize)

    sp = sub.add_parser("bspectrum", help="extremes of the real bisectional curvature")
    manifold(sp)
    sp.add_argument("--point", required=True)
    sp.add_argument("--restarts", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--sign-tol", type=float, default=functionals.SIGN_TOL)
    jets(sp)
    sp.set_defaults(func=cmd_bspectrum)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "points", 1) < 1:
            raise UsageError("--points must be at least 1")
        if getattr(args, "seed", 0) < 0:
            raise UsageError("--seed must be nonnegative")
        if getattr(args, "restarts", 1) < 1:
            raise UsageError("--restarts must be at least 1")
        return args.func(args)
    except (UsageError, ChernLabError, ArithmeticError) as exc:
        print(f"chernlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
