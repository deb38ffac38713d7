"""
Command-line front end.

Subcommands: ``exponents``, ``audit``, ``minimize``, ``sequence``,
``weak-minors`` and ``mesh-gen``. Exit codes are 0 on success or a passing
verdict, 1 on a failing verdict and 2 on invalid input. Commands that write
files also write ``manifest.json`` (resolved configuration and tool
version) next to their outputs. CSV numbers use 17 significant digits.
"""

import argparse
import csv
import json
import math
import os
import sys

from . import __version__
from . import admissible, energy, exponents, injectivity, minimize, sequences
from . import mesh as _mesh

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _fmt(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return "%.17g" % x


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in r])


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "tolist"):
        return _jsonable(x.tolist())
    return x


def _dump(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)


def _write_manifest(out_paths, command, config):
    dirs = sorted({os.path.dirname(os.path.abspath(p)) for p in out_paths if p})
    for d in dirs:
        with open(os.path.join(d, "manifest.json"), "w", encoding="utf-8") as fh:
            fh.write(_dump({"tool": "polydist", "version": __version__, "command": command, "config": config}))
            fh.write("\n")


def _read_json(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} file {path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        out.append(math.inf if part.lower() == "inf" else int(part))
    return out


def _float_list(text):
    return [float(p) for p in text.split(",")]


# --- exponents ----------------------------------------------------------------------------


def cmd_exponents(args):
    n = args.n
    if n not in (2, 3):
        raise InputError("n must be 2 or 3")
    out = []
    fmt = exponents.format_exponent
    p = exponents.as_exponent(args.p) if args.p is not None else None
    q = exponents.as_exponent(args.q) if args.q is not None else None
    s = exponents.as_exponent(args.s) if args.s is not None else None
    if p is not None:
        out.append(("p'", fmt(exponents.inverse_exponent(p, n))))
    if q is not None:
        out.append(("q'", fmt(exponents.inverse_exponent(q, n))))
    if p is not None and q is not None:
        out.append(("kappa", fmt(exponents.composition_exponent(q, p))))
        out.append(("varrho", fmt(exponents.codistortion_exponent(q, p, n))))
    if q is not None and args.m is not None:
        if n != 3:
            raise exponents.ExponentRangeError("sigma = q(1+m)/(q+m) is stated for n = 3")
        sigma = exponents.ball_sigma(q, args.m)
        out.append(("sigma", fmt(sigma)))
        if args.r is not None:
            s_ball = exponents.ball_s(sigma, args.r, n)
            out.append(("s", fmt(s_ball)))
            if s is None:
                s = s_ball
    if s is not None:
        r_pull = exponents.corollary_r(s, n)
        out.append(("r_pullback", fmt(r_pull)))
        out.append(("rho", fmt(exponents.remark_rho(r_pull, n))))
        out.append(("varrho_pullback", fmt(exponents.pullback_varrho(r_pull, n))))
    if not out:
        raise InputError("give at least one of -p, -q (with -m), -s")
    for name, val in out:
        print(f"{name} = {val}")
    return EXIT_OK


# --- audit -----------------------------------------------------------------------------------


def _load_problem(args):
    try:
        m = _mesh.load_mesh(args.mesh)
    except OSError as exc:
        raise InputError(f"cannot read mesh file {args.mesh}: {exc.strerror}") from None
    model = energy.model_from_dict(_read_json(args.model, "model"))
    cls = admissible.class_from_dict(_read_json(getattr(args, "class_"), "class"))
    return m, model, cls


def cmd_audit(args):
    m, model, cls = _load_problem(args)
    try:
        phi = _mesh.load_deformation(args.deformation, m)
    except OSError as exc:
        raise InputError(f"cannot read deformation file {args.deformation}: {exc.strerror}") from None
    inj = None
    extra = {}
    if args.injectivity:
        inj = admissible.injectivity_clause(m, phi)
        pos = injectivity.jacobian_positivity(m, phi)
        extra["positivity"] = pos.to_dict()
        if pos.min_J >= 0:
            extra["ciarlet_necas"] = injectivity.ciarlet_necas(m, phi).to_dict()
    verdict = admissible.membership(m, phi, model, cls, injective=inj)
    result = verdict.to_dict()
    result.update(extra)
    text = _dump(result)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _write_manifest([args.out], "audit", _audit_config(args, model, cls))
    return EXIT_OK if verdict.overall else EXIT_FAIL


def _audit_config(args, model, cls):
    return {
        "mesh": args.mesh,
        "deformation": args.deformation,
        "model": model.to_dict(),
        "class": cls.to_dict(),
        "injectivity": bool(args.injectivity),
    }


# --- minimize -------------------------------------------------------------------------------

_RUN_KEYS = {"mesh", "model", "class", "init", "minimize", "out", "report"}


def cmd_minimize(args):
    run = {}
    if args.config:
        run = _read_json(args.config, "run config")
        if not isinstance(run, dict):
            raise InputError("run config must be a JSON object")
        unknown = set(run) - _RUN_KEYS
        if unknown:
            raise InputError(f"unknown run config keys: {sorted(unknown)}")
    for key in ("mesh", "init", "out", "report"):
        val = getattr(args, key)
        if val is not None:
            run[key] = val
    if args.model is not None:
        run["model"] = _read_json(args.model, "model")
    if getattr(args, "class_") is not None:
        run["class"] = _read_json(getattr(args, "class_"), "class")
    if args.settings is not None:
        run["minimize"] = _read_json(args.settings, "minimize settings")
    for key in ("mesh", "model", "class", "init", "out", "report"):
        if key not in run:
            raise InputError(f"missing {key!r} (flag or run config key)")
    try:
        m = _mesh.load_mesh(run["mesh"])
    except OSError as exc:
        raise InputError(f"cannot read mesh file {run['mesh']}: {exc.strerror}") from None
    model = energy.model_from_dict(run["model"])
    cls = admissible.class_from_dict(run["class"])
    config = minimize.config_from_dict(run.get("minimize", {}))
    init = run["init"]
    if isinstance(init, dict):
        unknown = set(init) - {"perturb", "seed"}
        if unknown:
            raise InputError(f"unknown init keys: {sorted(unknown)}")
        phi0 = minimize.perturbed_identity(m, float(init.get("perturb", 0.0)), int(init.get("seed", config.seed)))
    else:
        try:
            phi0 = _mesh.load_deformation(init, m)
        except OSError as exc:
            raise InputError(f"cannot read init file {init}: {exc.strerror}") from None
    try:
        phi, report = minimize.minimize(m, model, cls, phi0, config)
    except minimize.InfeasibleStart as exc:
        raise InputError(str(exc)) from None
    _mesh.save_deformation(run["out"], phi)
    with open(run["report"], "w", encoding="utf-8", newline="") as fh:
        fh.write(report.to_csv())
    resolved = {
        "mesh": run["mesh"],
        "model": model.to_dict(),
        "class": cls.to_dict(),
        "init": init,
        "minimize": config.to_dict(),
        "out": run["out"],
        "report": run["report"],
        "termination": report.termination,
    }
    _write_manifest([run["out"], run["report"]], "minimize", resolved)
    last = report.records[-1]
    print(f"termination = {report.termination}")
    print(f"accepted_steps = {report.accepted_steps}")
    print(f"energy = {_fmt(last.energy)}")
    print(f"grad_norm = {_fmt(last.grad_norm)}")
    return EXIT_OK if report.termination == "stationary" else EXIT_FAIL


# --- sequences ------------------------------------------------------------------------------


def cmd_sequence(args):
    ks = _int_list(args.k)
    if args.family == "ball" and any(math.isinf(k) for k in ks):
        raise InputError("the ball family needs finite k")
    cls = sequences.PlanarShear if args.family == "planar" else sequences.PuncturedBall
    kw = {} if args.family == "planar" else {"dim": args.dim}
    rows = sequences.norm_study(cls, ks, _float_list(args.s), resolution=args.resolution, which=args.which, **kw)
    outs = []
    if args.out:
        _write_csv(
            args.out,
            ["family", "k", "s", "norm", "resolution", "richardson_ratio"],
            [[r["family"], r["k"], r["s"], r["norm"], r["resolution"], r["richardson_ratio"]] for r in rows],
        )
        outs.append(args.out)
    else:
        for r in rows:
            print(f"{r['family']},{_fmt(r['k'])},{_fmt(r['s'])},{_fmt(r['norm'])},{r['resolution']},{_fmt(r['richardson_ratio'])}")
    if args.render:
        if args.family != "planar":
            raise InputError("--render draws the planar family")
        _write_csv(args.render, ["k", "line", "x1", "x2", "y1", "y2"], sequences.render_grid(ks))
        outs.append(args.render)
    if outs:
        _write_manifest(outs, "sequence", {k: v for k, v in vars(args).items() if k != "func"})
    return EXIT_OK


def cmd_weak_minors(args):
    ks = _int_list(args.k)
    if args.family == "planar":
        fam, kw = sequences.PlanarShear, {}
        center = [0.0, 0.0]
    else:
        fam, kw = sequences.PuncturedBall, {"dim": args.dim}
        center = [0.0] * args.dim
    theta = sequences.Bump(center=center, radius=args.radius, amplitude=args.amplitude)
    res = sequences.weak_minor_demo(fam, theta, ks, resolution=args.resolution, **kw)
    diffs = [math.nan] + res["differences"]
    rows = [[args.family, k, v, res["limit"], d] for k, v, d in zip(ks, res["values"], diffs)]
    header = ["family", "k", "value", "limit", "difference"]
    if args.out:
        _write_csv(args.out, header, rows)
        _write_manifest([args.out], "weak-minors", {k: v for k, v in vars(args).items() if k != "func"})
    else:
        print(",".join(header))
        for r in rows:
            print(",".join(c if isinstance(c, str) else _fmt(c) for c in r))
    ok = res["differences_decreasing"] and res["final_relative_gap"] <= args.tol
    print(f"converged = {str(ok).lower()}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


# --- mesh generation --------------------------------------------------------------------------


def cmd_mesh_gen(args):
    if args.fold:
        m, phi = injectivity.fold_fixture(args.nx)
    else:
        dom = _float_list(args.domain) if args.domain else None
        if args.nz:
            dom = dom or [0, 1, 0, 1, 0, 1]
            if len(dom) != 6:
                raise InputError("3D domain needs x0,x1,y0,y1,z0,z1")
            m = _mesh.make_box_grid(args.nx, args.ny, args.nz, (dom[0:2], dom[2:4], dom[4:6]))
        else:
            dom = dom or [0, 1, 0, 1]
            if len(dom) != 4:
                raise InputError("2D domain needs x0,x1,y0,y1")
            m = _mesh.make_grid(args.nx, args.ny, (dom[0:2], dom[2:4]))
        phi = None
        if args.deformation:
            phi = minimize.perturbed_identity(m, args.perturb, args.seed)
    _mesh.save_mesh(args.out, m)
    outs = [args.out]
    if args.deformation:
        _mesh.save_deformation(args.deformation, phi)
        outs.append(args.deformation)
    _write_manifest(outs, "mesh-gen", {k: v for k, v in vars(args).items() if k != "func"})
    print(f"vertices = {m.n_vertices}")
    print(f"simplices = {m.n_simplices}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="polydist", description="Polyconvex energies over finite-distortion classes.")
    ap.add_argument("--version", action="version", version=f"polydist {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("exponents", help="exact exponent relations")
    e.add_argument("-n", type=int, required=True, help="dimension (2 or 3)")
    e.add_argument("-p", help="Sobolev exponent of the map (rational or inf)")
    e.add_argument("-q", help="second exponent (rational or inf)")
    e.add_argument("-r", help="exponent of the J^r energy term")
    e.add_argument("-m", help="exponent of the J^-m energy term")
    e.add_argument("-s", help="inner-distortion exponent")
    e.set_defaults(func=cmd_exponents)

    a = sub.add_parser("audit", help="admissible-class membership of a deformation")
    a.add_argument("--mesh", required=True)
    a.add_argument("--deformation", required=True)
    a.add_argument("--model", required=True, help="model JSON block")
    a.add_argument("--class", dest="class_", required=True, help="class JSON block")
    a.add_argument("--injectivity", action="store_true", help="add the injectivity clause and report")
    a.add_argument("--out", help="also write the verdict JSON here")
    a.set_defaults(func=cmd_audit)

    mn = sub.add_parser("minimize", help="feasible descent over an admissible class")
    mn.add_argument("--config", help="run config JSON with keys " + ", ".join(sorted(_RUN_KEYS)))
    mn.add_argument("--mesh")
    mn.add_argument("--model")
    mn.add_argument("--class", dest="class_")
    mn.add_argument("--init", help="initial deformation JSON")
    mn.add_argument("--settings", help="minimizer settings JSON")
    mn.add_argument("--out", help="final deformation JSON")
    mn.add_argument("--report", help="per-iteration CSV")
    mn.set_defaults(func=cmd_minimize)

    s = sub.add_parser("sequence", help="distortion norms of the example families")
    s.add_argument("--family", choices=["planar", "ball"], default="planar")
    s.add_argument("--k", default="1,2,4,8,16,32,64,128,256,512,1024")
    s.add_argument("--s", default="1,2")
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--which", choices=["outer", "inner"], default="outer")
    s.add_argument("--resolution", type=int, default=4)
    s.add_argument("--out")
    s.add_argument("--render", help="write grid-line images of the planar family as CSV")
    s.set_defaults(func=cmd_sequence)

    w = sub.add_parser("weak-minors", help="weighted Jacobian integrals along a family")
    w.add_argument("--family", choices=["planar", "ball"], default="planar")
    w.add_argument("--k", default="1,2,4,8,16,32,64,128,256,512,1024")
    w.add_argument("--dim", type=int, default=2)
    w.add_argument("--radius", type=float, default=None, help="bump radius (planar 0.9, ball 0.5)")
    w.add_argument("--amplitude", type=float, default=1.0)
    w.add_argument("--resolution", type=int, default=256)
    w.add_argument("--tol", type=float, default=1e-3)
    w.add_argument("--out")
    w.set_defaults(func=cmd_weak_minors)

    g = sub.add_parser("mesh-gen", help="structured meshes and fixtures")
    g.add_argument("--nx", type=int, required=True)
    g.add_argument("--ny", type=int, default=None)
    g.add_argument("--nz", type=int, default=None)
    g.add_argument("--domain", help="x0,x1,y0,y1[,z0,z1]")
    g.add_argument("--fold", action="store_true", help="cut fold fixture (writes its deformation too)")
    g.add_argument("--out", required=True)
    g.add_argument("--deformation", help="write a (perturbed) identity deformation here")
    g.add_argument("--perturb", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_mesh_gen)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "weak-minors" and args.radius is None:
        args.radius = 0.9 if args.family == "planar" else 0.5
    if args.command == "mesh-gen":
        if args.ny is None:
            args.ny = 2 * args.nx if args.fold else args.nx
        if args.fold and not args.deformation:
            parser.error("--fold needs --deformation for the folded images")
    try:
        return args.func(args)
    except (InputError, exponents.ExponentRangeError, _mesh.MeshFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
