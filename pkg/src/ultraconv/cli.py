"""Command-line front end.

    ultraconv <group> <command> [--config run.cfg] [flags]

Each invocation writes one JSON record (plus CSV side files for grids) into the
output directory, and a .meta.json sidecar holding the timestamp. Exit status is
0 on success (a negative verdict is data), 1 on a domain error (an error record is
still written), 2 on usage errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import expr
from .config import RunConfig, load_config
from .errors import DomainError, UsageError
from .weights import (RSequence, associated_detail, check_conditions, gevrey, make_sequence,
                      subordinate)

ENV_OUTPUT = "QK_OUTPUT_DIR"


# ---------------------------------------------------------------------------
# records


def jsonable(v):
    """Plain JSON types; non-finite floats become the strings inf, -inf, nan."""
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, complex):
        return [jsonable(v.real), jsonable(v.imag)]
    if v is None or isinstance(v, str):
        return v
    if hasattr(v, "to_dict"):
        return jsonable(v.to_dict())
    if dataclasses.is_dataclass(v):
        return jsonable(dataclasses.asdict(v))
    return str(v)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _csv(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in rows:
            fh.write(",".join(str(c) for c in r) + "\n")


class Run:
    def __init__(self, args, cfg: RunConfig):
        out = os.environ.get(ENV_OUTPUT) or args.out or cfg.output_dir
        self.args = args
        self.cfg = dataclasses.replace(cfg, output_dir=str(out))
        self.dir = Path(out)
        key = {k: v for k, v in vars(args).items() if k not in ("func", "config", "out")}
        digest = hashlib.sha256((dumps(key) + dumps(self.cfg.to_dict())).encode()).hexdigest()[:10]
        self.stem = f"{args.group}-{args.cmd}-{digest}"
        self.files: list[str] = []

    def side(self, suffix: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        p = self.dir / f"{self.stem}-{suffix}"
        self.files.append(p.name)
        return p

    def write(self, status: str, result) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        args = {k: v for k, v in vars(self.args).items() if k not in ("func", "out")}
        record = {"command": f"{self.args.group} {self.args.cmd}", "args": args, "config": self.cfg.to_dict(),
                  "status": status, "result": result, "files": self.files}
        path = self.dir / f"{self.stem}.json"
        path.write_text(dumps(record), encoding="utf-8")
        meta = {"record": path.name, "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
                "argv": sys.argv[1:]}
        (self.dir / f"{self.stem}.meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        return path


# ---------------------------------------------------------------------------
# shared builders


def _fun(text: str):
    return expr.function(text)


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _sequence(args, cfg: RunConfig):
    if getattr(args, "gevrey", None) is not None:
        pmax = args.pmax if args.pmax is not None else cfg.pmax
        return gevrey(args.gevrey, pmax)
    pmax = getattr(args, "pmax", None)
    return make_sequence(cfg.seq, cfg.pmax if pmax is None else pmax)


def _upoly(cfg: RunConfig):
    from .ultrapoly import build
    u = cfg.upoly
    return build(cfg.sequence(), flavor=u.flavor, k=u.k, rprime=u.rprime, mode=u.mode, q=u.q, box=u.box)


def _kernel(cfg: RunConfig):
    from .parametrix import build_kernel
    from .ultrapoly import strip_check
    P = _upoly(cfg)
    strip = strip_check(P, x_max=cfg.grid.strip_x_max)
    return P, build_kernel(P, strip, x_max=cfg.grid.x_max, N=cfg.grid.N, tol=cfg.tol.kernel)


# ---------------------------------------------------------------------------
# seq


def cmd_seq_check(run: Run):
    M = _sequence(run.args, run.cfg)
    q = (run.args.q,) if run.args.q is not None else (2, 3, 4)
    rep = check_conditions(M, q_candidates=q)
    return {"report": rep.to_dict(), "text": rep.to_text()}


def cmd_seq_assoc(run: Run):
    M = _sequence(run.args, run.cfg)
    rows = []
    for rho in _floats(run.args.rho):
        v = associated_detail(M, rho)
        rows.append({"rho": rho, "M": v.value, "argmax": v.argmax, "saturated": v.saturated})
    return {"values": rows, "p_max": M.p_max}


def cmd_seq_subordinate(run: Run):
    a = run.args
    if a.k is not None:
        k = np.array(_floats(a.k))
    else:
        rng = np.random.default_rng(run.cfg.seed)
        k = np.cumsum(rng.uniform(0.0, 2.0, a.random)) + 1.0
    out = subordinate(RSequence(k))
    return {"k": k, "k_prime": out.values, "pointwise_le": bool(np.all(out.values <= k * (1 + 1e-15)))}


# ---------------------------------------------------------------------------
# upoly


def cmd_upoly_build(run: Run):
    P = _upoly(run.cfg)
    path = run.side("P.txt")
    path.write_text(P.to_text() + "\n", encoding="utf-8")
    return {"P": P.to_text().splitlines(), "zero_free_half_width": P.zero_free_half_width,
            "tail_bound": P.tail_bound}


def cmd_upoly_strip(run: Run):
    from .ultrapoly import strip_check
    P = _upoly(run.cfg)
    x_max = run.args.x_max if run.args.x_max is not None else run.cfg.grid.strip_x_max
    rep = strip_check(P, x_max=x_max)
    _csv(run.side("strip.csv"), rep.csv_rows())
    return rep.to_dict()


def cmd_upoly_invderiv(run: Run):
    from .ultrapoly import inv_derivative
    P = _upoly(run.cfg)
    rows = []
    for x in _floats(run.args.x):
        for n in range(run.args.n + 1):
            r = inv_derivative(P, x, n)
            rows.append({"x": x, "n": n, "value": r.value, "bound_ratio": r.bound_ratio, "nodes": r.nodes})
    return {"rows": rows, "max_bound_ratio": max(r["bound_ratio"] for r in rows)}


# ---------------------------------------------------------------------------
# param


def cmd_param_build(run: Run):
    P, G = _kernel(run.cfg)
    path = run.side("kernel.csv")
    G.to_csv(path)
    return {"header": G.header(), "integral": float(G.values.sum() * G.dx), "G0": float(G.values[G.N // 2])}


def cmd_param_decay(run: Run):
    from .parametrix import verify_decay
    _, G = _kernel(run.cfg)
    fit = verify_decay(G, t=run.args.t)
    _csv(run.side("decay.csv"), [("alpha", "beta", "C")] + [(a, b, repr(c)) for a, b, c in fit.table])
    return fit.to_dict()


def cmd_param_delta(run: Run):
    from .parametrix import verify_delta
    P, G = _kernel(run.cfg)
    res = verify_delta(G, P, _fun(run.args.phi), tol=run.cfg.tol.delta)
    return {**res.to_dict(), "pass": res.residual <= run.cfg.tol.delta}


def cmd_param_weier(run: Run):
    from .parametrix import solve_weierstrass
    a = run.args
    P, G = _kernel(run.cfg)
    res = solve_weierstrass(G, P, a=a.a, b=a.b, tau=a.tau, N_terms=a.terms, undamped=a.undamped)
    _csv(run.side("solution.csv"), [("x", "f")] + [(repr(float(x)), repr(float(f))) for x, f in zip(res.x, res.f)])
    return res.to_dict()


# ---------------------------------------------------------------------------
# gs


def cmd_gs_seminorm(run: Run):
    from .gs_spaces import seminorm
    a = run.args
    M = run.cfg.sequence()
    r = RSequence(np.full(M.p_max, a.r)) if a.r is not None else None
    h = None if r is not None else a.h
    sv = seminorm(_fun(a.phi), M, M, h=h, r=r, alpha_cap=a.alpha_cap)
    _csv(run.side("seminorm.csv"), [(x, repr(y) if isinstance(y, float) else y) for x, y in sv.csv_rows()])
    return sv.to_dict()


def cmd_gs_member(run: Run):
    from .gs_spaces import membership_test
    M = run.cfg.sequence()
    return membership_test(_fun(run.args.f), M).to_dict()


def cmd_gs_regularize(run: Run):
    from .gs_spaces import normalized_gaussian, regularization_report
    a = run.args
    M = run.cfg.sequence()
    chi = normalized_gaussian(a.chi_scale)
    rep = regularization_report(_fun(a.psi), chi, _fun(a.phi), M, M, h=a.h, alpha_cap=a.alpha_cap)
    return rep.to_dict()


# ---------------------------------------------------------------------------
# conv


def cmd_conv_check(run: Run):
    from .convolution import criterion_iv
    rep = criterion_iv(_fun(run.args.f1), _fun(run.args.f2), spacing=run.cfg.grid.spacing)
    return rep.to_dict()


def cmd_conv_value(run: Run):
    from .convolution import criterion_iv, pair_value
    f1, f2, phi = _fun(run.args.f1), _fun(run.args.f2), _fun(run.args.phi)
    rep = criterion_iv(f1, f2, spacing=run.cfg.grid.spacing)
    return {"verdict": rep.verdict, "value": pair_value(f1, f2, phi, report=rep)}


def cmd_conv_algebra(run: Run):
    from .convolution import algebra_checks
    a = run.args
    P = None if a.identity else _upoly(run.cfg)
    rec = algebra_checks(_fun(a.f1), _fun(a.f2), P, _fun(a.phi))
    return {**rec.to_dict(), "pass": rec.passed(run.cfg.tol.algebra)}


# ---------------------------------------------------------------------------
# parser


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ultraconv", description=__doc__.splitlines()[0])
    groups = ap.add_subparsers(dest="group", required=True)

    def sub(group, name, fn, help_):
        p = group.add_parser(name, help=help_)
        p.add_argument("--config", help="key=value run configuration")
        p.add_argument("--out", help=f"output directory (overridden by ${ENV_OUTPUT})")
        p.set_defaults(func=fn, cmd=name)
        return p

    g = groups.add_parser("seq", help="weight sequences").add_subparsers(dest="cmd", required=True)
    for name, fn, h in (("check", cmd_seq_check, "condition suite"), ("assoc", cmd_seq_assoc, "associated function")):
        p = sub(g, name, fn, h)
        p.add_argument("--gevrey", type=float, help="use p!^sigma instead of the config sequence")
        p.add_argument("--pmax", type=int)
        if name == "check":
            p.add_argument("--q", type=int, help="(M.5) exponent to test")
        else:
            p.add_argument("--rho", required=True, help="comma-separated rho values")
    p = sub(g, "subordinate", cmd_seq_subordinate, "subordinate sequence")
    m = p.add_mutually_exclusive_group(required=True)
    m.add_argument("--k", help="comma-separated nondecreasing k_p")
    m.add_argument("--random", type=int, help="draw this many k_p from the config seed")

    g = groups.add_parser("upoly", help="ultrapolynomials").add_subparsers(dest="cmd", required=True)
    sub(g, "build", cmd_upoly_build, "build P")
    p = sub(g, "strip", cmd_upoly_strip, "zero-free strip and lower bound")
    p.add_argument("--x-max", dest="x_max", type=float)
    p = sub(g, "invderiv", cmd_upoly_invderiv, "derivatives of 1/P")
    p.add_argument("--x", required=True, help="comma-separated points")
    p.add_argument("--n", type=int, default=20, help="highest order")

    g = groups.add_parser("param", help="parametrix").add_subparsers(dest="cmd", required=True)
    sub(g, "build", cmd_param_build, "kernel G on the grid")
    p = sub(g, "decay", cmd_param_decay, "decay fit of G")
    p.add_argument("--t", type=float, default=0.25)
    p = sub(g, "delta", cmd_param_delta, "P(D) G = delta against a test function")
    p.add_argument("--phi", required=True)
    p = sub(g, "weier", cmd_param_weier, "damped Weierstrass example")
    p.add_argument("--a", type=float, default=0.5)
    p.add_argument("--b", type=int, default=3)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--terms", type=int, default=12)
    p.add_argument("--undamped", action="store_true", help="eigenfunction case (needs --terms 0)")

    g = groups.add_parser("gs", help="Gelfand-Shilov spaces").add_subparsers(dest="cmd", required=True)
    p = sub(g, "seminorm", cmd_gs_seminorm, "weighted seminorm")
    p.add_argument("--phi", required=True)
    p.add_argument("--h", type=float, default=0.25)
    p.add_argument("--r", type=float, help="Roumieu: constant sequence r_p = R instead of h")
    p.add_argument("--alpha-cap", dest="alpha_cap", type=int, default=60)
    p = sub(g, "member", cmd_gs_member, "finite-probe membership test")
    p.add_argument("--f", required=True)
    p = sub(g, "regularize", cmd_gs_regularize, "regularising ladder")
    p.add_argument("--psi", default="gaussian(0,1)")
    p.add_argument("--phi", default="gaussian(0,1)", help="cut-off, phi(0) = 1")
    p.add_argument("--chi-scale", dest="chi_scale", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.25)
    p.add_argument("--alpha-cap", dest="alpha_cap", type=int, default=20)

    g = groups.add_parser("conv", help="convolution").add_subparsers(dest="cmd", required=True)
    p = sub(g, "check", cmd_conv_check, "convolvability verdict")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p = sub(g, "value", cmd_conv_value, "<f1 * f2, phi>")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--phi", required=True)
    p = sub(g, "algebra", cmd_conv_algebra, "commutativity and P(D) interchange")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--phi", default="gaussian(0,1)")
    p.add_argument("--identity", action="store_true", help="use P = 1")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = load_config(args.config)
        run = Run(args, cfg)
        for key in ("phi", "f", "f1", "f2", "psi"):
            if isinstance(getattr(args, key, None), str):
                expr.parse_expr(getattr(args, key))  # syntax errors are usage errors
    except UsageError as e:
        print(f"ultraconv: error: {e}", file=sys.stderr)
        return 2
    try:
        result = args.func(run)
    except UsageError as e:
        print(f"ultraconv: error: {e}", file=sys.stderr)
        return 2
    except DomainError as e:
        path = run.write("error", {"error": type(e).__name__, "code": e.code, "message": str(e)})
        print(f"{e.code}: {e}\n{path}", file=sys.stderr)
        return 1
    path = run.write("ok", result)
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
