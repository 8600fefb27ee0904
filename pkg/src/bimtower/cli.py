"""Command-line front end: validate, normalize, evaluate, report.

Each command prints a line-oriented ``key: value`` report to stdout and,
with ``--out FILE``, the same report as JSON.  Reports are deterministic:
the RNG seed (``--seed``, default 0) is echoed in every report, and it
drives both the random inputs bound to free slots and the basis generation
inside the tower, so identical invocations give byte-identical output.

The ``oracle`` command recomputes reference values along routes that share
no code with the compile-and-run pipeline: character sums and commutant
solvers for dimensions, a raw tree walk for evaluation, the truncation
ladder for extended tensor products.  ``eval``, ``dims`` and ``rotate``
cross-check themselves against those routes where one applies and fail with
exit code 5 on disagreement.

Exit codes: 0 success, 1 usage, 2 term parse error, 3 backend build
failure, 4 level beyond the dimension cap (``--force`` lifts it), 5 cross
check failed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .extremal import extremality_report, interval_lambda
from .models import ModelError, load_model
from .normal import normalize, ser_closed, to_term
from .oracles import (central_vector_dim, centralizer_dim, direct_eval,
                      encloses_closed, endo_dim, invariant_dim,
                      invariant_dim_solver, nf_eval, power_commutant_dim,
                      tensor_limit, truncated)
from .rotation import burns_rotation, defining_equation_check
from .terms import SexprError, TermError, parse_sexpr, slots_of, to_sexpr
from .tower import TowerContext


class _Usage(Exception):
    pass


class _Backend(Exception):
    pass


class _Cap(Exception):
    pass


class _CrossCheck(Exception):
    """Carries the report assembled so far; printed before exiting 5."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _build_parser():
    p = _Parser(prog="bimtower", description=__doc__.splitlines()[0])
    p.add_argument("command",
                   choices=["validate", "normalize", "eval", "dims",
                            "extremal", "rotate", "oracle"])
    p.add_argument("kind", nargs="?",
                   help="oracle flavor: dims, eval or cone")
    p.add_argument("--backend", metavar="FILE",
                   help="JSON backend config")
    p.add_argument("--term", metavar="FILE",
                   help="file holding one tangle s-expression")
    p.add_argument("--inline", metavar="SEXPR",
                   help="tangle s-expression on the command line")
    p.add_argument("--n", type=int, default=None,
                   help="level / maximal level, command-dependent")
    p.add_argument("--tol", type=float, default=1e-9,
                   help="cross-check tolerance (default 1e-9)")
    p.add_argument("--cap", type=int, default=2,
                   help="highest level whose centralizer may be computed")
    p.add_argument("--force", action="store_true",
                   help="compute past --cap anyway")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", metavar="FILE",
                   help="also write the report as JSON")
    return p


# -- report plumbing ---------------------------------------------------------


def _num(x):
    """Stable scalar rendering: reals lose a zero imaginary part."""
    if isinstance(x, complex):
        if abs(x.imag) < 1e-12:
            x = x.real
        else:
            return f"{x.real!r}{x.imag:+}j"
    if isinstance(x, float):
        if x == int(x) and abs(x) < 1e15:
            return repr(x)
        return repr(x)
    return str(x)


def _print_report(report):
    for key, val in report.items():
        if key == "matrix":
            continue
        if isinstance(val, float) or isinstance(val, complex):
            val = _num(val)
        elif not isinstance(val, str):
            val = json.dumps(val)
        print(f"{key}: {val}")


def _json_safe(val):
    if isinstance(val, dict):
        return {k: _json_safe(v) for k, v in val.items()}
    if isinstance(val, (list, tuple)):
        return [_json_safe(v) for v in val]
    if isinstance(val, complex):
        return {"re": val.real, "im": val.imag}
    if isinstance(val, float) and not np.isfinite(val):
        return "inf" if val > 0 else str(val)
    return val


def _matrix_json(x):
    x = np.asarray(x)
    return {"shape": list(x.shape),
            "re": np.real(x).tolist(),
            "im": np.imag(x).tolist()}


# -- shared loading ----------------------------------------------------------


def _load_backend(args):
    if not args.backend:
        raise _Usage("this command needs --backend FILE")
    try:
        with open(args.backend) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise _Backend(f"cannot read {args.backend}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _Backend(f"{args.backend} is not JSON: {exc}") from exc
    try:
        model = load_model(cfg)
    except ModelError as exc:
        raise _Backend(str(exc)) from exc
    return TowerContext(model, seed=args.seed)


def _load_term(args):
    if args.inline is not None and args.term is not None:
        raise _Usage("--term and --inline are mutually exclusive")
    if args.inline is not None:
        return parse_sexpr(args.inline)
    if args.term is None:
        raise _Usage("this command needs --term FILE or --inline SEXPR")
    try:
        with open(args.term) as fh:
            src = fh.read()
    except OSError as exc:
        raise SexprError(f"cannot read {args.term}: {exc}", 0, 0)
    return parse_sexpr(src)


def _guard_level(args, n, what):
    if n > args.cap and not args.force:
        raise _Cap(f"{what} at level {n} exceeds --cap {args.cap}")


def _bind_slots(ctx, term, args):
    """Seeded centralizer samples for every free slot, name order."""
    rng = np.random.default_rng(args.seed)
    inputs = {}
    for name in sorted(slots_of(term)):
        k = slots_of(term)[name]
        _guard_level(args, k, f"input for slot {name!r}")
        basis = ctx.centralizer_basis(k)
        co = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
        inputs[name] = sum(c * b for c, b in zip(co, basis))
    return inputs


def _header(args, ctx=None):
    report = {"command": args.command if args.kind is None
              else f"{args.command} {args.kind}",
              "seed": args.seed}
    if ctx is not None:
        report["backend"] = ctx.model.name
    return report


# -- commands ----------------------------------------------------------------


def _column_text(col):
    from .normal import IdGroup
    if isinstance(col, IdGroup):
        return f"id:{col.k}"
    return f"{col.slot}:{col.arity}:{col.m}:{col.v}:{col.w}"


def cmd_validate(args):
    term = _load_term(args)
    report = _header(args)
    report["valid"] = True
    report["arity"] = _arity_of(term)
    report["slots"] = " ".join(f"{k}:{v}" for k, v in
                               sorted(slots_of(term).items())) or "(none)"
    return report


def _arity_of(term):
    from .terms import out_arity
    return out_arity(term)


def cmd_normalize(args):
    term = _load_term(args)
    nf = normalize(term)
    report = _header(args)
    report["arity"] = nf.arity
    report["columns"] = " | ".join(_column_text(c) for c in nf.columns) or "(empty)"
    for i, placed in enumerate(nf.closed):
        report[f"closed_{i}"] = f"gap {placed.gap}: {ser_closed(placed.part)}"
    report["term"] = to_sexpr(to_term(nf))
    return report


def cmd_eval(args):
    ctx = _load_backend(args)
    term = _load_term(args)
    inputs = _bind_slots(ctx, term, args)
    level, value = ctx.evaluate(term, inputs)
    report = _header(args, ctx)
    report["level"] = level
    if level == 0:
        blocks = [complex(b) for b in ctx.central_blocks(value)]
        if len(blocks) == 1:
            report["value"] = blocks[0]
        report["blocks"] = ", ".join(_num(b) for b in blocks)
    else:
        report["dim"] = value.shape[0]
        report["norm"] = float(np.linalg.norm(value))
    _, ref = nf_eval(ctx, normalize(term), inputs)
    dev = float(np.max(np.abs(value - ref))) if value.size else 0.0
    flagged = encloses_closed(term)
    if not flagged:
        _, direct = direct_eval(ctx, term, inputs)
        dev = max(dev, float(np.max(np.abs(value - direct)))
                  if value.size else 0.0)
    report["enclosure_flag"] = flagged
    report["oracle_dev"] = dev
    if args.out:
        report["matrix"] = _matrix_json(value)
    if dev > args.tol:
        raise _CrossCheck(f"engine and oracle differ by {dev:.3e}", report)
    return report


def cmd_dims(args):
    ctx = _load_backend(args)
    n_max = 2 if args.n is None else args.n
    _guard_level(args, n_max, "centralizer dimensions")
    report = _header(args, ctx)
    group = getattr(ctx.model, "group", None)
    rep = getattr(ctx.model, "group_rep", None)
    mismatch = None
    for k in range(1, n_max + 1):
        p_eng = ctx.central_vectors(k).shape[1]
        q_eng = len(ctx.centralizer_basis(k))
        line = f"H {ctx.dim(k)} | P {p_eng} | Q {q_eng}"
        if group is not None:
            p_chi = central_vector_dim(group, rep, k)
            q_chi = centralizer_dim(group, rep, k)
            line += f" | P_oracle {p_chi} | Q_oracle {q_chi}"
            if (p_eng, q_eng) != (p_chi, q_chi):
                mismatch = f"level {k}: engine ({p_eng}, {q_eng}) " \
                           f"oracle ({p_chi}, {q_chi})"
        report[f"level_{k}"] = line
    if group is not None:
        mats = [rep[g] for g in group.elements]
        for k in range(1, n_max + 1):
            inv_chi = invariant_dim(group, rep, k)
            end_chi = endo_dim(group, rep, k)
            inv_sol = invariant_dim_solver(mats, k)
            end_sol = power_commutant_dim(mats, k)
            report[f"kpower_{k}"] = (f"invariant {inv_chi} solver {inv_sol}"
                                     f" | endo {end_chi} solver {end_sol}")
            if (inv_chi, end_chi) != (inv_sol, end_sol):
                mismatch = f"K-power level {k}: characters vs solver"
    report["oracle"] = "characters+solver" if group is not None else "none"
    if mismatch:
        raise _CrossCheck(f"dimension mismatch at {mismatch}", report)
    return report


def cmd_extremal(args):
    ctx = _load_backend(args)
    n = 1 if args.n is None else args.n
    _guard_level(args, n, "extremality at level")
    rng = np.random.default_rng(args.seed)
    rep = extremality_report(ctx, n, rng=rng)
    report = _header(args, ctx)
    report["level"] = n
    report["extremal"] = rep["extremal"]
    report["lambda"] = float(rep["lambda_min"])
    t = getattr(ctx.model, "t", None)
    if t is not None:
        report["lambda_exact"] = str(interval_lambda(t))
    for i, blk in enumerate(rep["blocks"]):
        ratio = blk["ratio"]
        report[f"block_{i}"] = (f"w_right {blk['w_right']!r} "
                                f"w_left {blk['w_left']!r} "
                                f"ratio {'none' if ratio is None else ratio!r}")
    return report


def cmd_rotate(args):
    ctx = _load_backend(args)
    n = 1 if args.n is None else args.n
    if n < 1:
        raise _Usage("rotate needs --n >= 1")
    _guard_level(args, n, "rotation at level")
    mat = burns_rotation(ctx, n)
    report = _header(args, ctx)
    report["level"] = n
    report["P_dim"] = mat.shape[0]
    if mat.shape[0]:
        eye = np.eye(mat.shape[0])
        report["unitary_defect"] = float(
            np.max(np.abs(mat.conj().T @ mat - eye)))
        report["order_defect"] = float(
            np.max(np.abs(np.linalg.matrix_power(mat, n) - eye)))
        ok = defining_equation_check(ctx, n, tol=args.tol)
        report["defining_equation"] = "pass" if ok else "FAIL"
        if args.out:
            report["matrix"] = _matrix_json(mat)
        if not ok:
            raise _CrossCheck("rotation defining equation fails", report)
    return report


def cmd_oracle(args):
    if args.kind == "dims":
        return _oracle_dims(args)
    if args.kind == "eval":
        return _oracle_eval(args)
    if args.kind == "cone":
        return _oracle_cone(args)
    raise _Usage("oracle needs a kind: dims, eval or cone")


def _oracle_dims(args):
    ctx = _load_backend(args)
    group = getattr(ctx.model, "group", None)
    if group is None:
        raise _Usage("the dimension oracle works on group backends only")
    rep = ctx.model.group_rep
    mats = [rep[g] for g in group.elements]
    n_max = 2 if args.n is None else args.n
    report = _header(args, ctx)
    for k in range(1, n_max + 1):
        report[f"level_{k}"] = (
            f"P {central_vector_dim(group, rep, k)}"
            f" | Q {centralizer_dim(group, rep, k)}"
            f" | invariant {invariant_dim(group, rep, k)}"
            f"/{invariant_dim_solver(mats, k)}"
            f" | endo {endo_dim(group, rep, k)}"
            f"/{power_commutant_dim(mats, k)}")
    return report


def _oracle_eval(args):
    ctx = _load_backend(args)
    term = _load_term(args)
    inputs = _bind_slots(ctx, term, args)
    level, value = direct_eval(ctx, term, inputs)
    report = _header(args, ctx)
    report["level"] = level
    report["enclosure_flag"] = encloses_closed(term)
    if level == 0:
        blocks = [complex(b) for b in ctx.central_blocks(value)]
        report["blocks"] = ", ".join(_num(b) for b in blocks)
    else:
        report["dim"] = value.shape[0]
        report["norm"] = float(np.linalg.norm(value))
    if args.out:
        report["matrix"] = _matrix_json(value)
    return report


def _oracle_cone(args):
    from .cones import ExtendedPositive, tensor_ext
    ctx = _load_backend(args)
    n = 1 if args.n is None else args.n
    rng = np.random.default_rng(args.seed)
    d = ctx.dim(n)
    if d == 0:
        report = _header(args, ctx)
        report["note"] = f"level {n} is zero-dimensional"
        return report

    def rand_ext():
        r = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        s = r @ r.conj().T
        u = rng.normal(size=d) + 1j * rng.normal(size=d)
        u /= np.linalg.norm(u)
        return ExtendedPositive.make(s, np.outer(u, u.conj()))

    x, y = rand_ext(), rand_ext()
    descend = ctx.merge(n, n)
    z = tensor_ext(x, y, descend=descend)
    probes = [v / np.linalg.norm(v) for v in
              (rng.normal(size=ctx.dim(2 * n))
               + 1j * rng.normal(size=ctx.dim(2 * n))
               for _ in range(8))]
    limits = tensor_limit(x, y, probes, descend=descend)
    report = _header(args, ctx)
    report["level"] = n
    report["probes"] = len(probes)
    worst = 0.0
    disagree = 0
    for v, lim in zip(probes, limits):
        s = float(np.real(v.conj() @ z.S @ v))
        p = float(np.real(v.conj() @ z.P @ v))
        if p > 1e-9:
            if np.isfinite(lim):
                disagree += 1
        elif not np.isfinite(lim):
            disagree += 1
        else:
            worst = max(worst, abs(s - lim) / max(1.0, abs(lim)))
    report["infinite_disagreements"] = disagree
    report["finite_dev"] = worst
    if disagree or worst > max(args.tol, 1e-6):
        raise _CrossCheck("tensor limit oracle disagrees", report)
    return report


_COMMANDS = {
    "validate": cmd_validate,
    "normalize": cmd_normalize,
    "eval": cmd_eval,
    "dims": cmd_dims,
    "extremal": cmd_extremal,
    "rotate": cmd_rotate,
    "oracle": cmd_oracle,
}


def _finish(report, args):
    _print_report(report)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(_json_safe(report), fh, indent=2)
            fh.write("\n")


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.tol <= 0:
            raise _Usage("--tol must be positive")
        if args.cap < 1:
            raise _Usage("--cap must be >= 1")
        if args.kind is not None and args.command != "oracle":
            raise _Usage(f"unexpected argument {args.kind!r}")
        report = _COMMANDS[args.command](args)
    except _Usage as exc:
        print(f"error: usage: {exc}", file=sys.stderr)
        return 1
    except (SexprError, TermError) as exc:
        print(f"error: parse: {exc}", file=sys.stderr)
        return 2
    except _Backend as exc:
        print(f"error: backend: {exc}", file=sys.stderr)
        return 3
    except _Cap as exc:
        print(f"error: cap: {exc} (pass --force to compute anyway)",
              file=sys.stderr)
        return 4
    except _CrossCheck as exc:
        _finish(exc.report, args)
        print(f"error: cross-check: {exc}", file=sys.stderr)
        return 5
    _finish(report, args)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
