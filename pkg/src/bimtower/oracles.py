"""Brute-force counterparts to the engine, for cross-checking.

Everything here recomputes a quantity the main modules already produce, by a
route as different as the mathematics allows: dimension counts come from
character sums or from raw null spaces instead of the tower's spectral
splitting, extended-cone values from monotone truncation ladders instead of
closed-form support bookkeeping, and tangle values from a recursion over the
original term tree with no normalization step in between.  Results are meant
for tests and the command-line `oracle` command; nothing in the engine may
call into this module.
"""

from __future__ import annotations

import numpy as np

from .terms import (CapLeft, CapRight, Id, Node, Slot, Tensor, TraceLeft,
                    TraceRight)

# classification threshold for "this truncation ladder diverges"; used only
# by oracles, never by closed-form code
DIVERGENCE = 1e12

NULL_TOL = 1e-9


# -- character sums ---------------------------------------------------------

def characters(group, rep):
    """chi(g) = tr rep(g), as a dict over group elements."""
    return {g: complex(np.trace(np.asarray(rep[g]))) for g in group.elements}


def _integer(value, what):
    if abs(value.imag) > 1e-8 or abs(value.real - round(value.real)) > 1e-8:
        raise ArithmeticError(f"{what} sum {value} is not an integer")
    return int(round(value.real))


def invariant_dim(group, rep, n):
    """Fixed vectors of the n-fold tensor power: (1/|G|) sum chi(g)^n."""
    chi = characters(group, rep)
    total = sum(chi[g] ** n for g in group.elements) / len(group)
    return _integer(total, "invariant")


def endo_dim(group, rep, n):
    """Equivariant maps on the n-fold power: (1/|G|) sum |chi(g)|^(2n)."""
    chi = characters(group, rep)
    total = sum(abs(chi[g]) ** (2 * n) for g in group.elements) / len(group)
    return _integer(complex(total), "endomorphism")


def central_vector_dim(group, rep, n):
    """Level-n central vectors of the group backend, counted by classes:
    each class contributes the fixed vectors of its centralizer subgroup."""
    chi = characters(group, rep)
    total = 0.0 + 0.0j
    for cls in group.conjugacy_classes():
        cent = group.centralizer(cls[0])
        total += sum(chi[z] ** n for z in cent) / len(cent)
    return _integer(total, "central vector")


def centralizer_dim(group, rep, n):
    """Level-n relative commutant of the group backend, by the same class
    decomposition with |chi|^(2n)."""
    chi = characters(group, rep)
    total = 0.0 + 0.0j
    for cls in group.conjugacy_classes():
        cent = group.centralizer(cls[0])
        total += sum(abs(chi[z]) ** (2 * n) for z in cent) / len(cent)
    return _integer(total, "centralizer")


# -- null-space solvers -----------------------------------------------------

def _nullity(rows):
    rows = np.vstack(rows)
    s = np.linalg.svd(rows, compute_uv=False)
    top = s[0] if len(s) and s[0] > 0 else 1.0
    return int(rows.shape[1] - np.count_nonzero(s > NULL_TOL * top))


def invariant_dim_solver(gen_mats, n):
    """dim of joint fixed vectors of the n-th kron powers, by rank."""
    powers = []
    for m in gen_mats:
        m = np.asarray(m, dtype=complex)
        p = np.eye(1, dtype=complex)
        for _ in range(n):
            p = np.kron(p, m)
        powers.append(p)
    dim = powers[0].shape[0]
    return _nullity([p - np.eye(dim) for p in powers])


def commutant_dim_solver(mats):
    """dim of {x : xm = mx for all m}, solved as one linear system."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    d = mats[0].shape[0]
    eye = np.eye(d, dtype=complex)
    rows = [np.kron(eye, m) - np.kron(m.T, eye) for m in mats]
    return _nullity(rows)


def power_commutant_dim(gen_mats, n):
    powers = []
    for m in gen_mats:
        m = np.asarray(m, dtype=complex)
        p = np.eye(1, dtype=complex)
        for _ in range(n):
            p = np.kron(p, m)
        powers.append(p)
    return commutant_dim_solver(powers)


# -- truncation ladders for extended elements -------------------------------

LADDER = (1e2, 1e4, 1e6, 1e8)


def _classify(values, threshold):
    vals = [float(np.real(v)) for v in values]
    if vals[-1] > threshold:
        return np.inf
    # a ladder that keeps growing by the step ratio is a divergence too
    if len(vals) >= 2 and vals[-2] > 1e-6 and vals[-1] / vals[-2] > 50.0:
        return np.inf
    return vals[-1]


def limit_scalar(seq_fn, ladder=LADDER, threshold=DIVERGENCE):
    """[0, inf] value of a monotone family seq_fn(m) of scalars."""
    return _classify([seq_fn(m) for m in ladder], threshold)


def limit_values(seq_fn, vectors, ladder=LADDER, threshold=DIVERGENCE):
    """Per-vector [0, inf] quadratic forms of a monotone matrix family."""
    mats = [np.asarray(seq_fn(m), dtype=complex) for m in ladder]
    out = []
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        out.append(_classify([v.conj() @ m @ v for m in mats], threshold))
    return out


def truncated(x, m):
    """Finite stand-in for an extended element: S + m P."""
    return x.S + m * x.P


def tensor_limit(x, y, vectors, descend=None, ladder=LADDER):
    """sup_m of kron(truncated x, truncated y), probed on vectors."""
    def fam(m):
        big = np.kron(truncated(x, m), truncated(y, m))
        if descend is not None:
            g, gp = descend
            big = g @ big @ gp
        return big
    return limit_values(fam, vectors, ladder=ladder)


def pair_trace_limit(x, y, weight=None, ladder=LADDER):
    """sup_m tr(truncated x . truncated y [. weight]), a scalar in [0, inf]."""
    w = None if weight is None else np.asarray(weight, dtype=complex)
    def fam(m):
        prod = truncated(x, m) @ truncated(y, m)
        if w is not None:
            prod = prod @ w
        return np.trace(prod)
    return limit_scalar(fam, ladder=ladder)


# -- direct tangle evaluation -----------------------------------------------

def max_level(term):
    """Largest arity any subterm evaluates at.

    Tree-order evaluation is only a faithful cross-check when every level
    up to this one has a nondegenerate tensor structure; a backend whose
    tower collapses to dimension zero absorbs floating closed components
    that the standard form evaluates before tensoring.
    """
    from .terms import out_arity
    worst = out_arity(term)
    if isinstance(term, Node):
        worst = max([worst] + [max_level(c) for c in term.children])
    return worst


def _one_cap(ctx, x, k, side):
    """Fold the edge strand of a level-k operator, by raw basis sums."""
    kind = ("R", "right") if side == "right" else ("L", "left")
    ops = ctx.creations(k - 1, *kind)
    return sum(c.conj().T @ x @ c for c in ops)


def _close(ctx, x, n, side):
    for k in range(n, 0, -1):
        x = _one_cap(ctx, x, k, side)
    return x


def direct_eval(ctx, term, inputs=None):
    """Evaluate a term by walking its tree, skipping normalization.

    Same output contract as the plan executor: (level, matrix).  Caps,
    tensors and closures are applied in the order the tree spells out, and
    a fully closed subterm is multiplied in at the node where it is capped
    off, not floated free.  On backends whose level-0 algebra is one block
    the two conventions agree; elsewhere agreement is only guaranteed for
    terms where no arc wraps around a separate closed part (see
    ``encloses_closed``).
    """
    inputs = inputs or {}

    def one_cap(x, k, side):
        return _one_cap(ctx, x, k, side)

    def close(x, n, side):
        return _close(ctx, x, n, side)

    def walk(t):
        if isinstance(t, Slot):
            x = np.asarray(inputs[t.name], dtype=complex)
            want = ctx.dim(t.arity)
            if x.shape != (want, want):
                raise ValueError(
                    f"slot {t.name!r} wants {want}x{want}, got {x.shape}")
            return t.arity, x
        tag = t.tag
        if isinstance(tag, Id):
            return tag.n, ctx.identity(tag.n)
        if isinstance(tag, CapRight):
            n, x = walk(t.children[0])
            return n - 1, one_cap(x, n, "right")
        if isinstance(tag, CapLeft):
            n, x = walk(t.children[0])
            return n - 1, one_cap(x, n, "left")
        if isinstance(tag, Tensor):
            m, a = walk(t.children[0])
            n, b = walk(t.children[1])
            if m == 0:
                return n, ctx.act_left(n, ctx.central_value(a)) @ b
            if n == 0:
                return m, a @ ctx.act_right(m, ctx.central_value(b))
            g, gp = ctx.merge(m, n)
            return m + n, g @ np.kron(a, b) @ gp
        if isinstance(tag, (TraceRight, TraceLeft)):
            _, a = walk(t.children[0])
            _, b = walk(t.children[1])
            side = "right" if isinstance(tag, TraceRight) else "left"
            return 0, close(a @ b, tag.n, side)
        raise TypeError(f"cannot evaluate node {t!r}")

    return walk(term)


def nf_eval(ctx, nf, inputs=None):
    """Evaluate a standard form directly, bypassing the instruction plan.

    Each disk column is reduced with its left caps first and its right caps
    second, the opposite order from the compiler; the cap-exchange relation
    makes the order immaterial, so a mismatch here would point at the cap
    primitives themselves.  Columns are then tensored left to right, and
    only at the very end are the floating closed components multiplied in
    at their recorded gaps: left action at gap 0, right action at the far
    edge, a merge-descended insertion in between.  The compiler interleaves
    that absorption with the column fold instead, so agreement checks plan
    emission, the register executor, and the absorption order at once.
    """
    from .normal import DiskEntry, IdGroup, LoopLeft, LoopRight

    inputs = inputs or {}

    def disk_value(entry):
        x = np.asarray(inputs[entry.slot], dtype=complex)
        want = ctx.dim(entry.arity)
        if x.shape != (want, want):
            raise ValueError(
                f"slot {entry.slot!r} wants {want}x{want}, got {x.shape}")
        for k in range(entry.arity, entry.arity - entry.v, -1):
            x = _one_cap(ctx, x, k, "left")
        for k in range(entry.arity - entry.v, entry.m, -1):
            x = _one_cap(ctx, x, k, "right")
        return x

    def row_fold(entries):
        acc, ar = None, 0
        for col in entries:
            if isinstance(col, IdGroup):
                x, k = ctx.identity(col.k), col.k
            else:
                x, k = disk_value(col), col.m
            if acc is None:
                acc, ar = x, k
            else:
                g, gp = ctx.merge(ar, k)
                acc, ar = g @ np.kron(acc, x) @ gp, ar + k
        if acc is None:
            acc, ar = ctx.identity(0), 0
        return acc, ar

    def part_value(part):
        if isinstance(part, LoopRight):
            return _one_cap(ctx, ctx.identity(1), 1, "right")
        if isinstance(part, LoopLeft):
            return _one_cap(ctx, ctx.identity(1), 1, "left")
        top, nt = row_fold(part.top)
        bottom, nb = row_fold(part.bottom)
        if nt != part.n or nb != part.n:
            raise ValueError("closed pair rows disagree with its arity")
        side = "right" if part.kind == "tau" else "left"
        return _close(ctx, top @ bottom, part.n, side)

    acc, ar = row_fold(nf.columns)
    for placed in nf.closed:
        z = ctx.central_value(part_value(placed.part))
        gap = placed.gap
        if ar == 0 or gap == 0:
            acc = ctx.act_left(ar, z) @ acc
        elif gap == ar:
            acc = acc @ ctx.act_right(ar, z)
        else:
            ins = ctx.tensor_op(gap, ar - gap,
                                ctx.act_right(gap, z),
                                ctx.identity(ar - gap))
            acc = acc @ ins
    return ar, acc


def encloses_closed(term):
    """True when some arc of the term wraps around a separate closed part.

    The standard form floats every closed component beside the open row,
    which is a value-preserving move only as long as no cap or closure ring
    has such a component trapped inside it.  Tests use this to decide where
    the tree-order evaluation above is an admissible cross-check: backends
    with a one-block level-0 center never care, the rest only accept terms
    this function clears.
    """
    from .normal import normalize

    if isinstance(term, Slot):
        return False
    if any(encloses_closed(c) for c in term.children):
        return True
    tag = term.tag
    if isinstance(tag, CapRight):
        nf = normalize(term.children[0])
        return any(p.gap == nf.arity for p in nf.closed)
    if isinstance(tag, CapLeft):
        nf = normalize(term.children[0])
        return any(p.gap == 0 for p in nf.closed)
    if isinstance(tag, (TraceRight, TraceLeft)):
        if tag.n == 0:
            return False
        if any(normalize(c).closed for c in term.children):
            return True
        return len(normalize(term).closed) > 1
    return False
