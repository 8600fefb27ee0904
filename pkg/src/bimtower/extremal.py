"""Comparing the two canonical traces on a centralizer algebra.

A trace on a finite-dimensional algebra is pinned down by its value on one
minimal projection per central block, so the best constant lambda with
lambda^-1 Tr <= Tr^op <= lambda Tr is the worst blockwise ratio of those
two values.  We find the center of the centralizer algebra by a linear
solve inside its span, split it with a generic element, and take one
spectral projection of a generic element in each corner as the minimal
projection.  No sampling is involved; the only numerics are
eigendecompositions.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .linalg import dagger, herm

ZERO_WEIGHT = 1e-11


def center_basis(ctx, n, q_basis=None):
    """Orthonormal basis of the center of the level-n centralizer."""
    qs = ctx.centralizer_basis(n) if q_basis is None else q_basis
    if not qs:
        return []
    r = len(qs)
    N = np.zeros((r, r), dtype=complex)
    for qi in qs:
        B = np.column_stack([(qk @ qi - qi @ qk).ravel() for qk in qs])
        N += dagger(B) @ B
    w, v = np.linalg.eigh(herm(N))
    top = max(float(w[-1]), 1.0)
    null = v[:, w < 1e-12 * top]
    out = []
    for col in null.T:
        out.append(sum(c * q for c, q in zip(col, qs)))
    return out


def _central_projections_of(ctx, zs, rng):
    """Minimal central projections from a generic element of the span."""
    d = zs[0].shape[0]
    h = sum(rng.standard_normal() * z for z in zs)
    h = herm(h + dagger(h))
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    projs = []
    i = 0
    while i < d:
        j = i
        while j + 1 < d and w[j + 1] - w[j] < 1e-8 * scale:
            j += 1
        block = v[:, i:j + 1]
        projs.append(block @ dagger(block))
        i = j + 1
    return projs


def _minimal_projection(ctx, qs, p, rng):
    """One minimal projection of the corner p.Q.p."""
    h = sum(rng.standard_normal() * q for q in qs)
    h = herm(p @ (h + dagger(h)) @ p)
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    # cluster eigenvalues, pick the top nonzero one
    j = len(w) - 1
    i = j
    while i - 1 >= 0 and w[j] - w[i - 1] < 1e-8 * scale:
        i -= 1
    block = v[:, i:j + 1]
    return block @ dagger(block)


def extremality_report(ctx, n, rng=None):
    """Blockwise trace comparison at level n.

    Returns {extremal, lambda_min, blocks} with one entry per central block
    of the centralizer: its right and left trace weight on a minimal
    projection and the worse of the two ratios (inf when only one trace
    vanishes on the block).
    """
    rng = np.random.default_rng(23) if rng is None else rng
    if ctx.dim(n) == 0:
        return {"extremal": True, "lambda_min": 1.0, "blocks": []}
    qs = ctx.centralizer_basis(n)
    zs = center_basis(ctx, n, qs)
    blocks = []
    lam = 1.0
    for p in _central_projections_of(ctx, zs, rng):
        pmin = _minimal_projection(ctx, qs, p, rng)
        w = ctx.trace_right(pmin, n).real
        wop = ctx.trace_left(pmin, n).real
        if w < ZERO_WEIGHT and wop < ZERO_WEIGHT:
            blocks.append({"w_right": w, "w_left": wop, "ratio": None})
            continue
        if w < ZERO_WEIGHT or wop < ZERO_WEIGHT:
            blocks.append({"w_right": w, "w_left": wop, "ratio": np.inf})
            lam = np.inf
            continue
        ratio = max(w / wop, wop / w)
        blocks.append({"w_right": w, "w_left": wop, "ratio": ratio})
        lam = max(lam, ratio)
    return {
        "extremal": bool(lam <= 1.0 + 1e-9),
        "lambda_min": float(lam),
        "blocks": blocks,
    }


def interval_lambda(t):
    """Exact best constant for the two-block backend, as a Fraction."""
    t = Fraction(t)
    return max(t / (1 - t), (1 - t) / t)


def power_lambda(t, copies):
    """Exact constant for the product of ``copies`` two-block backends."""
    return interval_lambda(t) ** copies
