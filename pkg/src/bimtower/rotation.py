"""Cyclic rotation on central vectors, insertions, and conjugation structure.

The rotation candidate at level n is the finite sum ``sum_b L_b R_b^H`` over
the right basis: strip the last strand, glue it back on the front.  On the
central vectors P_n this is canonical (basis independent), has order n, is
invertible with inverse ``sum_a R_a L_a^H`` over the left basis, and is
unitary exactly when the backend is extremal.  Everything here is checked
against the defining pairing identity on simple-tensor probes rather than
trusted from the construction.

Conjugation only exists on symmetric backends (the model carries an
antilinear J).  It propagates up the tower through the quotient maps with
the order flip J(u (x) v) = Jv (x) Ju, and feeds the identification of
level-2n vectors with Hilbert-Schmidt operators on level n.
"""

from __future__ import annotations

import itertools

import numpy as np

from .linalg import dagger, inner
from .cones import ExtendedPositive, pair_trace, scalar_close, tensor_ext


class ConsistencyError(RuntimeError):
    """Cross-checked formulas disagreed beyond tolerance."""


def central_isometry(ctx, n):
    """Columns spanning P_n (orthonormal); may have zero columns."""
    return ctx.central_vectors(n)


def burns_rotation(ctx, n):
    """Matrix of the rotation compressed to the central vectors of level n."""
    V = ctx.central_vectors(n)
    if V.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    S = _rotation_sum(ctx, n)
    return dagger(V) @ S @ V

def burns_rotation_op(ctx, n):
    """Compressed inverse rotation (left-basis sum)."""
    V = ctx.central_vectors(n)
    if V.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    S = _rotation_sum_op(ctx, n)
    return dagger(V) @ S @ V


def _rotation_sum(ctx, n):
    Ls = ctx.creations(n - 1, "L", "right")
    Rs = ctx.creations(n - 1, "R", "right")
    return sum(l @ dagger(r) for l, r in zip(Ls, Rs))


def _rotation_sum_op(ctx, n):
    La = ctx.creations(n - 1, "L", "left")
    Ra = ctx.creations(n - 1, "R", "left")
    return sum(r @ dagger(l) for l, r in zip(La, Ra))


def defining_equation_check(ctx, n, tol=1e-8, limit=4096):
    """Pairing identity for the rotation on every simple right-basis tensor.

    <rho(zeta), b1 (x) ... (x) bn> must equal <zeta, b2 (x) ... (x) bn (x) b1>
    for every central basis vector zeta and every tuple of right-basis
    elements.  Tuples beyond ``limit`` raise rather than silently subsample.
    """
    V = ctx.central_vectors(n)
    basis = ctx.right_basis
    if len(basis) ** n > limit:
        raise ValueError(f"{len(basis)**n} probe tuples exceed limit {limit}")
    worst = 0.0
    for col in range(V.shape[1]):
        zeta = V[:, col]
        rot = ctx.rotate_vector(zeta, n, 1)
        for tup in itertools.product(basis, repeat=n):
            probe = ctx.simple_tensor(list(tup))
            shifted = ctx.simple_tensor(list(tup[1:]) + [tup[0]])
            worst = max(worst, abs(inner(rot, probe) - inner(zeta, shifted)))
    return worst <= tol


def mu_insert(ctx, j, eta, m, xi, n):
    """Insert a central level-n vector after strand j of a central level-m one.

    j = 0 is the graded product; otherwise rotate the host so strand j sits
    at the end, append, rotate back.
    """
    if not 0 <= j < m:
        raise ValueError(f"insertion index {j} out of range for level {m}")
    if j == 0:
        return ctx.tensor_vectors(m, n, eta, xi)
    host = ctx.rotate_vector(eta, m, j)
    glued = ctx.tensor_vectors(m, n, host, xi)
    return ctx.rotate_vector(glued, m + n, -j)


def move_around_check(ctx, m, n, samples=4, rng=None, tol=1e-8):
    """rho^n((x (x) y) zeta) == (y (x) x) rho^n(zeta) plus the state version.

    x, y run over random positive centralizer combinations; the second pass
    pits extended elements with infinity parts against each other through
    the vector states omega_zeta.
    """
    rng = np.random.default_rng(17) if rng is None else rng
    V = ctx.central_vectors(m + n)
    if V.shape[1] == 0:
        return True
    qm = ctx.centralizer_basis(m)
    qn = ctx.centralizer_basis(n)
    for _ in range(samples):
        x = _random_psd_combo(qm, rng)
        y = _random_psd_combo(qn, rng)
        xy = ctx.tensor_op(m, n, x, y)
        yx = ctx.tensor_op(n, m, y, x)
        for col in range(V.shape[1]):
            zeta = V[:, col]
            lhs = ctx.rotate_vector(xy @ zeta, m + n, n)
            rhs = yx @ ctx.rotate_vector(zeta, m + n, n)
            scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs), 1.0)
            if np.linalg.norm(lhs - rhs) > tol * scale:
                return False
        # extended version through the vector states
        xe = ExtendedPositive.make(x, _leading_eigprojection(x))
        ye = ExtendedPositive.bounded(y)
        t_xy = tensor_ext(xe, ye, descend=ctx.merge(m, n))
        t_yx = tensor_ext(ye, xe, descend=ctx.merge(n, m))
        for col in range(V.shape[1]):
            zeta = V[:, col]
            rz = ctx.rotate_vector(zeta, m + n, n)
            if not scalar_close(t_yx.evaluate(rz), t_xy.evaluate(zeta),
                                tol=1e-6):
                return False
    return True


def _random_psd_combo(basis, rng):
    if not basis:
        raise ValueError("empty centralizer basis")
    x = sum(rng.standard_normal() * q for q in basis)
    return x @ dagger(x)


def _leading_eigprojection(x):
    w, v = np.linalg.eigh((x + dagger(x)) / 2)
    top = v[:, -1:]
    return top @ dagger(top)


# -- conjugation chain -------------------------------------------------------


def _swap_matrix(d1, d2):
    """Permutation taking kron(u, v) to kron(v, u), u of dim d1, v of d2."""
    idx = np.arange(d1 * d2)
    out = (idx % d2) * d1 + idx // d2
    s = np.zeros((d1 * d2, d1 * d2))
    s[out, idx] = 1.0
    return s


def conjugation(ctx, n):
    """Matrix C_n of the level-n conjugation, J(v) = C_n conj(v).

    Requires a symmetric backend.  The recursion flips factor order, so the
    lift of J_{n-1} (x) J_1 is followed by the swap and the (1, n-1) merge.
    """
    if ctx.model.conj is None:
        raise ValueError(f"backend {ctx.model.name!r} carries no conjugation")
    cache = ctx.__dict__.setdefault("_conj_chain", {})
    if n in cache:
        return cache[n]
    if n == 0:
        c = ctx.algebra.conj_matrix()
    elif n == 1:
        c = ctx.model.conj
    else:
        cprev = conjugation(ctx, n - 1)
        h = ctx.model.dim
        _, Finv = ctx.factor(n)
        g, _ = ctx.merge(1, n - 1)
        c = g @ _swap_matrix(ctx.dim(n - 1), h) \
            @ np.kron(cprev, ctx.model.conj) @ np.conj(Finv)
    cache[n] = c
    return c


def adjoint_auto(ctx, n, x):
    """j_n(x) = J x^H J as a matrix at level n."""
    c = conjugation(ctx, n)
    return c @ x.T @ np.conj(c)


# -- level-2n vectors as operators -------------------------------------------


class SymmetricTheta:
    """Linear identification of level-2n vectors with operators on level n.

    Simple tensors eta (x) J xi go to the composite of creations-from-zero
    L(eta) L(xi)^H.  Isometric from the l2 inner product onto Hilbert-Schmidt
    with the level-n right-trace weight.
    """

    def __init__(self, ctx, n):
        self.ctx = ctx
        self.n = n
        dn = ctx.dim(n)
        cn = conjugation(ctx, n)
        eye = np.eye(dn)
        cols_v, cols_t = [], []
        for i in range(dn):
            li = ctx.creation_from_zero(n, eye[:, i])
            for j in range(dn):
                lj = ctx.creation_from_zero(n, eye[:, j])
                cols_v.append(ctx.tensor_vectors(n, n, eye[:, i],
                                                 cn @ eye[:, j].conj()))
                cols_t.append((li @ dagger(lj)).ravel())
        W = np.column_stack(cols_v)
        T = np.column_stack(cols_t)
        self._fwd = T @ np.linalg.pinv(W, rcond=1e-12)
        self._bwd = W @ np.linalg.pinv(T, rcond=1e-12)
        self.defect = float(np.linalg.norm(T - self._fwd @ W))

    def to_operator(self, v):
        dn = self.ctx.dim(self.n)
        return (self._fwd @ v).reshape(dn, dn)

    def to_vector(self, x):
        return self._bwd @ x.ravel()


def symmetric_theta(ctx, n):
    th = SymmetricTheta(ctx, n)
    if th.defect > 1e-7:
        raise ConsistencyError(
            f"operator identification ill-defined at level {n} "
            f"(defect {th.defect:.2e})")
    return th


# -- states from central vectors ---------------------------------------------


def pairing_z_omega(ctx, z, n, zeta, tol=1e-8):
    """Value of a positive centralizer element on the state of zeta.

    Three routes are computed and must agree: the compression
    L(zeta)^H z L(zeta) (a central multiplication whose algebra trace is the
    value), the vector state <z zeta, zeta>, and the trace pairing
    Tr_n(L(zeta) L(zeta)^H . z).  Extended inputs go through the cone
    arithmetic and may return inf.
    """
    L = ctx.creation_from_zero(n, zeta)
    if isinstance(z, ExtendedPositive):
        v_state = z.evaluate(zeta)
        v_trace = pair_trace(
            z, ExtendedPositive.bounded(L @ dagger(L)), weight=ctx.weight(n))
        if not scalar_close(v_state, v_trace, tol=max(tol, 1e-6)):
            raise ConsistencyError(
                f"state {v_state} vs trace {v_trace} on extended input")
        return v_state
    comp = dagger(L) @ z @ L
    w = ctx.central_value(comp)
    dev = np.linalg.norm(comp - ctx.act_left(0, w))
    v_comp = ctx.algebra.trace(w).real
    v_state = inner(z @ zeta, zeta).real
    v_trace = ctx.trace_right(L @ dagger(L) @ z, n).real
    scale = max(abs(v_state), 1.0)
    if dev > tol * scale or abs(v_comp - v_state) > tol * scale \
            or abs(v_trace - v_state) > tol * scale:
        raise ConsistencyError(
            f"state formulas disagree: compression {v_comp}, vector state "
            f"{v_state}, trace {v_trace}, centrality defect {dev:.2e}")
    return v_state


# -- operator inequality ------------------------------------------------------


def rotation_bound_check(ctx, n, lam=None, tol=1e-9):
    """p_n (sum_b R_b R_b^H) p_n <= lam^(n-1) p_n on the central vectors."""
    if lam is None:
        from .extremal import extremality_report
        lam = extremality_report(ctx, 1)["lambda_min"]
    V = ctx.central_vectors(n)
    if V.shape[1] == 0:
        return True
    Rs = ctx.creations(n - 1, "R", "right")
    S = sum(r @ dagger(r) for r in Rs)
    comp = dagger(V) @ S @ V
    gap = lam ** (n - 1) * np.eye(V.shape[1]) - comp
    return float(np.linalg.eigvalsh((gap + dagger(gap)) / 2).min()) >= -tol
