"""The tower of relative tensor powers over one backend, with its maps.

Level 0 is the standard representation of the coefficient algebra, level 1
the backend space itself, and level n+1 is built from level n by tensoring
with the backend over the algebra: the pre-inner product on the plain
Kronecker product has Gram matrix ``sum_m rho_n(e_m)^H (x) lam_H(e_m)``, and
the kept eigenpairs give a factor map F (rows scaled by sqrt eigenvalue)
whose pseudo-inverse realizes the quotient.  F kills the Gram kernel
exactly, so operators descended through ``F . kron(a, b) . F^+`` compose
correctly whenever they preserve the kernel, which every operator built out
of the two actions does.

Creation maps come in two flavors at every level: L-creations prepend a
vector, R-creations append one.  Each is instantiated over both the left
and the right basis of the backend; which family enters which map matters:

* capping the last strand averages R-creations over the *right* basis,
* capping the first strand averages L-creations over the *left* basis,
* including into one more strand on the right averages R-creations over the
  *left* basis (those are complete on that side), and mirrored on the left.

Closed diagrams evaluate to central elements of the algebra; the executor
extracts them at level 0 and reapplies them through the left action of the
open register's level.  Scalar traces use the density recursion
``W_{n+1} = sum_b R_b W_n R_b^H`` starting from the rank-one density at the
class of the identity.
"""

from __future__ import annotations

import numpy as np

from .bimodule import gns_bimodule
from .linalg import SPECTRAL_CUT, dagger, eigh_clipped, herm, orthonormalize
from .plan import emit_plan
from .normal import NormalTangle, normalize

DEFAULT_CAP = 20000


class TowerCapError(RuntimeError):
    pass


class TowerContext:
    def __init__(self, model, cap=DEFAULT_CAP, cut=SPECTRAL_CUT, seed=None):
        self.model = model
        self.algebra = model.algebra
        self.cap = cap
        self.cut = cut
        self.standard = gns_bimodule(model.algebra)
        self.omega = model.algebra.vector_of(model.algebra.identity())
        # seed=None keeps the deterministic greedy pivots; a seed draws
        # random pivots, giving an independent basis for invariance tests
        brng = None if seed is None else np.random.default_rng(seed)
        self.right_basis = model.right_basis(rng=brng)
        self.left_basis = model.left_basis(rng=brng)
        self._levels = {
            0: (self.standard.lam, self.standard.rho, self.standard.dim),
            1: (model.lam, model.rho, model.dim),
        }
        self._F = {}          # n >= 2 -> (F, Finv) landing in level n
        self._creations = {}  # (n, kind, side) -> list of matrices
        self._merge = {}      # (m, n) -> (matrix, pinv)
        self._W = {}
        self._Wop = {}
        self._rng = np.random.default_rng(5)

    # -- levels -------------------------------------------------------------

    def dim(self, n):
        self._ensure(n)
        return self._levels[n][2]

    def lam(self, n):
        self._ensure(n)
        return self._levels[n][0]

    def rho(self, n):
        self._ensure(n)
        return self._levels[n][1]

    def identity(self, n):
        return np.eye(self.dim(n), dtype=complex)

    def factor(self, n):
        """(F, Finv) of the quotient onto level n, n >= 2."""
        self._ensure(n)
        return self._F[n]

    def _ensure(self, n):
        if n in self._levels:
            return
        self._ensure(n - 1)
        lam_prev, rho_prev, d_prev = self._levels[n - 1]
        h = self.model.dim
        big = d_prev * h
        if big > self.cap:
            raise TowerCapError(
                f"level {n} needs an intermediate dimension of {big}, over the "
                f"cap of {self.cap}; raise the cap to force it")
        gram = np.zeros((big, big), dtype=complex)
        for rp, lh in zip(rho_prev, self.model.lam):
            gram += np.kron(dagger(rp), lh)
        w, v = eigh_clipped(herm(gram), self.cut)
        keep = w > 0
        s = w[keep]
        vk = v[:, keep]
        F = (np.sqrt(s)[:, None]) * dagger(vk)
        Finv = vk * (1.0 / np.sqrt(s))[None, :]
        eye_h = np.eye(h)
        eye_prev = np.eye(d_prev)
        lam_n = [F @ np.kron(m, eye_h) @ Finv for m in lam_prev]
        rho_n = [F @ np.kron(eye_prev, m) @ Finv for m in self.model.rho]
        self._levels[n] = (lam_n, rho_n, len(s))
        self._F[n] = (F, Finv)

    def act_left(self, n, a):
        """Matrix of the left action of an algebra element at level n."""
        coef = self.algebra.vector_of(a)
        out = np.zeros((self.dim(n), self.dim(n)), dtype=complex)
        for c, m in zip(coef, self.lam(n)):
            out += c * m
        return out

    def act_right(self, n, a):
        coef = self.algebra.vector_of(a)
        out = np.zeros((self.dim(n), self.dim(n)), dtype=complex)
        for c, m in zip(coef, self.rho(n)):
            out += c * m
        return out

    # -- creations ----------------------------------------------------------

    def _basis_vectors(self, side):
        return self.left_basis if side == "left" else self.right_basis

    def creations(self, n, kind, side):
        """Creation maps level n -> n+1; kind "L" prepends, "R" appends."""
        key = (n, kind, side)
        if key in self._creations:
            return self._creations[key]
        vs = self._basis_vectors(side)
        if n == 0:
            mats = self.model.rho if kind == "L" else self.model.lam
            out = [np.column_stack([m @ b for m in mats]) for b in vs]
        elif kind == "R":
            F, _ = self.factor(n + 1)
            eye = np.eye(self.dim(n))
            out = [F @ np.kron(eye, b.reshape(-1, 1)) for b in vs]
        elif n == 1:
            F, _ = self.factor(2)
            eye = np.eye(self.model.dim)
            out = [F @ np.kron(b.reshape(-1, 1), eye) for b in vs]
        else:
            F, _ = self.factor(n + 1)
            _, Finv = self.factor(n)
            eye = np.eye(self.model.dim)
            prev = self.creations(n - 1, "L", side)
            out = [F @ np.kron(p, eye) @ Finv for p in prev]
        self._creations[key] = out
        return out

    # -- the six weight/inclusion maps --------------------------------------

    def cap_right(self, x, k):
        """Right cap End(level k) -> End(level k-1)."""
        out = None
        for r in self.creations(k - 1, "R", "right"):
            term = dagger(r) @ x @ r
            out = term if out is None else out + term
        return out

    def cap_left(self, x, k):
        out = None
        for el in self.creations(k - 1, "L", "left"):
            term = dagger(el) @ x @ el
            out = term if out is None else out + term
        return out

    def include_right(self, x, k):
        """x (x) 1 as End(level k) -> End(level k+1)."""
        out = None
        for r in self.creations(k, "R", "left"):
            term = r @ x @ dagger(r)
            out = term if out is None else out + term
        return out

    def include_left(self, x, k):
        out = None
        for el in self.creations(k, "L", "right"):
            term = el @ x @ dagger(el)
            out = term if out is None else out + term
        return out

    def cross_right(self, x, k):
        """Left-side compression over the right basis (cross map)."""
        out = None
        for el in self.creations(k - 1, "L", "right"):
            term = dagger(el) @ x @ el
            out = term if out is None else out + term
        return out

    def cross_left(self, x, k):
        out = None
        for r in self.creations(k - 1, "R", "left"):
            term = dagger(r) @ x @ r
            out = term if out is None else out + term
        return out

    # -- closed values and traces -------------------------------------------

    def closure(self, x, n, side="right"):
        """Close all strands of a level-n operator; level-0 matrix result."""
        for k in range(n, 0, -1):
            x = self.cap_right(x, k) if side == "right" else self.cap_left(x, k)
        return x

    def central_value(self, level0):
        """Algebra element z with left0(z) == the given level-0 matrix."""
        return self.algebra.element_of(level0 @ self.omega)

    def central_blocks(self, level0):
        return self.algebra.central_blocks(self.central_value(level0))

    def loop_right(self):
        return self.closure(self.identity(1), 1, "right")

    def loop_left(self):
        return self.closure(self.identity(1), 1, "left")

    def trace_blocks(self, x, n, side="right"):
        """Z(A)-valued trace of a level-n operator, one scalar per block."""
        return self.central_blocks(self.closure(x, n, side))

    def closure_ext(self, x, n, side="right"):
        """Extended-positive closure chain down to level 0."""
        for k in range(n, 0, -1):
            x = (self.cap_right_ext(x, k) if side == "right"
                 else self.cap_left_ext(x, k))
        return x

    def blocks_ext(self, x0, tol=1e-9):
        """Per-central-block [0, inf] values of an extended level-0 element.

        A block meeting the infinity projection reads inf; otherwise the
        block scalar of the extracted central part.
        """
        alg = self.algebra
        vals = []
        fin = alg.central_blocks(self.central_value(x0.S))
        pscale = max(1.0, float(np.linalg.norm(x0.P)))
        for i, p in enumerate(alg.central_projections()):
            hit = np.trace(self.act_left(0, p) @ x0.P).real
            vals.append(np.inf if hit > tol * pscale else max(fin[i].real, 0.0))
        return vals

    def weight(self, n):
        """Density W_n of the scalar right trace at level n."""
        if n not in self._W:
            if n == 0:
                om = self.omega
                self._W[0] = np.outer(om, om.conj())
            else:
                prev = self.weight(n - 1)
                out = None
                for r in self.creations(n - 1, "R", "right"):
                    term = r @ prev @ dagger(r)
                    out = term if out is None else out + term
                self._W[n] = out
        return self._W[n]

    def weight_op(self, n):
        if n not in self._Wop:
            if n == 0:
                om = self.omega
                self._Wop[0] = np.outer(om, om.conj())
            else:
                prev = self.weight_op(n - 1)
                out = None
                for el in self.creations(n - 1, "L", "left"):
                    term = el @ prev @ dagger(el)
                    out = term if out is None else out + term
                self._Wop[n] = out
        return self._Wop[n]

    def trace_right(self, x, n):
        return complex(np.trace(x @ self.weight(n)))

    def trace_left(self, x, n):
        return complex(np.trace(x @ self.weight_op(n)))

    # -- merge maps ---------------------------------------------------------

    def merge(self, m, n):
        """Quotient map level m (x) level n -> level m+n, with pseudo-inverse."""
        key = (m, n)
        if key in self._merge:
            return self._merge[key]
        if m == 0:
            g = np.hstack(self.lam(n))
        elif n == 0:
            d0 = self.dim(0)
            g = np.zeros((self.dim(m), self.dim(m) * d0), dtype=complex)
            for k, r in enumerate(self.rho(m)):
                g[:, k::d0] = r
        elif n == 1:
            g, _ = self.factor(m + 1)
        else:
            gm, _ = self.merge(m, n - 1)
            F, _ = self.factor(m + n)
            _, Fninv = self.factor(n)
            g = F @ np.kron(gm, np.eye(self.model.dim)) \
                @ np.kron(np.eye(self.dim(m)), Fninv)
        gp = np.linalg.pinv(g, rcond=1e-12)
        self._merge[key] = (g, gp)
        return self._merge[key]

    def tensor_op(self, m, n, a, b):
        """Descend a (x) b to End(level m+n).

        A closed factor is a central value, but which action carries it
        depends on its side: left of the strands it rides the left action,
        right of them the right action.  The two agree only at level 0 or
        on a factor, so the branches are not interchangeable.
        """
        if m == 0:
            return self.act_left(n, self.central_value(a)) @ b
        if n == 0:
            return a @ self.act_right(m, self.central_value(b))
        g, gp = self.merge(m, n)
        return g @ np.kron(a, b) @ gp

    # -- vectors ------------------------------------------------------------

    def simple_tensor(self, vectors):
        """Level-len(vectors) vector b_1 (x) ... (x) b_n from backend vectors."""
        v = np.asarray(vectors[0], dtype=complex)
        for k, b in enumerate(vectors[1:], start=1):
            F, _ = self.factor(k + 1)
            v = F @ np.kron(v, np.asarray(b, dtype=complex))
        return v

    def tensor_vectors(self, m, n, u, v):
        """Descend u (x) v, u at level m and v at level n, to level m+n."""
        g, _ = self.merge(m, n)
        return g @ np.kron(u, v)

    def creation_from_zero(self, n, zeta):
        """Map L(zeta): level 0 -> level n, class of a to zeta . a."""
        return np.column_stack([r @ zeta for r in self.rho(n)])

    def rotate_vector(self, v, n, power=1):
        """Apply the cyclic-shift candidate sum to a level-n vector.

        One step pulls the last strand to the front; canonical on central
        vectors.  Negative powers use the inverse sum.
        """
        if power >= 0:
            Ls = self.creations(n - 1, "L", "right")
            Rs = self.creations(n - 1, "R", "right")
            for _ in range(power):
                v = sum(l @ (dagger(r) @ v) for l, r in zip(Ls, Rs))
        else:
            La = self.creations(n - 1, "L", "left")
            Ra = self.creations(n - 1, "R", "left")
            for _ in range(-power):
                v = sum(r @ (dagger(l) @ v) for l, r in zip(La, Ra))
        return v

    # -- module-map algebras -------------------------------------------------

    def _expect(self, mats, x):
        alg = self.algebra
        out = np.zeros_like(x, dtype=complex)
        for i, d in enumerate(alg.dims):
            off = sum(dd * dd for dd in alg.dims[:i])
            t = float(alg.weights[i])
            for j in range(d):
                for k in range(d):
                    out += (t / d) * mats[off + j * d + k] @ x @ mats[off + k * d + j]
        return out

    def expect_right(self, n, x):
        """Conditional expectation onto the right-module maps at level n."""
        return self._expect(self.rho(n), x)

    def expect_left(self, n, x):
        """Conditional expectation onto the left-module maps at level n."""
        return self._expect(self.lam(n), x)

    def random_module_map(self, n, rng, side="right", psd=False):
        d = self.dim(n)
        x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        if psd:
            x = x @ dagger(x)
        e = self.expect_right if side == "right" else self.expect_left
        return e(n, x)

    # -- extended elements ---------------------------------------------------

    def _cp_ext(self, phi, x):
        """Push an ExtendedPositive through a completely positive map."""
        from .cones import ExtendedPositive
        from .linalg import support_projection
        p = support_projection(phi(x.P))
        comp = np.eye(p.shape[0]) - p
        return ExtendedPositive.make(comp @ phi(x.S) @ comp, p)

    def cap_right_ext(self, x, k):
        return self._cp_ext(lambda m: self.cap_right(m, k), x)

    def cap_left_ext(self, x, k):
        return self._cp_ext(lambda m: self.cap_left(m, k), x)

    def include_right_ext(self, x, k):
        return self._cp_ext(lambda m: self.include_right(m, k), x)

    def include_left_ext(self, x, k):
        return self._cp_ext(lambda m: self.include_left(m, k), x)

    # -- subspaces ----------------------------------------------------------

    def central_vectors(self, n):
        """Orthonormal columns spanning the vectors fixed by both actions."""
        d = self.dim(n)
        if d == 0:
            return np.zeros((0, 0), dtype=complex)
        k = np.zeros((d, d), dtype=complex)
        for la, ra in zip(self.lam(n), self.rho(n)):
            diff = la - ra
            k += dagger(diff) @ diff
        w, v = np.linalg.eigh(herm(k))
        top = max(float(w[-1]), 1.0)
        keep = w < 1e-9 * top
        return v[:, keep]

    def centralizer_basis(self, n):
        """Orthonormal basis (list of matrices) of the relative commutant.

        Deflation: a generic Hermitian element of the left image has
        eigenspaces that any commuting operator preserves, so the unknown
        lives block diagonally over those eigenspaces; the remaining linear
        constraints from both action families are solved on that smaller
        space.
        """
        d = self.dim(n)
        if d == 0:
            return []
        a = self.algebra.random_hermitian(self._rng)
        h = self.act_left(n, a)
        w, v = np.linalg.eigh(herm(h))
        blocks = []
        i = 0
        scale = max(1.0, float(np.max(np.abs(w))))
        while i < d:
            j = i
            while j + 1 < d and w[j + 1] - w[j] < 1e-8 * scale:
                j += 1
            blocks.append(v[:, i:j + 1])
            i = j + 1
        sizes = [b.shape[1] for b in blocks]
        r = sum(s * s for s in sizes)
        gens = list(self.lam(n)) + list(self.rho(n))
        rows = []
        for g in gens:
            cols = []
            for B in blocks:
                gb = g @ B
                bg = dagger(B) @ g
                s = B.shape[1]
                # derivative of [X, g] in the (p, q) entry of this block
                for p in range(s):
                    for q in range(s):
                        colmat = np.outer(B[:, p], bg[q, :]) \
                            - np.outer(gb[:, p], B[:, q].conj())
                        cols.append(colmat.ravel())
            rows.append(np.column_stack(cols))
        C = np.vstack(rows)
        # null space via the normal matrix (exact zeros are well separated)
        N = dagger(C) @ C
        w2, v2 = np.linalg.eigh(herm(N))
        top = max(float(w2[-1]), 1.0)
        null = v2[:, w2 < 1e-14 * top]
        out = []
        for col in null.T:
            X = np.zeros((d, d), dtype=complex)
            at = 0
            for B, s in zip(blocks, sizes):
                Xk = col[at:at + s * s].reshape(s, s)
                X += B @ Xk @ dagger(B)
                at += s * s
            out.append(X)
        if not out:
            return []
        On = orthonormalize([x.ravel() for x in out])
        return [On[:, i].reshape(d, d) for i in range(On.shape[1])]

    def duality_check(self, k, samples=8, rng=None, tol=1e-9):
        """Adjointness of capping against including across level k-1 | k.

        Checks Tr_k(m . (y (x) 1)) == Tr_{k-1}(cap(m) . y) for random
        positive right-module maps, both bounded and with infinity parts
        (where both sides must diverge together).
        """
        from .cones import ExtendedPositive, pair_trace, scalar_close
        from .linalg import support_projection
        rng = np.random.default_rng(3) if rng is None else rng
        wk, wkm = self.weight(k), self.weight(k - 1)
        for _ in range(samples):
            m = self.random_module_map(k, rng, psd=True)
            y = self.random_module_map(k - 1, rng, psd=True)
            lhs = np.trace(m @ self.include_right(y, k - 1) @ wk)
            rhs = np.trace(self.cap_right(m, k) @ y @ wkm)
            scale = max(abs(lhs), abs(rhs), 1.0)
            if abs(lhs - rhs) > tol * scale:
                return False
            # an infinity part on m must blow up both sides together
            p = support_projection(m)
            me = ExtendedPositive.make(m, p)
            lhs_e = pair_trace(
                me, ExtendedPositive.bounded(self.include_right(y, k - 1)),
                weight=wk)
            te = self.cap_right_ext(me, k)
            rhs_e = pair_trace(te, ExtendedPositive.bounded(y), weight=wkm)
            if not scalar_close(lhs_e, rhs_e):
                return False
        return True

    # -- plan execution -----------------------------------------------------

    def run_plan(self, plan, inputs=None):
        """Execute an evaluation plan; returns (level, matrix)."""
        inputs = inputs or {}
        regs = {}
        for ins in plan.instrs:
            op, args = ins.op, ins.args
            if op == "return":
                return regs[args[0].i]
            if op == "load_slot":
                name, k = args
                if name not in inputs:
                    raise KeyError(f"no input bound to slot {name!r}")
                x = np.asarray(inputs[name], dtype=complex)
                want = self.dim(k)
                if x.shape != (want, want):
                    raise ValueError(
                        f"slot {name!r} expects a {want}x{want} matrix at "
                        f"level {k}, got {x.shape}")
                regs[ins.dest] = (k, x)
            elif op == "load_id":
                regs[ins.dest] = (args[0], self.identity(args[0]))
            elif op == "apply_t":
                k, r = args
                lvl, x = regs[r.i]
                regs[ins.dest] = (k - 1, self.cap_right(x, k))
            elif op == "apply_t_op":
                k, r = args
                lvl, x = regs[r.i]
                regs[ins.dest] = (k - 1, self.cap_left(x, k))
            elif op == "tensor_q":
                m, n, ra, rb = args
                _, a = regs[ra.i]
                _, b = regs[rb.i]
                regs[ins.dest] = (m + n, self.tensor_op(m, n, a, b))
            elif op in ("trace_right", "trace_left"):
                n, ra, rb = args
                _, a = regs[ra.i]
                _, b = regs[rb.i]
                side = "right" if op == "trace_right" else "left"
                regs[ins.dest] = (0, self.closure(a @ b, n, side))
            elif op == "loop_right":
                regs[ins.dest] = (0, self.loop_right())
            elif op == "loop_left":
                regs[ins.dest] = (0, self.loop_left())
            elif op == "multiply_scalars":
                acc = None
                for r in args:
                    _, x = regs[r.i]
                    acc = x if acc is None else acc @ x
                regs[ins.dest] = (0, acc)
            else:
                raise ValueError(f"unknown op {op!r}")
        raise ValueError("plan ended without a return")

    def evaluate(self, term_or_form, inputs=None):
        """Normalize, compile and run a term; returns (level, matrix)."""
        nf = (term_or_form if isinstance(term_or_form, NormalTangle)
              else normalize(term_or_form))
        return self.run_plan(emit_plan(nf), inputs)

    # -- cone-semantics execution -------------------------------------------

    def _central_scale(self, n, blocks_reg, x, side="left"):
        """Multiply an extended element by a central [0, inf] block vector.

        ``side`` picks the action carrying the central projections: "left"
        for a closed value sitting left of the strands, "right" otherwise.
        """
        from .cones import ExtendedPositive, sandwich
        vals = self.blocks_ext(blocks_reg)
        act = self.act_left if side == "left" else self.act_right
        zs = np.zeros((self.dim(n), self.dim(n)), dtype=complex)
        zp = np.zeros_like(zs)
        for v, p in zip(vals, self.algebra.central_projections()):
            mat = act(n, p)
            if np.isinf(v):
                zp += mat
            else:
                zs += v * mat
        return sandwich(ExtendedPositive.make(zs, zp), x)

    def partition_function(self, plan, inputs=None):
        """Run a plan on positive (possibly extended) inputs.

        Slots may be bound to ExtendedPositive elements or plain psd
        matrices.  Closed tangles come back as a list of [0, inf] values,
        one per central block of the coefficient algebra; open ones as an
        ExtendedPositive at their level.
        """
        from .cones import ExtendedPositive, sandwich
        inputs = inputs or {}
        regs = {}
        for ins in plan.instrs:
            op, args = ins.op, ins.args
            if op == "return":
                lvl, x = regs[args[0].i]
                return self.blocks_ext(x) if lvl == 0 else x
            if op == "load_slot":
                name, k = args
                if name not in inputs:
                    raise KeyError(f"no input bound to slot {name!r}")
                x = inputs[name]
                if not isinstance(x, ExtendedPositive):
                    x = ExtendedPositive.bounded(np.asarray(x, dtype=complex))
                if x.dim != self.dim(k):
                    raise ValueError(
                        f"slot {name!r} expects dimension {self.dim(k)} at "
                        f"level {k}, got {x.dim}")
                regs[ins.dest] = (k, x)
            elif op == "load_id":
                k = args[0]
                regs[ins.dest] = (k, ExtendedPositive.bounded(self.identity(k)))
            elif op == "apply_t":
                k, r = args
                _, x = regs[r.i]
                regs[ins.dest] = (k - 1, self.cap_right_ext(x, k))
            elif op == "apply_t_op":
                k, r = args
                _, x = regs[r.i]
                regs[ins.dest] = (k - 1, self.cap_left_ext(x, k))
            elif op == "tensor_q":
                m, n, ra, rb = args
                _, a = regs[ra.i]
                _, b = regs[rb.i]
                if m == 0:
                    regs[ins.dest] = (n, self._central_scale(n, a, b, "left"))
                elif n == 0:
                    regs[ins.dest] = (m, self._central_scale(m, b, a, "right"))
                else:
                    from .cones import tensor_ext
                    g, gp = self.merge(m, n)
                    regs[ins.dest] = (m + n, tensor_ext(a, b, descend=(g, gp)))
            elif op in ("trace_right", "trace_left"):
                n, ra, rb = args
                _, a = regs[ra.i]
                _, b = regs[rb.i]
                side = "right" if op == "trace_right" else "left"
                prod = sandwich(a, b)
                regs[ins.dest] = (0, self.closure_ext(prod, n, side))
            elif op == "loop_right":
                regs[ins.dest] = (0, ExtendedPositive.bounded(self.loop_right()))
            elif op == "loop_left":
                regs[ins.dest] = (0, ExtendedPositive.bounded(self.loop_left()))
            elif op == "multiply_scalars":
                acc = None
                for r in args:
                    _, x = regs[r.i]
                    acc = x if acc is None else sandwich(acc, x)
                regs[ins.dest] = (0, acc)
            else:
                raise ValueError(f"unknown op {op!r}")
        raise ValueError("plan ended without a return")
