"""Finite permutation groups and a numeric splitting of their group algebra.

Permutations are tuples of images on 0..n-1; ``perm_mul(p, q)`` applies q
first.  The group algebra with the delta-at-identity trace is a multi-matrix
algebra; :func:`split_irreps` finds one unitary irrep per equivalence class
numerically:  a generic Hermitian element of the right translation algebra
commutes with left translation, so each of its eigenspaces is invariant and
irreducible under left translation, and eigenspaces with matching characters
are copies of the same irrep.  No character tables are consulted; everything
comes out of one seeded eigendecomposition.
"""

from __future__ import annotations

import numpy as np


def identity_perm(n):
    return tuple(range(n))


def perm_mul(p, q):
    return tuple(p[q[i]] for i in range(len(p)))


def perm_inv(p):
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


class PermGroup:
    def __init__(self, generators):
        generators = [tuple(g) for g in generators]
        if not generators:
            raise ValueError("need at least one generator")
        n = len(generators[0])
        if any(len(g) != n or sorted(g) != list(range(n)) for g in generators):
            raise ValueError("generators must be permutations of 0..n-1")
        self.degree = n
        self.generators = generators
        # BFS closure; parents let representation matrices be built by words.
        order = [identity_perm(n)]
        parent = {order[0]: None}
        seen = {order[0]}
        i = 0
        while i < len(order):
            g = order[i]
            i += 1
            for s in generators:
                h = perm_mul(g, s)
                if h not in seen:
                    seen.add(h)
                    parent[h] = (g, s)
                    order.append(h)
        self.elements = tuple(order)
        self.parent = parent
        self.index = {g: i for i, g in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def conjugacy_classes(self):
        """Partition of the elements, each class sorted by element index."""
        remaining = set(self.elements)
        classes = []
        for g in self.elements:
            if g not in remaining:
                continue
            orbit = {g}
            frontier = [g]
            while frontier:
                x = frontier.pop()
                for s in self.generators:
                    y = perm_mul(perm_mul(s, x), perm_inv(s))
                    if y not in orbit:
                        orbit.add(y)
                        frontier.append(y)
            remaining -= orbit
            classes.append(sorted(orbit, key=self.index.get))
        return classes

    def centralizer(self, g):
        return [h for h in self.elements
                if perm_mul(h, g) == perm_mul(g, h)]

    # -- representations ----------------------------------------------------

    def permutation_rep(self):
        """The natural rep on C^degree, as a dict element -> matrix."""
        out = {}
        for g in self.elements:
            m = np.zeros((self.degree, self.degree))
            for i, j in enumerate(g):
                m[j, i] = 1.0
            out[g] = m
        return out

    def rep_from_generators(self, mats):
        """Extend matrices for the generators to the whole group by BFS words."""
        mats = [np.asarray(m, dtype=complex) for m in mats]
        d = mats[0].shape[0]
        out = {identity_perm(self.degree): np.eye(d, dtype=complex)}
        for g in self.elements[1:]:
            p, s = self.parent[g]
            out[g] = out[p] @ mats[self.generators.index(s)]
        return out

    def left_translation(self):
        n = len(self)
        out = {}
        for g in self.elements:
            m = np.zeros((n, n))
            for h in self.elements:
                m[self.index[perm_mul(g, h)], self.index[h]] = 1.0
            out[g] = m
        return out

    def right_translation(self):
        """Antihomomorphism h -> hg on the delta basis."""
        n = len(self)
        out = {}
        for g in self.elements:
            m = np.zeros((n, n))
            for h in self.elements:
                m[self.index[perm_mul(h, g)], self.index[h]] = 1.0
            out[g] = m
        return out


def split_irreps(group, seed=11, tol=1e-7):
    """One unitary matrix irrep per class, as dicts element -> matrix.

    Returns (dims, irreps) with sum(d^2) == |G| checked.
    """
    rng = np.random.default_rng(seed)
    rho = group.right_translation()
    n = len(group)
    coef = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    h = np.zeros((n, n), dtype=complex)
    for g, c in zip(group.elements, coef):
        h += c * rho[g] + np.conj(c) * rho[perm_inv(g)]
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2)
    # cluster eigenvalues; each cluster spans one irreducible left submodule
    lam = group.left_translation()
    blocks = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and vals[j + 1] - vals[j] < tol * max(1.0, abs(vals[j])):
            j += 1
        blocks.append(vecs[:, i:j + 1])
        i = j + 1
    reps = []
    for B in blocks:
        pi = {g: B.conj().T @ lam[g] @ B for g in group.elements}
        chi = np.array([np.trace(pi[g]) for g in group.elements])
        for seen_chi, _ in reps:
            if np.allclose(chi, seen_chi, atol=1e-6):
                break
        else:
            reps.append((chi, pi))
    dims = tuple(int(round(r[0][0].real)) for r in reps)
    if sum(d * d for d in dims) != n:
        raise RuntimeError(
            f"irrep split failed: block sizes {dims} against group order {n}")
    for _, pi in reps:
        for g in group.generators:
            for h_ in group.generators:
                err = np.linalg.norm(pi[perm_mul(g, h_)] - pi[g] @ pi[h_])
                if err > 1e-6:
                    raise RuntimeError("irrep split failed: not multiplicative")
    return dims, [pi for _, pi in reps]
