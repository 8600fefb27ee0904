"""Backends: a finite-dimensional Hilbert space with two commuting actions.

A backend bundles a traced algebra A, a space H, matrices for the left
action and the right action of every standard basis element of A, and
optionally the antilinear conjugation of H as a matrix C (the conjugation
sends xi to C @ conj(xi)).

Conventions fixed here and relied on everywhere downstream:

* ``inner`` is linear in its first argument;
* the A-valued right inner product ``<x1|x2>`` is linear in x2 and satisfies
  ``creation_L(x1)^H @ creation_L(x2) == left0(<x1|x2>)`` on the standard
  representation;
* the A-valued left inner product ``(e1, e2)`` is linear in e1 and pairs the
  same way with the R creations, ``creation_R(e1)^H @ creation_R(e2) ==
  right0((e2, e1))``.

A *right basis* is a finite family {b} with ``sum_b creation_L(b) @
creation_L(b)^H == id_H``; a *left basis* mirrors it with creation_R.  Both
come out of the same greedy sweep: compress the residual, pivot on its top
eigenvector (or a seeded random one), flatten the pivot's self-inner product
to a support projection, split it off, repeat.  The sweep shrinks the
residual rank every round, so it stops within dim H rounds.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger, eigh_clipped, herm, inner, pinv_sqrt

BASIS_TOL = 1e-9


class Bimodule:
    def __init__(self, algebra, dim, lam, rho, conj=None, name="custom"):
        self.algebra = algebra
        self.dim = int(dim)
        self.lam = [np.asarray(m, dtype=complex) for m in lam]
        self.rho = [np.asarray(m, dtype=complex) for m in rho]
        if len(self.lam) != algebra.dim or len(self.rho) != algebra.dim:
            raise ValueError("need one action matrix per basis element")
        self.conj = None if conj is None else np.asarray(conj, dtype=complex)
        self.name = name

    def left(self, a):
        """Matrix of the left action of an algebra element."""
        coef = self.algebra.vector_of(a)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, m in zip(coef, self.lam):
            out += c * m
        return out

    def right(self, a):
        coef = self.algebra.vector_of(a)
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for c, m in zip(coef, self.rho):
            out += c * m
        return out

    # -- module-valued inner products ---------------------------------------

    def inner_right(self, x1, x2):
        """A-valued right inner product, linear in x2."""
        A = self.algebra
        out = np.zeros((A.D, A.D), dtype=complex)
        for m, e in zip(self.rho, A.onb()):
            out += inner(x2, m @ x1) * e
        return out

    def inner_left(self, e1, e2):
        """A-valued left inner product, linear in e1."""
        A = self.algebra
        out = np.zeros((A.D, A.D), dtype=complex)
        for m, e in zip(self.lam, A.onb()):
            out += inner(e1, m @ e2) * e
        return out

    # -- creations out of the standard representation -----------------------

    def creation_L(self, b):
        """Columns rho(e_m) b: sends the class of e_m to b . e_m."""
        return np.column_stack([m @ b for m in self.rho])

    def creation_R(self, b):
        """Columns lam(e_m) b: sends the class of e_m to e_m . b."""
        return np.column_stack([m @ b for m in self.lam])

    # -- bases --------------------------------------------------------------

    def _basis(self, creation, selfinner, flatten, rng, tol):
        out = []
        P = np.eye(self.dim, dtype=complex)
        for _ in range(self.dim + 1):
            vals, vecs = np.linalg.eigh(herm(P))
            if vals[-1] < 0.5:
                break
            if rng is None:
                xi = vecs[:, -1]
            else:
                v = P @ (rng.standard_normal(self.dim)
                         + 1j * rng.standard_normal(self.dim))
                nv = np.linalg.norm(v)
                xi = vecs[:, -1] if nv < tol else v / nv
            g = pinv_sqrt(selfinner(xi), cut=tol)
            b = flatten(g) @ xi
            c = creation(b)
            Q = c @ dagger(c)
            P = herm(P - Q)
            out.append(b)
        else:
            raise RuntimeError("basis sweep failed to terminate")
        return out

    def right_basis(self, rng=None, tol=BASIS_TOL):
        """Family {b} with sum creation_L(b) creation_L(b)^H == id."""
        return self._basis(self.creation_L,
                           lambda x: self.inner_right(x, x),
                           self.right, rng, tol)

    def left_basis(self, rng=None, tol=BASIS_TOL):
        """Family {b} with sum creation_R(b) creation_R(b)^H == id."""
        return self._basis(self.creation_R,
                           lambda x: self.inner_left(x, x),
                           self.left, rng, tol)

    # -- sanity -------------------------------------------------------------

    def validate(self, tol=1e-8, rng=None):
        """Check the action axioms on random elements; returns error strings."""
        errors = []
        rng = rng or np.random.default_rng(7)
        A = self.algebra
        eye = np.eye(self.dim)

        def close(x, y, what):
            if np.linalg.norm(x - y) > tol * max(1.0, np.linalg.norm(x)):
                errors.append(what)

        close(self.left(A.identity()), eye, "left action is not unital")
        close(self.right(A.identity()), eye, "right action is not unital")
        for _ in range(3):
            a, b = A.random_element(rng), A.random_element(rng)
            close(self.left(a @ b), self.left(a) @ self.left(b),
                  "left action fails multiplicativity")
            close(self.right(a @ b), self.right(b) @ self.right(a),
                  "right action fails antimultiplicativity")
            close(self.left(a) @ self.right(b), self.right(b) @ self.left(a),
                  "left and right actions fail to commute")
            close(self.left(dagger(a)), dagger(self.left(a)),
                  "left action fails the adjoint rule")
            close(self.right(dagger(a)), dagger(self.right(a)),
                  "right action fails the adjoint rule")
        if self.conj is not None:
            C = self.conj
            close(C @ C.conj(), eye, "conjugation fails to square to one")
            close(C @ dagger(C), eye, "conjugation matrix is not unitary")
            for _ in range(2):
                a = A.random_element(rng)
                close(C @ self.left(a).conj() @ C.conj(),
                      self.right(dagger(a)),
                      "conjugation fails to swap the actions")
        return errors


def gns_bimodule(algebra):
    """The standard representation of A on itself as a backend."""
    basis = algebra.onb()
    n = len(basis)
    lam, rho = [], []
    for e in basis:
        L = np.zeros((n, n), dtype=complex)
        R = np.zeros((n, n), dtype=complex)
        for m, em in enumerate(basis):
            le, re_ = e @ em, em @ e
            for k, ek in enumerate(basis):
                L[k, m] = algebra.inner(le, ek)
                R[k, m] = algebra.inner(re_, ek)
        lam.append(L)
        rho.append(R)
    return Bimodule(algebra, n, lam, rho, conj=algebra.conj_matrix(),
                    name="standard")


def omega_vector(algebra):
    """Coordinates of the identity of A in the standard representation."""
    return algebra.vector_of(algebra.identity())
