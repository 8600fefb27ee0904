"""Finite-dimensional coefficient algebras with a fixed faithful trace.

An algebra here is a direct sum of full matrix blocks, embedded block
diagonally in one big matrix, with a trace weight per block.  Weights are
kept as given (fractions.Fraction survives, so exact paths stay exact) and
converted to float only where numerics need them.  The trace is normalized:
``sum(t_i * d_i) == 1``.

The standard representation carries an orthonormal basis of scaled matrix
units, ``E^(i)_{jk} / sqrt(t_i)``; all vector coordinates downstream are
taken against this basis in the order :meth:`TracedAlgebra.onb` yields it
(blocks in order, row major inside a block).
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .linalg import inner

_NORM_TOL = 1e-12


class TracedAlgebra:
    def __init__(self, dims, weights):
        dims = tuple(int(d) for d in dims)
        weights = tuple(weights)
        if len(dims) != len(weights) or not dims:
            raise ValueError("need one weight per block")
        if any(d < 1 for d in dims):
            raise ValueError("block sizes must be positive")
        if any(float(w) <= 0 for w in weights):
            raise ValueError("trace weights must be positive")
        total = sum(float(w) * d for w, d in zip(weights, dims))
        if abs(total - 1.0) > _NORM_TOL:
            raise ValueError(f"trace weights sum to {total}, expected 1")
        self.dims = dims
        self.weights = weights
        self.D = sum(dims)
        starts = list(itertools.accumulate((0,) + dims))
        self.slices = tuple(slice(a, b) for a, b in zip(starts, starts[1:]))
        self._onb = None

    @staticmethod
    def normalized(dims, weights):
        """Rescale weights so the trace is normalized.  Exact for Fractions."""
        total = sum(w * d for w, d in zip(weights, dims))
        return TracedAlgebra(dims, tuple(w / total for w in weights))

    @staticmethod
    def scalar():
        return TracedAlgebra((1,), (Fraction(1),))

    @property
    def nblocks(self):
        return len(self.dims)

    @property
    def dim(self):
        """Linear dimension, sum of squared block sizes."""
        return sum(d * d for d in self.dims)

    def float_weights(self):
        return np.array([float(w) for w in self.weights])

    # -- element helpers ----------------------------------------------------

    def blocks_of(self, x):
        return [x[s, s] for s in self.slices]

    def embed_blocks(self, blocks):
        x = np.zeros((self.D, self.D), dtype=complex)
        for s, b in zip(self.slices, blocks):
            x[s, s] = b
        return x

    def identity(self):
        return np.eye(self.D, dtype=complex)

    def central(self, vals):
        """Central element from one scalar per block."""
        return self.embed_blocks(
            [v * np.eye(d) for v, d in zip(vals, self.dims)])

    def central_blocks(self, x):
        """Per-block scalars of a central element (block means of the trace)."""
        return np.array([np.trace(x[s, s]) / d
                         for s, d in zip(self.slices, self.dims)])

    def central_projections(self):
        return [self.central([1.0 if j == i else 0.0 for j in range(self.nblocks)])
                for i in range(self.nblocks)]

    def trace(self, x):
        return sum(float(w) * np.trace(x[s, s])
                   for w, s in zip(self.weights, self.slices))

    def inner(self, x, y):
        """Trace inner product, linear in the first argument."""
        return self.trace(y.conj().T @ x)

    def in_algebra(self, x, tol=1e-10):
        """Is x supported on the diagonal blocks?"""
        y = self.embed_blocks(self.blocks_of(x))
        return np.linalg.norm(x - y) <= tol * max(1.0, np.linalg.norm(x))

    # -- the standard basis -------------------------------------------------

    def onb(self):
        """Orthonormal basis of scaled matrix units, cached."""
        if self._onb is None:
            out = []
            for w, s, d in zip(self.weights, self.slices, self.dims):
                scale = 1.0 / np.sqrt(float(w))
                for j in range(d):
                    for k in range(d):
                        e = np.zeros((self.D, self.D), dtype=complex)
                        e[s.start + j, s.start + k] = scale
                        out.append(e)
            self._onb = out
        return self._onb

    def vector_of(self, x):
        """Coordinates of x against the orthonormal basis."""
        return np.array([self.inner(x, e) for e in self.onb()])

    def element_of(self, vec):
        out = np.zeros((self.D, self.D), dtype=complex)
        for c, e in zip(vec, self.onb()):
            out = out + c * e
        return out

    def conj_matrix(self):
        """Matrix C with adjoint(x) = C @ conj(vector_of(x)) in basis coords."""
        basis = self.onb()
        n = len(basis)
        C = np.zeros((n, n), dtype=complex)
        for m, e in enumerate(basis):
            star = e.conj().T
            for k, f in enumerate(basis):
                C[k, m] = self.inner(star, f)
        return C

    # -- random elements ----------------------------------------------------

    def random_element(self, rng):
        return self.embed_blocks(
            [rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
             for d in self.dims])

    def random_hermitian(self, rng):
        x = self.random_element(rng)
        return (x + x.conj().T) / 2

    def random_positive(self, rng):
        x = self.random_element(rng)
        return x @ x.conj().T

    def __repr__(self):
        return f"TracedAlgebra(dims={self.dims}, weights={self.weights})"


def tensor_algebra(a, b):
    """Trace-preserving tensor product; blocks ordered (i, j) row major."""
    dims = tuple(da * db for da in a.dims for db in b.dims)
    weights = tuple(wa * wb for wa in a.weights for wb in b.weights)
    return TracedAlgebra(dims, weights)
