"""Arithmetic in the extended positive cone over a finite-dimensional space.

An extended positive element is a pair ``(S, P)``: a psd finite part ``S`` and
an orthogonal "infinity projection" ``P`` with ``S P = 0``.  As a quadratic
form it sends a vector ``xi`` to ``<S xi, xi>`` when ``P xi = 0`` and to
``+inf`` otherwise.  Scalars live in ``[0, inf]`` as ordinary floats with
``math.inf``; the convention throughout is ``0 * inf = 0``.

Sums, scalings, conjugations and tensor products are computed in closed form
on the ``(S, P)`` data; ``truncations`` exposes the increasing bounded
approximations that the test oracles use to confirm the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import (
    dagger,
    herm,
    inner,
    join_projections,
    psd_sqrt,
    relative_close,
    support_projection,
)

# ||P xi|| > INF_CLASSIFY * ||xi|| classifies a vector state as infinite.
INF_CLASSIFY = 1e-9
# Divergence threshold for sup_family; only test oracles rely on it.
DIVERGE = 1e12
# Default tolerance for order comparisons and closeness.
ORDER_TOL = 1e-9


def _compress(s, p):
    q = np.eye(p.shape[0], dtype=complex) - p
    return q @ herm(s) @ q


@dataclass(frozen=True)
class ExtendedPositive:
    """Extended positive operator ``S + inf * P`` on C^dim."""

    S: np.ndarray
    P: np.ndarray

    @property
    def dim(self):
        return self.S.shape[0]

    @staticmethod
    def make(s, p=None):
        """Canonicalize raw data: round P to a projection, compress S off it."""
        s = np.asarray(s, dtype=complex)
        if p is None:
            p = np.zeros_like(s)
        else:
            p = support_projection(np.asarray(p, dtype=complex))
        return ExtendedPositive(_compress(s, p), p)

    @staticmethod
    def bounded(s):
        return ExtendedPositive.make(s)

    @staticmethod
    def infinite(p):
        return ExtendedPositive.make(np.zeros_like(p), p)

    @staticmethod
    def zero(dim):
        z = np.zeros((dim, dim), dtype=complex)
        return ExtendedPositive(z, z.copy())

    @property
    def is_bounded(self):
        return bool(np.linalg.norm(self.P) <= 1e-12 * max(1.0, self.dim))

    def evaluate(self, xi):
        """Value of the quadratic form on a vector (the state omega_xi)."""
        xi = np.asarray(xi, dtype=complex).ravel()
        n = np.linalg.norm(xi)
        if n == 0:
            return 0.0
        if np.linalg.norm(self.P @ xi) > INF_CLASSIFY * n:
            return math.inf
        return max(inner(self.S @ xi, xi).real, 0.0)

    def truncations(self, levels):
        """Bounded psd operators increasing to this element (spectral cut)."""
        w, v = np.linalg.eigh(herm(self.S))
        w = np.clip(w, 0.0, None)
        out = []
        for c in levels:
            out.append((v * np.minimum(w, c)) @ dagger(v) + c * self.P)
        return out

    def __add__(self, other):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        p = join_projections(self.P, other.P)
        return ExtendedPositive(_compress(self.S + other.S, p), p)

    def scale(self, lam):
        """Multiply by a scalar in [0, inf]; 0 * inf = 0."""
        if lam < 0:
            raise ValueError("negative scalar")
        if lam == 0:
            return ExtendedPositive.zero(self.dim)
        if math.isinf(lam):
            p = join_projections(self.P, support_projection(self.S))
            return ExtendedPositive.infinite(p)
        return ExtendedPositive(lam * self.S, self.P)

    def conjugate(self, a):
        """The element a* . a, as the form xi -> value on (a xi)."""
        a = np.asarray(a, dtype=complex)
        p = support_projection(dagger(a) @ self.P @ a)
        s = _compress(dagger(a) @ self.S @ a, p)
        return ExtendedPositive(s, p)

    def leq(self, other, tol=ORDER_TOL):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        scale = max(np.linalg.norm(self.S), np.linalg.norm(other.S), 1.0)
        # infinity directions must be contained
        q = np.eye(self.dim, dtype=complex) - other.P
        if np.linalg.norm(q @ self.P) > tol * max(1.0, np.linalg.norm(self.P)):
            return False
        diff = q @ (other.S - self.S) @ q
        w = np.linalg.eigvalsh(herm(diff))
        return bool(w.size == 0 or w[0] >= -tol * scale)

    def close(self, other, tol=ORDER_TOL):
        return (
            relative_close(self.P, other.P, tol)
            and relative_close(self.S, other.S, tol)
        )


def sup_family(family, diverge=DIVERGE):
    """Limit of an increasing family of extended positives.

    Infinity directions are the joined infinity supports together with
    divergence directions of the compressed finite parts (eigenvalues past
    ``diverge``); the finite part is the last element's compression.  Intended
    for finite increasing chains in tests.
    """
    if not family:
        raise ValueError("empty family")
    p = join_projections(*[x.P for x in family])
    s = _compress(family[-1].S, p)
    w, v = np.linalg.eigh(herm(s))
    hot = w > diverge
    if hot.any():
        vk = v[:, hot]
        p = join_projections(p, vk @ dagger(vk))
        s = _compress(s, p)
    return ExtendedPositive(s, p)


def _zero_kernel_projection(x):
    """Projection onto the directions where x vanishes (neither S nor P sees)."""
    return np.eye(x.dim, dtype=complex) - support_projection(x.S + x.P)


def tensor_ext(x, y, descend=None):
    """Tensor product of extended positives on the plain Kronecker product.

    The infinity projection follows the three-region bookkeeping: with E0/F0
    the zero projections and Ei/Fi the infinity projections of the factors,
    infinity lives on ((1-E0) (x) Fi) v (Ei (x) (1-F0)), zero on the join of
    the zero parts, and the finite part is S_x (x) S_y on the rest.

    ``descend``: optional pair (G, Gp) of a quotient map and a right inverse;
    the result is pushed through it (used for tensoring over the base algebra
    on tower levels, where G is the cached merge coisometry).
    """
    e0 = _zero_kernel_projection(x)
    f0 = _zero_kernel_projection(y)
    ix, iy = np.eye(x.dim, dtype=complex), np.eye(y.dim, dtype=complex)
    p_inf = join_projections(
        np.kron(ix - e0, y.P),
        np.kron(x.P, iy - f0),
    )
    s = np.kron(x.S, y.S)
    if descend is not None:
        g, gp = descend
        s = g @ s @ gp
        p_inf = support_projection(g @ p_inf @ gp)
    return ExtendedPositive.make(s, p_inf)


def sandwich(x, y):
    """Limit of x_m^(1/2) y_k x_m^(1/2) over truncations, in closed form.

    This is the extended positive whose pairing with a trace computes the
    bilinear extension of Tr(x . y).
    """
    if x.dim != y.dim:
        raise ValueError("dimension mismatch")
    rx = psd_sqrt(x.S)
    p = support_projection(rx @ y.P @ rx + x.P @ (y.S + y.P) @ x.P)
    s = _compress(rx @ y.S @ rx, p)
    return ExtendedPositive(s, p)


def pair_trace(x, y, weight=None, tol=ORDER_TOL):
    """Bilinear trace pairing Tr(x . y) in [0, inf].

    ``weight`` is the psd density of the trace (Tr(z) = tr(z W)); identity by
    default.  The pairing is finite exactly when the infinity support of each
    factor is weight-orthogonal to the support of the other.
    """
    if x.dim != y.dim:
        raise ValueError("dimension mismatch")
    w = np.eye(x.dim, dtype=complex) if weight is None else weight
    scale = max(
        np.linalg.norm(x.S) + np.linalg.norm(x.P),
        np.linalg.norm(y.S) + np.linalg.norm(y.P),
        1.0,
    ) * max(np.linalg.norm(w), 1.0)
    rx = psd_sqrt(x.S)
    overlaps = (
        np.trace(rx @ y.P @ rx @ w).real,
        np.trace(x.P @ y.S @ x.P @ w).real,
        np.trace(x.P @ y.P @ x.P @ w).real,
    )
    if any(t > tol * scale for t in overlaps):
        return math.inf
    return max(np.trace(rx @ y.S @ rx @ w).real, 0.0)


def scalar_close(a, b, tol=ORDER_TOL):
    """Compare two [0, inf] scalars, treating inf == inf as equal."""
    if math.isinf(a) or math.isinf(b):
        return math.isinf(a) and math.isinf(b)
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))
