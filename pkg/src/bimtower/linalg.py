"""Small dense linear-algebra helpers shared across the package.

Everything works on complex numpy arrays.  Inner products are linear in the
first argument, ``inner(u, v) = v^H u``, matching the convention used by the
bimodule layer.  Spectral cutoffs are relative to the largest magnitude
eigenvalue/singular value so the helpers behave uniformly across scales.
"""

from __future__ import annotations

import numpy as np

# Relative eigenvalue cutoff for kernel/support decisions (Gram matrices,
# pseudo-inverse square roots, support projections).
SPECTRAL_CUT = 1e-10


def inner(u, v):
    """Complex inner product, linear in the first argument."""
    return complex(np.vdot(v, u))


def dagger(a):
    return np.conj(a.T)


def herm(a):
    """Hermitian part; cheap guard against accumulated asymmetry."""
    return 0.5 * (a + dagger(a))


def eigh_clipped(a, cut=SPECTRAL_CUT):
    """Eigendecomposition of a Hermitian psd matrix with small negatives clipped.

    Returns (w, v) with eigenvalues below ``cut * max(w, 0)`` zeroed.
    """
    w, v = np.linalg.eigh(herm(a))
    top = max(float(w[-1]), 0.0) if w.size else 0.0
    w = np.where(w > cut * top, w, 0.0)
    return w, v


def psd_sqrt(a, cut=SPECTRAL_CUT):
    w, v = eigh_clipped(a, cut)
    return (v * np.sqrt(w)) @ dagger(v)


def pinv_sqrt(a, cut=SPECTRAL_CUT):
    """Pseudo-inverse square root of a psd matrix."""
    w, v = eigh_clipped(a, cut)
    inv = np.where(w > 0, 1.0 / np.sqrt(np.where(w > 0, w, 1.0)), 0.0)
    return (v * inv) @ dagger(v)


def support_projection(a, cut=SPECTRAL_CUT):
    """Orthogonal projection onto the range of a psd matrix."""
    w, v = eigh_clipped(a, cut)
    keep = w > 0
    vk = v[:, keep]
    return vk @ dagger(vk)


def join_projections(*ps, cut=SPECTRAL_CUT):
    """Join (supremum) of commuting-or-not orthogonal projections."""
    if not ps:
        raise ValueError("need at least one projection")
    return support_projection(sum(ps), cut)


def is_projection(p, tol=1e-9):
    return bool(np.allclose(p @ p, p, atol=tol) and np.allclose(p, dagger(p), atol=tol))


def null_space(a, cut=SPECTRAL_CUT):
    """Orthonormal basis (columns) of the null space of ``a`` via SVD."""
    a = np.atleast_2d(a)
    if a.shape[0] == 0:
        return np.eye(a.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(a)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > cut * top)) if top > 0 else 0
    return dagger(vh)[:, rank:]


def orthonormalize(vectors, cut=SPECTRAL_CUT):
    """Orthonormal basis of the span of the given vectors (columns of result)."""
    m = np.column_stack([np.asarray(v, dtype=complex).ravel() for v in vectors])
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    top = s[0] if s.size else 0.0
    rank = int(np.sum(s > cut * top)) if top > 0 else 0
    return u[:, :rank]


def relative_close(a, b, tol):
    """``a`` approx ``b`` with tolerance relative to their joint scale."""
    a = np.asarray(a)
    b = np.asarray(b)
    scale = max(np.linalg.norm(a.ravel()), np.linalg.norm(b.ravel()), 1.0)
    return bool(np.linalg.norm((a - b).ravel()) <= tol * scale)


def random_hermitian(dim, rng):
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return herm(x)


def random_psd(dim, rng):
    x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return x @ dagger(x) / dim
