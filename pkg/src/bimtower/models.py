"""Concrete backends and their JSON configuration format.

Built-in families:

* ``trivial``: scalars acting on C^d from both sides.
* ``interval``: A = C + C with trace weights (t, 1-t); H is one-dimensional,
  the left action reads the first block, the right action the second.  This
  backend has no compatible conjugation (the two actions see different
  blocks), so rotation features that need one are unavailable on it.
* ``group``: A is the group algebra of a permutation group with its
  delta-at-identity trace, split into matrix blocks numerically; H is
  K (x) l2(G) with the left action pi(g) (x) (left translation) and the right
  action 1 (x) (right translation).  K defaults to the natural permutation
  space; explicit generator matrices are accepted.
* ``custom``: all matrices given explicitly, one per standard basis element
  of A in :meth:`TracedAlgebra.onb` order.
* ``power``: iterated tensor product of a base backend with itself (algebra
  and space both tensor; loop constants multiply).

Config is a JSON object with a ``model`` key; weights and the interval
parameter may be fraction strings like ``"1/3"`` so exact paths stay exact.
Matrix entries are numbers or ``[re, im]`` pairs.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .algebra import TracedAlgebra, tensor_algebra
from .bimodule import Bimodule
from .groups import PermGroup, perm_inv, split_irreps


class ModelError(ValueError):
    pass


def trivial_model(dim):
    if dim < 1:
        raise ModelError("trivial backend needs dim >= 1")
    alg = TracedAlgebra.scalar()
    eye = np.eye(dim, dtype=complex)
    return Bimodule(alg, dim, [eye], [eye], conj=eye, name=f"trivial({dim})")


def interval_model(t):
    t = Fraction(t) if not isinstance(t, Fraction) else t
    if not (0 < t < 1):
        raise ModelError("interval parameter must satisfy 0 < t < 1")
    alg = TracedAlgebra((1, 1), (t, 1 - t))
    st, su = float(t) ** 0.5, float(1 - t) ** 0.5
    lam = [np.array([[1 / st]], dtype=complex), np.array([[0.0]], dtype=complex)]
    rho = [np.array([[0.0]], dtype=complex), np.array([[1 / su]], dtype=complex)]
    bim = Bimodule(alg, 1, lam, rho, conj=None, name=f"interval({t})")
    bim.t = t
    return bim


def group_model(generators, rep_matrices=None, seed=11):
    group = PermGroup(generators)
    dims, irreps = split_irreps(group, seed=seed)
    n = len(group)
    alg = TracedAlgebra(dims, tuple(Fraction(d, n) for d in dims))
    if rep_matrices is None:
        pik = group.permutation_rep()
    else:
        pik = group.rep_from_generators(rep_matrices)
    k = pik[group.elements[0]].shape[0]
    lam_tr = group.left_translation()
    rho_tr = group.right_translation()

    # expansion of each standard basis element over group elements:
    # the coefficient at g of E^(i)_{jk}/sqrt(t_i) is sqrt(t_i) pi_i(g^-1)_{kj}
    lam, rho = [], []
    for i, (d, pi) in enumerate(zip(dims, irreps)):
        ti = float(dims[i]) / n
        for j in range(d):
            for kk in range(d):
                L = np.zeros((k * n, k * n), dtype=complex)
                R = np.zeros((k * n, k * n), dtype=complex)
                for g in group.elements:
                    c = np.sqrt(ti) * pi[perm_inv(g)][kk, j]
                    if abs(c) < 1e-15:
                        continue
                    L += c * np.kron(pik[g], lam_tr[g])
                    R += c * np.kron(np.eye(k), rho_tr[g])
                lam.append(L)
                rho.append(R)

    C = np.zeros((k * n, k * n), dtype=complex)
    for g in group.elements:
        gi = perm_inv(g)
        E = np.zeros((n, n))
        E[group.index[gi], group.index[g]] = 1.0
        C += np.kron(pik[gi], E)
    bim = Bimodule(alg, k * n, lam, rho, conj=C,
                   name=f"group(order={n}, k={k})")
    bim.group = group
    bim.group_rep = pik
    return bim


def _fraction(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def _matrix(data):
    rows = []
    for row in data:
        out = []
        for entry in row:
            if isinstance(entry, (list, tuple)):
                if len(entry) != 2:
                    raise ModelError(f"bad matrix entry {entry!r}")
                out.append(complex(entry[0], entry[1]))
            else:
                out.append(complex(entry))
        rows.append(out)
    return np.array(rows, dtype=complex)


def custom_model(dims, weights, lam, rho, conj=None, name="custom"):
    alg = TracedAlgebra(tuple(dims), tuple(_fraction(w) for w in weights))
    lam = [_matrix(m) for m in lam]
    rho = [_matrix(m) for m in rho]
    dim = lam[0].shape[0] if lam else 0
    conj = None if conj is None else _matrix(conj)
    return Bimodule(alg, dim, lam, rho, conj=conj, name=name)


def tensor_model(m1, m2):
    """External tensor product backend; loop constants multiply."""
    alg = tensor_algebra(m1.algebra, m2.algebra)
    a1, a2 = m1.algebra, m2.algebra

    def index1(i, j, k):
        off = sum(d * d for d in a1.dims[:i])
        return off + j * a1.dims[i] + k

    def index2(i, j, k):
        off = sum(d * d for d in a2.dims[:i])
        return off + j * a2.dims[i] + k

    lam, rho = [], []
    for i, di in enumerate(a1.dims):
        for j, ej in enumerate(a2.dims):
            for p in range(di):
                for q in range(ej):
                    for r in range(di):
                        for s in range(ej):
                            l1 = m1.lam[index1(i, p, r)]
                            l2 = m2.lam[index2(j, q, s)]
                            r1 = m1.rho[index1(i, p, r)]
                            r2 = m2.rho[index2(j, q, s)]
                            lam.append(np.kron(l1, l2))
                            rho.append(np.kron(r1, r2))
    conj = None
    if m1.conj is not None and m2.conj is not None:
        conj = np.kron(m1.conj, m2.conj)
    return Bimodule(alg, m1.dim * m2.dim, lam, rho, conj=conj,
                    name=f"{m1.name} (x) {m2.name}")


def power_model(base, copies):
    if copies < 1:
        raise ModelError("power backend needs copies >= 1")
    out = base
    for _ in range(copies - 1):
        out = tensor_model(out, base)
    out.name = f"power({base.name}, {copies})"
    return out


def load_model(config):
    """Build a backend from a parsed JSON config object."""
    if not isinstance(config, dict) or "model" not in config:
        raise ModelError("config must be an object with a 'model' key")
    kind = config["model"]
    if kind == "trivial":
        return trivial_model(int(config.get("dim", 1)))
    if kind == "interval":
        if "t" not in config:
            raise ModelError("interval backend needs 't'")
        return interval_model(_fraction(config["t"]))
    if kind == "group":
        if "generators" not in config:
            raise ModelError("group backend needs 'generators'")
        mats = config.get("rep_matrices")
        if mats is not None:
            mats = [_matrix(m) for m in mats]
        return group_model([tuple(g) for g in config["generators"]],
                           rep_matrices=mats,
                           seed=int(config.get("seed", 11)))
    if kind == "custom":
        for key in ("dims", "weights", "lam", "rho"):
            if key not in config:
                raise ModelError(f"custom backend needs {key!r}")
        return custom_model(config["dims"], config["weights"],
                            config["lam"], config["rho"],
                            conj=config.get("conj"),
                            name=config.get("name", "custom"))
    if kind == "power":
        if "base" not in config:
            raise ModelError("power backend needs 'base'")
        return power_model(load_model(config["base"]),
                           int(config.get("copies", 2)))
    raise ModelError(f"unknown model kind {kind!r}")
