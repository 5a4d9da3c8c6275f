"""Finite-dimensional *-algebras: closure checks and block factorization.

A unital *-subalgebra of ``M_n`` is unitarily a direct sum of blocks
``M_{d_k} (x) I_{m_k}``.  :func:`algebra_factorize` recovers the blocks with
a randomized procedure: a generic Hermitian central element separates the
minimal central projections, and inside each block a generic Hermitian
element separates ``d_k`` eigenspaces of dimension ``m_k`` that are then
aligned through the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    dag,
    hermitian_part,
    null_space_of_rows,
    orthonormalize,
    partial_trace,
    residual_from_span,
    span_matrix,
    subspace_distance,
)


class FactorizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Factor:
    d: int
    m: int
    isometry: np.ndarray  # n x (d*m); columns indexed i*m + j for C^d (x) C^m

    @property
    def central_projection(self) -> np.ndarray:
        return self.isometry @ dag(self.isometry)


def closure_defects(basis: Sequence[np.ndarray]) -> dict[str, float]:
    """Residuals of products, adjoints and the identity w.r.t. ``span(basis)``.

    ``basis`` must be Hilbert-Schmidt orthonormal, so products of basis
    elements have norm at most one and residuals are reported unnormalized.
    """
    n = basis[0].shape[0]
    prod = adj = 0.0
    for a in basis:
        adj = max(adj, residual_from_span(dag(a), basis))
        for b in basis:
            prod = max(prod, residual_from_span(a @ b, basis))
    unit = residual_from_span(np.eye(n), basis) / np.sqrt(n)
    return {"product": float(prod), "adjoint": float(adj), "identity": float(unit)}


def center_basis(basis: Sequence[np.ndarray], tol: float = 1e-8) -> list[np.ndarray]:
    """Basis of the center: solutions of ``[Z, B_j] = 0`` with ``Z`` in the span."""
    cols = []
    for bi in basis:
        cols.append(np.concatenate([(bi @ bj - bj @ bi).ravel() for bj in basis]))
    k = np.stack(cols, axis=1)
    # the basis is orthonormal, so commutators are O(1): use an absolute cut
    ns = null_space_of_rows(k, tol, scale=1.0)
    return [sum(c * b for c, b in zip(ns[:, i], basis)) for i in range(ns.shape[1])]


def _hermitian_spanning(elems: Sequence[np.ndarray]) -> list[np.ndarray]:
    out = []
    for z in elems:
        out.append(hermitian_part(z))
        out.append(hermitian_part(-1j * z))
    return out


def _eigen_groups(h: np.ndarray, rel_gap: float):
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(w).max()))
    groups, start = [], 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > rel_gap * scale:
            groups.append(v[:, start:i])
            start = i
    return groups, w


def algebra_factorize(basis: Sequence[np.ndarray], tol: float = 1e-8, seed=0,
                      max_attempts: int = 5) -> list[Factor]:
    """Block structure of the unital *-algebra spanned by ``basis``.

    Returns one :class:`Factor` per minimal central projection; in the
    coordinates given by ``Factor.isometry`` the compressed algebra equals
    ``M_d (x) I_m``.  Random draws are retried with fresh seeds up to
    ``max_attempts`` times.
    """
    basis = orthonormalize(basis, tol)
    rng = np.random.default_rng(seed)
    center = center_basis(basis, tol)
    n_blocks = len(center)
    herm_center = _hermitian_spanning(center)
    if n_blocks == 0:
        raise FactorizationError("empty center: the span is not a unital algebra")
    gap = 1e-6
    last_err = None
    for _ in range(max_attempts):
        z = sum(rng.standard_normal() * c for c in herm_center)
        groups, _ = _eigen_groups(hermitian_part(z), gap)
        if len(groups) != n_blocks:
            last_err = f"central element split into {len(groups)} parts, center has {n_blocks}"
            continue
        try:
            return [_factor_block(basis, w, rng, tol, gap) for w in groups]
        except FactorizationError as exc:
            last_err = str(exc)
    raise FactorizationError(f"factorization failed after {max_attempts} attempts: {last_err}")


def _factor_block(basis, w: np.ndarray, rng, tol: float, gap: float) -> Factor:
    nk = w.shape[1]
    local = [dag(w) @ b @ w for b in basis]
    local = orthonormalize(local, tol)
    dim_alg = len(local)
    d = int(round(np.sqrt(dim_alg)))
    if d * d != dim_alg or nk % d:
        raise FactorizationError(f"block of size {nk} carries an algebra of dimension {dim_alg}")
    m = nk // d
    herm = _hermitian_spanning(local)
    h = sum(rng.standard_normal() * x for x in herm)
    spaces, _ = _eigen_groups(hermitian_part(h), gap)
    if len(spaces) != d or any(s.shape[1] != m for s in spaces):
        raise FactorizationError("generic element has non-uniform eigenspaces")
    a = sum((rng.standard_normal() + 1j * rng.standard_normal()) * x for x in local)
    e1 = spaces[0]
    cols = [e1]
    for ei in spaces[1:]:
        t = ei @ dag(ei) @ a @ e1  # p_i a p_1 restricted to E_1: c |i><1| (x) I
        c = np.linalg.norm(t) / np.sqrt(m)
        if c < 1e-6:
            raise FactorizationError("degenerate matrix-unit draw")
        cols.append(t / c)
    # column index i*m + j  <->  |i> (x) |j>
    iso_local = np.concatenate(cols, axis=1)
    # clean up residual non-orthogonality
    u, _, vh = np.linalg.svd(iso_local, full_matrices=False)
    iso_local = u @ vh
    iso = w @ iso_local
    for x in local:
        y = dag(iso_local) @ x @ iso_local
        core = partial_trace(y, d, m, keep="first") / m
        if np.linalg.norm(y - np.kron(core, np.eye(m))) > 1e-6 * max(1.0, np.linalg.norm(y)):
            raise FactorizationError("block is not of the form M_d (x) I_m")
    return Factor(d, m, iso)


def factor_defect(basis: Sequence[np.ndarray], factors: Sequence[Factor]) -> float:
    """How far ``span(basis)`` is from ``sum_k iso_k (M_d (x) I_m) iso_k^+``."""
    gens = []
    for f in factors:
        for i in range(f.d):
            for j in range(f.d):
                e = np.zeros((f.d, f.d), dtype=complex)
                e[i, j] = 1
                gens.append(f.isometry @ np.kron(e, np.eye(f.m)) @ dag(f.isometry))

    return subspace_distance(list(basis), gens)


__all__ = ["Factor", "FactorizationError", "algebra_factorize", "center_basis",
           "closure_defects", "factor_defect", "span_matrix"]
