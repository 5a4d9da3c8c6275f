"""Petz recovery map, the sigma-weighted inner product and adjoints of the
asymptotic map.

With ``sigma = P(I)/tr P(I)`` the half product is
``<A, B>_{1/2} = tr(A^+ sigma^{-1/2} B sigma^{-1/2})`` and the recovery map

    Phi_rec(X) = sum_k sigma^{1/2} A_k^+ sigma^{-1/2} X sigma^{-1/2} A_k sigma^{1/2}

is the adjoint of the channel with respect to it.  On the attractor it
inverts the channel.  Inverse square roots are pseudo-inverses (zero on
``Ker sigma``), so for non-faithful channels the recovery map is only trace
non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import Channel, adjoint, apply
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    dag,
    orthonormalize,
    psd_sqrt_pinv,
    span_matrix,
    subspace_distance,
)
from .reports import Report
from .spectral import apply_superop, attractor_basis, peripheral_data
from .structure import (
    AttractorDecomposition,
    apply_asymptotic,
    inverse_permutation,
    max_rank_fixed_state,
)


@dataclass(frozen=True)
class HalfProductContext:
    sigma: np.ndarray
    sqrt_sigma: np.ndarray
    inv_sqrt_sigma: np.ndarray

    @classmethod
    def from_state(cls, sigma, tol: float = DEFAULT_TOL.psd) -> "HalfProductContext":
        sigma = np.asarray(sigma, dtype=complex)
        sq, inv = psd_sqrt_pinv(sigma, tol)
        return cls(sigma, sq, inv)

    @classmethod
    def from_channel(cls, ch: Channel, tol: Tolerances = DEFAULT_TOL) -> "HalfProductContext":
        """Context for the canonical fixed state ``P(I) / tr P(I)``."""
        return cls.from_state(max_rank_fixed_state(ch, tol), tol.psd)

    def weight(self, x: np.ndarray) -> np.ndarray:
        """``sigma^{-1/2} x sigma^{-1/2}``."""
        return self.inv_sqrt_sigma @ x @ self.inv_sqrt_sigma


def half_inner(ctx: HalfProductContext, a, b) -> complex:
    return complex(np.vdot(np.asarray(a), ctx.weight(np.asarray(b))))


def petz_recovery(ch: Channel, ctx: HalfProductContext | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Kraus form of the recovery map, ``sigma^{1/2} A_k^+ sigma^{-1/2}``."""
    ctx = ctx or HalfProductContext.from_channel(ch, tol)
    ops = [ctx.sqrt_sigma @ dag(a) @ ctx.inv_sqrt_sigma for a in ch.kraus]
    return Channel(ch.dim, kraus=ops)


def verify_recovery_on_attractor(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                                 defect_tol: float = 1e-8, span_tol: float = 1e-7) -> Report:
    """``Phi_rec Phi = Phi Phi_rec = id`` on the attractor and ``Attr(Phi_rec) = Attr(Phi)``.

    Defects are the largest norm differences over an orthonormal attractor
    basis.  The trace defect of the recovery map (non-zero only for
    non-faithful channels) is recorded as info.
    """
    ctx = HalfProductContext.from_channel(ch, tol)
    rec = petz_recovery(ch, ctx, tol)
    attr = attractor_basis(ch, tol)
    after = before = 0.0
    for x in attr:
        after = max(after, float(np.linalg.norm(apply(rec, apply(ch, x)) - x)))
        before = max(before, float(np.linalg.norm(apply(ch, apply(rec, x)) - x)))
    rep = Report()
    rep.add("recover_after_channel", after, defect_tol)
    rep.add("channel_after_recover", before, defect_tol)
    rep.add("attractor_span", subspace_distance(attractor_basis(rec, tol), attr), span_tol)
    tr_out = sum(dag(a) @ a for a in rec.kraus)
    rep.info["recovery_trace_defect"] = float(np.linalg.norm(tr_out - np.eye(ch.dim), 2))
    rep.info["sigma_eigenvalues"] = np.linalg.eigvalsh(ctx.sigma).tolist()
    return rep


# ----------------------------------------------------------------------
# adjoints of the asymptotic map
# ----------------------------------------------------------------------

def _checked_components(dec: AttractorDecomposition, x, check_tol=1e-6):
    x = np.asarray(x, dtype=complex)
    xs = dec.components(x)
    resid = np.linalg.norm(dec.embed(xs) - x)
    if resid > check_tol * max(1.0, np.linalg.norm(x)):
        raise ValueError(f"input is not in the attractor subspace (residual {resid:.3e})")
    return xs


def asymptotic_adjoint_hs(dec: AttractorDecomposition) -> Callable[[np.ndarray], np.ndarray]:
    """Adjoint of the asymptotic map on Attr for the Hilbert-Schmidt product.

    Component ``j`` of the image is
    ``tr(rho_i^2)/tr(rho_j^2) U_i^+ x_i U_i`` with ``i = pi^{-1}(j)``.
    """
    inv = inverse_permutation(dec.permutation)
    w = [np.trace(b.rho @ b.rho).real for b in dec.blocks]

    def f(x):
        xs = _checked_components(dec, x)
        out = []
        for j in range(dec.n_blocks):
            i = inv[j]
            u = dec.blocks[i].unitary
            out.append(w[i] / w[j] * dag(u) @ xs[i] @ u)
        return dec.embed(out)

    return f


def asymptotic_adjoint_half(dec: AttractorDecomposition) -> Callable[[np.ndarray], np.ndarray]:
    """Adjoint of the asymptotic map on Attr for the half product.

    The weights cancel along cycles, so this is ``x_j -> U_i^+ x_i U_i`` with
    ``i = pi^{-1}(j)``, the inverse of the asymptotic map.
    """
    inv = inverse_permutation(dec.permutation)

    def f(x):
        xs = _checked_components(dec, x)
        out = []
        for j in range(dec.n_blocks):
            u = dec.blocks[inv[j]].unitary
            out.append(dag(u) @ xs[inv[j]] @ u)
        return dec.embed(out)

    return f


def asymptotic_matrix(dec: AttractorDecomposition) -> np.ndarray:
    """Matrix of the asymptotic map in a Hilbert-Schmidt orthonormal basis of Attr."""
    basis = orthonormalize(dec.attractor_elements())
    q = span_matrix(basis)
    images = span_matrix([apply_asymptotic(dec, x, check_tol=None) for x in basis])
    return dag(q) @ images


@dataclass(frozen=True)
class HSUnitarityReport:
    hs_unitary: bool
    unitary_channel: bool
    norm_defect: float
    spectrum_defect: float
    matrix_defect: float

    def to_dict(self) -> dict:
        return {"hs_unitary": self.hs_unitary, "unitary_channel": self.unitary_channel,
                "norm_defect": self.norm_defect, "spectrum_defect": self.spectrum_defect,
                "matrix_defect": self.matrix_defect}


def hs_unitarity_report(dec: AttractorDecomposition, tol: float = 1e-8) -> HSUnitarityReport:
    """Whether the asymptotic map is unitary for the HS product, and whether it is
    a unitary channel.

    ``hs_unitary`` compares ``||rho_k||_HS`` with ``||rho_pi(k)||_HS``;
    ``unitary_channel`` compares the sorted spectra of ``rho_k`` and
    ``rho_pi(k)`` (unitary equivalence of positive matrices).  The defect of
    ``M^+ M = 1`` for the matrix of the map is reported independently.
    """
    norm_defect = spec_defect = 0.0
    for k, b in enumerate(dec.blocks):
        c = dec.blocks[dec.permutation[k]]
        norm_defect = max(norm_defect, abs(np.linalg.norm(b.rho) - np.linalg.norm(c.rho)))
        if b.m != c.m:
            spec_defect = np.inf
        else:
            diff = np.sort(np.linalg.eigvalsh(b.rho)) - np.sort(np.linalg.eigvalsh(c.rho))
            spec_defect = max(spec_defect, float(np.abs(diff).max()))
    m = asymptotic_matrix(dec)
    matrix_defect = float(np.linalg.norm(dag(m) @ m - np.eye(m.shape[0]), 2))
    return HSUnitarityReport(bool(norm_defect <= tol), bool(spec_defect <= tol),
                             float(norm_defect), float(spec_defect), matrix_defect)


def purity_change(dec: AttractorDecomposition, x) -> float:
    """``||Phi_P(x)||_HS - ||x||_HS`` for ``x`` in Attr."""
    return float(np.linalg.norm(apply_asymptotic(dec, x)) - np.linalg.norm(x))


def eigvec_correspondence_check(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                                defect_tol: float = 1e-8) -> Report:
    """``Phi^+(sigma^{-1/2} X sigma^{-1/2}) = conj(lambda) sigma^{-1/2} X sigma^{-1/2}``.

    For every peripheral eigenpair of a faithful channel.  Defects are
    relative to the norm of ``sigma^{-1/2} X sigma^{-1/2}``.
    """
    ctx = HalfProductContext.from_channel(ch, tol)
    if np.linalg.eigvalsh(ctx.sigma).min() <= tol.psd:
        raise ValueError("the eigenvector correspondence requires a faithful channel")
    pdata = peripheral_data(ch, tol)
    sdag = np.asarray(adjoint(ch).superop)
    worst = 0.0
    for lam, x in zip(pdata.eigenvalues, pdata.right_vectors):
        y = ctx.weight(x)
        r = apply_superop(sdag, y) - np.conj(lam) * y
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(y)))
    rep = Report()
    rep.add("dual_eigenvectors", worst, defect_tol)
    rep.info["n_peripheral"] = len(pdata.eigenvalues)
    return rep


def recovery_eigen_check(ch: Channel, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest relative defect of ``Phi_rec(X) = conj(lambda) X`` over peripheral eigenvectors."""
    rec = petz_recovery(ch, tol=tol)
    pdata = peripheral_data(ch, tol)
    worst = 0.0
    for lam, x in zip(pdata.eigenvalues, pdata.right_vectors):
        r = apply(rec, x) - np.conj(lam) * x
        worst = max(worst, float(np.linalg.norm(r) / np.linalg.norm(x)))
    return worst
