"""Spectra, peripheral eigenprojections and attractor subspaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Channel
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    cluster_values,
    dag,
    match_multisets,
    orthonormalize,
    unvec,
    vec,
)

CLUSTER_TOL = 1e-7
DEFECT_TOL = 1e-6  # smallest singular value of S - lambda allowed on an eigenspace


class DefectivePeripheralError(RuntimeError):
    """Left and right peripheral eigenvectors could not be biorthogonalized."""


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    one_defect: float
    conjugation_defect: float
    radius_excess: float

    def axioms_hold(self, tol: float = 1e-8) -> bool:
        return (self.one_defect <= tol and self.conjugation_defect <= tol
                and self.radius_excess <= tol)


@dataclass(frozen=True)
class PeripheralCluster:
    eigenvalue: complex
    right: np.ndarray   # d^2 x r, columns vec(X_i)
    left: np.ndarray    # d^2 x r, biorthonormal: left^+ right = I

    @property
    def multiplicity(self) -> int:
        return self.right.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.right @ dag(self.left)


@dataclass(frozen=True)
class PeripheralData:
    """Peripheral eigenvalues, biorthonormal eigenvectors and ``P_P``.

    ``right_vectors[i]`` and ``left_vectors[i]`` are ``d x d`` matrices with
    ``<left_i, right_j>_HS = delta_ij``; ``eigenvalues[i]`` is repeated
    according to multiplicity.
    """

    dim: int
    clusters: tuple

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([c.eigenvalue for c in self.clusters for _ in range(c.multiplicity)],
                        dtype=complex)

    @property
    def right_vectors(self) -> list[np.ndarray]:
        return [unvec(c.right[:, i], self.dim) for c in self.clusters
                for i in range(c.multiplicity)]

    @property
    def left_vectors(self) -> list[np.ndarray]:
        return [unvec(c.left[:, i], self.dim) for c in self.clusters
                for i in range(c.multiplicity)]

    @property
    def projector_superop(self) -> np.ndarray:
        n = self.dim ** 2
        p = np.zeros((n, n), dtype=complex)
        for c in self.clusters:
            p += c.projector
        return p

    def cluster_at(self, lam: complex, tol: float = 1e-6):
        best = min(self.clusters, key=lambda c: abs(c.eigenvalue - lam), default=None)
        if best is None or abs(best.eigenvalue - lam) > tol:
            return None
        return best


def spectrum(ch: Channel) -> np.ndarray:
    return np.linalg.eigvals(np.asarray(ch.superop)).astype(complex)


def spectrum_report(ch: Channel) -> SpectrumReport:
    """Eigenvalues together with the defects of the three spectral axioms.

    ``one_defect`` is the distance of 1 to the spectrum,
    ``conjugation_defect`` the matching distance between the spectrum and its
    complex conjugate, ``radius_excess`` is ``max(0, max|lambda| - 1)``.
    """
    w = spectrum(ch)
    return SpectrumReport(
        eigenvalues=w,
        one_defect=float(np.min(np.abs(w - 1))),
        conjugation_defect=match_multisets(w, w.conj()),
        radius_excess=max(0.0, float(np.max(np.abs(w))) - 1.0),
    )


def _cluster_subspaces(s: np.ndarray, lam: complex, r: int):
    """Right and left eigenspaces of ``s`` at ``lam`` from one SVD of ``s - lam``."""
    n = s.shape[0]
    u, sv, vh = np.linalg.svd(s - lam * np.eye(n))
    right = dag(vh)[:, n - r:]
    left = u[:, n - r:]
    gap = sv[n - r - 1] if n - r - 1 >= 0 else np.inf
    return right, left, float(sv[n - r]), float(gap)


def peripheral_data(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                    cluster_tol: float = CLUSTER_TOL) -> PeripheralData:
    """Peripheral spectral data of a channel (or any linear map).

    Eigenvalues with ``||lambda| - 1| <= tol.eig_peripheral`` are grouped into
    clusters (distance ``<= cluster_tol``).  For each cluster of size ``r`` the
    ``r`` smallest singular directions of ``S - lambda`` give right and left
    eigenspaces, which are then biorthonormalized.  Raises
    :class:`DefectivePeripheralError` when the two spaces are (numerically)
    orthogonal or too small, i.e. the cluster is not semisimple.
    """
    s = np.asarray(ch.superop)
    w = np.linalg.eigvals(s)
    idx = np.flatnonzero(np.abs(np.abs(w) - 1) <= tol.eig_peripheral)
    clusters = []
    for group in cluster_values(w[idx], cluster_tol):
        members = w[idx[group]]
        lam = complex(np.mean(members))
        r = len(group)
        right, left, resid, _ = _cluster_subspaces(s, lam, r)
        if resid > DEFECT_TOL:
            raise DefectivePeripheralError(
                f"peripheral cluster at {lam:.6g} has algebraic multiplicity {r} "
                f"but fewer eigenvectors (residual {resid:.3g})")
        g = dag(left) @ right
        cond = np.linalg.cond(g)
        if not np.isfinite(cond) or cond > 1e8:
            raise DefectivePeripheralError(
                f"peripheral cluster at {lam:.6g} (size {r}) is not semisimple "
                f"(condition {cond:.3g}); check tol.eig_peripheral")
        left = left @ dag(np.linalg.inv(g))
        # refine the eigenvalue by the compressed operator
        lam = complex(np.trace(dag(left) @ s @ right) / r)
        clusters.append(PeripheralCluster(lam, right, left))
    clusters.sort(key=lambda c: (abs(c.eigenvalue - 1) > cluster_tol, np.angle(c.eigenvalue)))
    return PeripheralData(ch.dim, tuple(clusters))


def peripheral_projection(ch: Channel, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    return peripheral_data(ch, tol).projector_superop


def fixed_point_projection(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                           pdata: PeripheralData | None = None) -> np.ndarray:
    """Eigenprojection ``P`` onto ``Ker(Phi - 1)``."""
    pdata = pdata or peripheral_data(ch, tol)
    c = pdata.cluster_at(1.0)
    if c is None:
        raise ValueError("1 is not an eigenvalue: the map is not a channel")
    return c.projector


def cesaro_oracle(ch: Channel, n: int) -> np.ndarray:
    """Brute-force ``(1/N) sum_{k=1..N} S^k``, kept independent of the eigensolver."""
    if n < 1:
        raise ValueError("N must be >= 1")
    s = np.asarray(ch.superop)
    acc = np.zeros_like(s)
    cur = np.eye(s.shape[0], dtype=complex)
    for _ in range(n):
        cur = cur @ s
        acc += cur
    return acc / n


def peripheral_channel(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                       pdata: PeripheralData | None = None) -> Channel:
    """``Phi_P = P_P Phi``; raises when ``P_P`` fails to commute with ``Phi``."""
    pp = (pdata or peripheral_data(ch, tol)).projector_superop
    s = np.asarray(ch.superop)
    left, right = pp @ s, s @ pp
    defect = float(np.abs(left - right).max())
    if defect > 100 * tol.equality:
        raise ValueError(f"P_P does not commute with the channel (defect {defect:.3e})")
    return Channel(ch.dim, superop=left)


def attractor_basis(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                    pdata: PeripheralData | None = None) -> list[np.ndarray]:
    pdata = pdata or peripheral_data(ch, tol)
    vecs = pdata.right_vectors
    return orthonormalize(vecs, tol.equality) if vecs else []


def fix_basis(ch: Channel, tol: Tolerances = DEFAULT_TOL,
              pdata: PeripheralData | None = None) -> list[np.ndarray]:
    pdata = pdata or peripheral_data(ch, tol)
    c = pdata.cluster_at(1.0)
    if c is None:
        return []
    return orthonormalize([unvec(c.right[:, i], ch.dim) for i in range(c.multiplicity)],
                          tol.equality)


def apply_superop(s: np.ndarray, x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    return unvec(s @ vec(x), d)


def recurrence_search(pdata: PeripheralData, n_max: int) -> tuple[int, float]:
    """Smallest ``1 <= n <= n_max`` minimizing ``max_k |lambda_k^n - 1|``.

    Realizes the subsequence along which powers of the channel approach the
    peripheral projection.
    """
    lam = pdata.eigenvalues
    best_n, best = 1, np.inf
    for n in range(1, n_max + 1):
        val = float(np.max(np.abs(lam ** n - 1))) if lam.size else 0.0
        if val < best - 1e-15:
            best_n, best = n, val
    return best_n, best
