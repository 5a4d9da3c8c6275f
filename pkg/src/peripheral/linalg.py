"""Dense complex linear algebra shared by the rest of the package.

Conventions used everywhere:

* matrices are ``numpy`` arrays of dtype ``complex128``;
* vectorization stacks columns, ``vec(X)[i + d*j] = X[i, j]``, so that
  ``vec(A X B) = (B.T kron A) vec(X)``;
* rank decisions threshold singular values relative to the largest one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment


class BranchAmbiguityError(ValueError):
    """An eigenphase sits on the branch cut of the principal root."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds.

    eig_peripheral
        Maximal ``||lambda| - 1|`` for an eigenvalue to count as peripheral.
    psd
        Slack on the smallest eigenvalue in positivity tests.
    equality
        Generic equality threshold, also the relative singular-value cut
        used for rank decisions.
    """

    eig_peripheral: float = 1e-9
    psd: float = 1e-9
    equality: float = 1e-8

    def __post_init__(self):
        for name in ("eig_peripheral", "psd", "equality"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be strictly positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Subspace:
    """A subspace of ``C^ambient_dim`` given by an isometry onto it."""

    ambient_dim: int
    isometry: np.ndarray

    def __post_init__(self):
        iso = np.asarray(self.isometry, dtype=complex)
        if iso.ndim != 2 or iso.shape[0] != self.ambient_dim:
            raise ValueError(
                f"isometry must have {self.ambient_dim} rows, got shape {iso.shape}"
            )
        gram = iso.conj().T @ iso
        if not np.allclose(gram, np.eye(iso.shape[1]), atol=1e-8):
            raise ValueError("columns of the isometry are not orthonormal")
        object.__setattr__(self, "isometry", iso)

    @property
    def dim(self) -> int:
        return self.isometry.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.isometry @ self.isometry.conj().T

    def complement(self) -> "Subspace":
        return Subspace(self.ambient_dim, null_space_of_rows(self.isometry.conj().T))


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    return a


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=complex).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if d is None:
        d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt product ``tr(a^dagger b)``."""
    return complex(np.vdot(a, b))


def hs_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def direct_sum(blocks: Sequence) -> np.ndarray:
    """Block-diagonal matrix from square blocks."""
    mats = [as_matrix(b) for b in blocks]
    for b in mats:
        if b.shape[0] != b.shape[1]:
            raise ValueError(f"direct_sum needs square blocks, got {b.shape}")
    if not mats:
        raise ValueError("direct_sum of an empty list")
    return scipy.linalg.block_diag(*mats).astype(complex)


def partial_trace(m, dim_a: int, dim_b: int, keep: str = "first") -> np.ndarray:
    """Partial trace of an operator on ``C^dim_a (x) C^dim_b``.

    ``keep="first"`` traces out the second factor, ``keep="second"`` the
    first one.
    """
    m = as_matrix(m)
    n = dim_a * dim_b
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {m.shape}")
    t = m.reshape(dim_a, dim_b, dim_a, dim_b)
    keep = keep.lower()
    if keep == "first":
        return np.einsum("ikjk->ij", t)
    if keep == "second":
        return np.einsum("kikj->ij", t)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and unit-norm right eigenvectors (columns) of a square matrix."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"eig needs a square matrix, got {m.shape}")
    try:
        w, v = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise np.linalg.LinAlgError(f"eigensolver failed: {exc}") from exc
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    return w.astype(complex), v.astype(complex)


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + dag(m))


def psd_sqrt_pinv(m, tol: float = DEFAULT_TOL.psd) -> tuple[np.ndarray, np.ndarray]:
    """Square root and pseudo-inverse square root of a PSD matrix.

    Eigenvalues below ``tol * max(1, lambda_max)`` are treated as the kernel,
    on which the inverse square root vanishes.
    """
    m = as_matrix(m)
    if not np.allclose(m, dag(m), atol=max(tol, 1e-12) * max(1.0, np.abs(m).max())):
        raise ValueError("psd_sqrt_pinv: matrix is not Hermitian")
    w, v = np.linalg.eigh(hermitian_part(m))
    scale = max(1.0, float(np.max(np.abs(w))) if w.size else 1.0)
    if w.size and w.min() < -tol * scale:
        raise ValueError(f"psd_sqrt_pinv: negative eigenvalue {w.min():.3e}")
    cut = tol * scale
    keep = w > cut
    sq = np.where(keep, np.sqrt(np.clip(w, 0, None)), 0.0)
    inv = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    return (v * sq) @ dag(v), (v * inv) @ dag(v)


def support_isometry(m, rel_tol: float = DEFAULT_TOL.equality) -> np.ndarray:
    """Orthonormal basis (columns) of the range of a Hermitian PSD matrix."""
    w, v = np.linalg.eigh(hermitian_part(as_matrix(m)))
    if w.size == 0 or w.max() <= 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    keep = w > rel_tol * w.max()
    # eigh sorts ascending; list the largest eigenvalues first
    return v[:, keep][:, ::-1].astype(complex)


def is_unitary(u, atol: float = 1e-9) -> bool:
    u = as_matrix(u)
    return u.shape[0] == u.shape[1] and np.allclose(
        dag(u) @ u, np.eye(u.shape[0]), atol=atol
    )


def unitary_mth_root(u, m: int, branch_tol: float = 1e-9) -> np.ndarray:
    """Principal m-th root of a unitary.

    Each eigenphase is taken in ``(-pi, pi]`` and divided by ``m``.  Phases
    within ``branch_tol`` of the cut at ``-pi`` raise
    :class:`BranchAmbiguityError`.
    """
    u = as_matrix(u)
    if m < 1:
        raise ValueError("root order must be >= 1")
    if not is_unitary(u, atol=1e-8):
        raise ValueError("unitary_mth_root: input is not unitary")
    if m == 1:
        return u.copy()
    # complex Schur form of a normal matrix is diagonal
    t, z = scipy.linalg.schur(u, output="complex")
    lam = np.diag(t)
    phases = np.angle(lam)
    if np.any(np.pi - np.abs(phases) < branch_tol):
        raise BranchAmbiguityError(
            "eigenvalue at -1: principal root is ambiguous"
        )
    root = np.exp(1j * phases / m)
    w = (z * root) @ dag(z)
    return polar_unitary(w)


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Closest unitary in Frobenius norm."""
    a, _, bh = np.linalg.svd(m)
    return a @ bh


def matrix_exp(m) -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"matrix_exp needs a square matrix, got {m.shape}")
    return scipy.linalg.expm(m)


def orthonormalize(vectors: Iterable, tol: float = DEFAULT_TOL.equality) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of the span of equally shaped arrays.

    Directions whose singular value is below ``tol`` times the largest one are
    dropped.
    """
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    if not vectors:
        raise ValueError("orthonormalize: empty input")
    shape = vectors[0].shape
    if any(v.shape != shape for v in vectors):
        raise ValueError("orthonormalize: inputs have different shapes")
    cols = np.stack([v.reshape(-1, order="F") for v in vectors], axis=1)
    q = range_basis(cols, tol)
    return [q[:, i].reshape(shape, order="F") for i in range(q.shape[1])]


def range_basis(cols: np.ndarray, tol: float = DEFAULT_TOL.equality) -> np.ndarray:
    """Orthonormal basis (columns) for the column span, relative SVD cut."""
    if cols.size == 0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s[0] == 0:
        return np.zeros((cols.shape[0], 0), dtype=complex)
    return u[:, s > tol * s[0]]


def null_space_of_rows(a: np.ndarray, tol: float = DEFAULT_TOL.equality,
                       scale: float | None = None) -> np.ndarray:
    """Orthonormal basis of ``{x : a x = 0}``.

    Singular values below ``tol * scale`` count as zero; ``scale`` defaults to
    the largest singular value.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    ref = smax if scale is None else scale
    rank = int(np.sum(s > tol * ref)) if ref > 0 else 0
    return dag(vh[rank:])


def numerical_rank(a: np.ndarray, tol: float = DEFAULT_TOL.equality) -> int:
    s = np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def span_matrix(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Columns ``vec(m)`` for each matrix."""
    return np.stack([vec(m) for m in mats], axis=1)


def subspace_distance(a: Sequence[np.ndarray], b: Sequence[np.ndarray],
                      tol: float = DEFAULT_TOL.equality) -> float:
    """Spectral-norm distance between the orthogonal projectors onto two spans.

    Returns ``inf`` when the spans have different dimensions.
    """
    qa = range_basis(span_matrix(a), tol) if len(a) else None
    qb = range_basis(span_matrix(b), tol) if len(b) else None
    if qa is None or qb is None:
        return 0.0 if qa is None and qb is None else float("inf")
    if qa.shape[1] != qb.shape[1]:
        return float("inf")
    return float(np.linalg.norm(qa @ dag(qa) - qb @ dag(qb), 2))


def residual_from_span(x: np.ndarray, basis: Sequence[np.ndarray]) -> float:
    """Norm of the component of ``x`` orthogonal to ``span(basis)``.

    ``basis`` must be Hilbert-Schmidt orthonormal.
    """
    v = vec(x)
    if not len(basis):
        return float(np.linalg.norm(v))
    q = span_matrix(basis)
    return float(np.linalg.norm(v - q @ (dag(q) @ v)))


def match_multisets(a, b) -> float:
    """Largest pairwise distance under the optimal matching of two complex multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        return float("inf")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def cluster_values(values, tol: float) -> list[list[int]]:
    """Group indices of complex numbers closer than ``tol`` (single linkage)."""
    values = np.asarray(values, dtype=complex)
    n = values.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, min_eig: float = 0.0) -> np.ndarray:
    """Random full-rank density matrix (Ginibre ensemble, optional eigenvalue floor)."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ dag(g)
    rho = rho / np.trace(rho).real
    if min_eig > 0:
        rho = (1 - d * min_eig) * rho + min_eig * np.eye(d)
    return hermitian_part(rho)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitian_part(g)
