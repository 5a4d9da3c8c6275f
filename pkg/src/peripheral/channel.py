"""Quantum channels: representations, validity checks, composition and a zoo.

Conventions: the superoperator ``S`` acts on column-stacked vectors,
``S vec(X) = vec(Phi(X))``; the Choi matrix is
``C = sum_ij E_ij (x) Phi(E_ij)`` with the input factor first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import block_diag

from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_matrix,
    dag,
    hermitian_part,
    matrix_exp,
    partial_trace,
    psd_sqrt_pinv,
    random_density,
    random_hermitian,
    random_unitary,
    unvec,
    vec,
)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class Channel:
    """A linear map on ``d x d`` matrices, usually CPTP.

    Exactly one of ``kraus``, ``choi`` or ``superop`` is given; the other
    representations are derived on demand.  Construction does not check
    complete positivity or trace preservation, use :func:`is_cptp`.
    """

    def __init__(self, dim: int, *, kraus: Sequence | None = None, choi=None,
                 superop=None):
        given = [x is not None for x in (kraus, choi, superop)]
        if sum(given) != 1:
            raise ValueError("give exactly one of kraus, choi, superop")
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        n = self.dim ** 2
        self._kraus = None
        self._superop = None
        self._choi = None
        if kraus is not None:
            ops = [as_matrix(k) for k in kraus]
            if not ops:
                raise ValueError("empty Kraus list")
            for k in ops:
                if k.shape != (self.dim, self.dim):
                    raise ValueError(f"Kraus operator of shape {k.shape}, expected "
                                     f"{(self.dim, self.dim)}")
            self._kraus = tuple(_frozen(k) for k in ops)
        elif choi is not None:
            c = as_matrix(choi)
            if c.shape != (n, n):
                raise ValueError(f"Choi matrix of shape {c.shape}, expected {(n, n)}")
            self._choi = _frozen(c)
        else:
            s = as_matrix(superop)
            if s.shape != (n, n):
                raise ValueError(f"superoperator of shape {s.shape}, expected {(n, n)}")
            self._superop = _frozen(s)

    @classmethod
    def from_function(cls, f: Callable[[np.ndarray], np.ndarray], dim: int) -> "Channel":
        return cls(dim, superop=superop_from_function(f, dim))

    @property
    def has_kraus(self) -> bool:
        return self._kraus is not None

    @cached_property
    def superop(self) -> np.ndarray:
        if self._superop is not None:
            return self._superop
        if self._kraus is not None:
            s = sum(np.kron(k.conj(), k) for k in self._kraus)
        else:
            s = _choi_superop_swap(self._choi, self.dim)
        return _frozen(s)

    @cached_property
    def choi(self) -> np.ndarray:
        if self._choi is not None:
            return self._choi
        return _frozen(_choi_superop_swap(self.superop, self.dim))

    @cached_property
    def kraus(self) -> tuple[np.ndarray, ...]:
        if self._kraus is not None:
            return self._kraus
        return tuple(_frozen(k) for k in choi_to_kraus(self.choi))

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    def __repr__(self):
        rep = "kraus" if self._kraus is not None else (
            "choi" if self._choi is not None else "superop")
        return f"Channel(dim={self.dim}, repr={rep})"


def _choi_superop_swap(m: np.ndarray, d: int) -> np.ndarray:
    # C[i,a,j,b] = S[b,a,j,i] (row-major split of both indices); the map is an involution
    return np.asarray(m).reshape(d, d, d, d).transpose(3, 1, 2, 0).reshape(d * d, d * d)


def superop_from_function(f: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """Matrix of a linear map, built column by column from the matrix units."""
    n = dim * dim
    s = np.zeros((n, n), dtype=complex)
    for j in range(dim):
        for i in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            s[:, i + dim * j] = vec(f(e))
    return s


def to_superop(ch: Channel) -> np.ndarray:
    return np.array(ch.superop)


def to_choi(ch: Channel) -> np.ndarray:
    return np.array(ch.choi)


def choi_to_kraus(c, tol: float = DEFAULT_TOL.psd) -> list[np.ndarray]:
    """Kraus operators from the eigendecomposition of a Choi matrix.

    Eigenvalues below ``tol`` (relative to ``max(1, lambda_max)``) are dropped;
    a negative eigenvalue beyond that raises ``ValueError``.
    """
    c = as_matrix(c)
    n = c.shape[0]
    d = int(round(np.sqrt(n)))
    if d * d != n or c.shape != (n, n):
        raise ValueError(f"not a Choi matrix shape: {c.shape}")
    w, v = np.linalg.eigh(hermitian_part(c))
    scale = max(1.0, float(np.abs(w).max()))
    if w.min() < -tol * scale:
        raise ValueError(f"Choi matrix not PSD: eigenvalue {w.min():.3e}")
    ops = []
    for k in np.argsort(w)[::-1]:
        if w[k] <= tol * scale:
            break
        ops.append(np.sqrt(w[k]) * v[:, k].reshape(d, d).T)
    if not ops:
        ops.append(np.zeros((d, d), dtype=complex))
    return ops


@dataclass(frozen=True)
class CPTPReport:
    cp: bool
    tp: bool
    min_choi_eig: float
    tp_defect: float
    hermiticity_defect: float = 0.0

    @property
    def ok(self) -> bool:
        return self.cp and self.tp


def is_cptp(ch: Channel, tol: Tolerances = DEFAULT_TOL) -> CPTPReport:
    c = np.asarray(ch.choi)
    herm = float(np.abs(c - dag(c)).max())
    min_eig = float(np.linalg.eigvalsh(hermitian_part(c)).min())
    tr_out = partial_trace(c, ch.dim, ch.dim, keep="first")
    tp_defect = float(np.abs(tr_out - np.eye(ch.dim)).max())
    cp = min_eig >= -tol.psd and herm <= tol.equality
    return CPTPReport(cp=cp, tp=tp_defect <= tol.equality, min_choi_eig=min_eig,
                      tp_defect=tp_defect, hermiticity_defect=herm)


def apply(ch: Channel, x) -> np.ndarray:
    x = as_matrix(x)
    if x.shape != (ch.dim, ch.dim):
        raise ValueError(f"input of shape {x.shape} for a channel of dimension {ch.dim}")
    if ch.has_kraus:
        return sum(k @ x @ dag(k) for k in ch.kraus)
    return unvec(ch.superop @ vec(x), ch.dim)


def compose(a: Channel, b: Channel) -> Channel:
    """The channel ``a o b`` (``b`` acts first)."""
    if a.dim != b.dim:
        raise ValueError("cannot compose channels of different dimensions")
    return Channel(a.dim, superop=a.superop @ b.superop)


def power(ch: Channel, n: int) -> Channel:
    if n < 0:
        raise ValueError("negative channel power")
    return Channel(ch.dim, superop=np.linalg.matrix_power(np.asarray(ch.superop), n))


def adjoint(ch: Channel) -> Channel:
    """Heisenberg-picture adjoint with respect to the Hilbert-Schmidt product."""
    if ch.has_kraus:
        return Channel(ch.dim, kraus=[dag(k) for k in ch.kraus])
    return Channel(ch.dim, superop=dag(np.asarray(ch.superop)))


@dataclass(frozen=True)
class GKLSGenerator:
    hamiltonian: np.ndarray
    noise_ops: tuple = field(default_factory=tuple)

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        if h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be square")
        if not np.allclose(h, dag(h), atol=1e-10):
            raise ValueError("Hamiltonian is not Hermitian")
        ops = tuple(as_matrix(a) for a in self.noise_ops)
        for a in ops:
            if a.shape != h.shape:
                raise ValueError("noise operator shape does not match the Hamiltonian")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "noise_ops", ops)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def gkls_superop(g: GKLSGenerator) -> np.ndarray:
    """Superoperator of ``-i[H, .] + sum_k (A X A^+ - {A^+ A, X}/2)``."""
    d = g.dim
    eye = np.eye(d)
    h = g.hamiltonian
    lmat = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for a in g.noise_ops:
        ada = dag(a) @ a
        lmat = lmat + np.kron(a.conj(), a) - 0.5 * (np.kron(eye, ada) + np.kron(ada.T, eye))
    return lmat


def markovian_channel(g: GKLSGenerator, t: float = 1.0) -> Channel:
    return Channel(g.dim, superop=matrix_exp(t * gkls_superop(g)))


# ----------------------------------------------------------------------
# zoo
# ----------------------------------------------------------------------

def identity_channel(dim: int = 2) -> Channel:
    return Channel(dim, kraus=[np.eye(dim)])


def unitary_channel(u) -> Channel:
    u = as_matrix(u)
    return Channel(u.shape[0], kraus=[u])


def contraction_channel(rho) -> Channel:
    """``X -> tr(X) rho``."""
    rho = as_matrix(rho)
    d = rho.shape[0]
    return Channel(d, superop=np.outer(vec(rho), vec(np.eye(d)).conj()))


def pauli_xz_channel() -> Channel:
    """``X -> (s1 X s1 + s3 X s3) / 2``."""
    return Channel(2, kraus=[PAULI_X / np.sqrt(2), PAULI_Z / np.sqrt(2)])


def wolf_indivisible_channel() -> Channel:
    """``X -> (X^T + tr(X) I) / 3``, unital, primitive and indivisible."""
    return Channel.from_function(lambda x: (x.T + np.trace(x) * np.eye(2)) / 3, 2)


def pinching_channel_from_projectors(projectors: Sequence) -> Channel:
    ps = [as_matrix(p) for p in projectors]
    d = ps[0].shape[0]
    if not np.allclose(sum(ps), np.eye(d), atol=1e-10):
        raise ValueError("pinching projectors must sum to the identity")
    return Channel(d, kraus=ps)


def block_projectors(block_sizes: Sequence[int]) -> list[np.ndarray]:
    d = int(sum(block_sizes))
    out, start = [], 0
    for b in block_sizes:
        p = np.zeros((d, d), dtype=complex)
        p[start:start + b, start:start + b] = np.eye(b)
        out.append(p)
        start += b
    return out


def random_kraus_channel(dim: int, n_kraus: int = 2, seed=None) -> Channel:
    """Ginibre Kraus operators normalized by ``(sum G^+ G)^{-1/2}``."""
    rng = np.random.default_rng(seed)
    gs = [rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
          for _ in range(n_kraus)]
    total = sum(dag(g) @ g for g in gs)
    _, inv_sqrt = psd_sqrt_pinv(total)
    return Channel(dim, kraus=[g @ inv_sqrt for g in gs])


def random_gkls_generator(dim: int, n_ops: int = 2, seed=None, structure=None,
                          scale: float = 1.0) -> GKLSGenerator:
    """Random GKLS generator.

    With ``structure=[(d_1, m_1), ...]`` (dimensions summing to ``dim``) the
    generator is built to have noiseless factors: on each block
    ``C^{d_k} (x) C^{m_k}`` the noise acts as ``I (x) a`` and the Hamiltonian
    as ``h (x) I + I (x) g``, so the attractor carries a full matrix algebra
    on every ``C^{d_k}`` rotated by ``exp(-i h)``.
    """
    rng = np.random.default_rng(seed)

    def ginibre(n):
        return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)

    if structure is None:
        h = scale * random_hermitian(dim, rng) / 2
        ops = [scale * ginibre(dim) / np.sqrt(dim) for _ in range(n_ops)]
        return GKLSGenerator(h, tuple(ops))
    structure = [(int(a), int(b)) for a, b in structure]
    if sum(a * b for a, b in structure) != dim:
        raise ValueError("structure dimensions do not add up to dim")
    h_blocks = []
    op_blocks = [[] for _ in range(n_ops)]
    for dk, mk in structure:
        h_blocks.append(np.kron(random_hermitian(dk, rng), np.eye(mk))
                        + np.kron(np.eye(dk), random_hermitian(mk, rng)))
        for j in range(n_ops):
            op_blocks[j].append(np.kron(np.eye(dk), ginibre(mk)) * scale)
    h = scale * block_diag(*h_blocks) / 2
    ops = [block_diag(*blocks) for blocks in op_blocks]
    return GKLSGenerator(h, tuple(ops))


ZOO_NAMES = ("identity", "unitary", "contraction", "pauli_xz", "wolf_indivisible",
             "pinching", "random_kraus", "random_gkls")


def zoo(name: str, params: dict | None = None, seed=None) -> Channel:
    """Named channels.

    ``params`` keys by name: ``identity`` (``dim``), ``unitary`` (``u`` or
    ``dim``), ``contraction`` (``rho`` or ``dim``), ``pinching``
    (``projectors`` or ``block_sizes``), ``random_kraus`` (``dim``,
    ``n_kraus``), ``random_gkls`` (``dim``, ``n_ops``, ``structure``,
    ``scale``).  Random variants use ``seed``.
    """
    p = dict(params or {})
    if name == "identity":
        return identity_channel(int(p.get("dim", 2)))
    if name == "unitary":
        if "u" in p:
            return unitary_channel(p["u"])
        return unitary_channel(random_unitary(int(p.get("dim", 2)), np.random.default_rng(seed)))
    if name == "contraction":
        if "rho" in p:
            return contraction_channel(p["rho"])
        d = int(p.get("dim", 2))
        if p.get("random"):
            return contraction_channel(random_density(d, np.random.default_rng(seed)))
        return contraction_channel(np.eye(d) / d)
    if name == "pauli_xz":
        return pauli_xz_channel()
    if name == "wolf_indivisible":
        return wolf_indivisible_channel()
    if name == "pinching":
        if "projectors" in p:
            return pinching_channel_from_projectors(p["projectors"])
        sizes = p.get("block_sizes", [1] * int(p.get("dim", 2)))
        return pinching_channel_from_projectors(block_projectors(sizes))
    if name == "random_kraus":
        return random_kraus_channel(int(p.get("dim", 2)), int(p.get("n_kraus", 2)), seed)
    if name == "random_gkls":
        g = random_gkls_generator(int(p.get("dim", 2)), int(p.get("n_ops", 2)), seed,
                                  p.get("structure"), float(p.get("scale", 1.0)))
        return markovian_channel(g)
    raise ValueError(f"unknown zoo channel {name!r}; known: {', '.join(ZOO_NAMES)}")
