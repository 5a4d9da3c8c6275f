"""Block/permutation structure of the asymptotic map of a channel.

Every channel splits its Hilbert space as
``H = H0perp + sum_k C^{d_k} (x) C^{m_k}`` such that the attractor subspace is
``0 + sum_k B(C^{d_k}) (x) rho_k`` and the channel acts there as

    x_k (x) rho_k  ->  U_k x_{pi(k)} U_k^+ (x) rho_k.

:func:`wolf_decompose` computes this data numerically, :func:`cyclic_normalize`
rewrites it with one unitary per cycle of ``pi``.  Permutations are stored
0-based: ``permutation[k]`` is the block whose content lands in block ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg

from .algebra import FactorizationError, algebra_factorize, closure_defects
from .channel import Channel
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    cluster_values,
    dag,
    hermitian_part,
    orthonormalize,
    partial_trace,
    polar_unitary,
    psd_sqrt_pinv,
    subspace_distance,
    support_isometry,
    unitary_mth_root,
    unvec,
    vec,
)
from .reports import Report
from .spectral import (
    PeripheralData,
    apply_superop,
    attractor_basis,
    fixed_point_projection,
    peripheral_data,
)

# slack for internal consistency checks of the pipeline stages
STAGE_TOL = 1e-6


class DecompositionError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class Block:
    d: int
    m: int
    isometry: np.ndarray  # ambient_dim x (d*m), column i*m + j <-> |i> (x) |j>
    rho: np.ndarray
    unitary: np.ndarray


@dataclass(frozen=True)
class AttractorDecomposition:
    h0: Subspace
    blocks: tuple
    permutation: tuple

    @property
    def ambient_dim(self) -> int:
        return self.h0.ambient_dim

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def is_faithful(self) -> bool:
        return self.h0.dim == self.h0.ambient_dim

    @property
    def attractor_dim(self) -> int:
        return sum(b.d ** 2 for b in self.blocks)

    def components(self, x: np.ndarray) -> list[np.ndarray]:
        """Operators ``x_k`` with ``x = sum_k iso_k (x_k (x) rho_k) iso_k^+`` on Attr."""
        out = []
        for b in self.blocks:
            y = dag(b.isometry) @ x @ b.isometry
            w = np.kron(np.eye(b.d), b.rho)
            out.append(partial_trace(y @ w, b.d, b.m, keep="first")
                       / np.trace(b.rho @ b.rho).real)
        return out

    def embed(self, xs: Sequence[np.ndarray]) -> np.ndarray:
        n = self.ambient_dim
        out = np.zeros((n, n), dtype=complex)
        for b, x in zip(self.blocks, xs):
            out += b.isometry @ np.kron(x, b.rho) @ dag(b.isometry)
        return out

    def attractor_elements(self) -> list[np.ndarray]:
        """``iso_k (E_ij (x) rho_k) iso_k^+`` for all blocks and matrix units."""
        out = []
        for k, b in enumerate(self.blocks):
            for i in range(b.d):
                for j in range(b.d):
                    xs = [np.zeros((c.d, c.d), dtype=complex) for c in self.blocks]
                    xs[k][i, j] = 1
                    out.append(self.embed(xs))
        return out

    def pp_identity(self) -> np.ndarray:
        """``sum_k m_k iso_k (I (x) rho_k) iso_k^+`` (equals ``P_P(I)`` for faithful channels)."""
        return self.embed([b.m * np.eye(b.d) for b in self.blocks])

    def random_attractor_element(self, rng: np.random.Generator) -> np.ndarray:
        xs = [rng.standard_normal((b.d, b.d)) + 1j * rng.standard_normal((b.d, b.d))
              for b in self.blocks]
        return self.embed(xs)


def cycles_of(perm: Sequence[int]) -> list[tuple[int, ...]]:
    """Disjoint cycles ``(k, pi(k), pi(pi(k)), ...)`` starting from the smallest index."""
    seen, out = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc, k = [], start
        while k not in seen:
            seen.add(k)
            cyc.append(k)
            k = perm[k]
        out.append(tuple(cyc))
    return out


def is_permutation(perm: Sequence[int]) -> bool:
    return sorted(perm) == list(range(len(perm)))


def inverse_permutation(perm: Sequence[int]) -> list[int]:
    inv = [0] * len(perm)
    for k, p in enumerate(perm):
        inv[p] = k
    return inv


# ----------------------------------------------------------------------
# pipeline stages
# ----------------------------------------------------------------------

def _identity_image(proj: np.ndarray, d: int) -> np.ndarray:
    return hermitian_part(unvec(proj @ vec(np.eye(d)), d))


def support_space(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                  pdata: PeripheralData | None = None) -> Subspace:
    """Range of ``P(I)``."""
    p = fixed_point_projection(ch, tol, pdata)
    return Subspace(ch.dim, support_isometry(_identity_image(p, ch.dim), tol.equality))


def max_rank_fixed_state(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                         pdata: PeripheralData | None = None) -> np.ndarray:
    """``P(I) / tr P(I)``."""
    p = fixed_point_projection(ch, tol, pdata)
    x = _identity_image(p, ch.dim)
    return x / np.trace(x).real


def compress(ch: Channel, iso: np.ndarray) -> Channel:
    """``Y -> V^+ Phi(V Y V^+) V`` for an isometry ``V``."""
    n = iso.shape[1]
    if ch.has_kraus:
        return Channel(n, kraus=[dag(iso) @ a @ iso for a in ch.kraus])
    left = np.kron(iso.T, dag(iso))
    right = np.kron(iso.conj(), iso)
    return Channel(n, superop=left @ np.asarray(ch.superop) @ right)


def induced_faithful(ch: Channel, tol: Tolerances = DEFAULT_TOL,
                     h0: Subspace | None = None) -> Channel:
    """The restriction of the channel to ``B(H0)``, ``H0 = supp P(I)``."""
    h0 = h0 or support_space(ch, tol)
    out = compress(ch, h0.isometry)
    c = np.asarray(out.choi)
    tp = np.abs(partial_trace(c, out.dim, out.dim, "first") - np.eye(out.dim)).max()
    if tp > STAGE_TOL:
        raise DecompositionError("induced_faithful",
                                 f"compressed map is not trace preserving (defect {tp:.3e})")
    return out


def dagger_attractor_algebra(ch_faithful: Channel, sigma: np.ndarray,
                             tol: Tolerances = DEFAULT_TOL,
                             attr: Sequence[np.ndarray] | None = None) -> list[np.ndarray]:
    """Orthonormal basis of ``sigma^{-1/2} Attr(Phi) sigma^{-1/2}``, checked to be a *-algebra."""
    attr = attr if attr is not None else attractor_basis(ch_faithful, tol)
    _, inv = psd_sqrt_pinv(sigma, tol.psd)
    basis = orthonormalize([inv @ x @ inv for x in attr], tol.equality)
    defects = closure_defects(basis)
    worst = max(defects.values())
    if worst > STAGE_TOL:
        raise DecompositionError("algebra", f"not a unital *-algebra: {defects}")
    return basis


def _block_component(y: np.ndarray, iso: np.ndarray, rho: np.ndarray, d: int, m: int):
    z = dag(iso) @ y @ iso
    return partial_trace(z @ np.kron(np.eye(d), rho), d, m, "first") / np.trace(rho @ rho).real


def _gauge(u: np.ndarray) -> np.ndarray:
    """Fix the global phase: first non-negligible entry (row-major) real positive."""
    flat = u.ravel()
    idx = np.flatnonzero(np.abs(flat) > 1e-6)[0]
    return u * (abs(flat[idx]) / flat[idx])


def _extract_unitary(s: np.ndarray, src: tuple, dst: tuple) -> np.ndarray:
    """``U`` with ``T(x) = U x U^+``, where ``T`` maps block ``src`` into block ``dst``."""
    iso_s, rho_s, d = src
    iso_d, rho_d, m_d = dst

    def t(x):
        xin = iso_s @ np.kron(x, rho_s) @ dag(iso_s)
        return _block_component(apply_superop(s, xin), iso_d, rho_d, d, m_d)

    e = np.zeros((d, d), dtype=complex)
    e[0, 0] = 1
    w, v = np.linalg.eigh(hermitian_part(t(e)))
    u1 = v[:, -1]
    cols = [u1]
    for j in range(1, d):
        e = np.zeros((d, d), dtype=complex)
        e[j, 0] = 1
        cols.append(t(e) @ u1)
    u = np.stack(cols, axis=1)
    if np.linalg.norm(dag(u) @ u - np.eye(d)) > STAGE_TOL:
        raise DecompositionError("unitary", "block map is not a unitary conjugation")
    return _gauge(polar_unitary(u))


def wolf_decompose(ch: Channel, tol: Tolerances = DEFAULT_TOL, seed=0) -> AttractorDecomposition:
    """Compute the block decomposition of the attractor and the asymptotic map.

    Stages: support of ``P(I)``, induced faithful channel, its fixed state
    ``sigma``, the algebra ``sigma^{-1/2} Attr sigma^{-1/2}``, its block
    factorization, then ``rho_k`` from ``P_P(I)``, ``pi`` from the action of
    the adjoint on central projections and ``U_k`` from the action on matrix
    units.  Failures raise :class:`DecompositionError` naming the stage.
    """
    pdata = peripheral_data(ch, tol)
    h0 = support_space(ch, tol, pdata)
    v = h0.isometry
    n0 = h0.dim
    faithful = induced_faithful(ch, tol, h0)
    fdata = peripheral_data(faithful, tol)
    attr = attractor_basis(faithful, tol, fdata)
    if len(attr) == 1:
        sigma = max_rank_fixed_state(faithful, tol, fdata)
        blk = Block(1, n0, v.copy(), sigma, np.ones((1, 1), dtype=complex))
        return AttractorDecomposition(h0, (blk,), (0,))

    sigma = max_rank_fixed_state(faithful, tol, fdata)
    if np.linalg.eigvalsh(sigma).min() <= tol.psd:
        raise DecompositionError("faithful", "induced channel has no full-rank fixed state")
    alg = dagger_attractor_algebra(faithful, sigma, tol, attr)
    try:
        factors = algebra_factorize(alg, tol.equality, seed=seed)
    except FactorizationError as exc:
        raise DecompositionError("factorize", str(exc)) from exc
    if sum(f.d ** 2 for f in factors) != len(attr):
        raise DecompositionError("factorize", "block dimensions do not match dim Attr")

    pp_id = _identity_image(fdata.projector_superop, n0)
    rhos = []
    for f in factors:
        blk = dag(f.isometry) @ pp_id @ f.isometry
        r = hermitian_part(partial_trace(blk, f.d, f.m, "second"))
        rhos.append(r / np.trace(r).real)

    s = np.asarray(faithful.superop)
    sdag = dag(s)
    qs = [f.central_projection for f in factors]
    perm = []
    for qj in qs:
        y = apply_superop(sdag, qj)
        overlaps = [abs(np.vdot(qi, y)) / (np.linalg.norm(qi) * np.linalg.norm(y)) for qi in qs]
        best = int(np.argmax(overlaps))
        if overlaps[best] <= 0.5:
            raise DecompositionError("permutation", "no central projection matches")
        perm.append(best)
    # Phi^+(Q_j) = Q_{pi(j)}
    if not sorted(perm) == list(range(len(perm))):
        raise DecompositionError("permutation", f"not a bijection: {perm}")

    blocks = []
    for k, f in enumerate(factors):
        src = perm[k]
        fs = factors[src]
        if fs.d != f.d:
            raise DecompositionError("permutation", "pi maps between blocks of different d")
        u = _extract_unitary(s, (fs.isometry, rhos[src], f.d), (f.isometry, rhos[k], f.m))
        blocks.append(Block(f.d, f.m, v @ f.isometry, rhos[k], u))
    return AttractorDecomposition(h0, tuple(blocks), tuple(perm))


# ----------------------------------------------------------------------
# evaluating the asymptotic map
# ----------------------------------------------------------------------

def asymptotic_components(dec: AttractorDecomposition, xs: Sequence[np.ndarray]):
    return [b.unitary @ xs[dec.permutation[k]] @ dag(b.unitary)
            for k, b in enumerate(dec.blocks)]


def apply_asymptotic(dec: AttractorDecomposition, x, check_tol: float = STAGE_TOL) -> np.ndarray:
    """Evaluate ``0 + sum_k U_k x_{pi(k)} U_k^+ (x) rho_k`` for ``x`` in Attr."""
    x = np.asarray(x, dtype=complex)
    xs = dec.components(x)
    if check_tol is not None:
        resid = np.linalg.norm(dec.embed(xs) - x)
        if resid > check_tol * max(1.0, np.linalg.norm(x)):
            raise ValueError(f"input is not in the attractor subspace (residual {resid:.3e})")
    return dec.embed(asymptotic_components(dec, xs))


def star_product(dec: AttractorDecomposition, a, b) -> np.ndarray:
    """``a P_P(I)^{-1} b`` with the pseudo-inverse on the support."""
    if not dec.is_faithful:
        raise ValueError("star product is defined for faithful decompositions")
    for x in (a, b):
        xs = dec.components(np.asarray(x))
        if np.linalg.norm(dec.embed(xs) - x) > STAGE_TOL * max(1.0, np.linalg.norm(x)):
            raise ValueError("star product inputs must lie in the attractor subspace")
    sq, inv_sq = psd_sqrt_pinv(dec.pp_identity())
    return np.asarray(a) @ (inv_sq @ inv_sq) @ np.asarray(b)


def coarse_grained_unitary(dec: AttractorDecomposition) -> tuple[int, np.ndarray]:
    """``L = lcm(cycle lengths)`` and the ambient unitary realizing the L-th power.

    On the attractor, the L-fold asymptotic map equals ``X -> W X W^+`` with
    ``W = Q_perp + sum_k iso_k (U_k U_{pi(k)} ... U_{pi^{L-1}(k)} (x) I) iso_k^+``.
    """
    lengths = [len(c) for c in cycles_of(dec.permutation)]
    big_l = reduce(math.lcm, lengths, 1)
    n = dec.ambient_dim
    w = np.eye(n, dtype=complex) - dec.h0.projector
    for k, b in enumerate(dec.blocks):
        vk = np.eye(b.d, dtype=complex)
        j = k
        for _ in range(big_l):
            vk = vk @ dec.blocks[j].unitary
            j = dec.permutation[j]
        w += b.isometry @ np.kron(vk, np.eye(b.m)) @ dag(b.isometry)
    return big_l, w


# ----------------------------------------------------------------------
# cyclic normal form
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Cycle:
    block_indices: tuple
    uniform_unitary: np.ndarray
    rhos: tuple
    local_changes: tuple  # V_k, aligned with block_indices


@dataclass(frozen=True)
class CyclicDecomposition:
    parent: AttractorDecomposition
    cycles: tuple

    def transformed(self) -> AttractorDecomposition:
        """Parent decomposition in the rotated local bases (``U_k -> W`` on each cycle)."""
        blocks = list(self.parent.blocks)
        for cyc in self.cycles:
            for k, vk in zip(cyc.block_indices, cyc.local_changes):
                b = blocks[k]
                iso = b.isometry @ np.kron(dag(vk), np.eye(b.m))
                blocks[k] = replace(b, isometry=iso, unitary=cyc.uniform_unitary)
        return replace(self.parent, blocks=tuple(blocks))


def cyclic_normalize(dec: AttractorDecomposition) -> CyclicDecomposition:
    """Rotate local bases so that each cycle of ``pi`` carries a single unitary.

    For a cycle ``(k_1, ..., k_M)`` the common unitary is the principal M-th
    root of ``U_{k_1} ... U_{k_M}``; the local changes satisfy
    ``V_{k_j} U_{k_j} V_{k_{j+1}}^+ = W`` with ``V_{k_1} = I``.
    """
    out = []
    for cyc in cycles_of(dec.permutation):
        us = [dec.blocks[k].unitary for k in cyc]
        prod = reduce(np.matmul, us)
        w = unitary_mth_root(prod, len(cyc))
        vs = [np.eye(us[0].shape[0], dtype=complex)]
        for u in us[:-1]:
            vs.append(polar_unitary(dag(w) @ vs[-1] @ u))
        out.append(Cycle(cyc, w, tuple(dec.blocks[k].rho for k in cyc), tuple(vs)))
    return CyclicDecomposition(dec, tuple(out))


def fixed_points_from_cycles(cyc: CyclicDecomposition, cluster_tol: float = 1e-7
                             ) -> list[np.ndarray]:
    """Basis of ``Fix`` from the commutant of each cycle unitary, tensored with
    the cycle's averaged state."""
    tdec = cyc.transformed()
    elems = []
    for c in cyc.cycles:
        w = c.uniform_unitary
        t, z = scipy.linalg.schur(w, output="complex")
        lam = np.diag(t)
        comm = []
        for group in cluster_values(lam, cluster_tol):
            zg = z[:, group]
            for i in range(zg.shape[1]):
                for j in range(zg.shape[1]):
                    comm.append(np.outer(zg[:, i], zg[:, j].conj()))
        m_l = len(c.block_indices)
        for x in comm:
            xs = [np.zeros((b.d, b.d), dtype=complex) for b in tdec.blocks]
            for k in c.block_indices:
                xs[k] = x / m_l
            elems.append(tdec.embed(xs))
    return orthonormalize(elems)


# ----------------------------------------------------------------------
# verification
# ----------------------------------------------------------------------

def verify_decomposition(ch: Channel, dec: AttractorDecomposition,
                         tol: Tolerances = DEFAULT_TOL, span_tol: float = 1e-6,
                         action_tol: float = 1e-7) -> Report:
    """Check a decomposition against the channel.

    ``attractor_span``: Attr from the blocks vs the spectral attractor;
    ``action``: asymptotic formula vs the channel on the attractor basis;
    ``rho_positive``, ``permutation``: structural constraints;
    ``faithful_restriction``: Attr equals the lifted attractor of the induced
    faithful channel; ``isometries``: block isometries orthonormal, mutually
    orthogonal and inside ``H0``.
    """
    rep = Report()
    pdata = peripheral_data(ch, tol)
    attr = attractor_basis(ch, tol, pdata)
    rep.add("attractor_span", subspace_distance(dec.attractor_elements(), attr), span_tol)
    s = np.asarray(ch.superop)
    worst = 0.0
    for x in attr:
        y = dec.embed(asymptotic_components(dec, dec.components(x)))
        worst = max(worst, float(np.linalg.norm(y - apply_superop(s, x))))
    rep.add("action", worst, action_tol)
    min_eig = min(float(np.linalg.eigvalsh(b.rho).min()) for b in dec.blocks)
    rep.add("rho_positive", max(0.0, tol.psd - min_eig), 0.0)
    bad = 0 if is_permutation(dec.permutation) else len(dec.permutation)
    if not bad:
        bad = sum(dec.blocks[p].d != b.d for b, p in zip(dec.blocks, dec.permutation))
    rep.add("permutation", bad, 0)
    try:
        faithful = induced_faithful(ch, tol, dec.h0)
        lifted = [dec.h0.isometry @ x @ dag(dec.h0.isometry)
                  for x in attractor_basis(faithful, tol)]
        rep.add("faithful_restriction", subspace_distance(lifted, attr), span_tol)
    except DecompositionError:
        rep.add("faithful_restriction", float("inf"), span_tol)
    isos = np.concatenate([b.isometry for b in dec.blocks], axis=1)
    iso_defect = np.linalg.norm(dag(isos) @ isos - np.eye(isos.shape[1]))
    iso_defect += np.linalg.norm(isos - dec.h0.projector @ isos)
    iso_defect = max(iso_defect, abs(isos.shape[1] - dec.h0.dim))
    rep.add("isometries", iso_defect, span_tol)
    rep.info["attractor_dim"] = len(attr)
    rep.info["n_blocks"] = dec.n_blocks
    return rep


def compare_decompositions(found: AttractorDecomposition, ref: AttractorDecomposition,
                           tol: float = 1e-7, seed=0, n_random: int = 5) -> Report:
    """Equivalence of two decompositions of the same attractor.

    Blocks are matched by the overlap of their ranges; then the permutations
    must agree under the matching, the ambient block states
    ``iso_k (I (x) rho_k) iso_k^+`` must coincide, and the two asymptotic
    maps must act identically on the reference attractor.
    """
    rep = Report()
    same_shape = sorted((b.d, b.m) for b in found.blocks) == sorted((b.d, b.m) for b in ref.blocks)
    rep.add("block_dims", 0 if same_shape else 1, 0)
    cyc_f = sorted(len(c) for c in cycles_of(found.permutation))
    cyc_r = sorted(len(c) for c in cycles_of(ref.permutation))
    rep.add("cycle_type", 0 if cyc_f == cyc_r else 1, 0)
    if not same_shape or found.ambient_dim != ref.ambient_dim:
        rep.add("matching", 1, 0)
        return rep
    match = []
    for bf in found.blocks:
        pf = bf.isometry @ dag(bf.isometry)
        ov = [np.trace(pf @ br.isometry @ dag(br.isometry)).real / (bf.d * bf.m)
              for br in ref.blocks]
        match.append(int(np.argmax(ov)))
    rep.add("matching", 0 if is_permutation(match) else 1, 0)
    if not is_permutation(match):
        return rep
    perm_bad = sum(match[found.permutation[k]] != ref.permutation[match[k]]
                   for k in range(found.n_blocks))
    rep.add("permutation", perm_bad, 0)
    state = 0.0
    for k, bf in enumerate(found.blocks):
        br = ref.blocks[match[k]]
        sf = bf.isometry @ np.kron(np.eye(bf.d), bf.rho) @ dag(bf.isometry)
        sr = br.isometry @ np.kron(np.eye(br.d), br.rho) @ dag(br.isometry)
        state = max(state, float(np.linalg.norm(sf - sr)))
    rep.add("block_states", state, tol)
    rng = np.random.default_rng(seed)
    probes = ref.attractor_elements() + [ref.random_attractor_element(rng)
                                         for _ in range(n_random)]
    act = 0.0
    for x in probes:
        scale = max(1.0, np.linalg.norm(x))
        y_ref = apply_asymptotic(ref, x, check_tol=None)
        y_found = apply_asymptotic(found, x, check_tol=None)
        act = max(act, float(np.linalg.norm(y_ref - y_found)) / scale)
    rep.add("action", act, tol)
    return rep
