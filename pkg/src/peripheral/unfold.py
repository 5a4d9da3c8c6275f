"""Channels with a prescribed attractor subspace and asymptotic map.

Given blocks ``(d_k, m_k, rho_k, U_k)``, a permutation ``pi`` and an optional
transient part ``H0perp``, :func:`unfold` builds

    Phi_E = (Phi_0 + Phi_0perp) o Phi_pinch

on ``H = H0perp + sum_k C^{d_k} (x) C^{m_k}`` (transient subspace first, then
the blocks in order).  ``Phi_0`` sends block ``pi(k)`` to block ``k`` through
``Z -> U_k tr_2(Z) U_k^+ (x) rho_k``; ``Phi_0perp`` dumps the transient part
into a fixed state ``sigma`` on ``H0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import Channel, is_cptp, superop_from_function
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerances,
    dag,
    direct_sum,
    is_unitary,
    numerical_rank,
    orthonormalize,
    partial_trace,
    random_density,
    random_unitary,
    residual_from_span,
    subspace_distance,
    unvec,
    vec,
)
from .reports import Report
from .spectral import apply_superop, attractor_basis
from .structure import AttractorDecomposition, Block, asymptotic_components, is_permutation


class UnfoldSpecError(ValueError):
    pass


@dataclass(frozen=True)
class BlockSpec:
    d: int
    m: int
    rho: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class UnfoldSpec:
    dim_h0_perp: int
    blocks: tuple
    permutation: tuple  # 0-based, block k receives the content of block permutation[k]
    sink_state: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "permutation", tuple(int(p) for p in self.permutation))
        validate_spec(self)
        if self.sink_state is None:
            object.__setattr__(self, "sink_state", default_sink_state(self.blocks))

    @property
    def h0_dim(self) -> int:
        return sum(b.d * b.m for b in self.blocks)

    @property
    def dim(self) -> int:
        return self.dim_h0_perp + self.h0_dim

    def offsets(self) -> list[int]:
        out, pos = [], self.dim_h0_perp
        for b in self.blocks:
            out.append(pos)
            pos += b.d * b.m
        return out


def default_sink_state(blocks: Sequence[BlockSpec]) -> np.ndarray:
    """``sum_k (I/d_k) (x) rho_k / M`` on ``H0``."""
    parts = [np.kron(np.eye(b.d) / b.d, b.rho) / len(blocks) for b in blocks]
    return direct_sum(parts)


def validate_spec(spec: UnfoldSpec, tol: float = 1e-9) -> None:
    """Reject specs that violate the construction's hypotheses (no repair)."""
    if spec.dim_h0_perp < 0:
        raise UnfoldSpecError("dim_h0_perp must be non-negative")
    if not spec.blocks:
        raise UnfoldSpecError("at least one block is required")
    if len(spec.permutation) != len(spec.blocks) or not is_permutation(spec.permutation):
        raise UnfoldSpecError(f"permutation {spec.permutation} is not a bijection of the blocks")
    for k, b in enumerate(spec.blocks):
        if b.d < 1 or b.m < 1:
            raise UnfoldSpecError(f"block {k}: d and m must be positive")
        rho = np.asarray(b.rho)
        u = np.asarray(b.u)
        if rho.shape != (b.m, b.m) or u.shape != (b.d, b.d):
            raise UnfoldSpecError(f"block {k}: rho must be m x m and u must be d x d")
        if np.abs(rho - dag(rho)).max() > tol or abs(np.trace(rho) - 1) > tol:
            raise UnfoldSpecError(f"block {k}: rho must be Hermitian with unit trace")
        if np.linalg.eigvalsh(rho).min() <= tol:
            raise UnfoldSpecError(f"block {k}: rho must be full rank")
        if not is_unitary(u, tol):
            raise UnfoldSpecError(f"block {k}: u is not unitary")
        if spec.blocks[spec.permutation[k]].d != b.d:
            raise UnfoldSpecError(f"block {k}: d differs from block pi(k)")
    if spec.sink_state is not None:
        s = np.asarray(spec.sink_state)
        n0 = sum(b.d * b.m for b in spec.blocks)
        if s.shape != (n0, n0):
            raise UnfoldSpecError("sink_state must act on H0")
        if (np.abs(s - dag(s)).max() > tol or abs(np.trace(s) - 1) > tol
                or np.linalg.eigvalsh(s).min() < -tol):
            raise UnfoldSpecError("sink_state must be a density matrix")


def spec_decomposition(spec: UnfoldSpec) -> AttractorDecomposition:
    """The decomposition the unfolded channel is built to have."""
    n = spec.dim
    eye = np.eye(n, dtype=complex)
    h0 = Subspace(n, eye[:, spec.dim_h0_perp:])
    blocks = []
    for b, off in zip(spec.blocks, spec.offsets()):
        iso = eye[:, off:off + b.d * b.m]
        blocks.append(Block(b.d, b.m, iso, np.asarray(b.rho, dtype=complex),
                            np.asarray(b.u, dtype=complex)))
    return AttractorDecomposition(h0, tuple(blocks), spec.permutation)


def _block_slices(spec: UnfoldSpec):
    return [slice(off, off + b.d * b.m) for b, off in zip(spec.blocks, spec.offsets())]


def pinching_channel(spec: UnfoldSpec) -> Channel:
    """``Z -> Q0perp Z Q0perp + sum_k P_k Z P_k``."""
    n, p = spec.dim, spec.dim_h0_perp
    projs = []
    if p:
        projs.append(np.diag([1.0] * p + [0.0] * (n - p)).astype(complex))
    for sl in _block_slices(spec):
        q = np.zeros((n, n), dtype=complex)
        q[sl, sl] = np.eye(sl.stop - sl.start)
        projs.append(q)
    return Channel(n, kraus=projs)


def sink_map(spec: UnfoldSpec) -> np.ndarray:
    """Superoperator of ``Z -> tr(Q0perp Z) sigma`` (zero without a transient part)."""
    n, p = spec.dim, spec.dim_h0_perp
    q = np.zeros((n, n), dtype=complex)
    q[:p, :p] = np.eye(p)
    sig = np.zeros((n, n), dtype=complex)
    sig[p:, p:] = spec.sink_state
    return np.outer(vec(sig), vec(q).conj())


def phi0_map(spec: UnfoldSpec) -> np.ndarray:
    """Superoperator of ``Z -> sum_k U_k tr_2(Z_{pi(k)}) U_k^+ (x) rho_k``."""
    n = spec.dim
    slices = _block_slices(spec)

    def f(z):
        out = np.zeros((n, n), dtype=complex)
        for k, b in enumerate(spec.blocks):
            j = spec.permutation[k]
            src = spec.blocks[j]
            zj = z[slices[j], slices[j]]
            x = partial_trace(zj, src.d, src.m, keep="first")
            out[slices[k], slices[k]] = np.kron(b.u @ x @ dag(b.u), b.rho)
        return out

    return superop_from_function(f, n)


def unfold(spec: UnfoldSpec) -> Channel:
    s_pinch = np.asarray(pinching_channel(spec).superop)
    return Channel(spec.dim, superop=(phi0_map(spec) + sink_map(spec)) @ s_pinch)


def verify_unfold(spec: UnfoldSpec, ch: Channel, tol: Tolerances = DEFAULT_TOL,
                  span_tol: float = 1e-8, action_tol: float = 1e-9) -> Report:
    """CPTP, collapse of ``Phi^2`` onto the target space, attractor span and action."""
    rep = Report()
    cp = is_cptp(ch, tol)
    rep.add("cptp", max(max(0.0, -cp.min_choi_eig), cp.tp_defect), 1e-9)
    dec = spec_decomposition(spec)
    target = dec.attractor_elements()
    s = np.asarray(ch.superop)
    s2 = s @ s
    n = spec.dim
    tbasis = orthonormalize(target)
    collapse = max(residual_from_span(unvec(s2[:, i], n), tbasis) for i in range(n * n))
    rep.add("square_collapse", collapse, 1e-9)
    rank = numerical_rank(s2, 1e-9)
    rep.add("square_rank", abs(rank - dec.attractor_dim), 0)
    rep.add("attractor_span", subspace_distance(attractor_basis(ch, tol), target), span_tol)
    worst = 0.0
    for x in target:
        want = dec.embed(asymptotic_components(dec, dec.components(x)))
        worst = max(worst, float(np.linalg.norm(apply_superop(s, x) - want)))
    rep.add("action", worst, action_tol)
    rep.info["square_rank"] = rank
    rep.info["attractor_dim"] = dec.attractor_dim
    return rep


# ----------------------------------------------------------------------
# spec factories
# ----------------------------------------------------------------------

def permutation_from_cycles(cycles: Sequence[Sequence[int]], n: int) -> tuple:
    perm = list(range(n))
    for cyc in cycles:
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            perm[a] = b
    return tuple(perm)


def random_spec(rng: np.random.Generator, max_dim: int = 8, cycle_lengths=None,
                max_d: int = 2, max_m: int = 2, transient=None) -> UnfoldSpec:
    """Random valid spec of total dimension at most ``max_dim``.

    ``cycle_lengths`` fixes the cycle type of ``pi`` (blocks in one cycle share
    ``d`` but may have different ``m``); otherwise one to three cycles are
    drawn.  ``transient`` forces ``dim_h0_perp`` (default: 0 or 1 at random).
    """
    for _ in range(1000):
        lengths = list(cycle_lengths) if cycle_lengths is not None else \
            [int(rng.integers(1, 3)) for _ in range(int(rng.integers(1, 4)))]
        p = int(rng.integers(0, 2)) if transient is None else int(transient)
        blocks, cycles, k = [], [], 0
        for length in lengths:
            d = int(rng.integers(1, max_d + 1))
            cyc = []
            for _ in range(length):
                m = int(rng.integers(1, max_m + 1))
                blocks.append(BlockSpec(d, m, random_density(m, rng, min_eig=0.05),
                                        random_unitary(d, rng)))
                cyc.append(k)
                k += 1
            cycles.append(cyc)
        if p + sum(b.d * b.m for b in blocks) > max_dim:
            continue
        perm = permutation_from_cycles(cycles, len(blocks))
        sink = None
        if p and rng.random() < 0.5:
            n0 = sum(b.d * b.m for b in blocks)
            sink = random_density(n0, rng)
        return UnfoldSpec(p, tuple(blocks), perm, sink)
    raise ValueError(f"no spec with cycle lengths {cycle_lengths} fits in dimension {max_dim}")


def uneven_cycle_spec(equal: bool = False, dim_h0_perp: int = 0) -> UnfoldSpec:
    """Two one-dimensional blocks swapped by ``pi``.

    With ``equal=False`` the blocks have ``m = 1`` and ``m = 2``, so that
    ``P_P(I)`` and ``P(I)`` differ; with ``equal=True`` both have ``m = 2``.
    """
    one = np.ones((1, 1), dtype=complex)
    b1 = BlockSpec(1, 2, np.diag([0.7, 0.3]).astype(complex), one) if equal else \
        BlockSpec(1, 1, one, one)
    b2 = BlockSpec(1, 2, np.diag([0.6, 0.4]).astype(complex), one)
    return UnfoldSpec(dim_h0_perp, (b1, b2), (1, 0))


def hs_unitary_witness_spec() -> UnfoldSpec:
    """A 2-cycle of ``m = 3`` blocks whose states have equal purity but different spectra.

    ``rho_1 = diag(.5, .3, .2)`` and ``rho_2 = diag(t, (1-t)/2, (1-t)/2)``
    with ``t`` the larger root of ``t^2 + (1-t)^2/2 = tr rho_1^2``.
    """
    r1 = np.array([0.5, 0.3, 0.2])
    purity = float(r1 @ r1)
    # 3 t^2 - 2 t + 1 - 2 purity = 0
    t = (2 + math.sqrt(4 - 12 * (1 - 2 * purity))) / 6
    r2 = np.array([t, (1 - t) / 2, (1 - t) / 2])
    one = np.ones((1, 1), dtype=complex)
    return UnfoldSpec(0, (BlockSpec(1, 3, np.diag(r1).astype(complex), one),
                          BlockSpec(1, 3, np.diag(r2).astype(complex), one)), (1, 0))
