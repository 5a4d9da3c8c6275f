"""Permutations of the asymptotic map versus divisibility.

None of this decides whether a channel is infinitely divisible.  It checks
consequences: roots share the attractor and have the spectrum as n-th roots,
semigroup channels and idempotents have ``pi = id``, and a ``pi = id``
asymptotic map has n-th roots built from principal roots of the ``U_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .channel import Channel, GKLSGenerator, apply, markovian_channel, power
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    match_multisets,
    subspace_distance,
    unitary_mth_root,
)
from .reports import Report
from .spectral import attractor_basis, fix_basis, peripheral_data, spectrum
from .structure import (
    AttractorDecomposition,
    DecompositionError,
    apply_asymptotic,
    cycles_of,
    max_rank_fixed_state,
    wolf_decompose,
)
from .unfold import BlockSpec, UnfoldSpec, spec_decomposition


@dataclass(frozen=True)
class ClassificationReport:
    irreducible: bool
    primitive: bool
    unital: bool
    permutation_trivial: bool | None
    peripheral_count: int
    fix_dim: int
    notes: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"irreducible": self.irreducible, "primitive": self.primitive,
                "unital": self.unital, "permutation_trivial": self.permutation_trivial,
                "peripheral_count": self.peripheral_count, "fix_dim": self.fix_dim,
                "notes": list(self.notes)}


def classify(ch: Channel, tol: Tolerances = DEFAULT_TOL, seed=0,
             dec: AttractorDecomposition | None = None) -> ClassificationReport:
    """Irreducible: one-dimensional Fix spanned by a full-rank state.
    Primitive: irreducible with a single peripheral eigenvalue.

    ``peripheral_count`` counts peripheral eigenvalues with multiplicity.
    """
    notes = []
    pdata = peripheral_data(ch, tol)
    fix_dim = len(fix_basis(ch, tol, pdata))
    sigma = max_rank_fixed_state(ch, tol, pdata)
    full_rank = bool(np.linalg.eigvalsh(sigma).min() > tol.psd)
    irreducible = fix_dim == 1 and full_rank
    count = len(pdata.eigenvalues)
    primitive = irreducible and count == 1
    unital = bool(np.abs(apply(ch, np.eye(ch.dim)) - np.eye(ch.dim)).max() <= tol.equality)
    if fix_dim == 1 and not full_rank:
        notes.append("unique fixed state is not full rank")
    if dec is None:
        try:
            dec = wolf_decompose(ch, tol, seed)
        except DecompositionError as exc:
            notes.append(f"decomposition failed: {exc}")
    trivial = None if dec is None else all(p == k for k, p in enumerate(dec.permutation))
    return ClassificationReport(irreducible, primitive, unital, trivial, count, fix_dim,
                                tuple(notes))


def root_relations_check(phi: Channel, phi_n: Channel, n: int,
                         tol: Tolerances = DEFAULT_TOL, rel_tol: float = 1e-7) -> Report:
    """Check ``Attr(phi) = Attr(phi_n)`` and ``spec(phi) = spec(phi_n)^n``.

    Raises ``ValueError`` unless ``phi_n^n = phi`` within ``rel_tol``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    root_defect = float(np.abs(np.asarray(power(phi_n, n).superop) - phi.superop).max())
    if root_defect > rel_tol:
        raise ValueError(f"phi_n is not an n-th root of phi (defect {root_defect:.3e})")
    rep = Report()
    rep.add("attractor_span", subspace_distance(attractor_basis(phi, tol),
                                                attractor_basis(phi_n, tol)), rel_tol)
    rep.add("spectrum_power", match_multisets(spectrum(phi), spectrum(phi_n) ** n), rel_tol)
    rep.info["root_defect"] = root_defect
    return rep


def markovian_permutation_check(g: GKLSGenerator, t: float = 1.0,
                                tol: Tolerances = DEFAULT_TOL, seed=0) -> Report:
    """Exponentiate the generator, decompose, and require ``pi = id``."""
    ch = markovian_channel(g, t)
    dec = wolf_decompose(ch, tol, seed)
    rep = Report()
    rep.add("permutation_nontrivial",
            sum(p != k for k, p in enumerate(dec.permutation)), 0)
    rep.info["blocks"] = [(b.d, b.m) for b in dec.blocks]
    rep.info["permutation"] = list(dec.permutation)
    rep.info["decomposition"] = dec
    return rep


def root_asymptotics_witness(spec: UnfoldSpec, n: int) -> UnfoldSpec:
    """Same spec with every ``U_k`` replaced by its principal n-th root.

    The asymptotic map of the result, composed ``n`` times, is the asymptotic
    map of ``spec``.  Only defined for ``pi = id``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if any(p != k for k, p in enumerate(spec.permutation)):
        raise ValueError("the root witness requires a trivial permutation")
    blocks = tuple(BlockSpec(b.d, b.m, b.rho, unitary_mth_root(b.u, n)) for b in spec.blocks)
    return replace(spec, blocks=blocks)


def witness_defect(spec: UnfoldSpec, witness: UnfoldSpec, n: int) -> float:
    """Largest deviation between ``(witness map)^n`` and the asymptotic map of
    ``spec``, over the attractor."""
    ref = spec_decomposition(spec)
    root = spec_decomposition(witness)
    worst = 0.0
    for x in ref.attractor_elements():
        y = x
        for _ in range(n):
            y = apply_asymptotic(root, y)
        worst = max(worst, float(np.linalg.norm(y - apply_asymptotic(ref, x))))
    return worst


def permutation_power(perm, n: int) -> tuple:
    out = list(range(len(perm)))
    for _ in range(n):
        out = [perm[k] for k in out]
    return tuple(out)


def cycle_lcm(perm) -> int:
    return int(np.lcm.reduce([len(c) for c in cycles_of(perm)]))
