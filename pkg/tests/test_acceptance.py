"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also repeated in the terminal summary.
"""

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from peripheral.channel import (
    PAULI_Y,
    markovian_channel,
    random_gkls_generator,
    random_kraus_channel,
    zoo,
)
from peripheral.linalg import DEFAULT_TOL, is_unitary, numerical_rank, support_isometry
from peripheral.recovery import (
    asymptotic_adjoint_hs,
    asymptotic_matrix,
    eigvec_correspondence_check,
    hs_unitarity_report,
    verify_recovery_on_attractor,
)
from peripheral.spectral import (
    apply_superop,
    attractor_basis,
    cesaro_oracle,
    fixed_point_projection,
    peripheral_data,
    spectrum_report,
)
from peripheral.structure import (
    apply_asymptotic,
    coarse_grained_unitary,
    compare_decompositions,
    cycles_of,
    wolf_decompose,
)
from peripheral.unfold import (
    hs_unitary_witness_spec,
    random_spec,
    spec_decomposition,
    uneven_cycle_spec,
    unfold,
)


def record(key: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {key:2d}: {title} ({detail})"
    ACCEPTANCE_LINES[key] = line
    print(line)


def _identity_image(superop, d):
    return apply_superop(superop, np.eye(d, dtype=complex))


# ----------------------------------------------------------------------
# shared populations
# ----------------------------------------------------------------------

ZOO_CASES = [
    ("identity", {"dim": 3}, None),
    ("unitary", {"dim": 3}, 7),
    ("contraction", {"dim": 3, "random": True}, 8),
    ("contraction", {"rho": np.diag([0.6, 0.4, 0.0]).astype(complex)}, None),
    ("pauli_xz", {}, None),
    ("wolf_indivisible", {}, None),
    ("pinching", {"block_sizes": [1, 2]}, None),
    ("random_kraus", {"dim": 3, "n_kraus": 2}, 9),
    ("random_gkls", {"dim": 4, "n_ops": 2, "structure": [(2, 1), (1, 2)]}, 10),
]


@pytest.fixture(scope="module")
def zoo_channels():
    return [(f"{name}{params}", zoo(name, params, seed)) for name, params, seed in ZOO_CASES]


def _roundtrip_specs():
    rng = np.random.default_rng(2024)
    cycle_types = [[2], [3], [2, 1], [3, 1], [1, 1], [1], [2, 2], None, None, None]
    return [random_spec(rng, max_dim=8, cycle_lengths=cycle_types[i % len(cycle_types)])
            for i in range(20)]


@pytest.fixture(scope="module")
def roundtrip():
    out = []
    for i, spec in enumerate(_roundtrip_specs()):
        ch = unfold(spec)
        out.append((spec, ch, wolf_decompose(ch, seed=i)))
    return out


# ----------------------------------------------------------------------
# criteria
# ----------------------------------------------------------------------

def test_criterion_01_indivisible_channel_determinant():
    det = np.linalg.det(np.asarray(zoo("wolf_indivisible").superop))
    err = abs(det - (-1 / 27))
    ok = err <= 1e-12
    record(1, "determinant of the indivisible qubit channel is -1/27", ok,
           f"|det + 1/27| = {err:.2e}")
    assert ok


def test_criterion_02_pauli_flip():
    ch = zoo("pauli_xz")
    dec = wolf_decompose(ch)
    shape_ok = (dec.n_blocks == 2 and all(b.d == 1 and b.m == 1 for b in dec.blocks)
                and dec.permutation == (1, 0))
    # sigma_2 eigenbasis: diag(a+b, a-b) <-> a I + b sigma_2
    w, v = np.linalg.eigh(PAULI_Y)
    v = v[:, ::-1]  # eigenvalue +1 first
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(10):
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        x = v @ np.diag([a + b, a - b]) @ v.conj().T
        want = v @ np.diag([a - b, a + b]) @ v.conj().T
        worst = max(worst, float(np.abs(apply_asymptotic(dec, x) - want).max()))
    unitary = hs_unitarity_report(dec).unitary_channel
    ok = shape_ok and worst <= 1e-10 and unitary
    record(2, "Pauli X/Z channel: two 1x1 blocks swapped, flip action, unitary channel", ok,
           f"blocks={[(b.d, b.m) for b in dec.blocks]}, pi={[p + 1 for p in dec.permutation]}, "
           f"action err={worst:.1e}, unitary_channel={unitary}")
    assert ok


GKLS_STRUCTURES = [
    (3, [(1, 1), (1, 2)]), (3, [(1, 1), (1, 1), (1, 1)]), (3, [(3, 1)]), (3, [(1, 1), (2, 1)]),
    (3, None), (4, [(2, 2)]), (4, [(2, 1), (1, 2)]), (4, [(1, 2), (1, 2)]),
    (4, [(1, 1), (1, 1), (2, 1)]), (4, None),
]


def test_criterion_03_markovian_channels_have_trivial_permutation():
    perms = []
    for seed, (d, structure) in enumerate(GKLS_STRUCTURES):
        g = random_gkls_generator(d, 2, seed=100 + seed, structure=structure)
        dec = wolf_decompose(markovian_channel(g), seed=seed)
        perms.append(dec.permutation)
    trivial = [all(p == k for k, p in enumerate(perm)) for perm in perms]
    ok = all(trivial) and len(perms) == 10
    record(3, "exponentiated GKLS generators (d=3,4) have pi = id", ok,
           f"{sum(trivial)}/10 trivial, block counts {[len(p) for p in perms]}")
    assert ok


def test_criterion_04_unfold_decompose_roundtrip(roundtrip):
    failures = []
    cycle_types = set()
    for i, (spec, ch, dec) in enumerate(roundtrip):
        assert spec.dim <= 8
        cycle_types.update(len(c) for c in cycles_of(spec.permutation))
        rep = compare_decompositions(dec, spec_decomposition(spec), tol=1e-7)
        if not rep.ok:
            failures.append((i, rep.failures))
    ok = not failures and {2, 3} <= cycle_types
    record(4, "decompose(unfold(spec)) is equivalent to spec on 20 random specs", ok,
           f"failures={failures}, cycle lengths seen={sorted(cycle_types)}")
    assert ok


def test_criterion_05_square_collapses_onto_attractor(roundtrip):
    bad = []
    for i, (spec, ch, _) in enumerate(roundtrip):
        s = np.asarray(ch.superop)
        rank = numerical_rank(s @ s, 1e-9)
        want = sum(b.d ** 2 for b in spec.blocks)
        if rank != want:
            bad.append((i, rank, want))
    ok = not bad
    record(5, "rank of Phi_E^2 equals sum d_k^2", ok, f"mismatches={bad}")
    assert ok


def test_criterion_06_recovery_identity_on_attractor(zoo_channels, roundtrip):
    worst, where = 0.0, None
    cases = list(zoo_channels) + [(f"roundtrip{i}", ch) for i, (_, ch, _) in enumerate(roundtrip)]
    n_nonfaithful = 0
    for name, ch in cases:
        rep = verify_recovery_on_attractor(ch)
        d = max(rep.defects["recover_after_channel"], rep.defects["channel_after_recover"])
        n_nonfaithful += rep.info["recovery_trace_defect"] > 1e-6
        if d > worst:
            worst, where = d, name
    ok = worst <= 1e-8
    record(6, "Petz map inverts the channel on the attractor", ok,
           f"max defect {worst:.1e} at {where}, {len(cases)} channels, "
           f"{n_nonfaithful} non-faithful")
    assert ok


def _support_projector(x):
    v = support_isometry(x, 1e-8)
    return v @ v.conj().T, v.shape[1]


def test_criterion_07_peripheral_vs_fixed_identity_images():
    rng = np.random.default_rng(77)
    chans = [random_kraus_channel(int(rng.integers(2, 5)), int(rng.integers(1, 4)),
                                  seed=int(rng.integers(1 << 30))) for _ in range(10)]
    chans += [unfold(random_spec(rng, max_dim=7, transient=1)) for _ in range(10)]
    worst_proj, rank_bad = 0.0, 0
    for ch in chans:
        pdata = peripheral_data(ch)
        pp = _identity_image(pdata.projector_superop, ch.dim)
        p = _identity_image(fixed_point_projection(ch, pdata=pdata), ch.dim)
        qa, ra = _support_projector(pp)
        qb, rb = _support_projector(p)
        rank_bad += ra != rb
        worst_proj = max(worst_proj, float(np.abs(qa - qb).max()))
    part_a = worst_proj <= 1e-8 and rank_bad == 0

    diffs = {}
    for equal in (False, True):
        ch = unfold(uneven_cycle_spec(equal=equal))
        pdata = peripheral_data(ch)
        pp = _identity_image(pdata.projector_superop, ch.dim)
        p = _identity_image(fixed_point_projection(ch, pdata=pdata), ch.dim)
        diffs[equal] = float(np.linalg.norm(pp - p, 2))
    part_b = diffs[False] > 1e-3 and diffs[True] <= 1e-8
    ok = part_a and part_b
    record(7, "supports of P_P(I) and P(I) agree; they differ iff m_pi(k) != m_k", ok,
           f"support projector diff {worst_proj:.1e}, rank mismatches {rank_bad}, "
           f"uneven m: {diffs[False]:.3e}, even m: {diffs[True]:.1e}")
    assert ok


def test_criterion_08_spectral_axioms_and_cesaro_mean():
    rng = np.random.default_rng(88)
    chans = []
    for i in range(50):
        d = int(rng.integers(2, 5))
        if i % 5 == 4:
            g = random_gkls_generator(d, 2, seed=int(rng.integers(1 << 30)))
            chans.append(markovian_channel(g))
        else:
            chans.append(random_kraus_channel(d, int(rng.integers(2, 5)),
                                              seed=int(rng.integers(1 << 30))))
    ax_worst = 0.0
    ces_worst, n_gap = 0.0, 0
    for ch in chans:
        sr = spectrum_report(ch)
        ax_worst = max(ax_worst, sr.one_defect, sr.conjugation_defect, sr.radius_excess)
        mods = np.sort(np.abs(sr.eigenvalues))[::-1]
        non_peripheral = mods[np.abs(mods - 1) > DEFAULT_TOL.eig_peripheral]
        gap = 1 - (non_peripheral[0] if non_peripheral.size else 0.0)
        if gap >= 0.05:
            n_gap += 1
            err = float(np.abs(cesaro_oracle(ch, 2000) - fixed_point_projection(ch)).max())
            ces_worst = max(ces_worst, err)
    axioms_ok = ax_worst <= 1e-8
    cesaro_ok = ces_worst <= 1e-4
    ok = axioms_ok and cesaro_ok
    record(8, "spectral axioms on 50 channels; Cesaro mean at N=2000 within 1e-4 of P", ok,
           f"axiom defect {ax_worst:.1e} ({'ok' if axioms_ok else 'fail'}); Cesaro max entry error "
           f"{ces_worst:.2e} over {n_gap} gapped channels ({'ok' if cesaro_ok else 'fail'})")
    assert axioms_ok, "spectral axioms violated"
    assert cesaro_ok, f"Cesaro mean error {ces_worst:.2e} exceeds 1e-4"


def test_criterion_09_coarse_grained_map_is_unitary(zoo_channels, roundtrip):
    cases = [(name, ch, wolf_decompose(ch)) for name, ch in zoo_channels]
    cases += [(f"roundtrip{i}", ch, dec) for i, (_, ch, dec) in enumerate(roundtrip)]
    worst, where = 0.0, None
    for name, ch, dec in cases:
        big_l, w = coarse_grained_unitary(dec)
        if not is_unitary(w, 1e-8):
            worst, where = np.inf, name
            continue
        s_l = np.linalg.matrix_power(np.asarray(ch.superop), big_l)
        for x in attractor_basis(ch):
            want = w @ x @ w.conj().T
            iterated = x
            for _ in range(big_l):
                iterated = apply_asymptotic(dec, iterated)
            err = max(np.linalg.norm(apply_superop(s_l, x) - want),
                      np.linalg.norm(iterated - want))
            if err > worst:
                worst, where = float(err), name
    ok = worst <= 1e-8
    record(9, "asymptotic map to the power lcm(cycle lengths) is a unitary conjugation", ok,
           f"max defect {worst:.1e} at {where} over {len(cases)} decompositions")
    assert ok


def test_criterion_10_hs_unitary_but_not_unitary_channel():
    spec = hs_unitary_witness_spec()
    dec = wolf_decompose(unfold(spec))
    m = asymptotic_matrix(dec)
    matrix_defect = float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0]), 2))
    adj = asymptotic_adjoint_hs(dec)
    formula_defect = max(float(np.linalg.norm(adj(apply_asymptotic(dec, x)) - x))
                         for x in dec.attractor_elements())
    rep = hs_unitarity_report(dec)
    ok = matrix_defect <= 1e-8 and formula_defect <= 1e-8 and rep.spectrum_defect > 1e-3
    record(10, "HS-unitary asymptotic map that is not a unitary channel", ok,
           f"|M^+M - 1| = {matrix_defect:.1e}, adjoint formula {formula_defect:.1e}, "
           f"spectrum gap {rep.spectrum_defect:.3e}")
    assert ok


def test_criterion_11_dual_eigenvector_correspondence(zoo_channels, roundtrip):
    cases = []
    for name, ch in zoo_channels:
        sigma_min = np.linalg.eigvalsh(_identity_image(fixed_point_projection(ch), ch.dim)).min()
        if sigma_min > 1e-9:
            cases.append((name, ch))
    cases += [(f"roundtrip{i}", ch) for i, (spec, ch, _) in enumerate(roundtrip)
              if spec.dim_h0_perp == 0]
    worst, where = 0.0, None
    for name, ch in cases:
        d = eigvec_correspondence_check(ch).defects["dual_eigenvectors"]
        if d > worst:
            worst, where = d, name
    ok = worst <= 1e-8
    record(11, "sigma^{-1/2} X sigma^{-1/2} are eigenvectors of the dual channel", ok,
           f"max defect {worst:.1e} at {where} over {len(cases)} faithful channels")
    assert ok
