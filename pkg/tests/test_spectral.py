import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peripheral.channel import (
    PAULI_Y,
    Channel,
    contraction_channel,
    identity_channel,
    is_cptp,
    random_kraus_channel,
    unitary_channel,
    zoo,
)
from peripheral.linalg import random_density, subspace_distance, support_isometry, unvec, vec
from peripheral.spectral import (
    DefectivePeripheralError,
    apply_superop,
    attractor_basis,
    cesaro_oracle,
    fix_basis,
    fixed_point_projection,
    peripheral_channel,
    peripheral_data,
    recurrence_search,
    spectrum,
    spectrum_report,
)
from peripheral.unfold import random_spec, unfold

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def identity_image(s, d):
    return apply_superop(s, np.eye(d, dtype=complex))


def test_spectrum_examples():
    assert np.allclose(spectrum(identity_channel(2)), 1)
    w = spectrum(zoo("wolf_indivisible"))
    assert np.allclose(sorted(w.real), [-1 / 3, 1 / 3, 1 / 3, 1])
    assert abs(np.prod(w) + 1 / 27) < 1e-12
    w = spectrum(zoo("pauli_xz"))
    assert np.allclose(sorted(w.real), [-1, 0, 0, 1], atol=1e-12)


def test_spectrum_report_flags_non_channels():
    rep = spectrum_report(Channel(1, superop=[[2.0]]))
    assert rep.radius_excess == pytest.approx(1.0)
    assert not rep.axioms_hold()


def test_peripheral_data_examples(rng):
    pd = peripheral_data(identity_channel(2))
    assert np.allclose(pd.projector_superop, np.eye(4))
    pd = peripheral_data(zoo("pauli_xz"))
    assert np.allclose(sorted(pd.eigenvalues.real), [-1, 1])
    assert np.linalg.matrix_rank(pd.projector_superop) == 2
    rho = random_density(3, rng)
    pd = peripheral_data(contraction_channel(rho))
    assert len(pd.eigenvalues) == 1
    assert np.allclose(pd.projector_superop, np.outer(vec(rho), vec(np.eye(3)).conj()))


def test_peripheral_vectors_are_biorthonormal_eigenvectors():
    ch = unfold(random_spec(np.random.default_rng(3), cycle_lengths=[3]))
    pd = peripheral_data(ch)
    s = np.asarray(ch.superop)
    for lam, x in zip(pd.eigenvalues, pd.right_vectors):
        assert np.allclose(apply_superop(s, x), lam * x, atol=1e-10)
    gram = np.array([[np.vdot(y, x) for x in pd.right_vectors] for y in pd.left_vectors])
    assert np.allclose(gram, np.eye(len(gram)), atol=1e-10)
    assert all(abs(abs(lam) - 1) <= 1e-9 for lam in pd.eigenvalues)


def test_defective_cluster_is_reported():
    # Jordan block at eigenvalue 1: not a channel, the peripheral part is not semisimple
    s = np.eye(4, dtype=complex)
    s[0, 1] = 1.0
    with pytest.raises(DefectivePeripheralError):
        peripheral_data(Channel(2, superop=s))


def test_fixed_point_projection_examples():
    assert np.allclose(fixed_point_projection(identity_channel(3)), np.eye(9))
    p = fixed_point_projection(zoo("pauli_xz"))
    assert np.linalg.matrix_rank(p) == 1
    assert np.allclose(identity_image(p, 2), np.eye(2))
    assert np.allclose(apply_superop(p, PAULI_Y), 0, atol=1e-12)
    with pytest.raises(ValueError):
        fixed_point_projection(Channel(1, superop=[[0.5]]))


def test_cesaro_examples(rng):
    assert np.allclose(cesaro_oracle(identity_channel(2), 17), np.eye(4))
    c = contraction_channel(random_density(2, rng))
    assert np.allclose(cesaro_oracle(c, 1), fixed_point_projection(c))
    xz = zoo("pauli_xz")
    assert np.allclose(cesaro_oracle(xz, 10), fixed_point_projection(xz), atol=1e-12)
    with pytest.raises(ValueError):
        cesaro_oracle(xz, 0)


def test_cesaro_converges_to_fixed_point_projection():
    ch = random_kraus_channel(3, 2, seed=11)
    p = fixed_point_projection(ch)
    errs = [np.abs(cesaro_oracle(ch, n) - p).max() for n in (10, 100, 1000)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2
    # the error is about 0.8 / N for this channel, so 1e-5 needs N of order 1e5
    assert np.abs(cesaro_oracle(ch, 200_000) - p).max() < 1e-5


@given(seeds, st.integers(min_value=2, max_value=4))
def test_cesaro_error_matches_first_order_formula(seed, d):
    """The Cesaro residual is (1/N) S (1 - S^N) (1 - S + P)^{-1} (1 - P) exactly,
    so it decays as 1/N and not faster."""
    ch = random_kraus_channel(d, 2, seed=seed)
    s = np.asarray(ch.superop)
    p = fixed_point_projection(ch)
    n = 200
    eye = np.eye(d * d)
    tail = np.linalg.inv(eye - s + p) @ (eye - p)
    predicted = s @ (eye - np.linalg.matrix_power(s, n)) @ tail / n
    assert np.allclose(cesaro_oracle(ch, n) - p, predicted, atol=1e-10)


def test_peripheral_channel_examples():
    assert np.allclose(peripheral_channel(identity_channel(2)).superop, np.eye(4))
    pc = peripheral_channel(zoo("pauli_xz"))
    assert np.allclose(apply_superop(np.asarray(pc.superop), PAULI_Y), -PAULI_Y)
    x = np.array([[1.0, 2.0], [0.5, 3.0]])
    want = (np.trace(x) * np.eye(2) + np.trace(PAULI_Y @ x) * PAULI_Y) / 2
    want = apply_superop(np.asarray(zoo("pauli_xz").superop), want)
    assert np.allclose(apply_superop(np.asarray(pc.superop), x), want)


def test_powers_approach_peripheral_channel():
    ch = random_kraus_channel(3, 3, seed=2)
    s = np.asarray(ch.superop)
    sp = np.asarray(peripheral_channel(ch).superop)
    errs = [np.linalg.norm(np.linalg.matrix_power(s, n) - np.linalg.matrix_power(sp, n))
            for n in (10, 20, 40)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-9


def test_attractor_and_fix_examples(rng):
    xz = zoo("pauli_xz")
    assert subspace_distance(attractor_basis(xz), [np.eye(2), PAULI_Y]) < 1e-10
    assert subspace_distance(fix_basis(xz), [np.eye(2)]) < 1e-10
    rho = random_density(3, rng)
    c = contraction_channel(rho)
    assert subspace_distance(attractor_basis(c), [rho]) < 1e-10
    assert subspace_distance(fix_basis(c), [rho]) < 1e-10
    u = np.diag(np.exp(1j * np.array([0.3, np.sqrt(2)])))
    ch = unitary_channel(u)
    assert len(attractor_basis(ch)) == 4
    assert subspace_distance(fix_basis(ch), [np.diag([1.0, 0]), np.diag([0, 1.0])]) < 1e-10


@given(seeds, st.integers(min_value=2, max_value=4), st.integers(min_value=1, max_value=3))
def test_peripheral_projection_properties(seed, d, n):
    ch = random_kraus_channel(d, n, seed=seed)
    pd = peripheral_data(ch)
    pp = pd.projector_superop
    s = np.asarray(ch.superop)
    assert np.abs(pp @ pp - pp).max() < 1e-8
    assert np.abs(pp @ s - s @ pp).max() < 1e-8
    rep = is_cptp(Channel(d, superop=pp))
    assert rep.tp and rep.min_choi_eig > -1e-8
    attr = attractor_basis(ch, pdata=pd)
    for x in attr:
        y = apply_superop(s, x)
        coeffs = [np.vdot(b, y) for b in attr]
        assert np.linalg.norm(y - sum(c * b for c, b in zip(coeffs, attr))) < 1e-8
    fix = fix_basis(ch, pdata=pd)
    assert subspace_distance(attr + fix, attr) < 1e-8


def _support_data(x):
    v = support_isometry(x, 1e-8)
    return v.shape[1], v @ v.conj().T


@given(seeds)
def test_supports_of_identity_images_agree(seed):
    rng = np.random.default_rng(seed)
    ch = unfold(random_spec(rng, max_dim=6))
    pd = peripheral_data(ch)
    ra, qa = _support_data(identity_image(pd.projector_superop, ch.dim))
    rb, qb = _support_data(identity_image(fixed_point_projection(ch, pdata=pd), ch.dim))
    assert ra == rb
    assert np.abs(qa - qb).max() < 1e-8


def test_identity_image_has_maximal_rank_among_fixed_points(rng):
    ch = unfold(random_spec(rng, max_dim=7, transient=1))
    p_id = identity_image(fixed_point_projection(ch), ch.dim)
    assert np.allclose(apply_superop(np.asarray(ch.superop), p_id), p_id, atol=1e-10)
    rank = np.linalg.matrix_rank(p_id, tol=1e-8)
    for x in fix_basis(ch):
        assert np.linalg.matrix_rank(x, tol=1e-8) <= rank
    mix = sum(rng.standard_normal() * x for x in fix_basis(ch))
    assert np.linalg.matrix_rank(mix, tol=1e-8) <= rank


def test_recurrence_search():
    pd = peripheral_data(unfold(random_spec(np.random.default_rng(8), cycle_lengths=[3])))
    n, defect = recurrence_search(pd, 60)
    assert defect <= 1e-6 or n > 1
    xz = peripheral_data(zoo("pauli_xz"))
    n, defect = recurrence_search(xz, 10)
    assert n == 2 and defect < 1e-12
    ch = zoo("pauli_xz")
    s = np.linalg.matrix_power(np.asarray(ch.superop), n)
    for y in attractor_basis(ch):
        assert np.linalg.norm(unvec(s @ vec(y)) - y) < 1e-12
