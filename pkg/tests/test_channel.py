import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peripheral.channel import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    ZOO_NAMES,
    Channel,
    GKLSGenerator,
    adjoint,
    apply,
    choi_to_kraus,
    compose,
    contraction_channel,
    gkls_superop,
    identity_channel,
    is_cptp,
    markovian_channel,
    power,
    random_gkls_generator,
    random_kraus_channel,
    to_choi,
    to_superop,
    unitary_channel,
    zoo,
)
from peripheral.linalg import random_density, random_unitary, vec
from peripheral.spectral import spectrum_report

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def transpose_map(d=2):
    return Channel.from_function(lambda x: x.T, d)


def test_exactly_one_representation():
    with pytest.raises(ValueError):
        Channel(2)
    with pytest.raises(ValueError):
        Channel(2, kraus=[np.eye(2)], superop=np.eye(4))
    with pytest.raises(ValueError):
        Channel(2, kraus=[np.eye(3)])


def test_superop_examples(rng):
    assert np.allclose(to_superop(identity_channel(3)), np.eye(9))
    u = random_unitary(3, rng)
    s = to_superop(unitary_channel(u))
    assert np.allclose(s, np.kron(u.conj(), u))
    assert np.allclose(s.conj().T @ s, np.eye(9))
    w = np.linalg.eigvals(to_superop(zoo("pauli_xz")))
    assert np.allclose(sorted(w.real), [-1, 0, 0, 1], atol=1e-12)
    assert np.allclose(w.imag, 0, atol=1e-12)


def test_superop_acts_on_column_stacked_vectors(rng):
    ch = random_kraus_channel(3, 2, seed=1)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    direct = sum(a @ x @ a.conj().T for a in ch.kraus)
    assert np.allclose(to_superop(ch) @ vec(x), vec(direct))


def test_choi_examples():
    c = to_choi(identity_channel(2))
    omega = vec(np.eye(2))
    assert np.allclose(c, np.outer(omega, omega))
    assert np.linalg.matrix_rank(c) == 1
    d = 3
    c = to_choi(contraction_channel(np.eye(d) / d))
    assert np.allclose(c, np.eye(d * d) / d)


@given(seeds, st.integers(min_value=2, max_value=4), st.integers(min_value=1, max_value=3))
def test_choi_kraus_roundtrip(seed, d, n):
    ch = random_kraus_channel(d, n, seed=seed)
    back = Channel(d, kraus=choi_to_kraus(to_choi(ch)))
    assert np.abs(to_superop(back) - to_superop(ch)).max() < 1e-10
    via_choi = Channel(d, choi=to_choi(ch))
    assert np.allclose(via_choi.superop, ch.superop, atol=1e-12)


def test_choi_to_kraus_rejects_non_positive():
    with pytest.raises(ValueError):
        choi_to_kraus(to_choi(transpose_map()))


def test_is_cptp_examples():
    rep = is_cptp(identity_channel(2))
    assert rep.cp and rep.tp
    rep = is_cptp(transpose_map())
    assert not rep.cp and rep.tp
    assert abs(rep.min_choi_eig + 1) < 1e-12
    rep = is_cptp(zoo("wolf_indivisible"))
    assert rep.cp and rep.tp
    rep = is_cptp(Channel(2, kraus=[np.diag([1.0, 0.5])]))
    assert rep.cp and not rep.tp


def test_apply_examples(rng):
    ch = zoo("pauli_xz")
    assert np.allclose(apply(ch, PAULI_Y), -PAULI_Y)
    assert np.allclose(apply(ch, np.eye(2)), np.eye(2))
    assert np.allclose(apply(zoo("wolf_indivisible"), np.eye(2)), np.eye(2))
    rho = random_density(3, rng)
    x = random_density(3, rng)
    assert np.allclose(apply(contraction_channel(rho), x), rho)
    with pytest.raises(ValueError):
        apply(ch, np.eye(3))


def test_compose_power_adjoint_examples(rng):
    assert np.allclose(power(identity_channel(2), 7).superop, np.eye(4))
    c = contraction_channel(random_density(3, rng))
    assert np.allclose(power(c, 2).superop, c.superop)
    u = random_unitary(3, rng)
    assert np.allclose(adjoint(unitary_channel(u)).superop, unitary_channel(u.conj().T).superop)
    with pytest.raises(ValueError):
        compose(identity_channel(2), identity_channel(3))


@given(seeds)
def test_compose_is_superoperator_product(seed):
    a = random_kraus_channel(3, 2, seed=seed)
    b = random_kraus_channel(3, 3, seed=seed + 1)
    assert np.allclose(compose(a, b).superop, np.asarray(a.superop) @ b.superop, atol=1e-10)
    x = np.random.default_rng(seed).standard_normal((3, 3))
    assert np.allclose(apply(compose(a, b), x), apply(a, apply(b, x)))


@given(seeds)
def test_adjoint_is_hs_adjoint_and_unital(seed):
    rng = np.random.default_rng(seed)
    ch = random_kraus_channel(3, 2, seed=seed)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    b = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    lhs = np.vdot(a, apply(ch, b))
    rhs = np.vdot(apply(adjoint(ch), a), b)
    assert abs(lhs - rhs) < 1e-10
    assert np.allclose(apply(adjoint(ch), np.eye(3)), np.eye(3), atol=1e-10)
    # the superoperator route agrees with the Kraus route
    sup = Channel(3, superop=ch.superop)
    assert np.allclose(adjoint(sup).superop, adjoint(ch).superop, atol=1e-12)


def test_gkls_examples(rng):
    g = GKLSGenerator(np.zeros((2, 2)), ())
    assert np.allclose(gkls_superop(g), 0)
    assert np.allclose(markovian_channel(g).superop, np.eye(4))
    u = random_unitary(2, rng)
    g = GKLSGenerator(np.zeros((2, 2)), (u,))
    lind = gkls_superop(g)
    assert np.allclose(lind @ vec(np.eye(2)), 0)
    assert np.allclose(apply(markovian_channel(g), np.eye(2)), np.eye(2))
    with pytest.raises(ValueError):
        GKLSGenerator(np.array([[0, 1], [0, 0]]), ())


def test_gkls_superop_matches_direct_formula(rng):
    g = random_gkls_generator(3, 2, seed=5)
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    h = g.hamiltonian
    direct = -1j * (h @ x - x @ h)
    for a in g.noise_ops:
        ada = a.conj().T @ a
        direct += a @ x @ a.conj().T - 0.5 * (ada @ x + x @ ada)
    assert np.allclose(gkls_superop(g) @ vec(x), vec(direct))


@given(seeds, st.integers(min_value=2, max_value=4))
def test_markovian_channels_are_cptp(seed, d):
    ch = markovian_channel(random_gkls_generator(d, 2, seed=seed))
    rep = is_cptp(ch)
    assert rep.cp and rep.tp


def test_zoo_examples(rng):
    det = np.linalg.det(np.asarray(zoo("wolf_indivisible").superop))
    assert abs(det + 1 / 27) < 1e-12
    xz = zoo("pauli_xz")
    assert np.allclose(apply(xz, PAULI_Y), -PAULI_Y)
    rho = random_density(3, rng)
    w = np.linalg.eigvals(zoo("contraction", {"rho": rho}).superop)
    assert np.sum(np.abs(w - 1) < 1e-10) == 1 and np.sum(np.abs(w) < 1e-10) == 8
    with pytest.raises(ValueError):
        zoo("amplitude_damping")


def test_pauli_channel_explicit_kraus():
    ch = zoo("pauli_xz")
    x = np.array([[1, 2j], [3, 4]])
    assert np.allclose(apply(ch, x), 0.5 * (PAULI_X @ x @ PAULI_X + PAULI_Z @ x @ PAULI_Z))


@pytest.mark.parametrize("name", ZOO_NAMES)
def test_every_zoo_channel_is_cptp_and_spectrally_sane(name):
    params = {"random_kraus": {"dim": 3, "n_kraus": 2},
              "random_gkls": {"dim": 3, "n_ops": 2},
              "contraction": {"dim": 3, "random": True}}.get(name, {"dim": 3})
    ch = zoo(name, params, seed=3)
    rep = is_cptp(ch)
    assert rep.cp and rep.tp
    sr = spectrum_report(ch)
    assert sr.axioms_hold(1e-8)


@given(seeds, st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=4))
def test_random_kraus_channels_are_cptp(seed, d, n):
    ch = random_kraus_channel(d, n, seed=seed)
    rep = is_cptp(ch)
    assert rep.cp and rep.tp
    assert spectrum_report(ch).axioms_hold(1e-8)
