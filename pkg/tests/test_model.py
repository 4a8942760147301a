import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kerrcoupler.fock import TruncatedSpace
from kerrcoupler.model import (
    BellSpec,
    ModelParams,
    WernerSpec,
    bell_ket,
    build_hamiltonian,
    coupling_chain,
    werner_density,
)

SPACE = TruncatedSpace(5, 5)


def H_elem(H, bra, ket):
    return H[SPACE.index(*bra), SPACE.index(*ket)]


def test_hamiltonian_examples():
    H = build_hamiltonian(ModelParams(1.0, 1.0, 0.6), SPACE)
    assert H_elem(H, (1, 1), (0, 0)) == pytest.approx(0.6)
    assert H_elem(H, (2, 2), (2, 2)) == pytest.approx(2.0)
    assert H_elem(H, (2, 2), (1, 1)) == pytest.approx(1.2)


def test_hamiltonian_diagonal_and_hermiticity():
    p = ModelParams(0.7, 1.3, 0.6)
    H = build_hamiltonian(p, SPACE)
    assert np.max(np.abs(H - H.conj().T)) <= 1e-12
    for n_a, n_b in SPACE.labels():
        expected = 0.5 * p.chi_a * n_a * (n_a - 1) + 0.5 * p.chi_b * n_b * (n_b - 1)
        assert H_elem(H, (n_a, n_b), (n_a, n_b)).real == pytest.approx(expected, abs=1e-12)


def test_complex_pump_enters_as_g_and_conjugate():
    g = 0.6 * np.exp(0.4j)
    H = build_hamiltonian(ModelParams(g=g), SPACE)
    assert H_elem(H, (1, 1), (0, 0)) == pytest.approx(g)
    assert H_elem(H, (0, 0), (1, 1)) == pytest.approx(np.conj(g))


def test_off_diagonal_support_follows_pair_ladder():
    H = build_hamiltonian(ModelParams(), SPACE)
    for m in SPACE.labels():
        for n in SPACE.labels():
            if m != n and abs(H_elem(H, m, n)) > 0:
                assert abs(m[0] - n[0]) == 1 and m[0] - n[0] == m[1] - n[1]


def test_bell_examples():
    psi = bell_ket(BellSpec("B1", 1, "plus"), SPACE)
    r = 1 / np.sqrt(2)
    assert psi[SPACE.index(0, 0)] == pytest.approx(r)
    assert psi[SPACE.index(1, 1)] == pytest.approx(r)
    psi = bell_ket(BellSpec("B2", 2, "minus"), SPACE)
    assert psi[SPACE.index(0, 2)] == pytest.approx(r)
    assert psi[SPACE.index(2, 0)] == pytest.approx(-r)
    assert np.count_nonzero(psi) == 2


@pytest.mark.parametrize("family", ["B1", "B2"])
@pytest.mark.parametrize("i", [1, 2])
def test_bell_norm_and_sign_orthogonality(family, i):
    plus = bell_ket(BellSpec(family, i, "plus"), SPACE)
    minus = bell_ket(BellSpec(family, i, "minus"), SPACE)
    assert abs(np.linalg.norm(plus) - 1) <= 1e-15
    assert abs(np.vdot(plus, minus)) < 1e-15


def test_bell_spec_validation():
    with pytest.raises(ValueError):
        BellSpec("B1", 3)
    with pytest.raises(ValueError):
        BellSpec("B3", 1)


def test_werner_pure_and_mixed_limits():
    spec = BellSpec("B1", 1)
    rho1 = werner_density(WernerSpec(1.0, spec), SPACE)
    assert np.trace(rho1 @ rho1).real == pytest.approx(1.0)
    rho0 = werner_density(WernerSpec(0.0, spec), SPACE)
    assert np.trace(rho0 @ rho0).real == pytest.approx(0.25)
    support = [SPACE.index(*x) for x in [(0, 0), (0, 1), (1, 0), (1, 1)]]
    assert np.allclose(np.diag(rho0)[support], 0.25)
    assert np.count_nonzero(rho0) == 4


def _pt_by_loops(m4):
    # Explicit index form: <i j|X^TA|k l> = <k j|X|i l>, qubit order (a, b).
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    out[2 * i + j, 2 * k + l] = m4[2 * k + j, 2 * i + l]
    return out


def test_werner_half_negativity_from_explicit_pt():
    rho = werner_density(WernerSpec(0.5, BellSpec("B1", 1)), SPACE)
    idx = [SPACE.index(*x) for x in [(0, 0), (0, 1), (1, 0), (1, 1)]]
    lam = np.linalg.eigvalsh(_pt_by_loops(rho[np.ix_(idx, idx)]))
    # Werner PT spectrum: (1+s)/4 three times and (1-3s)/4 once.
    assert np.allclose(np.sort(lam), [(1 - 1.5) / 4] + [(1 + 0.5) / 4] * 3, atol=1e-15)
    assert 2 * -lam[lam < 0].sum() == pytest.approx(0.25, abs=1e-15)


@given(st.floats(0, 1), st.sampled_from(["B1", "B2"]), st.sampled_from([1, 2]), st.sampled_from(["plus", "minus"]))
def test_werner_is_a_state_and_affine_in_s(s, family, i, sign):
    bell = BellSpec(family, i, sign)
    rho = werner_density(WernerSpec(s, bell), SPACE)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-15)
    assert np.linalg.eigvalsh(rho)[0] >= -1e-12
    r0 = werner_density(WernerSpec(0.0, bell), SPACE)
    r1 = werner_density(WernerSpec(1.0, bell), SPACE)
    assert np.max(np.abs(rho - ((1 - s) * r0 + s * r1))) <= 1e-15


def test_werner_rejects_bad_weight():
    with pytest.raises(ValueError):
        WernerSpec(1.2)
    with pytest.raises(ValueError):
        WernerSpec(-0.1)


def test_coupling_chain_examples():
    assert coupling_chain((0, 0), SPACE) == [(k, k) for k in range(6)]
    assert coupling_chain((0, 1), TruncatedSpace(3, 3)) == [(0, 1), (1, 2), (2, 3)]
    assert coupling_chain((1, 0), TruncatedSpace(2, 2)) == [(1, 0), (2, 1)]


def test_chain_orbits_are_closed_under_the_hamiltonian():
    H = build_hamiltonian(ModelParams(), SPACE)
    for start in [(0, 0), (0, 1), (1, 0), (0, 3)]:
        chain = {SPACE.index(*x) for x in coupling_chain(start, SPACE)}
        outside = [k for k in range(SPACE.dim) if k not in chain]
        assert np.all(H[np.ix_(outside, sorted(chain))] == 0)
